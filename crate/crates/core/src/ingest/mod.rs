//! Loading classed CAD objects from per-object mesh files.

mod manifest;
mod obj;
mod scene;

pub use manifest::{glob_match, ClassManifest};
pub use obj::{parse_mesh, write_mesh, ObjMesh};
pub use scene::{class_slug, load_scene, write_scene, ClassedMesh, SceneModel};
