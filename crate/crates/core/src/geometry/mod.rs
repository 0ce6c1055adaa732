//! Exact point-to-mesh distance queries.
//!
//! [`MeshIndex`] answers unsigned and signed distance queries against a
//! triangle mesh through a bounding-volume hierarchy. Distances are signed
//! with angle-weighted pseudonormals at the nearest face, edge or vertex,
//! which is only meaningful for watertight meshes; open meshes report
//! unsigned distances.

mod aabb;
mod index;
pub mod shapes;
mod triangle;
mod vec3;

pub use aabb::Aabb;
pub use index::{ClosestHit, MeshIndex, ON_SURFACE_EPS};
pub use triangle::{Feature, Triangle, MIN_TRIANGLE_AREA};
pub use vec3::Vec3;
