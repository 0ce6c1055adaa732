use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;

use super::manifest::ClassManifest;
use super::obj::{parse_mesh, write_mesh};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, MeshIndex, Triangle};
use crate::taxonomy::TaxonomyId;

/// One CAD object: its mesh index and semantic class.
#[derive(Debug, Clone)]
pub struct ClassedMesh {
    pub object_id: u32,
    pub name: String,
    pub class_id: u8,
    pub index: MeshIndex,
    pub bounds: Aabb,
}

/// The classed objects of a CAD model, ids dense from zero.
#[derive(Debug, Clone)]
pub struct SceneModel {
    pub taxonomy: TaxonomyId,
    pub objects: Vec<ClassedMesh>,
}

impl SceneModel {
    /// Assembles a scene from `(name, class, triangles)` triples; object ids
    /// follow the input order.
    pub fn from_meshes<I>(taxonomy: TaxonomyId, meshes: I) -> Result<SceneModel>
    where
        I: IntoIterator<Item = (String, u8, Vec<Triangle>)>,
    {
        let tax = taxonomy.taxonomy();
        let mut objects = Vec::new();
        for (i, (name, class_id, tris)) in meshes.into_iter().enumerate() {
            if class_id as usize >= tax.len() {
                return Err(Error::ClassUnknown { class: class_id.to_string(), taxonomy: taxonomy.to_string() });
            }
            let index = MeshIndex::build(tris)?;
            objects.push(ClassedMesh { object_id: i as u32, name, class_id, bounds: index.bounds(), index });
        }
        if objects.is_empty() {
            return Err(Error::EmptyScene);
        }
        Ok(SceneModel { taxonomy, objects })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn object(&self, id: u32) -> Option<&ClassedMesh> {
        self.objects.iter().find(|o| o.object_id == id)
    }

    pub fn bounds(&self) -> Aabb {
        self.objects.iter().fold(Aabb::EMPTY, |b, o| b.union(o.bounds))
    }
}

fn mesh_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(Error::io_at(dir))? {
        let path = entry.map_err(Error::io_at(dir))?.path();
        let is_obj = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj"));
        if is_obj && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Loads every `.obj` file of `dir` as one object, classed through `manifest`.
///
/// Object ids follow lexicographic file-name order, so the result does not
/// depend on directory enumeration order.
pub fn load_scene(dir: &Path, manifest: &ClassManifest, taxonomy: TaxonomyId) -> Result<SceneModel> {
    let tax = taxonomy.taxonomy();
    manifest.check_classes(tax)?;
    let files = mesh_files(dir)?;
    let named: Vec<(PathBuf, String, u8)> = files
        .into_iter()
        .map(|path| {
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let class = manifest.classify(&name, tax)?;
            Ok((path, name, class))
        })
        .collect::<Result<_>>()?;

    let meshes: Vec<(String, u8, Vec<Triangle>)> = named
        .into_par_iter()
        .map(|(path, name, class)| {
            let file = File::open(&path).map_err(Error::io_at(&path))?;
            let mesh = parse_mesh(BufReader::new(file)).map_err(|e| match e {
                Error::Parse { line, message } => {
                    Error::Parse { line, message: format!("{}: {message}", path.display()) }
                }
                other => other,
            })?;
            if mesh.degenerate_dropped > 0 {
                warn!("{}: dropped {} degenerate triangles", path.display(), mesh.degenerate_dropped);
            }
            if mesh.ignored_records > 0 {
                warn!("{}: ignored {} unsupported records", path.display(), mesh.ignored_records);
            }
            Ok((name, class, mesh.triangles))
        })
        .collect::<Result<_>>()?;
    SceneModel::from_meshes(taxonomy, meshes)
}

/// File-name fragment for a class, e.g. `exit_sign`.
pub fn class_slug(name: &str) -> String {
    name.to_ascii_lowercase().split_whitespace().collect::<Vec<_>>().join("_")
}

/// Writes each object as `<name>.obj` under `dir` and returns a manifest
/// mapping every object name to its class.
pub fn write_scene(scene: &SceneModel, dir: &Path) -> Result<ClassManifest> {
    fs::create_dir_all(dir).map_err(Error::io_at(dir))?;
    let tax = scene.taxonomy.taxonomy();
    let mut manifest = ClassManifest::default();
    for o in &scene.objects {
        let path = dir.join(format!("{}.obj", o.name));
        let file = File::create(&path).map_err(Error::io_at(&path))?;
        write_mesh(o.index.triangles(), BufWriter::new(file))?;
        manifest.push(o.name.clone(), tax.name(o.class_id));
    }
    Ok(manifest)
}
