//! Synthetic rooms: box meshes for the building shell and placed objects,
//! and a labeled point cloud sampled from their surfaces.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{LabeledCloud, PointRecord};
use crate::error::{Error, Result};
use crate::geometry::{shapes, Aabb, Triangle, Vec3, ON_SURFACE_EPS};
use crate::ingest::{class_slug, SceneModel};
use crate::taxonomy::TaxonomyId;

/// One axis-aligned box object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub class: String,
    pub min: [f64; 3],
    pub max: [f64; 3],
}

/// Room description. The interior spans `[0, extents]`; walls, slab and
/// covering of `wall_thickness` surround it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomSpec {
    pub extents: [f64; 3],
    pub wall_thickness: f64,
    /// Points per square metre of exposed surface.
    pub density: f64,
    pub sigma: f64,
    pub outliers: usize,
    pub seed: u64,
    pub taxonomy: TaxonomyId,
    pub objects: Vec<Placement>,
}

impl Default for RoomSpec {
    fn default() -> Self {
        RoomSpec {
            extents: [6.0, 4.0, 3.0],
            wall_thickness: 0.2,
            density: 500.0,
            sigma: 0.005,
            outliers: 500,
            seed: 42,
            taxonomy: TaxonomyId::Gold,
            objects: Vec::new(),
        }
    }
}

impl RoomSpec {
    pub fn parse(text: &str) -> Result<RoomSpec> {
        let spec: RoomSpec = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<RoomSpec> {
        let text = std::fs::read_to_string(path).map_err(Error::io_at(path))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("room spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !self.extents.iter().all(|e| e.is_finite() && *e > 0.0) {
            return bad(format!("extents must be positive, got {:?}", self.extents));
        }
        if !(self.wall_thickness.is_finite() && self.wall_thickness > 0.0) {
            return bad(format!("wall_thickness must be positive, got {}", self.wall_thickness));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return bad(format!("density must be positive, got {}", self.density));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad(format!("sigma must be non-negative, got {}", self.sigma));
        }
        Ok(())
    }

    /// The furnished room used by examples and tests.
    pub fn standard() -> RoomSpec {
        let p = |class: &str, min: [f64; 3], max: [f64; 3]| Placement { class: class.into(), min, max };
        RoomSpec {
            objects: vec![
                p("Door", [2.0, -0.2, 0.0], [2.9, 0.05, 2.1]),
                p("Window", [6.0 - 0.05, 1.0, 0.9], [6.2, 2.5, 2.2]),
                p("Furniture", [0.5, 2.5, 0.0], [2.1, 3.3, 0.75]),
                p("Furniture", [4.0, 0.5, 0.0], [4.5, 1.0, 0.45]),
                p("Lamp", [2.8, 1.8, 2.85], [3.2, 2.2, 3.0]),
                p("Heater", [6.0 - 0.1, 2.7, 0.15], [6.0, 3.7, 0.75]),
                p("Column", [3.0, 3.6, 0.0], [3.4, 4.0, 3.0]),
                p("Clutter", [1.0, 2.8, 0.75], [1.3, 3.0, 0.95]),
            ],
            ..RoomSpec::default()
        }
    }
}

fn room_boxes(spec: &RoomSpec) -> Vec<(&'static str, Aabb)> {
    let [x, y, z] = spec.extents;
    let t = spec.wall_thickness;
    let v = Vec3::new;
    vec![
        ("Slab", Aabb::new(v(-t, -t, -t), v(x + t, y + t, 0.0))),
        ("Covering", Aabb::new(v(-t, -t, z), v(x + t, y + t, z + t))),
        ("Wall", Aabb::new(v(-t, -t, 0.0), v(0.0, y + t, z))),
        ("Wall", Aabb::new(v(x, -t, 0.0), v(x + t, y + t, z))),
        ("Wall", Aabb::new(v(0.0, -t, 0.0), v(x, 0.0, z))),
        ("Wall", Aabb::new(v(0.0, y, 0.0), v(x, y + t, z))),
    ]
}

/// Builds the room shell (slab, covering, four walls) followed by the placed
/// objects. Objects are named `NNN_class` so that file-name order equals id
/// order.
pub fn build_scene(spec: &RoomSpec) -> Result<SceneModel> {
    spec.validate()?;
    let tax = spec.taxonomy.taxonomy();
    let [x, y, z] = spec.extents;
    let t = spec.wall_thickness;
    let envelope = Aabb::new(Vec3::splat(-t), Vec3::new(x + t, y + t, z + t)).dilate(1e-9);

    let mut boxes: Vec<(u8, Aabb)> = Vec::new();
    for (class, b) in room_boxes(spec) {
        boxes.push((tax.resolve(class)?, b));
    }
    for (i, o) in spec.objects.iter().enumerate() {
        let class = tax.resolve(&o.class)?;
        let b = Aabb::new(Vec3::from(o.min), Vec3::from(o.max));
        if !b.min.is_finite() || !b.max.is_finite() || !envelope.contains_box(&b) {
            return Err(Error::OverlapError { name: format!("object {i} ({})", o.class) });
        }
        boxes.push((class, b));
    }
    let meshes = boxes.into_iter().enumerate().map(|(id, (class, b))| {
        (format!("{id:03}_{}", class_slug(tax.name(class))), class, shapes::box_mesh(&b))
    });
    SceneModel::from_meshes(spec.taxonomy, meshes)
}

/// Intensity in (0, 1] reported for points of a class.
pub fn class_intensity(class_id: u8) -> f32 {
    0.15 + 0.045 * (class_id % 19) as f32
}

/// Display colour of a class.
pub fn class_color(class_id: u8) -> [u8; 3] {
    const PALETTE: [[u8; 3]; 18] = [
        [174, 199, 232], [255, 127, 14], [152, 223, 138], [214, 39, 40],
        [44, 160, 44], [31, 119, 180], [255, 152, 150], [148, 103, 189],
        [197, 176, 213], [140, 86, 75], [196, 156, 148], [227, 119, 194],
        [247, 182, 210], [127, 127, 127], [199, 199, 199], [188, 189, 34],
        [219, 219, 141], [23, 190, 207],
    ];
    PALETTE[class_id as usize % PALETTE.len()]
}

fn sub_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform point on a triangle.
pub fn sample_triangle<R: Rng + ?Sized>(t: &Triangle, rng: &mut R) -> Vec3 {
    let r1: f64 = rng.random::<f64>().sqrt();
    let r2: f64 = rng.random();
    t.a * (1.0 - r1) + t.b * (r1 * (1.0 - r2)) + t.c * (r1 * r2)
}

/// True when `p` lies on or inside an object other than `own`.
fn buried(scene: &SceneModel, own: usize, p: Vec3) -> bool {
    scene.objects.iter().enumerate().any(|(i, o)| {
        i != own && o.bounds.dilate(1e-9).contains(p) && o.index.signed_distance(p) <= ON_SURFACE_EPS
    })
}

/// Surface area of object `own` not buried in another object, estimated
/// with `samples` uniform draws. Exact for the axis-aligned rooms built here
/// up to sampling error.
pub fn exposed_area(scene: &SceneModel, own: usize, samples: usize, seed: u64) -> f64 {
    let tris = scene.objects[own].index.triangles();
    let total: f64 = tris.iter().map(Triangle::area).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cdf = area_cdf(tris);
    let kept = (0..samples)
        .filter(|_| {
            let t = &tris[pick(&cdf, rng.random::<f64>() * total)];
            !buried(scene, own, sample_triangle(t, &mut rng))
        })
        .count();
    total * kept as f64 / samples as f64
}

fn area_cdf(tris: &[Triangle]) -> Vec<f64> {
    tris.iter()
        .scan(0.0, |acc, t| {
            *acc += t.area();
            Some(*acc)
        })
        .collect()
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Samples the surfaces of `scene` at `spec.density` points per square
/// metre, then adds `spec.outliers` Clutter points uniform in the room
/// interior.
///
/// Surface samples that land on or inside another object are discarded, so
/// contact faces (a wall standing on the slab) carry no points, as in a
/// real scan. Each object draws from its own seeded stream, which makes the
/// output independent of thread count.
pub fn sample_cloud(scene: &SceneModel, spec: &RoomSpec) -> Result<LabeledCloud> {
    spec.validate()?;
    let tax = scene.taxonomy.taxonomy();
    let noise = Normal::new(0.0, spec.sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let parts: Vec<Vec<PointRecord>> = scene
        .objects
        .par_iter()
        .enumerate()
        .map(|(i, o)| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(spec.seed, i as u64));
            let tris = o.index.triangles();
            let cdf = area_cdf(tris);
            let total = *cdf.last().unwrap_or(&0.0);
            let lambda = spec.density * total;
            let mut n = lambda.floor() as usize;
            if rng.random::<f64>() < lambda.fract() {
                n += 1;
            }
            let template = PointRecord {
                position: Vec3::ZERO,
                rgb: class_color(o.class_id),
                intensity: class_intensity(o.class_id),
                real_label: o.class_id,
                pseudo_label: crate::taxonomy::UNLABELED,
            };
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let t = &tris[pick(&cdf, rng.random::<f64>() * total)];
                let p = sample_triangle(t, &mut rng);
                let offset = Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
                if buried(scene, i, p) {
                    continue;
                }
                out.push(PointRecord { position: p + offset, ..template });
            }
            out
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(spec.seed, u64::MAX));
    let [x, y, z] = spec.extents;
    let clutter = tax.clutter_id;
    let outliers = (0..spec.outliers).map(|_| PointRecord {
        position: Vec3::new(rng.random::<f64>() * x, rng.random::<f64>() * y, rng.random::<f64>() * z),
        rgb: class_color(clutter),
        intensity: class_intensity(clutter),
        real_label: clutter,
        pseudo_label: crate::taxonomy::UNLABELED,
    });

    let n = parts.iter().map(Vec::len).sum::<usize>() + spec.outliers;
    let mut cloud = LabeledCloud::with_capacity(scene.taxonomy, "synthetic", n);
    for p in parts.into_iter().flatten().chain(outliers) {
        cloud.push(p);
    }
    Ok(cloud)
}
