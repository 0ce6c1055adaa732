#![allow(dead_code)]

use cadlabel::cloud::{LabeledCloud, PointRecord};
use cadlabel::geometry::shapes;
use cadlabel::ingest::SceneModel;
use cadlabel::{Aabb, TaxonomyId, Triangle, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_vec<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Vec3 {
    Vec3::new(rng.random_range(lo..hi), rng.random_range(lo..hi), rng.random_range(lo..hi))
}

/// Möller-Trumbore; returns the ray parameter of a hit.
fn ray_hit(o: Vec3, d: Vec3, t: &Triangle) -> Option<f64> {
    let e1 = t.b - t.a;
    let e2 = t.c - t.a;
    let h = d.cross(e2);
    let det = e1.dot(h);
    if det.abs() < 1e-14 {
        return None;
    }
    let s = o - t.a;
    let u = s.dot(h) / det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = d.dot(q) / det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) / det;
    (t > 0.0).then_some(t)
}

/// Inside test by crossing parity, voting over three skew rays so that a
/// ray grazing an edge cannot flip the answer.
pub fn ray_parity_inside(tris: &[Triangle], p: Vec3) -> bool {
    let dirs = [
        Vec3::new(0.5773, 0.5774, 0.5775),
        Vec3::new(-0.2113, 0.7887, -0.5773),
        Vec3::new(0.8017, -0.2673, 0.5345),
    ];
    let votes = dirs
        .iter()
        .filter(|&&d| tris.iter().filter(|t| ray_hit(p, d, t).is_some()).count() % 2 == 1)
        .count();
    votes >= 2
}

/// Closed box with one face (two triangles) removed.
pub fn open_box(b: &Aabb) -> Vec<Triangle> {
    let mut t = shapes::box_mesh(b);
    t.truncate(10);
    t
}

pub fn bumpy_sphere(seed: u64, center: Vec3, radius: f64, stacks: usize, slices: usize) -> Vec<Triangle> {
    let mut r = rng(seed);
    shapes::uv_sphere(center, stacks, slices, |_| radius * (1.0 + 0.1 * (r.random::<f64>() - 0.5)))
}

/// Random scene of boxes, bumpy spheres and open boxes with random classes;
/// objects may overlap.
pub fn random_scene(seed: u64, objects: usize) -> SceneModel {
    let mut r = rng(seed);
    let meshes: Vec<(String, u8, Vec<Triangle>)> = (0..objects)
        .map(|i| {
            let class = r.random_range(0..18u8);
            let c = rand_vec(&mut r, 0.0, 4.0);
            let h = Vec3::new(r.random_range(0.02..1.0), r.random_range(0.02..1.0), r.random_range(0.02..1.0));
            let b = Aabb::new(c - h, c + h);
            let tris = match r.random_range(0..10) {
                0 => bumpy_sphere(r.random(), c, h.x.max(0.1), 6, 8),
                1 => open_box(&b),
                _ => shapes::box_mesh(&b),
            };
            (format!("o{i:02}"), class, tris)
        })
        .collect();
    SceneModel::from_meshes(TaxonomyId::Gold, meshes).unwrap()
}

/// Points spread over the scene bounds plus points jittered around object
/// surfaces, where the labeling decisions are close.
pub fn cloud_around(scene: &SceneModel, seed: u64, n: usize) -> LabeledCloud {
    let mut r = rng(seed);
    let b = scene.bounds().dilate(0.3);
    let mut cloud = LabeledCloud::new(scene.taxonomy, "random");
    for i in 0..n {
        let p = if i % 2 == 0 {
            Vec3::new(
                r.random_range(b.min.x..b.max.x),
                r.random_range(b.min.y..b.max.y),
                r.random_range(b.min.z..b.max.z),
            )
        } else {
            let o = &scene.objects[r.random_range(0..scene.len())];
            let tris = o.index.triangles();
            let t = &tris[r.random_range(0..tris.len())];
            let (u, v): (f64, f64) = (r.random(), r.random());
            let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
            let on = t.a + (t.b - t.a) * u + (t.c - t.a) * v;
            on + rand_vec(&mut r, -0.2, 0.2)
        };
        cloud.push(PointRecord::at(p));
    }
    cloud
}

pub fn random_cloud(seed: u64, n: usize) -> LabeledCloud {
    let mut r = rng(seed);
    let taxonomy = if r.random() { TaxonomyId::Gold } else { TaxonomyId::Silver };
    let k = taxonomy.taxonomy().len() as u8;
    let mut cloud = LabeledCloud::new(taxonomy, "random");
    let scale = 10f64.powi(r.random_range(-2..7));
    for _ in 0..n {
        let label = |r: &mut ChaCha8Rng| if r.random_range(0..10) == 0 { 255 } else { r.random_range(0..k) };
        cloud.push(PointRecord {
            position: rand_vec(&mut r, -scale, scale),
            rgb: [r.random(), r.random(), r.random()],
            intensity: r.random::<f32>(),
            real_label: label(&mut r),
            pseudo_label: label(&mut r),
        });
    }
    cloud
}

/// Per-class IoU, recall, OA, AA by direct counting over label pairs.
pub struct NaiveScores {
    pub iou: Vec<Option<f64>>,
    pub recall: Vec<Option<f64>>,
    pub oa: f64,
    pub aa: f64,
    pub miou: f64,
}

pub fn naive_scores(reference: &[u8], predicted: &[u8], k: usize) -> NaiveScores {
    let mut iou = Vec::new();
    let mut recall = Vec::new();
    for c in 0..k as u8 {
        let mut inter = 0u64;
        let mut union = 0u64;
        let mut truth = 0u64;
        for (&r, &p) in reference.iter().zip(predicted) {
            if r == c && p == c {
                inter += 1;
            }
            if r == c || p == c {
                union += 1;
            }
            if r == c {
                truth += 1;
            }
        }
        iou.push((union > 0).then(|| inter as f64 / union as f64));
        recall.push((truth > 0).then(|| inter as f64 / truth as f64));
    }
    let hits = reference.iter().zip(predicted).filter(|(r, p)| r == p).count();
    let mean = |v: &[Option<f64>]| {
        let d: Vec<f64> = v.iter().flatten().copied().collect();
        d.iter().sum::<f64>() / d.len() as f64
    };
    NaiveScores {
        oa: hits as f64 / reference.len() as f64,
        aa: mean(&recall),
        miou: mean(&iou),
        iou,
        recall,
    }
}
