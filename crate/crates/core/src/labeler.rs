//! Pseudo-labeling of a point cloud by alignment against a classed scene.
//!
//! Every point collects candidates from the objects whose τ-dilated box
//! contains it: an object is a candidate when the signed distance from the
//! point to its mesh is at most τ of the object's class. Candidates are
//! ranked by signed distance (the deepest interior first, then the nearest
//! exterior) and then by object id; the first one gives the label. Points
//! without candidates become Clutter.
//!
//! The ranking is a total order, so the result does not depend on object
//! order, point order or how the work is split across threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::cloud::{LabeledCloud, PointGrid};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::ingest::{ClassedMesh, SceneModel};
use crate::taxonomy::{Taxonomy, TaxonomyId};

/// Extra dilation on top of τ so boxes stay conservative under rounding.
const CULL_SLACK: f64 = 1e-9;

/// Default point-grid cell used for culling, meters.
pub const DEFAULT_GRID_CELL: f64 = 0.25;

/// Per-class exterior distance thresholds, meters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdPolicy {
    pub default_tau: f64,
    pub overrides: BTreeMap<u8, f64>,
}

impl ThresholdPolicy {
    pub fn uniform(tau: f64) -> Result<Self> {
        let p = ThresholdPolicy { default_tau: tau, overrides: BTreeMap::new() };
        p.validate()?;
        Ok(p)
    }

    pub fn tau(&self, class_id: u8) -> f64 {
        self.overrides.get(&class_id).copied().unwrap_or(self.default_tau)
    }

    pub fn set(&mut self, class_id: u8, tau: f64) -> Result<()> {
        check_tau(tau)?;
        self.overrides.insert(class_id, tau);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        check_tau(self.default_tau)?;
        self.overrides.values().try_for_each(|&t| check_tau(t))
    }

    /// Policy used for a taxonomy's published thresholds.
    pub fn for_taxonomy(id: TaxonomyId) -> Self {
        match id {
            TaxonomyId::Gold => gold_policy(),
            TaxonomyId::Silver => silver_policy(),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("threshold {tau} must be a finite distance >= 0")))
    }
}

fn policy(tax: &Taxonomy, wide: &[(&str, f64)]) -> ThresholdPolicy {
    let overrides = wide
        .iter()
        .map(|&(name, tau)| (tax.class_id(name).expect("class in taxonomy"), tau))
        .collect();
    ThresholdPolicy { default_tau: 0.04, overrides }
}

/// 4 cm, except Door, Furniture and Window at 10 cm.
pub fn gold_policy() -> ThresholdPolicy {
    policy(crate::taxonomy::gold(), &[("Door", 0.10), ("Furniture", 0.10), ("Window", 0.10)])
}

/// 4 cm, except Door at 10 cm and Window at 15 cm.
pub fn silver_policy() -> ThresholdPolicy {
    policy(crate::taxonomy::silver(), &[("Door", 0.10), ("Window", 0.15)])
}

/// A legal (object, distance) pairing for one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelCandidate {
    pub class_id: u8,
    pub distance: f64,
    pub object_id: u32,
}

impl LabelCandidate {
    const NONE: LabelCandidate = LabelCandidate { class_id: 0, distance: f64::INFINITY, object_id: u32::MAX };

    /// Whether `self` ranks before `other`.
    #[inline]
    pub fn beats(&self, other: &LabelCandidate) -> bool {
        self.distance < other.distance || (self.distance == other.distance && self.object_id < other.object_id)
    }

    #[inline]
    fn is_some(&self) -> bool {
        self.object_id != u32::MAX
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectTiming {
    pub object_id: u32,
    pub name: String,
    pub class_id: u8,
    pub class_name: String,
    pub elapsed_s: f64,
    /// Points inside the dilated box whose distance was computed.
    pub candidates: u64,
    /// Points whose final label came from this object.
    pub claimed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelReport {
    pub taxonomy: TaxonomyId,
    pub points: u64,
    pub objects: Vec<ObjectTiming>,
    pub class_counts: Vec<u64>,
    /// Finite points that no object claimed.
    pub clutter_fallback: u64,
    /// Points with non-finite coordinates, labeled Clutter.
    pub non_finite: u64,
    pub total_elapsed_s: f64,
}

impl LabelReport {
    /// Elapsed time and claimed points summed per class, in class order;
    /// classes without objects are omitted.
    pub fn class_timing(&self) -> Vec<(u8, f64, u64)> {
        let mut acc: BTreeMap<u8, (f64, u64)> = BTreeMap::new();
        for o in &self.objects {
            let e = acc.entry(o.class_id).or_default();
            e.0 += o.elapsed_s;
            e.1 += o.claimed;
        }
        acc.into_iter().map(|(c, (t, n))| (c, t, n)).collect()
    }

    /// Tab-separated text, one line per object:
    /// `object_id  class  elapsed_s  claimed  candidates  name`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# taxonomy\t{}", self.taxonomy);
        let _ = writeln!(s, "# object_id\tclass\telapsed_s\tclaimed\tcandidates\tname");
        for o in &self.objects {
            let _ = writeln!(
                s,
                "{}\t{}\t{:.6}\t{}\t{}\t{}",
                o.object_id, o.class_name, o.elapsed_s, o.claimed, o.candidates, o.name
            );
        }
        s
    }

    /// Reads the object lines written by [`LabelReport::to_text`].
    pub fn parse_text(text: &str) -> Result<Vec<ObjectTiming>> {
        let mut taxonomy = TaxonomyId::Gold;
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(rest) = line.strip_prefix("# taxonomy\t") {
                taxonomy = rest.trim().parse()?;
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() < 4 {
                return Err(Error::Parse { line: line_no, message: "expected at least 4 tab-separated fields".into() });
            }
            let bad = |what: &str| Error::Parse { line: line_no, message: format!("invalid {what}") };
            let class_id = taxonomy.taxonomy().resolve(f[1])?;
            out.push(ObjectTiming {
                object_id: f[0].parse().map_err(|_| bad("object id"))?,
                class_id,
                class_name: f[1].to_string(),
                elapsed_s: f[2].parse().map_err(|_| bad("elapsed time"))?,
                claimed: f[3].parse().map_err(|_| bad("claimed count"))?,
                candidates: f.get(4).map_or(Ok(0), |v| v.parse()).map_err(|_| bad("candidate count"))?,
                name: f.get(5).unwrap_or(&"").to_string(),
            });
        }
        Ok(out)
    }
}

/// Tuning knobs that do not change the labels.
#[derive(Debug, Clone, Copy)]
pub struct LabelOptions {
    pub grid_cell: f64,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions { grid_cell: DEFAULT_GRID_CELL }
    }
}

fn check_inputs(cloud: &LabeledCloud, scene: &SceneModel, policy: &ThresholdPolicy) -> Result<()> {
    if cloud.taxonomy != scene.taxonomy {
        return Err(Error::TaxonomyMismatch { cloud: cloud.taxonomy.to_string(), expected: scene.taxonomy.to_string() });
    }
    if scene.is_empty() {
        return Err(Error::EmptyScene);
    }
    policy.validate()
}

fn finish_labels(best: &[LabelCandidate], clutter: u8) -> Vec<u8> {
    best.iter().map(|c| if c.is_some() { c.class_id } else { clutter }).collect()
}

/// Labels every point of `cloud` with grid culling and indexed distances.
pub fn compute_pseudo_labels(
    cloud: &LabeledCloud,
    scene: &SceneModel,
    policy: &ThresholdPolicy,
    options: LabelOptions,
) -> Result<(Vec<u8>, LabelReport)> {
    check_inputs(cloud, scene, policy)?;
    let started = Instant::now();
    let tax = scene.taxonomy.taxonomy();
    let n = cloud.len();
    let grid = PointGrid::build(cloud.positions(), options.grid_cell);

    let mut best = vec![LabelCandidate::NONE; n];
    let mut timings = Vec::with_capacity(scene.len());
    for object in &scene.objects {
        let t0 = Instant::now();
        let candidates = label_object(object, policy, &grid);
        for &(i, cand) in &candidates {
            let slot = &mut best[i as usize];
            if cand.beats(slot) {
                *slot = cand;
            }
        }
        timings.push(ObjectTiming {
            object_id: object.object_id,
            name: object.name.clone(),
            class_id: object.class_id,
            class_name: tax.name(object.class_id).to_string(),
            elapsed_s: t0.elapsed().as_secs_f64(),
            candidates: candidates.len() as u64,
            claimed: 0,
        });
    }

    let mut claimed: BTreeMap<u32, u64> = BTreeMap::new();
    let mut clutter_fallback = 0;
    let mut non_finite = 0;
    for (i, c) in best.iter().enumerate() {
        if c.is_some() {
            *claimed.entry(c.object_id).or_default() += 1;
        } else if cloud.position(i).is_finite() {
            clutter_fallback += 1;
        } else {
            non_finite += 1;
        }
    }
    if non_finite > 0 {
        warn!("{non_finite} points have non-finite coordinates; labeled Clutter");
    }
    for t in &mut timings {
        t.claimed = claimed.get(&t.object_id).copied().unwrap_or(0);
    }
    let labels = finish_labels(&best, tax.clutter_id);
    let mut class_counts = vec![0u64; tax.len()];
    for &l in &labels {
        class_counts[l as usize] += 1;
    }
    let report = LabelReport {
        taxonomy: scene.taxonomy,
        points: n as u64,
        objects: timings,
        class_counts,
        clutter_fallback,
        non_finite,
        total_elapsed_s: started.elapsed().as_secs_f64(),
    };
    Ok((labels, report))
}

/// Candidates one object contributes, as `(point index, candidate)`.
fn label_object(object: &ClassedMesh, policy: &ThresholdPolicy, grid: &PointGrid) -> Vec<(u32, LabelCandidate)> {
    let tau = policy.tau(object.class_id);
    let cull = object.bounds.dilate(tau + CULL_SLACK);
    let mut inside: Vec<(u32, Vec3)> = Vec::new();
    grid.for_each_in_box(&cull, |i, p| inside.push((i, p)));
    inside
        .par_iter()
        .filter_map(|&(i, p)| {
            let d = object.index.signed_distance(p);
            (d <= tau).then_some((
                i,
                LabelCandidate { class_id: object.class_id, distance: d, object_id: object.object_id },
            ))
        })
        .collect()
}

/// Writes pseudo labels into `cloud` and returns the timing report.
pub fn pseudo_label(cloud: &mut LabeledCloud, scene: &SceneModel, policy: &ThresholdPolicy) -> Result<LabelReport> {
    let (labels, report) = compute_pseudo_labels(cloud, scene, policy, LabelOptions::default())?;
    cloud.pseudo_label = labels;
    Ok(report)
}

/// Reference labeler: every point against every object, distances by
/// scanning all triangles, no culling.
pub fn brute_force_label(cloud: &LabeledCloud, scene: &SceneModel, policy: &ThresholdPolicy) -> Result<Vec<u8>> {
    check_inputs(cloud, scene, policy)?;
    let tax = scene.taxonomy.taxonomy();
    let best: Vec<LabelCandidate> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let p = cloud.position(i);
            let mut best = LabelCandidate::NONE;
            if !p.is_finite() {
                return best;
            }
            for o in &scene.objects {
                let d = o.index.signed_distance_brute_force(p);
                if d <= policy.tau(o.class_id) {
                    let c = LabelCandidate { class_id: o.class_id, distance: d, object_id: o.object_id };
                    if c.beats(&best) {
                        best = c;
                    }
                }
            }
            best
        })
        .collect();
    Ok(finish_labels(&best, tax.clutter_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::PointRecord;
    use crate::geometry::{shapes, Aabb};
    use crate::taxonomy::gold;

    fn cloud_of(points: &[Vec3]) -> LabeledCloud {
        let mut c = LabeledCloud::new(TaxonomyId::Gold, "t");
        for &p in points {
            c.push(PointRecord::at(p));
        }
        c
    }

    fn scene(boxes: &[(&str, Aabb)]) -> SceneModel {
        SceneModel::from_meshes(
            TaxonomyId::Gold,
            boxes.iter().map(|(class, b)| (class.to_string(), gold().class_id(class).unwrap(), shapes::box_mesh(b))),
        )
        .unwrap()
    }

    fn wall() -> Aabb {
        Aabb::new(Vec3::ZERO, Vec3::new(0.2, 4.0, 3.0))
    }

    #[test]
    fn published_thresholds() {
        let g = gold_policy();
        assert_eq!(g.tau(gold().class_id("Door").unwrap()), 0.10);
        assert_eq!(g.tau(gold().class_id("Furniture").unwrap()), 0.10);
        assert_eq!(g.tau(gold().class_id("Window").unwrap()), 0.10);
        assert_eq!(g.tau(gold().class_id("Wall").unwrap()), 0.04);
        let s = silver_policy();
        let silver = crate::taxonomy::silver();
        assert_eq!(s.tau(silver.class_id("Window").unwrap()), 0.15);
        assert_eq!(s.tau(silver.class_id("Door").unwrap()), 0.10);
        assert_eq!(s.tau(silver.class_id("Wall").unwrap()), 0.04);
    }

    #[test]
    fn near_wall_point_within_threshold() {
        let s = scene(&[("Wall", wall())]);
        let c = cloud_of(&[Vec3::new(0.23, 2.0, 1.5), Vec3::new(0.25, 2.0, 1.5), Vec3::new(9.0, 9.0, 9.0)]);
        let (labels, report) = compute_pseudo_labels(&c, &s, &gold_policy(), LabelOptions::default()).unwrap();
        assert_eq!(labels, vec![15, 17, 17]);
        assert_eq!(brute_force_label(&c, &s, &gold_policy()).unwrap(), labels);
        assert_eq!(report.clutter_fallback, 2);
        assert_eq!(report.objects[0].claimed, 1);
        assert_eq!(report.class_counts.iter().sum::<u64>(), 3);
    }

    #[test]
    fn interior_beats_exterior() {
        // Point inside the door box and 2 cm from the wall's face.
        let door = Aabb::new(Vec3::new(0.21, 1.0, 0.0), Vec3::new(0.4, 2.0, 2.1));
        let s = scene(&[("Wall", wall()), ("Door", door)]);
        let c = cloud_of(&[Vec3::new(0.22, 1.5, 1.0)]);
        let labels = brute_force_label(&c, &s, &gold_policy()).unwrap();
        assert_eq!(labels, vec![4]);
        let (fast, _) = compute_pseudo_labels(&c, &s, &gold_policy(), LabelOptions::default()).unwrap();
        assert_eq!(fast, labels);
    }

    #[test]
    fn non_finite_points_become_clutter() {
        let s = scene(&[("Wall", wall())]);
        let c = cloud_of(&[Vec3::new(f64::NAN, 0.0, 0.0), Vec3::new(0.1, 1.0, 1.0)]);
        let (labels, report) = compute_pseudo_labels(&c, &s, &gold_policy(), LabelOptions::default()).unwrap();
        assert_eq!(labels, vec![17, 15]);
        assert_eq!(report.non_finite, 1);
        assert_eq!(brute_force_label(&c, &s, &gold_policy()).unwrap(), labels);
    }

    #[test]
    fn taxonomy_mismatch() {
        let s = scene(&[("Wall", wall())]);
        let mut c = cloud_of(&[Vec3::ZERO]);
        c.taxonomy = TaxonomyId::Silver;
        assert!(matches!(pseudo_label(&mut c, &s, &silver_policy()), Err(Error::TaxonomyMismatch { .. })));
    }

    #[test]
    fn negative_threshold_rejected() {
        let mut p = gold_policy();
        assert!(p.set(15, -0.01).is_err());
        assert!(ThresholdPolicy::uniform(f64::NAN).is_err());
    }

    #[test]
    fn report_text_round_trip() {
        let s = scene(&[("Wall", wall()), ("Exit sign", Aabb::new(Vec3::new(1.0, 1.0, 1.0), Vec3::new(1.2, 1.1, 1.3)))]);
        let mut c = cloud_of(&[Vec3::new(0.1, 1.0, 1.0), Vec3::new(1.1, 1.05, 1.1)]);
        let report = pseudo_label(&mut c, &s, &gold_policy()).unwrap();
        let back = LabelReport::parse_text(&report.to_text()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].class_name, "Exit sign");
        assert_eq!(back[1].claimed, 1);
        assert_eq!(report.class_timing().len(), 2);
    }
}
