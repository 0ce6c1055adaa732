use std::collections::HashMap;

use super::LabeledCloud;
use crate::geometry::Vec3;

/// Keeps at most one point per cubic voxel of side `cell`.
///
/// The survivor of a voxel is its member nearest to the members' centroid,
/// the lowest input index winning ties. Survivors keep their input order.
/// Points with non-finite coordinates are dropped.
pub fn voxel_subsample(cloud: &LabeledCloud, cell: f64) -> LabeledCloud {
    assert!(cell > 0.0 && cell.is_finite(), "voxel size must be positive");
    let key = |p: Vec3| [(p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64];

    let mut sums: HashMap<[i64; 3], (Vec3, u32)> = HashMap::new();
    for p in cloud.positions().filter(|p| p.is_finite()) {
        let e = sums.entry(key(p)).or_insert((Vec3::ZERO, 0));
        e.0 += p;
        e.1 += 1;
    }

    // (best distance², index) per voxel; strict comparison keeps the first index on ties.
    let mut best: HashMap<[i64; 3], (f64, usize)> = HashMap::with_capacity(sums.len());
    for (i, p) in cloud.positions().enumerate() {
        if !p.is_finite() {
            continue;
        }
        let k = key(p);
        let (sum, n) = sums[&k];
        let d2 = (p - sum / n as f64).norm_squared();
        match best.get_mut(&k) {
            Some(b) if d2 < b.0 => *b = (d2, i),
            Some(_) => {}
            None => {
                best.insert(k, (d2, i));
            }
        }
    }

    let mut keep: Vec<usize> = best.into_values().map(|(_, i)| i).collect();
    keep.sort_unstable();
    cloud.select(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::PointRecord;
    use crate::taxonomy::TaxonomyId;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn cloud_from(points: &[Vec3]) -> LabeledCloud {
        let mut c = LabeledCloud::new(TaxonomyId::Gold, "v");
        for &p in points {
            c.push(PointRecord::at(p));
        }
        c
    }

    #[test]
    fn duplicates_collapse() {
        let c = cloud_from(&[Vec3::ZERO, Vec3::ZERO]);
        assert_eq!(voxel_subsample(&c, 0.01).len(), 1);
    }

    #[test]
    fn distinct_voxels_survive() {
        let c = cloud_from(&[Vec3::ZERO, Vec3::splat(1.0)]);
        let s = voxel_subsample(&c, 0.01);
        assert_eq!(s, c);
    }

    #[test]
    fn survivor_is_nearest_centroid() {
        // Centroid of the three is (0.004, 0, 0); the middle point sits on it.
        let c = cloud_from(&[Vec3::ZERO, Vec3::new(0.004, 0.0, 0.0), Vec3::new(0.008, 0.0, 0.0)]);
        let s = voxel_subsample(&c, 0.01);
        assert_eq!(s.x, vec![0.004]);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let c = cloud_from(&[Vec3::new(0.002, 0.0, 0.0), Vec3::new(0.006, 0.0, 0.0)]);
        assert_eq!(voxel_subsample(&c, 0.01).x, vec![0.002]);
    }

    #[test]
    fn count_equals_voxel_census() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Vec3> = (0..1000)
            .map(|_| Vec3::new(rng.random_range(0.0..0.1), rng.random_range(0.0..0.1), rng.random_range(0.0..0.1)))
            .collect();
        let census: HashSet<[i64; 3]> = pts
            .iter()
            .map(|p| [(p.x / 0.05).floor() as i64, (p.y / 0.05).floor() as i64, (p.z / 0.05).floor() as i64])
            .collect();
        assert_eq!(voxel_subsample(&cloud_from(&pts), 0.05).len(), census.len());
    }
}
