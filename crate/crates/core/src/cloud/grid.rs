use std::collections::HashMap;

use crate::geometry::{Aabb, Vec3};

type CellKey = [i64; 3];

/// Uniform hash grid over point positions.
///
/// Points are stored cell by cell so a cell's members are contiguous.
/// Non-finite positions belong to no cell and are never returned.
#[derive(Debug, Clone)]
pub struct PointGrid {
    cell: f64,
    cells: HashMap<CellKey, (u32, u32)>,
    points: Vec<Vec3>,
    ids: Vec<u32>,
    key_min: CellKey,
    key_max: CellKey,
}

#[inline]
fn key_of(p: Vec3, cell: f64) -> CellKey {
    [(p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64]
}

impl PointGrid {
    /// Indexes `points` with cubic cells of side `cell` (meters, > 0).
    pub fn build(points: impl ExactSizeIterator<Item = Vec3>, cell: f64) -> PointGrid {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        let n = points.len();
        assert!(n <= u32::MAX as usize, "too many points for a u32 index");

        let mut keys: Vec<Option<CellKey>> = Vec::with_capacity(n);
        let mut counts: HashMap<CellKey, u32> = HashMap::new();
        let mut stored = Vec::with_capacity(n);
        for p in points {
            let k = p.is_finite().then(|| key_of(p, cell));
            if let Some(k) = k {
                *counts.entry(k).or_default() += 1;
            }
            keys.push(k);
            stored.push(p);
        }

        let mut sorted: Vec<CellKey> = counts.keys().copied().collect();
        sorted.sort_unstable();
        let mut cells = HashMap::with_capacity(sorted.len());
        let mut offset = 0u32;
        let mut key_min = [i64::MAX; 3];
        let mut key_max = [i64::MIN; 3];
        for k in sorted {
            let c = counts[&k];
            cells.insert(k, (offset, 0));
            offset += c;
            for a in 0..3 {
                key_min[a] = key_min[a].min(k[a]);
                key_max[a] = key_max[a].max(k[a]);
            }
        }

        let total = offset as usize;
        let mut points = vec![Vec3::ZERO; total];
        let mut ids = vec![0u32; total];
        for (i, k) in keys.iter().enumerate() {
            if let Some(k) = k {
                let slot = cells.get_mut(k).expect("counted cell");
                let at = (slot.0 + slot.1) as usize;
                points[at] = stored[i];
                ids[at] = i as u32;
                slot.1 += 1;
            }
        }
        PointGrid { cell, cells, points, ids, key_min, key_max }
    }

    /// Grid sized for nearest-neighbor queries over `points`, or `None` when
    /// there are no finite points.
    pub fn for_nearest(points: &[Vec3]) -> Option<PointGrid> {
        let finite = points.iter().filter(|p| p.is_finite()).count();
        if finite == 0 {
            return None;
        }
        let extent = Aabb::from_points(points.iter().copied().filter(|p| p.is_finite())).extent();
        let span = extent.x.max(extent.y).max(extent.z);
        // Aim for a handful of points per occupied cell on surface-like data.
        let cell = (span / (finite as f64).sqrt() * 4.0).max(1e-3);
        Some(PointGrid::build(points.iter().copied(), cell))
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    /// Number of indexed (finite) points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    fn cell_members(&self, slot: (u32, u32)) -> impl Iterator<Item = (u32, Vec3)> + '_ {
        let (start, len) = (slot.0 as usize, slot.1 as usize);
        self.ids[start..start + len].iter().copied().zip(self.points[start..start + len].iter().copied())
    }

    /// Calls `f` with every indexed point inside the closed box, in no
    /// particular order.
    pub fn for_each_in_box<F: FnMut(u32, Vec3)>(&self, b: &Aabb, mut f: F) {
        if self.cells.is_empty() || b.is_empty() {
            return;
        }
        let lo = key_of(b.min, self.cell);
        let hi = key_of(b.max, self.cell);
        let lo = [0, 1, 2].map(|a| lo[a].max(self.key_min[a]));
        let hi = [0, 1, 2].map(|a| hi[a].min(self.key_max[a]));
        if (0..3).any(|a| lo[a] > hi[a]) {
            return;
        }
        let span = (0..3).map(|a| (hi[a] - lo[a] + 1) as u128).product::<u128>();
        let mut visit = |slot: (u32, u32)| {
            for (id, p) in self.cell_members(slot) {
                if b.contains(p) {
                    f(id, p);
                }
            }
        };
        if span > self.cells.len() as u128 {
            for (k, &slot) in &self.cells {
                if (0..3).all(|a| k[a] >= lo[a] && k[a] <= hi[a]) {
                    visit(slot);
                }
            }
        } else {
            for i in lo[0]..=hi[0] {
                for j in lo[1]..=hi[1] {
                    for k in lo[2]..=hi[2] {
                        if let Some(&slot) = self.cells.get(&[i, j, k]) {
                            visit(slot);
                        }
                    }
                }
            }
        }
    }

    /// Indices of the points inside the closed box, ascending.
    pub fn query_box(&self, b: &Aabb) -> Vec<u32> {
        let mut out = Vec::new();
        self.for_each_in_box(b, |id, _| out.push(id));
        out.sort_unstable();
        out
    }

    /// Nearest indexed point to `p` and its distance. Equal distances go to
    /// the lowest index.
    pub fn nearest(&self, p: Vec3) -> Option<(u32, f64)> {
        if self.points.is_empty() || !p.is_finite() {
            return None;
        }
        let mut best: Option<(u32, f64)> = None;
        let take = |id: u32, q: Vec3, best: &mut Option<(u32, f64)>| {
            let d2 = (q - p).norm_squared();
            match best {
                Some((bi, bd)) if d2 > *bd || (d2 == *bd && id > *bi) => {}
                _ => *best = Some((id, d2)),
            }
        };
        let c = key_of(p, self.cell);
        // Shells beyond this radius contain no occupied cells.
        let reach = (0..3)
            .map(|a| (c[a] - self.key_min[a]).abs().max((self.key_max[a] - c[a]).abs()))
            .max()
            .unwrap_or(0);
        let mut shell: i64 = 0;
        while shell <= reach {
            // Falling back to a full scan once shells outgrow the occupied set.
            let shell_cells = if shell == 0 { 1 } else { 24 * shell * shell + 2 } as usize;
            if shell_cells > self.cells.len() {
                for &slot in self.cells.values() {
                    for (id, q) in self.cell_members(slot) {
                        take(id, q, &mut best);
                    }
                }
                break;
            }
            for i in -shell..=shell {
                for j in -shell..=shell {
                    let on_rim = i.abs() == shell || j.abs() == shell;
                    let step = if on_rim || shell == 0 { 1 } else { 2 * shell as usize };
                    for k in (-shell..=shell).step_by(step) {
                        if let Some(&slot) = self.cells.get(&[c[0] + i, c[1] + j, c[2] + k]) {
                            for (id, q) in self.cell_members(slot) {
                                take(id, q, &mut best);
                            }
                        }
                    }
                }
            }
            // Any point in shell s+1 lies at least s cells away.
            if let Some((_, d2)) = best {
                let guard = shell as f64 * self.cell;
                if d2 <= guard * guard {
                    break;
                }
            }
            shell += 1;
        }
        best.map(|(id, d2)| (id, d2.sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.random_range(-2.0..3.0), rng.random_range(0.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn box_covering_everything_and_nothing() {
        let pts = random_points(500, 1);
        let g = PointGrid::build(pts.iter().copied(), 0.1);
        let all = g.query_box(&Aabb::new(Vec3::splat(-10.0), Vec3::splat(10.0)));
        assert_eq!(all, (0..500).collect::<Vec<u32>>());
        assert!(g.query_box(&Aabb::new(Vec3::splat(20.0), Vec3::splat(21.0))).is_empty());
    }

    #[test]
    fn random_boxes_match_linear_scan() {
        let pts = random_points(10_000, 2);
        let g = PointGrid::build(pts.iter().copied(), 0.07);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = Vec3::new(rng.random_range(-3.0..4.0), rng.random_range(-0.5..1.5), rng.random_range(-1.5..1.5));
            let b = Vec3::new(rng.random_range(-3.0..4.0), rng.random_range(-0.5..1.5), rng.random_range(-1.5..1.5));
            let bx = Aabb::new(a, b);
            let expect: Vec<u32> = (0..pts.len() as u32).filter(|&i| bx.contains(pts[i as usize])).collect();
            assert_eq!(g.query_box(&bx), expect);
        }
    }

    #[test]
    fn non_finite_points_are_skipped() {
        let pts = vec![Vec3::ZERO, Vec3::new(f64::NAN, 0.0, 0.0), Vec3::new(0.05, 0.0, 0.0)];
        let g = PointGrid::build(pts.into_iter(), 0.1);
        assert_eq!(g.len(), 2);
        assert_eq!(g.query_box(&Aabb::new(Vec3::splat(-1.0), Vec3::splat(1.0))), vec![0, 2]);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts = random_points(2_000, 4);
        let g = PointGrid::for_nearest(&pts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let q = Vec3::new(rng.random_range(-6.0..7.0), rng.random_range(-3.0..4.0), rng.random_range(-3.0..3.0));
            let (id, d) = g.nearest(q).unwrap();
            let (bid, bd) = pts
                .iter()
                .enumerate()
                .map(|(i, p)| (i as u32, p.distance(q)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .unwrap();
            assert_eq!(id, bid);
            assert!((d - bd).abs() <= 1e-12 * bd.max(1.0));
        }
    }

    #[test]
    fn nearest_on_empty_grid() {
        assert!(PointGrid::for_nearest(&[]).is_none());
        let g = PointGrid::build(std::iter::empty(), 1.0);
        assert!(g.nearest(Vec3::ZERO).is_none());
    }
}
