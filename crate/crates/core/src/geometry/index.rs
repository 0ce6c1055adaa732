use std::collections::HashMap;

use super::{Aabb, Feature, Triangle, Vec3};
use crate::error::{Error, Result};

/// Distances with magnitude below this (m) are reported as exactly zero.
pub const ON_SURFACE_EPS: f64 = 1e-12;

fn snap(hit: &ClosestHit) -> (f64, Vec3) {
    let d = hit.distance_squared.sqrt();
    (if d < ON_SURFACE_EPS { 0.0 } else { d }, hit.point)
}

const LEAF_SIZE: usize = 4;

/// Slack on the pruning test so ties that rounding places a hair beyond a
/// node's box are still visited; keeps indexed and brute-force results equal.
const PRUNE_SLACK: f64 = 1.0 + 1e-9;

/// Closest point on a mesh to some query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestHit {
    /// Squared distance to the query point.
    pub distance_squared: f64,
    pub point: Vec3,
    pub triangle: u32,
    pub feature: Feature,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    /// Leaf: first slot in `order`. Internal: index of the right child
    /// (the left child immediately follows its parent).
    offset: u32,
    /// Number of triangles for a leaf, zero for internal nodes.
    count: u32,
}

/// Angle-weighted pseudonormals over the welded mesh topology.
#[derive(Debug, Clone)]
struct Pseudonormals {
    vertex: Vec<Vec3>,
    edge: Vec<Vec3>,
    /// Per triangle, vertex ids of its three corners.
    corners: Vec<[u32; 3]>,
    /// Per triangle, edge ids of edges 0 (a-b), 1 (b-c), 2 (c-a).
    edges: Vec<[u32; 3]>,
}

/// Immutable distance-query structure over a triangle mesh.
///
/// Holds a bounding-volume hierarchy over the triangles and, for watertight
/// meshes, the pseudonormals used to sign distances.
#[derive(Debug, Clone)]
pub struct MeshIndex {
    triangles: Vec<Triangle>,
    nodes: Vec<Node>,
    order: Vec<u32>,
    pseudonormals: Option<Pseudonormals>,
    degenerate_dropped: usize,
}

impl MeshIndex {
    /// Builds an index over already-validated triangles.
    pub fn build(triangles: Vec<Triangle>) -> Result<MeshIndex> {
        Self::build_inner(triangles, 0)
    }

    /// Builds an index from raw corner triples, dropping degenerate ones.
    pub fn from_corners<I>(corners: I) -> Result<MeshIndex>
    where
        I: IntoIterator<Item = [Vec3; 3]>,
    {
        let mut dropped = 0;
        let mut triangles = Vec::new();
        for [a, b, c] in corners {
            match Triangle::new(a, b, c) {
                Some(t) => triangles.push(t),
                None => dropped += 1,
            }
        }
        Self::build_inner(triangles, dropped)
    }

    fn build_inner(triangles: Vec<Triangle>, degenerate_dropped: usize) -> Result<MeshIndex> {
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if triangles.len() > u32::MAX as usize {
            return Err(Error::Invariant("mesh exceeds u32 triangle count".into()));
        }
        let bounds: Vec<Aabb> = triangles.iter().map(Triangle::bounds).collect();
        let centroids: Vec<Vec3> = triangles.iter().map(Triangle::centroid).collect();
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1);
        build_node(&mut nodes, &mut order, 0, &bounds, &centroids);
        let pseudonormals = Pseudonormals::compute(&triangles);
        Ok(MeshIndex { triangles, nodes, order, pseudonormals, degenerate_dropped })
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// True when every edge is shared by exactly two consistently wound triangles.
    pub fn is_closed(&self) -> bool {
        self.pseudonormals.is_some()
    }

    /// Number of degenerate triangles discarded while building.
    pub fn degenerate_dropped(&self) -> usize {
        self.degenerate_dropped
    }

    /// Bounding box of the whole mesh.
    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    /// Nearest point on the mesh through the hierarchy.
    ///
    /// Among triangles at exactly equal distance the lowest index wins, so
    /// the result is identical to [`MeshIndex::closest_brute_force`].
    pub fn closest(&self, p: Vec3) -> ClosestHit {
        let mut best = ClosestHit {
            distance_squared: f64::INFINITY,
            point: p,
            triangle: u32::MAX,
            feature: Feature::Face,
        };
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bounds.distance_squared(p) > best.distance_squared * PRUNE_SLACK {
                continue;
            }
            if node.count > 0 {
                let start = node.offset as usize;
                for &ti in &self.order[start..start + node.count as usize] {
                    self.consider(ti, p, &mut best);
                }
                continue;
            }
            let left = ni + 1;
            let right = node.offset;
            let dl = self.nodes[left as usize].bounds.distance_squared(p);
            let dr = self.nodes[right as usize].bounds.distance_squared(p);
            // Push the farther child first so the nearer one is explored first.
            if dl <= dr {
                stack.push(right);
                stack.push(left);
            } else {
                stack.push(left);
                stack.push(right);
            }
        }
        best
    }

    /// Nearest point on the mesh by scanning every triangle.
    pub fn closest_brute_force(&self, p: Vec3) -> ClosestHit {
        let mut best = ClosestHit {
            distance_squared: f64::INFINITY,
            point: p,
            triangle: u32::MAX,
            feature: Feature::Face,
        };
        for ti in 0..self.triangles.len() as u32 {
            self.consider(ti, p, &mut best);
        }
        best
    }

    #[inline]
    fn consider(&self, ti: u32, p: Vec3, best: &mut ClosestHit) {
        let (q, feature) = self.triangles[ti as usize].closest_point(p);
        let d2 = (p - q).norm_squared();
        if d2 < best.distance_squared || (d2 == best.distance_squared && ti < best.triangle) {
            *best = ClosestHit { distance_squared: d2, point: q, triangle: ti, feature };
        }
    }

    /// Unsigned distance to the mesh and the closest point realizing it.
    pub fn unsigned_distance(&self, p: Vec3) -> (f64, Vec3) {
        snap(&self.closest(p))
    }

    pub fn unsigned_distance_brute_force(&self, p: Vec3) -> (f64, Vec3) {
        snap(&self.closest_brute_force(p))
    }

    /// Signed distance, negative inside a closed mesh.
    ///
    /// Open meshes have no interior and return the unsigned distance.
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.sign_hit(p, &self.closest(p))
    }

    pub fn signed_distance_brute_force(&self, p: Vec3) -> f64 {
        self.sign_hit(p, &self.closest_brute_force(p))
    }

    fn sign_hit(&self, p: Vec3, hit: &ClosestHit) -> f64 {
        let d = hit.distance_squared.sqrt();
        if d < ON_SURFACE_EPS {
            return 0.0;
        }
        match &self.pseudonormals {
            Some(pn) => {
                let n = pn.normal_at(&self.triangles, hit.triangle, hit.feature);
                if (p - hit.point).dot(n) < 0.0 {
                    -d
                } else {
                    d
                }
            }
            None => d,
        }
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    offset: usize,
    bounds: &[Aabb],
    centroids: &[Vec3],
) -> usize {
    let node_bounds = order.iter().fold(Aabb::EMPTY, |b, &i| b.union(bounds[i as usize]));
    let me = nodes.len();
    nodes.push(Node { bounds: node_bounds, offset: offset as u32, count: order.len() as u32 });
    if order.len() <= LEAF_SIZE {
        return me;
    }
    let split_box = Aabb::from_points(order.iter().map(|&i| centroids[i as usize]));
    let axis = split_box.longest_axis();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&l, &r| {
        centroids[l as usize][axis]
            .total_cmp(&centroids[r as usize][axis])
            .then(l.cmp(&r))
    });
    let (lo, hi) = order.split_at_mut(mid);
    build_node(nodes, lo, offset, bounds, centroids);
    let right = build_node(nodes, hi, offset + mid, bounds, centroids);
    nodes[me].offset = right as u32;
    nodes[me].count = 0;
    me
}

impl Pseudonormals {
    /// Returns `None` unless the mesh is closed and consistently oriented.
    fn compute(triangles: &[Triangle]) -> Option<Pseudonormals> {
        let mut vertex_ids: HashMap<[u64; 3], u32> = HashMap::new();
        let mut corners = Vec::with_capacity(triangles.len());
        for t in triangles {
            let mut ids = [0u32; 3];
            for (k, v) in t.corners().into_iter().enumerate() {
                let next = vertex_ids.len() as u32;
                ids[k] = *vertex_ids.entry(v.key_bits()).or_insert(next);
            }
            corners.push(ids);
        }

        // Each directed edge must occur once, paired with its reverse.
        let mut directed: HashMap<(u32, u32), u32> = HashMap::with_capacity(3 * triangles.len());
        for ids in &corners {
            for k in 0..3 {
                let e = (ids[k], ids[(k + 1) % 3]);
                let n = directed.entry(e).or_insert(0);
                *n += 1;
                if *n > 1 {
                    return None;
                }
            }
        }
        if directed.keys().any(|&(i, j)| !directed.contains_key(&(j, i))) {
            return None;
        }

        let mut edge_ids: HashMap<(u32, u32), u32> = HashMap::with_capacity(directed.len() / 2);
        let mut edge_normal: Vec<Vec3> = Vec::with_capacity(directed.len() / 2);
        let mut vertex_normal = vec![Vec3::ZERO; vertex_ids.len()];
        let mut edges = Vec::with_capacity(triangles.len());
        for (t, ids) in triangles.iter().zip(&corners) {
            let mut eids = [0u32; 3];
            for k in 0..3 {
                let (i, j) = (ids[k], ids[(k + 1) % 3]);
                let key = (i.min(j), i.max(j));
                let next = edge_normal.len() as u32;
                let id = *edge_ids.entry(key).or_insert(next);
                if id == next {
                    edge_normal.push(Vec3::ZERO);
                }
                // Both incident faces see the edge under a dihedral weight of pi.
                edge_normal[id as usize] += t.normal;
                eids[k] = id;
                vertex_normal[ids[k] as usize] += t.normal * t.angle_at(k);
            }
            edges.push(eids);
        }
        let unit = |v: Vec3| v.normalized().unwrap_or(Vec3::ZERO);
        Some(Pseudonormals {
            vertex: vertex_normal.into_iter().map(unit).collect(),
            edge: edge_normal.into_iter().map(unit).collect(),
            corners,
            edges,
        })
    }

    #[inline]
    fn normal_at(&self, triangles: &[Triangle], tri: u32, feature: Feature) -> Vec3 {
        let t = tri as usize;
        match feature {
            Feature::Face => triangles[t].normal,
            Feature::Edge(k) => self.edge[self.edges[t][k as usize] as usize],
            Feature::Vertex(k) => self.vertex[self.corners[t][k as usize] as usize],
        }
    }
}
