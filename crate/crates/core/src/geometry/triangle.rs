use super::{Aabb, Vec3};

/// Triangles with area at or below this (m²) are rejected as degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Barycentric weights below this are treated as zero when classifying the
/// feature that realizes a closest point.
const FEATURE_SNAP: f64 = 1e-12;

/// A non-degenerate triangle with its unit face normal (counter-clockwise winding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Vec3,
    pub b: Vec3,
    pub c: Vec3,
    pub normal: Vec3,
}

/// Which part of a triangle a closest point lies on.
///
/// Edge `i` joins corner `i` to corner `(i + 1) % 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    Vertex(u8),
    Edge(u8),
    Face,
}

impl Triangle {
    /// Builds a triangle, returning `None` when it is degenerate or non-finite.
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Option<Triangle> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return None;
        }
        let n = (b - a).cross(c - a);
        if 0.5 * n.norm() <= MIN_TRIANGLE_AREA {
            return None;
        }
        Some(Triangle { a, b, c, normal: n.normalized()? })
    }

    #[inline]
    pub fn corners(&self) -> [Vec3; 3] {
        [self.a, self.b, self.c]
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.b - self.a).cross(self.c - self.a).norm()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.corners())
    }

    pub fn centroid(&self) -> Vec3 {
        (self.a + self.b + self.c) / 3.0
    }

    /// Interior angle at corner `i`, radians.
    pub fn angle_at(&self, i: usize) -> f64 {
        let c = self.corners();
        let u = c[(i + 1) % 3] - c[i];
        let v = c[(i + 2) % 3] - c[i];
        u.cross(v).norm().atan2(u.dot(v))
    }

    /// Same triangle with opposite winding.
    pub fn flipped(&self) -> Triangle {
        Triangle { a: self.a, b: self.c, c: self.b, normal: -self.normal }
    }

    /// Exact closest point on the triangle to `p` and the feature it lies on.
    ///
    /// Region classification follows the Voronoi-region walk over the three
    /// vertices, three edges and the face.
    pub fn closest_point(&self, p: Vec3) -> (Vec3, Feature) {
        let (a, b, c) = (self.a, self.b, self.c);
        let ab = b - a;
        let ac = c - a;
        let ap = p - a;
        let d1 = ab.dot(ap);
        let d2 = ac.dot(ap);
        if d1 <= 0.0 && d2 <= 0.0 {
            return (a, Feature::Vertex(0));
        }

        let bp = p - b;
        let d3 = ab.dot(bp);
        let d4 = ac.dot(bp);
        if d3 >= 0.0 && d4 <= d3 {
            return (b, Feature::Vertex(1));
        }

        let vc = d1 * d4 - d3 * d2;
        if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            let t = d1 / (d1 - d3);
            return snap_edge(a + ab * t, t, 0);
        }

        let cp = p - c;
        let d5 = ab.dot(cp);
        let d6 = ac.dot(cp);
        if d6 >= 0.0 && d5 <= d6 {
            return (c, Feature::Vertex(2));
        }

        let vb = d5 * d2 - d1 * d6;
        if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            // Parameter runs from a towards c; edge 2 runs c -> a.
            let t = d2 / (d2 - d6);
            return snap_edge(a + ac * t, 1.0 - t, 2);
        }

        let va = d3 * d6 - d5 * d4;
        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            return snap_edge(b + (c - b) * t, t, 1);
        }

        let denom = 1.0 / (va + vb + vc);
        let v = vb * denom;
        let w = vc * denom;
        let u = 1.0 - v - w;
        let q = a + ab * v + ac * w;
        // Snap near-boundary face hits onto the edge they touch.
        let feature = match (u < FEATURE_SNAP, v < FEATURE_SNAP, w < FEATURE_SNAP) {
            (false, false, false) => Feature::Face,
            (true, false, false) => Feature::Edge(1),
            (false, true, false) => Feature::Edge(2),
            (false, false, true) => Feature::Edge(0),
            (false, true, true) => Feature::Vertex(0),
            (true, false, true) => Feature::Vertex(1),
            (true, true, false) => Feature::Vertex(2),
            (true, true, true) => Feature::Face,
        };
        (q, feature)
    }
}

/// Maps an edge hit at parameter `t` (0 at the edge's start corner) onto a
/// vertex when it sits at an endpoint.
fn snap_edge(q: Vec3, t: f64, edge: u8) -> (Vec3, Feature) {
    if t < FEATURE_SNAP {
        (q, Feature::Vertex(edge))
    } else if t > 1.0 - FEATURE_SNAP {
        (q, Feature::Vertex((edge + 1) % 3))
    } else {
        (q, Feature::Edge(edge))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> Triangle {
        Triangle::new(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap()
    }

    #[test]
    fn degenerate_is_rejected() {
        let a = Vec3::ZERO;
        assert!(Triangle::new(a, Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)).is_none());
        assert!(Triangle::new(a, a, Vec3::new(0.0, 1.0, 0.0)).is_none());
        // area 5e-13 m²: below the threshold
        assert!(Triangle::new(a, Vec3::new(1e-6, 0.0, 0.0), Vec3::new(0.0, 1e-6, 0.0)).is_none());
    }

    #[test]
    fn normal_follows_winding() {
        assert_eq!(tri().normal, Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(tri().flipped().normal, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn closest_point_regions() {
        let t = tri();
        let (q, f) = t.closest_point(Vec3::new(0.25, 0.25, 2.0));
        assert_eq!(f, Feature::Face);
        assert!((q - Vec3::new(0.25, 0.25, 0.0)).norm() < 1e-15);

        let (q, f) = t.closest_point(Vec3::new(-1.0, -1.0, 0.0));
        assert_eq!((q, f), (Vec3::ZERO, Feature::Vertex(0)));

        let (q, f) = t.closest_point(Vec3::new(0.5, -1.0, 0.3));
        assert_eq!(f, Feature::Edge(0));
        assert!((q - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-15);

        let (q, f) = t.closest_point(Vec3::new(1.0, 1.0, 0.0));
        assert_eq!(f, Feature::Edge(1));
        assert!((q - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);

        let (q, f) = t.closest_point(Vec3::new(-1.0, 0.5, 0.0));
        assert_eq!(f, Feature::Edge(2));
        assert!((q - Vec3::new(0.0, 0.5, 0.0)).norm() < 1e-15);

        let (_, f) = t.closest_point(Vec3::new(2.0, -0.1, 0.0));
        assert_eq!(f, Feature::Vertex(1));
        let (_, f) = t.closest_point(Vec3::new(-0.1, 2.0, 0.0));
        assert_eq!(f, Feature::Vertex(2));
    }

    #[test]
    fn angles_sum_to_pi() {
        let t = Triangle::new(Vec3::ZERO, Vec3::new(3.0, 0.2, 0.1), Vec3::new(0.4, 1.7, -0.3)).unwrap();
        let s: f64 = (0..3).map(|i| t.angle_at(i)).sum();
        assert!((s - std::f64::consts::PI).abs() < 1e-12);
    }
}
