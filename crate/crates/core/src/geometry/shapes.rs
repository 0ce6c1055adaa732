//! Closed triangle meshes for simple solids.

use super::{Aabb, Triangle, Vec3};

/// Outward-wound 12-triangle mesh of an axis-aligned box.
pub fn box_mesh(b: &Aabb) -> Vec<Triangle> {
    let (lo, hi) = (b.min, b.max);
    let v = |i: usize| {
        Vec3::new(
            if i & 1 == 0 { lo.x } else { hi.x },
            if i & 2 == 0 { lo.y } else { hi.y },
            if i & 4 == 0 { lo.z } else { hi.z },
        )
    };
    // Quads listed counter-clockwise seen from outside.
    const QUADS: [[usize; 4]; 6] = [
        [0, 2, 3, 1], // z-
        [4, 5, 7, 6], // z+
        [0, 1, 5, 4], // y-
        [2, 6, 7, 3], // y+
        [0, 4, 6, 2], // x-
        [1, 3, 7, 5], // x+
    ];
    QUADS
        .iter()
        .flat_map(|q| {
            [
                Triangle::new(v(q[0]), v(q[1]), v(q[2])),
                Triangle::new(v(q[0]), v(q[2]), v(q[3])),
            ]
        })
        .map(|t| t.expect("box with positive extent"))
        .collect()
}

/// Unit cube centered at the origin.
pub fn unit_cube() -> Vec<Triangle> {
    box_mesh(&Aabb::new(Vec3::splat(-0.5), Vec3::splat(0.5)))
}

/// Closed latitude/longitude sphere around `center` with
/// `2 * slices * (stacks - 1)` triangles. `radius` is evaluated per vertex
/// direction, allowing bumpy star-shaped surfaces.
pub fn uv_sphere<F>(center: Vec3, stacks: usize, slices: usize, mut radius: F) -> Vec<Triangle>
where
    F: FnMut(Vec3) -> f64,
{
    assert!(stacks >= 2 && slices >= 3);
    let north = center + Vec3::new(0.0, 0.0, radius(Vec3::new(0.0, 0.0, 1.0)));
    let south = center - Vec3::new(0.0, 0.0, radius(Vec3::new(0.0, 0.0, -1.0)));
    let mut rings: Vec<Vec<Vec3>> = Vec::with_capacity(stacks - 1);
    for i in 1..stacks {
        let theta = std::f64::consts::PI * i as f64 / stacks as f64;
        let ring = (0..slices)
            .map(|j| {
                let phi = std::f64::consts::TAU * j as f64 / slices as f64;
                let dir = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                center + dir * radius(dir)
            })
            .collect();
        rings.push(ring);
    }
    let mut tris = Vec::with_capacity(2 * slices * (stacks - 1));
    let mut push = |a, b, c| tris.extend(Triangle::new(a, b, c));
    for j in 0..slices {
        let k = (j + 1) % slices;
        push(north, rings[0][j], rings[0][k]);
        for r in 0..stacks - 2 {
            let (up, down) = (&rings[r], &rings[r + 1]);
            push(up[j], down[j], down[k]);
            push(up[j], down[k], up[k]);
        }
        let last = &rings[stacks - 2];
        push(south, last[k], last[j]);
    }
    tris
}
