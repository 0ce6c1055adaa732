//! Reader and writer for the polygonal subset of Wavefront OBJ: `v`, `vn`
//! and `f` records. Other record types are skipped and counted.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::{Triangle, Vec3};

/// Triangles read from one mesh file plus ingestion counters.
#[derive(Debug, Clone, Default)]
pub struct ObjMesh {
    pub triangles: Vec<Triangle>,
    /// Triangles dropped for having (near-)zero area.
    pub degenerate_dropped: usize,
    /// Records other than `v`, `vn`, `f`, comments and blanks.
    pub ignored_records: usize,
    /// Faces whose winding was reversed to agree with their vertex normals.
    pub reoriented_faces: usize,
}

fn parse_floats(line: usize, fields: &[&str], what: &str) -> Result<Vec3> {
    if fields.len() < 3 {
        return Err(Error::Parse { line, message: format!("{what} needs 3 coordinates") });
    }
    let mut xyz = [0.0; 3];
    for (slot, f) in xyz.iter_mut().zip(fields) {
        *slot = f
            .parse::<f64>()
            .map_err(|_| Error::Parse { line, message: format!("invalid {what} coordinate '{f}'") })?;
        if !slot.is_finite() {
            return Err(Error::Parse { line, message: format!("non-finite {what} coordinate") });
        }
    }
    Ok(Vec3::from(xyz))
}

/// Resolves a 1-based or negative (relative) OBJ index against `count` items.
fn resolve_index(line: usize, raw: &str, count: usize) -> Result<usize> {
    let index: i64 = raw
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("invalid index '{raw}'") })?;
    let out = Error::IndexOutOfRange { line, index, vertices: count };
    let resolved = match index {
        0 => return Err(out),
        i if i > 0 => i - 1,
        i => count as i64 + i,
    };
    if resolved < 0 || resolved as usize >= count {
        return Err(out);
    }
    Ok(resolved as usize)
}

/// Parses a mesh, fan-triangulating polygons from their first vertex.
///
/// The geometric normal of each triangle follows its winding. When every
/// corner of a face carries a vertex normal and those normals point against
/// the winding, the face is reversed.
pub fn parse_mesh<R: BufRead>(source: R) -> Result<ObjMesh> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut normals: Vec<Vec3> = Vec::new();
    let mut mesh = ObjMesh::default();
    let mut faces = 0usize;

    for (lineno, text) in source.lines().enumerate() {
        let text = text?;
        let line = lineno + 1;
        let text = text.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut fields = text.split_whitespace();
        let tag = fields.next().unwrap_or("");
        let fields: Vec<&str> = fields.collect();
        match tag {
            "v" => vertices.push(parse_floats(line, &fields, "vertex")?),
            "vn" => normals.push(parse_floats(line, &fields, "normal")?),
            "f" => {
                if fields.len() < 3 {
                    return Err(Error::Parse { line, message: "face needs at least 3 vertices".into() });
                }
                let mut corners = Vec::with_capacity(fields.len());
                let mut corner_normals = Vec::with_capacity(fields.len());
                for f in &fields {
                    let mut parts = f.split('/');
                    let v = parts.next().unwrap_or("");
                    corners.push(vertices[resolve_index(line, v, vertices.len())?]);
                    let _texture = parts.next();
                    match parts.next() {
                        Some(n) if !n.is_empty() => {
                            corner_normals.push(normals[resolve_index(line, n, normals.len())?]);
                        }
                        _ => {}
                    }
                }
                faces += 1;
                push_polygon(&mut mesh, &corners, &corner_normals);
            }
            _ => mesh.ignored_records += 1,
        }
    }

    if faces == 0 || mesh.triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    Ok(mesh)
}

fn push_polygon(mesh: &mut ObjMesh, corners: &[Vec3], corner_normals: &[Vec3]) {
    // Newell normal of the polygon versus the supplied shading normals.
    let mut newell = Vec3::ZERO;
    for (i, &a) in corners.iter().enumerate() {
        newell += a.cross(corners[(i + 1) % corners.len()]);
    }
    let supplied = corner_normals.iter().fold(Vec3::ZERO, |s, &n| s + n);
    let reverse = corner_normals.len() == corners.len() && newell.dot(supplied) < 0.0;
    if reverse {
        mesh.reoriented_faces += 1;
    }
    for i in 1..corners.len() - 1 {
        match Triangle::new(corners[0], corners[i], corners[i + 1]) {
            Some(t) if reverse => mesh.triangles.push(t.flipped()),
            Some(t) => mesh.triangles.push(t),
            None => mesh.degenerate_dropped += 1,
        }
    }
}

/// Writes triangles with shared vertices merged by exact coordinate.
pub fn write_mesh<W: Write>(triangles: &[Triangle], mut sink: W) -> Result<()> {
    let mut ids: HashMap<[u64; 3], usize> = HashMap::new();
    let mut order: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(triangles.len());
    for t in triangles {
        let mut f = [0usize; 3];
        for (slot, v) in f.iter_mut().zip(t.corners()) {
            let bits = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
            *slot = *ids.entry(bits).or_insert_with(|| {
                order.push(v);
                order.len()
            });
        }
        faces.push(f);
    }
    for v in &order {
        writeln!(sink, "v {:?} {:?} {:?}", v.x, v.y, v.z)?;
    }
    for f in &faces {
        writeln!(sink, "f {} {} {}", f[0], f[1], f[2])?;
    }
    sink.flush()?;
    Ok(())
}
