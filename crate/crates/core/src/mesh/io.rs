//! Wavefront OBJ (`v`/`f` records) and binary STL ingestion; grouped OBJ output.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::geom::{vec3, Vec3};

use super::{MeshError, Shape, TriMesh};

/// Loads a mesh file as a shape normalized to the unit cube. The format is
/// chosen by extension (`.obj`, `.stl`), falling back to content sniffing.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Shape, MeshError> {
    let path = path.as_ref();
    let mesh = read_mesh(path)?;
    Ok(Shape::from_mesh(path.display().to_string(), mesh))
}

/// Reads a mesh without normalizing it.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<TriMesh, MeshError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("stl") => parse_stl(&bytes),
        Some("obj") => parse_obj(std::str::from_utf8(&bytes).map_err(|e| MeshError::Format(e.to_string()))?),
        _ if looks_like_binary_stl(&bytes) => parse_stl(&bytes),
        _ => parse_obj(std::str::from_utf8(&bytes).map_err(|e| MeshError::Format(e.to_string()))?),
    }
}

fn looks_like_binary_stl(bytes: &[u8]) -> bool {
    bytes.len() >= 84 && {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        bytes.len() == 84 + 50 * n
    }
}

/// Parses OBJ text. Faces with more than three corners are fan-triangulated;
/// negative (relative) indices are supported; index 0 is rejected.
pub fn parse_obj(text: &str) -> Result<TriMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut fields = line.split_whitespace();
        let err = |msg: String| MeshError::Format(format!("line {}: {msg}", lineno + 1));
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .take(3)
                    .map(|f| f.parse::<f64>().map_err(|e| err(format!("bad coordinate {f:?}: {e}"))))
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 {
                    return Err(err("vertex needs three coordinates".into()));
                }
                vertices.push(vec3(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut corners = Vec::new();
                for f in fields {
                    let idx = f.split('/').next().unwrap_or("");
                    let i: i64 = idx.parse().map_err(|e| err(format!("bad face index {f:?}: {e}")))?;
                    let resolved = match i {
                        0 => return Err(err("face index 0 is invalid (OBJ indices are 1-based)".into())),
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(err(format!("face index {i} out of range")));
                    }
                    corners.push(resolved as u32);
                }
                if corners.len() < 3 {
                    return Err(err("face needs at least three vertices".into()));
                }
                for k in 1..corners.len() - 1 {
                    triangles.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, triangles)
}

/// Parses binary STL (80-byte header, little-endian triangle records). Vertices
/// are welded on exact coordinate equality so shared edges are recovered.
pub fn parse_stl(bytes: &[u8]) -> Result<TriMesh, MeshError> {
    if bytes.len() < 84 {
        return Err(MeshError::Format("STL shorter than its 84-byte header".into()));
    }
    let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    if bytes.len() < 84 + 50 * n {
        return Err(MeshError::Format(format!(
            "STL declares {n} triangles but holds {} bytes",
            bytes.len()
        )));
    }
    let read_f32 = |off: usize| f32::from_le_bytes([bytes[off], bytes[off + 1], bytes[off + 2], bytes[off + 3]]);
    let mut index: HashMap<[u32; 3], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(n);
    for t in 0..n {
        let base = 84 + 50 * t + 12;
        let mut tri = [0u32; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let off = base + 12 * k;
            let xyz = [read_f32(off), read_f32(off + 4), read_f32(off + 8)];
            let key = xyz.map(f32::to_bits);
            *slot = *index.entry(key).or_insert_with(|| {
                vertices.push(vec3(xyz[0] as f64, xyz[1] as f64, xyz[2] as f64));
                (vertices.len() - 1) as u32
            });
        }
        triangles.push(tri);
    }
    TriMesh::new(vertices, triangles)
}

/// Writes a binary STL image of `mesh`.
pub fn stl_bytes(mesh: &TriMesh) -> Vec<u8> {
    let mut out = vec![0u8; 80];
    out.extend_from_slice(&(mesh.triangle_count() as u32).to_le_bytes());
    for i in 0..mesh.triangle_count() {
        let n = mesh.triangle_normal(i);
        let mut push = |v: Vec3| {
            for c in [v.x, v.y, v.z] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        };
        push(n);
        for v in mesh.triangle(i) {
            push(v);
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}

pub struct ObjGroup<'a> {
    pub name: &'a str,
    pub mesh: &'a TriMesh,
}

/// Writes meshes as one OBJ file with an `o <name>` group per mesh.
/// Coordinates carry 17 significant digits so they read back exactly.
pub fn write_obj<W: Write>(out: &mut W, groups: &[ObjGroup<'_>]) -> std::io::Result<()> {
    let mut offset = 1usize;
    for g in groups {
        writeln!(out, "o {}", g.name)?;
        for v in g.mesh.vertices() {
            writeln!(out, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z)?;
        }
        for t in g.mesh.triangles() {
            writeln!(
                out,
                "f {} {} {}",
                t[0] as usize + offset,
                t[1] as usize + offset,
                t[2] as usize + offset
            )?;
        }
        offset += g.mesh.vertices().len();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{shape::box_mesh, Aabb};

    const CUBE_OBJ: &str = "\
v 0 0 0
v 2 0 0
v 0 2 0
v 2 2 0
v 0 0 2
v 2 0 2
v 0 2 2
v 2 2 2
f 1 3 2
f 2 3 4
f 5 6 7
f 6 8 7
f 1 2 5
f 2 6 5
f 3 7 4
f 4 7 8
f 1 5 3
f 3 5 7
f 2 4 6
f 4 8 6
";

    fn unit_box() -> Aabb {
        Aabb::new(vec3(-0.5, -0.5, -0.5), vec3(0.5, 0.5, 0.5))
    }

    #[test]
    fn obj_cube_normalizes_to_unit_box() {
        let m = parse_obj(CUBE_OBJ).unwrap();
        assert_eq!(m.vertices().len(), 8);
        assert_eq!(m.triangle_count(), 12);
        assert!(m.is_watertight());
        assert_eq!(m.normalized_to_unit_box().aabb(), unit_box());
    }

    #[test]
    fn stl_cube_has_identical_aabb() {
        let m = parse_obj(CUBE_OBJ).unwrap();
        let back = parse_stl(&stl_bytes(&m)).unwrap();
        assert_eq!(back.vertices().len(), 8);
        assert!(back.is_watertight());
        assert_eq!(back.normalized_to_unit_box().aabb(), unit_box());
    }

    #[test]
    fn zero_index_is_rejected() {
        let err = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").unwrap_err();
        assert!(matches!(err, MeshError::Format(ref m) if m.contains("1-based")), "{err}");
    }

    #[test]
    fn polygons_are_fan_triangulated() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
        let rel = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(rel.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn truncated_stl_is_format_error() {
        let mut bytes = stl_bytes(&box_mesh(Vec3::ZERO, vec3(1.0, 1.0, 1.0)));
        bytes.truncate(200);
        assert!(matches!(parse_stl(&bytes), Err(MeshError::Format(_))));
    }

    #[test]
    fn obj_writer_round_trips_exactly() {
        let m = box_mesh(vec3(0.1, 1.0 / 3.0, -2.5), vec3(0.7, 1.3, 2.0 / 3.0));
        let mut buf = Vec::new();
        write_obj(&mut buf, &[ObjGroup { name: "a", mesh: &m }, ObjGroup { name: "b", mesh: &m }]).unwrap();
        let back = parse_obj(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(&back.vertices()[..8], m.vertices());
        assert_eq!(back.triangle_count(), 24);
    }
}
