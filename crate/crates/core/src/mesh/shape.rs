use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::geom::{vec3, Vec3};

use super::TriMesh;

pub const SPHERE_SUBDIVISIONS: usize = 3;
pub const ROUND_SEGMENTS: usize = 32;

/// Object shape in local coordinates, normalized to the unit cube at the origin.
/// The owning object's width/length/height scale it along x/y/z.
#[derive(Clone)]
pub enum Shape {
    Box,
    Sphere,
    Cylinder,
    Cone,
    /// An arbitrary mesh; `source` names where it came from (a file path or a
    /// `builtin/<name>` procedural model).
    Mesh { source: String, mesh: Arc<TriMesh> },
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl PartialEq for Shape {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Shape::Mesh { source: a, mesh: ma }, Shape::Mesh { source: b, mesh: mb }) => {
                a == b && (Arc::ptr_eq(ma, mb) || ma == mb)
            }
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

impl Shape {
    pub fn from_mesh(source: impl Into<String>, mesh: TriMesh) -> Shape {
        Shape::Mesh {
            source: source.into(),
            mesh: Arc::new(mesh.normalized_to_unit_box()),
        }
    }

    /// Procedural chair: four legs, a seat and a backrest along local -Y.
    pub fn chair() -> Shape {
        static MESH: OnceLock<Arc<TriMesh>> = OnceLock::new();
        let mesh = MESH.get_or_init(|| Arc::new(chair_mesh())).clone();
        Shape::Mesh {
            source: "builtin/chair".into(),
            mesh,
        }
    }

    /// Procedural table: a top slab on four corner legs.
    pub fn table() -> Shape {
        static MESH: OnceLock<Arc<TriMesh>> = OnceLock::new();
        let mesh = MESH.get_or_init(|| Arc::new(table_mesh())).clone();
        Shape::Mesh {
            source: "builtin/table".into(),
            mesh,
        }
    }

    /// Text form used in exported scene documents.
    pub fn descriptor(&self) -> String {
        match self {
            Shape::Box => "box".into(),
            Shape::Sphere => "sphere".into(),
            Shape::Cylinder => "cylinder".into(),
            Shape::Cone => "cone".into(),
            Shape::Mesh { source, .. } => format!("mesh:{source}"),
        }
    }

    pub fn unit_mesh(&self) -> Arc<TriMesh> {
        static BOX: OnceLock<Arc<TriMesh>> = OnceLock::new();
        static SPHERE: OnceLock<Arc<TriMesh>> = OnceLock::new();
        static CYLINDER: OnceLock<Arc<TriMesh>> = OnceLock::new();
        static CONE: OnceLock<Arc<TriMesh>> = OnceLock::new();
        match self {
            Shape::Box => BOX.get_or_init(|| Arc::new(box_mesh(Vec3::ZERO, vec3(1.0, 1.0, 1.0)))).clone(),
            Shape::Sphere => SPHERE.get_or_init(|| Arc::new(icosphere(SPHERE_SUBDIVISIONS))).clone(),
            Shape::Cylinder => CYLINDER.get_or_init(|| Arc::new(cylinder(ROUND_SEGMENTS))).clone(),
            Shape::Cone => CONE.get_or_init(|| Arc::new(cone(ROUND_SEGMENTS))).clone(),
            Shape::Mesh { mesh, .. } => mesh.clone(),
        }
    }
}

/// Axis-aligned box with outward counter-clockwise faces.
pub(crate) fn box_mesh(center: Vec3, size: Vec3) -> TriMesh {
    let h = size * 0.5;
    let vertices = (0..8)
        .map(|i| {
            let sx = if i & 1 == 0 { -h.x } else { h.x };
            let sy = if i & 2 == 0 { -h.y } else { h.y };
            let sz = if i & 4 == 0 { -h.z } else { h.z };
            center + vec3(sx, sy, sz)
        })
        .collect();
    let triangles = vec![
        [0, 2, 1], [1, 2, 3], // -z
        [4, 5, 6], [5, 7, 6], // +z
        [0, 1, 4], [1, 5, 4], // -y
        [2, 6, 3], [3, 6, 7], // +y
        [0, 4, 2], [2, 4, 6], // -x
        [1, 3, 5], [3, 7, 5], // +x
    ];
    TriMesh::new(vertices, triangles).expect("box indices are valid")
}

fn compound(parts: &[(Vec3, Vec3)]) -> TriMesh {
    let meshes: Vec<TriMesh> = parts.iter().map(|&(lo, hi)| box_mesh((lo + hi) * 0.5, hi - lo)).collect();
    TriMesh::merged(meshes.iter())
}

fn chair_mesh() -> TriMesh {
    let g = 0.001;
    let leg = 0.15;
    let mut parts = Vec::new();
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            let x0 = if sx < 0.0 { -0.5 } else { 0.5 - leg };
            let y0 = if sy < 0.0 { -0.5 } else { 0.5 - leg };
            parts.push((vec3(x0, y0, -0.5), vec3(x0 + leg, y0 + leg, 0.0 - g)));
        }
    }
    parts.push((vec3(-0.5, -0.5, 0.0), vec3(0.5, 0.5, 0.1)));
    parts.push((vec3(-0.5, -0.5, 0.1 + g), vec3(0.5, -0.4, 0.5)));
    compound(&parts)
}

fn table_mesh() -> TriMesh {
    let g = 0.001;
    let leg = 0.06;
    let mut parts = Vec::new();
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            let x0 = if sx < 0.0 { -0.5 } else { 0.5 - leg };
            let y0 = if sy < 0.0 { -0.5 } else { 0.5 - leg };
            parts.push((vec3(x0, y0, -0.5), vec3(x0 + leg, y0 + leg, 0.4 - g)));
        }
    }
    parts.push((vec3(-0.5, -0.5, 0.4), vec3(0.5, 0.5, 0.5)));
    compound(&parts)
}

/// Icosphere of radius 0.5 after `levels` rounds of 4-way subdivision.
fn icosphere(levels: usize) -> TriMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, phi, 0.0), (1.0, phi, 0.0), (-1.0, -phi, 0.0), (1.0, -phi, 0.0),
        (0.0, -1.0, phi), (0.0, 1.0, phi), (0.0, -1.0, -phi), (0.0, 1.0, -phi),
        (phi, 0.0, -1.0), (phi, 0.0, 1.0), (-phi, 0.0, -1.0), (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| vec3(x, y, z).normalized() * 0.5)
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..levels {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let p = ((vertices[a as usize] + vertices[b as usize]) * 0.5).normalized() * 0.5;
                vertices.push(p);
                (vertices.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(vertices, faces).expect("icosphere indices are valid")
}

fn ring(segments: usize, z: f64) -> impl Iterator<Item = Vec3> {
    (0..segments).map(move |i| {
        let a = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
        vec3(0.5 * a.cos(), 0.5 * a.sin(), z)
    })
}

fn cylinder(segments: usize) -> TriMesh {
    let n = segments as u32;
    let mut vertices: Vec<Vec3> = ring(segments, -0.5).chain(ring(segments, 0.5)).collect();
    vertices.push(vec3(0.0, 0.0, -0.5));
    vertices.push(vec3(0.0, 0.0, 0.5));
    let (bottom, top) = (2 * n, 2 * n + 1);
    let mut triangles = Vec::with_capacity(4 * segments);
    for i in 0..n {
        let j = (i + 1) % n;
        triangles.push([i, j, n + j]);
        triangles.push([i, n + j, n + i]);
        triangles.push([bottom, j, i]);
        triangles.push([top, n + i, n + j]);
    }
    TriMesh::new(vertices, triangles).expect("cylinder indices are valid")
}

fn cone(segments: usize) -> TriMesh {
    let n = segments as u32;
    let mut vertices: Vec<Vec3> = ring(segments, -0.5).collect();
    vertices.push(vec3(0.0, 0.0, 0.5));
    vertices.push(vec3(0.0, 0.0, -0.5));
    let (apex, base) = (n, n + 1);
    let mut triangles = Vec::with_capacity(2 * segments);
    for i in 0..n {
        let j = (i + 1) % n;
        triangles.push([i, j, apex]);
        triangles.push([base, j, i]);
    }
    TriMesh::new(vertices, triangles).expect("cone indices are valid")
}
