//! Triangle meshes, primitive shapes, regions and the exact collision,
//! containment, projection and sampling queries the sampler relies on.

mod bvh;
mod collide;
mod io;
mod region;
mod shape;
pub mod tri;

use std::collections::HashMap;
use std::sync::OnceLock;

use thiserror::Error;

use crate::geom::{vec3, Pose, Vec3};

pub use bvh::Bvh;
pub use collide::{intersects, meshes_intersect, Heuristics};
pub use io::{load_mesh, parse_obj, parse_stl, read_mesh, stl_bytes, write_obj, ObjGroup};
pub use region::{
    project_onto, top_surface, top_surface_of, Projection, Region, DEFAULT_TOP_SURFACE_ANGLE,
};
pub use shape::Shape;

/// Distance below which touching surfaces are not considered to overlap.
pub const PENETRATION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh format error: {0}")]
    Format(String),
    #[error("mesh is not watertight; volume queries are undefined")]
    NonWatertight,
    #[error("region is empty")]
    EmptyRegion,
    #[error("volume sampling gave up after {0} consecutive rejections")]
    DegenerateVolume(usize),
    #[error("no surface below or above the point to project onto")]
    NoProjection,
    #[error("region is unbounded")]
    Unbounded,
    #[error("i/o error reading mesh: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: vec3(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: vec3(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn new(min: Vec3, max: Vec3) -> Aabb {
        Aabb { min, max }
    }

    pub fn from_points<I: IntoIterator<Item = Vec3>>(points: I) -> Aabb {
        points.into_iter().fold(Aabb::EMPTY, |b, p| b.including(p))
    }

    pub fn including(self, p: Vec3) -> Aabb {
        Aabb {
            min: self.min.min(p),
            max: self.max.max(p),
        }
    }

    pub fn union(self, o: Aabb) -> Aabb {
        Aabb {
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    /// Closed-box overlap (touching boxes overlap).
    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min.x <= o.max.x
            && o.min.x <= self.max.x
            && self.min.y <= o.max.y
            && o.min.y <= self.max.y
            && self.min.z <= o.max.z
            && o.min.z <= self.max.z
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn inflated(&self, r: f64) -> Aabb {
        let d = vec3(r, r, r);
        Aabb {
            min: self.min - d,
            max: self.max + d,
        }
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            vec3(a.x, a.y, a.z),
            vec3(b.x, a.y, a.z),
            vec3(a.x, b.y, a.z),
            vec3(b.x, b.y, a.z),
            vec3(a.x, a.y, b.z),
            vec3(b.x, a.y, b.z),
            vec3(a.x, b.y, b.z),
            vec3(b.x, b.y, b.z),
        ]
    }

    /// Squared distance from `p` to the box (0 inside).
    pub fn distance_squared(&self, p: Vec3) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        let dz = (self.min.z - p.z).max(0.0).max(p.z - self.max.z);
        dx * dx + dy * dy + dz * dz
    }

    /// Slab test; returns the entry distance when the ray meets the box within `tmax`.
    pub fn ray_entry(&self, origin: Vec3, inv_dir: Vec3, tmax: f64) -> Option<f64> {
        let mut t0: f64 = 0.0;
        let mut t1 = tmax;
        for axis in 0..3 {
            let ta = (self.min[axis] - origin[axis]) * inv_dir[axis];
            let tb = (self.max[axis] - origin[axis]) * inv_dir[axis];
            let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            // NaN from 0 * inf means the ray lies in the slab plane: keep the bounds.
            if !lo.is_nan() {
                t0 = t0.max(lo);
            }
            if !hi.is_nan() {
                t1 = t1.min(hi);
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

/// An indexed triangle mesh. Triangles are counter-clockwise seen from outside.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    watertight: OnceLock<bool>,
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.triangles == other.triangles
    }
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<TriMesh, MeshError> {
        let n = vertices.len() as u32;
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(MeshError::Format(format!(
                "triangle {t:?} references a vertex out of range (have {n})"
            )));
        }
        if let Some(v) = vertices.iter().find(|v| !v.is_finite()) {
            return Err(MeshError::Format(format!("non-finite vertex {v}")));
        }
        Ok(TriMesh {
            vertices,
            triangles,
            watertight: OnceLock::new(),
        })
    }

    pub fn empty() -> TriMesh {
        TriMesh::new(Vec::new(), Vec::new()).unwrap()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let t = self.triangles[i];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        0.5 * (b - a).cross(c - a).norm()
    }

    /// Outward unit normal of triangle `i` (zero for degenerate triangles).
    pub fn triangle_normal(&self, i: usize) -> Vec3 {
        let [a, b, c] = self.triangle(i);
        (b - a).cross(c - a).normalized()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied())
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// Signed volume via the divergence theorem; positive for outward winding.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let [a, b, c] = self.triangle(i);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    /// Every directed edge appears exactly once and its reverse exactly once,
    /// i.e. each undirected edge is shared by two consistently oriented triangles.
    pub fn is_watertight(&self) -> bool {
        *self.watertight.get_or_init(|| {
            if self.triangles.is_empty() {
                return false;
            }
            let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
            for t in &self.triangles {
                for k in 0..3 {
                    *directed.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
                }
            }
            directed
                .iter()
                .all(|(&(a, b), &count)| count == 1 && directed.get(&(b, a)) == Some(&1))
        })
    }

    /// Applies `p -> pose * (p ⊙ scale)` to every vertex.
    pub fn transformed(&self, pose: &Pose, scale: Vec3) -> TriMesh {
        let vertices = self
            .vertices
            .iter()
            .map(|&v| pose.transform_point(v.component_mul(scale)))
            .collect();
        TriMesh {
            vertices,
            triangles: self.triangles.clone(),
            watertight: self.watertight.clone(),
        }
    }

    /// Rescales and recenters so the bounding box is the unit cube at the origin.
    /// Flat axes (zero extent) are left unscaled.
    pub fn normalized_to_unit_box(&self) -> TriMesh {
        let b = self.aabb();
        if b.is_empty() {
            return self.clone();
        }
        let c = b.center();
        let e = b.extent();
        let inv = |x: f64| if x > 0.0 { 1.0 / x } else { 1.0 };
        let s = vec3(inv(e.x), inv(e.y), inv(e.z));
        let vertices = self
            .vertices
            .iter()
            .map(|&v| (v - c).component_mul(s))
            .collect();
        TriMesh {
            vertices,
            triangles: self.triangles.clone(),
            watertight: self.watertight.clone(),
        }
    }

    /// Concatenates meshes into one vertex/triangle list.
    pub fn merged<'a, I: IntoIterator<Item = &'a TriMesh>>(parts: I) -> TriMesh {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in parts {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
        }
        TriMesh {
            vertices,
            triangles,
            watertight: OnceLock::new(),
        }
    }

    /// Keeps only the listed triangles (vertices are shared, not compacted).
    pub fn subset(&self, keep: &[usize]) -> TriMesh {
        TriMesh {
            vertices: self.vertices.clone(),
            triangles: keep.iter().map(|&i| self.triangles[i]).collect(),
            watertight: OnceLock::new(),
        }
    }
}

/// A mesh placed in the global frame with its BVH and bounds, ready for queries.
#[derive(Debug, Clone)]
pub struct IndexedMesh {
    mesh: TriMesh,
    bvh: Bvh,
    aabb: Aabb,
    center: Vec3,
    radius: f64,
    cumulative_area: OnceLock<Vec<f64>>,
}

impl IndexedMesh {
    pub fn new(mesh: TriMesh) -> IndexedMesh {
        let bvh = Bvh::build(&mesh);
        let aabb = mesh.aabb();
        let center = if aabb.is_empty() { Vec3::ZERO } else { aabb.center() };
        let radius = mesh
            .vertices()
            .iter()
            .map(|v| v.distance(center))
            .fold(0.0, f64::max)
            * (1.0 + 1e-12);
        IndexedMesh {
            mesh,
            bvh,
            aabb,
            center,
            radius,
            cumulative_area: OnceLock::new(),
        }
    }

    pub fn from_shape(shape: &Shape, pose: &Pose, dims: Vec3) -> IndexedMesh {
        IndexedMesh::new(shape.unit_mesh().transformed(pose, dims))
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn aabb(&self) -> Aabb {
        self.aabb
    }

    pub fn bounding_sphere(&self) -> (Vec3, f64) {
        (self.center, self.radius)
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.triangle_count() == 0
    }

    /// Nearest ray hit `(distance, triangle)` with distance in `(0, tmax]`.
    /// `dir` must be a unit vector.
    pub fn ray_nearest(&self, origin: Vec3, dir: Vec3, tmax: f64) -> Option<(f64, usize)> {
        self.bvh.ray_nearest(&self.mesh, origin, dir, tmax)
    }

    /// True when `p` is within `tol` of some triangle.
    pub fn near_surface(&self, p: Vec3, tol: f64) -> bool {
        self.bvh.any_within(&self.mesh, p, tol)
    }

    pub fn distance_to_surface(&self, p: Vec3) -> f64 {
        self.bvh.closest_distance(&self.mesh, p)
    }

    /// Ray-parity inside test for a watertight mesh; points within
    /// [`PENETRATION_TOLERANCE`] of the surface count as contained.
    pub fn contains_point(&self, p: Vec3) -> Result<bool, MeshError> {
        if !self.mesh.is_watertight() {
            return Err(MeshError::NonWatertight);
        }
        if !self.aabb.inflated(PENETRATION_TOLERANCE).contains(p) {
            return Ok(false);
        }
        if self.near_surface(p, PENETRATION_TOLERANCE) {
            return Ok(true);
        }
        Ok(self.bvh.count_crossings(&self.mesh, p, tri::PARITY_DIRECTION) % 2 == 1)
    }

    pub(crate) fn cumulative_area(&self) -> &[f64] {
        self.cumulative_area.get_or_init(|| {
            let mut acc = 0.0;
            (0..self.mesh.triangle_count())
                .map(|i| {
                    acc += self.mesh.triangle_area(i);
                    acc
                })
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_meshes_are_watertight_and_outward() {
        for s in [Shape::Box, Shape::Sphere, Shape::Cylinder, Shape::Cone, Shape::chair(), Shape::table()] {
            let m = s.unit_mesh();
            assert!(m.is_watertight(), "{s:?}");
            assert!(m.signed_volume() > 0.0, "{s:?}");
        }
    }

    #[test]
    fn tessellation_sizes_are_fixed() {
        assert_eq!(Shape::Box.unit_mesh().triangle_count(), 12);
        assert_eq!(Shape::Sphere.unit_mesh().triangle_count(), 1280);
        assert_eq!(Shape::Sphere.unit_mesh().vertices().len(), 642);
        assert_eq!(Shape::Cylinder.unit_mesh().triangle_count(), 128);
        assert_eq!(Shape::Cone.unit_mesh().triangle_count(), 64);
    }

    #[test]
    fn open_mesh_is_not_watertight() {
        let m = Shape::Box.unit_mesh();
        let open = m.subset(&(0..11).collect::<Vec<_>>());
        assert!(!open.is_watertight());
        let r = IndexedMesh::new(open);
        assert_eq!(r.contains_point(Vec3::ZERO), Err(MeshError::NonWatertight));
    }

    #[test]
    fn contains_point_cube() {
        let cube = IndexedMesh::new(Shape::Box.unit_mesh().as_ref().clone());
        assert_eq!(cube.contains_point(Vec3::ZERO), Ok(true));
        assert_eq!(cube.contains_point(vec3(2.0, 0.0, 0.0)), Ok(false));
        assert_eq!(cube.contains_point(vec3(0.5, 0.1, 0.2)), Ok(true));
        assert_eq!(cube.contains_point(vec3(0.5 + 1e-9, 0.1, 0.2)), Ok(true));
        assert_eq!(cube.contains_point(vec3(0.5 + 1e-6, 0.1, 0.2)), Ok(false));
    }

    #[test]
    fn normalization_yields_unit_box() {
        let v = vec![vec3(1.0, 2.0, 3.0), vec3(5.0, 2.0, 3.0), vec3(1.0, 4.0, 3.0), vec3(1.0, 2.0, 9.0)];
        let m = TriMesh::new(v, vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]).unwrap();
        let b = m.normalized_to_unit_box().aabb();
        assert_eq!(b.min, vec3(-0.5, -0.5, -0.5));
        assert_eq!(b.max, vec3(0.5, 0.5, 0.5));
    }

    #[test]
    fn bad_index_is_format_error() {
        let r = TriMesh::new(vec![Vec3::ZERO], vec![[0, 0, 1]]);
        assert!(matches!(r, Err(MeshError::Format(_))));
    }
}
