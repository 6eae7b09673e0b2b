use std::sync::Arc;

use crate::geom::{vec3, Pose, Vec3};
use crate::rng::SceneRng;

use super::shape::box_mesh;
use super::{Aabb, IndexedMesh, MeshError, Shape, TriMesh, PENETRATION_TOLERANCE};

/// Default maximum tilt of a face normal from +Z for it to count as "top".
pub const DEFAULT_TOP_SURFACE_ANGLE: f64 = 80.0 * std::f64::consts::PI / 180.0;

const VOLUME_SAMPLING_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone)]
pub enum Region {
    /// Triangles in the global frame, sampled by area.
    Surface(Arc<IndexedMesh>),
    /// Interior of a watertight global mesh.
    Volume(Arc<IndexedMesh>),
    Box(Aabb),
    Empty,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: Vec3,
    /// Outward unit normal of the surface at `point`.
    pub normal: Vec3,
}

impl Region {
    pub fn surface(mesh: TriMesh) -> Region {
        Region::Surface(Arc::new(IndexedMesh::new(mesh)))
    }

    pub fn volume(mesh: TriMesh) -> Result<Region, MeshError> {
        if !mesh.is_watertight() {
            return Err(MeshError::NonWatertight);
        }
        Ok(Region::Volume(Arc::new(IndexedMesh::new(mesh))))
    }

    pub fn aabb(&self) -> Option<Aabb> {
        match self {
            Region::Surface(m) | Region::Volume(m) => Some(m.aabb()),
            Region::Box(b) => Some(*b),
            Region::Empty | Region::All => None,
        }
    }

    pub fn contains_point(&self, p: Vec3) -> Result<bool, MeshError> {
        match self {
            Region::Surface(m) => Ok(m.near_surface(p, PENETRATION_TOLERANCE)),
            Region::Volume(m) => m.contains_point(p),
            Region::Box(b) => Ok(b.inflated(PENETRATION_TOLERANCE).contains(p)),
            Region::Empty => Ok(false),
            Region::All => Ok(true),
        }
    }

    /// Distance from `p` to the region's boundary surface.
    pub fn distance_to_surface(&self, p: Vec3) -> f64 {
        match self {
            Region::Surface(m) | Region::Volume(m) => m.distance_to_surface(p),
            Region::Box(b) => IndexedMesh::new(box_mesh(b.center(), b.extent())).distance_to_surface(p),
            Region::Empty => f64::INFINITY,
            Region::All => 0.0,
        }
    }

    pub fn sample(&self, rng: &mut SceneRng) -> Result<Vec3, MeshError> {
        match self {
            Region::Surface(_) => self.sample_surface(rng),
            Region::Volume(_) => self.sample_volume(rng),
            Region::Box(b) => Ok(vec3(
                rng.range(b.min.x, b.max.x),
                rng.range(b.min.y, b.max.y),
                rng.range(b.min.z, b.max.z),
            )),
            Region::Empty => Err(MeshError::EmptyRegion),
            Region::All => Err(MeshError::Unbounded),
        }
    }

    /// Area-weighted triangle choice, then a uniform barycentric point.
    /// Returns the point and the index of the triangle it lies on.
    pub fn sample_surface_with_triangle(&self, rng: &mut SceneRng) -> Result<(Vec3, usize), MeshError> {
        let m = match self {
            Region::Surface(m) | Region::Volume(m) => m,
            Region::Empty => return Err(MeshError::EmptyRegion),
            Region::Box(b) => {
                let r = Region::surface(box_mesh(b.center(), b.extent()));
                return r.sample_surface_with_triangle(rng);
            }
            Region::All => return Err(MeshError::Unbounded),
        };
        let cumulative = m.cumulative_area();
        let total = cumulative.last().copied().unwrap_or(0.0);
        if total <= 0.0 {
            return Err(MeshError::EmptyRegion);
        }
        let target = rng.unit_open() * total;
        let t = cumulative.partition_point(|&c| c <= target).min(cumulative.len() - 1);
        let [a, b, c] = m.mesh().triangle(t);
        let r1 = rng.unit_open().sqrt();
        let r2 = rng.unit_open();
        Ok((a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2), t))
    }

    pub fn sample_surface(&self, rng: &mut SceneRng) -> Result<Vec3, MeshError> {
        self.sample_surface_with_triangle(rng).map(|(p, _)| p)
    }

    /// Rejection sampling from the bounding box.
    pub fn sample_volume(&self, rng: &mut SceneRng) -> Result<Vec3, MeshError> {
        let bounds = match self {
            Region::Volume(m) => {
                if m.is_empty() {
                    return Err(MeshError::EmptyRegion);
                }
                m.aabb()
            }
            Region::Surface(_) => return Err(MeshError::NonWatertight),
            _ => return self.sample(rng),
        };
        for _ in 0..VOLUME_SAMPLING_ATTEMPTS {
            let p = vec3(
                rng.range(bounds.min.x, bounds.max.x),
                rng.range(bounds.min.y, bounds.max.y),
                rng.range(bounds.min.z, bounds.max.z),
            );
            if self.contains_point(p)? {
                return Ok(p);
            }
        }
        Err(MeshError::DegenerateVolume(VOLUME_SAMPLING_ATTEMPTS))
    }

    fn indexed(&self) -> Option<Arc<IndexedMesh>> {
        match self {
            Region::Surface(m) | Region::Volume(m) => Some(m.clone()),
            Region::Box(b) => Some(Arc::new(IndexedMesh::new(box_mesh(b.center(), b.extent())))),
            Region::Empty | Region::All => None,
        }
    }
}

/// Drops `p` straight down (global -Z) onto the region's surface, trying straight
/// up when nothing lies below.
pub fn project_onto(region: &Region, p: Vec3) -> Result<Projection, MeshError> {
    let mesh = region.indexed().ok_or(MeshError::NoProjection)?;
    for dir in [vec3(0.0, 0.0, -1.0), vec3(0.0, 0.0, 1.0)] {
        if let Some((t, tri)) = mesh.ray_nearest(p, dir, f64::INFINITY) {
            // Height from the triangle's plane equation: exact for level faces.
            let [a, b, c] = mesh.mesh().triangle(tri);
            let n = (b - a).cross(c - a);
            let z = if n.z.abs() > 1e-300 {
                a.z - (n.x * (p.x - a.x) + n.y * (p.y - a.y)) / n.z
            } else {
                p.z + dir.z * t
            };
            return Ok(Projection {
                point: vec3(p.x, p.y, z),
                normal: n.normalized(),
            });
        }
    }
    Err(MeshError::NoProjection)
}

/// Upward-facing triangles of a placed shape.
pub fn top_surface(shape: &Shape, pose: &Pose, dims: Vec3) -> Region {
    let mesh = shape.unit_mesh().transformed(pose, dims);
    top_surface_of(&mesh, DEFAULT_TOP_SURFACE_ANGLE)
}

/// Triangles whose outward normal is within `max_tilt` radians of +Z.
pub fn top_surface_of(mesh: &TriMesh, max_tilt: f64) -> Region {
    let threshold = max_tilt.cos();
    let keep: Vec<usize> = (0..mesh.triangle_count())
        .filter(|&i| mesh.triangle_normal(i).z > threshold)
        .collect();
    if keep.is_empty() {
        return Region::Empty;
    }
    Region::surface(mesh.subset(&keep))
}
