//! Occlusion-aware visibility by ray casting over an angular lattice.

use std::f64::consts::{PI, TAU};

use crate::geom::{normalize_angle, vec3, Pose, Vec3};
use crate::mesh::{Aabb, IndexedMesh};

/// Hits closer than this to the target hit count as occluded.
pub const OCCLUSION_TIE: f64 = 1e-9;

pub const DEFAULT_RAY_DENSITY: f64 = 1.0;
pub const DEFAULT_VISIBLE_DISTANCE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewSpec {
    /// Horizontal field of view in radians; `2π` wraps all the way round.
    pub horizontal: f64,
    /// Vertical field of view in radians, at most `π`.
    pub vertical: f64,
    pub visible_distance: f64,
    /// Rays per degree along each lattice axis.
    pub ray_density: f64,
}

impl Default for ViewSpec {
    fn default() -> Self {
        ViewSpec {
            horizontal: TAU,
            vertical: PI,
            visible_distance: DEFAULT_VISIBLE_DISTANCE,
            ray_density: DEFAULT_RAY_DENSITY,
        }
    }
}

impl ViewSpec {
    fn panoramic(&self) -> bool {
        self.horizontal >= TAU
    }

    /// Whether a local-frame direction with the given angles lies in the region.
    pub fn contains_angles(&self, azimuth: f64, elevation: f64) -> bool {
        (self.panoramic() || azimuth.abs() <= self.horizontal / 2.0) && elevation.abs() <= self.vertical / 2.0
    }
}

/// Azimuth (0 = forward, positive toward -X) and elevation of a local direction.
fn angles(d: Vec3) -> (f64, f64) {
    ((-d.x).atan2(d.y), d.z.atan2(d.x.hypot(d.y)))
}

fn direction(azimuth: f64, elevation: f64) -> Vec3 {
    let (sa, ca) = azimuth.sin_cos();
    let (se, ce) = elevation.sin_cos();
    vec3(-sa * ce, ca * ce, se)
}

/// Angular bounds of a target in the viewer frame: an azimuth arc
/// `[start, start + width]` and an elevation interval, all in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularBounds {
    pub azimuth_start: f64,
    pub azimuth_width: f64,
    pub elevation_min: f64,
    pub elevation_max: f64,
}

/// Points on the box outline whose angles bracket the box's angular extent:
/// corners plus evenly spaced points along the twelve edges.
fn outline_points(aabb: &Aabb) -> Vec<Vec3> {
    const EDGE_SAMPLES: usize = 8;
    let c = aabb.corners();
    let mut pts = c.to_vec();
    for i in 0..8 {
        for bit in [1, 2, 4] {
            let j = i | bit;
            if j == i {
                continue;
            }
            for k in 1..EDGE_SAMPLES {
                let t = k as f64 / EDGE_SAMPLES as f64;
                pts.push(c[i] + (c[j] - c[i]) * t);
            }
        }
    }
    pts
}

pub fn angular_bounds(viewer: &Pose, target: &Aabb) -> AngularBounds {
    let local: Vec<Vec3> = outline_points(target)
        .into_iter()
        .map(|p| viewer.inverse_transform_point(p))
        .collect();
    let local_box = Aabb::from_points(local.iter().copied());
    let surrounds_axis = local_box.min.x <= 0.0 && local_box.max.x >= 0.0 && local_box.min.y <= 0.0 && local_box.max.y >= 0.0;
    if surrounds_axis {
        let inside = local_box.contains(Vec3::ZERO);
        return AngularBounds {
            azimuth_start: -PI,
            azimuth_width: TAU,
            elevation_min: if inside || local_box.min.z < 0.0 { -PI / 2.0 } else { local.iter().map(|p| angles(*p).1).fold(f64::INFINITY, f64::min) },
            elevation_max: if inside || local_box.max.z > 0.0 { PI / 2.0 } else { local.iter().map(|p| angles(*p).1).fold(f64::NEG_INFINITY, f64::max) },
        };
    }
    let mut az: Vec<f64> = local.iter().map(|p| angles(*p).0).collect();
    az.sort_by(f64::total_cmp);
    // The covering arc is the complement of the largest gap between azimuths.
    let mut gap_after = az.len() - 1;
    let mut largest = az[0] + TAU - az[az.len() - 1];
    for i in 0..az.len() - 1 {
        let g = az[i + 1] - az[i];
        if g > largest {
            largest = g;
            gap_after = i;
        }
    }
    let start = az[(gap_after + 1) % az.len()];
    let el = local.iter().map(|p| angles(*p).1);
    let (lo, hi) = el.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)));
    AngularBounds {
        azimuth_start: start,
        azimuth_width: TAU - largest,
        elevation_min: lo,
        elevation_max: hi,
    }
}

/// Lattice ray directions (global frame) toward a target box: angles at integer
/// multiples of `1 / ray_density` degrees inside both the target's angular
/// bounds and the view region.
pub fn visible_region_rays(spec: &ViewSpec, viewer: &Pose, target: &Aabb) -> Vec<Vec3> {
    let b = angular_bounds(viewer, target);
    let step = (1.0 / spec.ray_density).to_radians();
    let mut out = Vec::new();
    let el_lo = b.elevation_min.max(-spec.vertical / 2.0);
    let el_hi = b.elevation_max.min(spec.vertical / 2.0);
    if el_lo > el_hi {
        return out;
    }
    let full_circle = b.azimuth_width >= TAU;
    let (k0, k1) = if full_circle {
        // One full turn; the seam at +-180 degrees appears once.
        let n = (PI / step + 1e-9).floor() as i64;
        let seam = (n as f64 * step - PI).abs() < 1e-9;
        (-n + i64::from(seam), n)
    } else {
        (
            (b.azimuth_start / step).ceil() as i64,
            ((b.azimuth_start + b.azimuth_width) / step).floor() as i64,
        )
    };
    let m0 = (el_lo / step).ceil() as i64;
    let m1 = (el_hi / step).floor() as i64;
    for k in k0..=k1 {
        let az = normalize_angle(k as f64 * step);
        for m in m0..=m1 {
            let el = m as f64 * step;
            if spec.contains_angles(az, el) {
                out.push(viewer.orientation.apply(direction(az, el)));
            }
        }
    }
    out
}

/// True when some ray from the viewer, inside its view region, reaches the
/// target within the visible distance strictly before any occluder.
pub fn can_see(viewer: &Pose, target: &IndexedMesh, occluders: &[&IndexedMesh], spec: &ViewSpec) -> bool {
    if target.is_empty() {
        return false;
    }
    let origin = viewer.position;
    let aabb = target.aabb();
    if aabb.distance_squared(origin).sqrt() > spec.visible_distance {
        return false;
    }
    let clear = |dir: Vec3| -> bool {
        let Some((t, _)) = target.ray_nearest(origin, dir, spec.visible_distance) else {
            return false;
        };
        let reach = t + OCCLUSION_TIE;
        occluders.iter().all(|o| {
            let (c, r) = o.bounding_sphere();
            // Cheap skip when the occluder cannot reach the segment.
            let along = (c - origin).dot(dir).clamp(0.0, reach);
            if (origin + dir * along).distance(c) > r {
                return true;
            }
            o.ray_nearest(origin, dir, reach).is_none()
        })
    };
    let vertex_rays = target.mesh().vertices().iter().filter_map(|v| {
        let d = *v - origin;
        let n = d.norm();
        if n == 0.0 {
            return None;
        }
        let (az, el) = angles(viewer.orientation.apply_inverse(d));
        spec.contains_angles(az, el).then_some(d / n)
    });
    if vertex_rays.into_iter().any(clear) {
        return true;
    }
    visible_region_rays(spec, viewer, &aabb).into_iter().any(clear)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Orientation;
    use crate::mesh::Shape;

    fn ball(at: Vec3, d: f64) -> IndexedMesh {
        IndexedMesh::from_shape(&Shape::Sphere, &Pose::new(at, Orientation::IDENTITY), vec3(d, d, d))
    }

    fn slab(at: Vec3, dims: Vec3) -> IndexedMesh {
        IndexedMesh::from_shape(&Shape::Box, &Pose::new(at, Orientation::IDENTITY), dims)
    }

    #[test]
    fn unobstructed_ball_ahead() {
        let target = ball(vec3(0.0, 2.0, 0.0), 0.5);
        assert!(can_see(&Pose::default(), &target, &[], &ViewSpec::default()));
    }

    #[test]
    fn wall_blocks_ball() {
        let target = ball(vec3(0.0, 5.0, 0.0), 0.5);
        // Ball spans +-0.25 at 5 m; a wall at 2.5 m must exceed +-0.125 plus 1 m.
        let wall = slab(vec3(0.0, 2.5, 0.0), vec3(3.0, 0.1, 3.0));
        assert!(!can_see(&Pose::default(), &target, &[&wall], &ViewSpec::default()));
    }

    #[test]
    fn behind_viewer_needs_panoramic_view() {
        let target = ball(vec3(0.0, -3.0, 0.0), 0.5);
        let narrow = ViewSpec { horizontal: 90f64.to_radians(), ..ViewSpec::default() };
        assert!(!can_see(&Pose::default(), &target, &[], &narrow));
        assert!(can_see(&Pose::default(), &target, &[], &ViewSpec::default()));
    }

    #[test]
    fn lattice_counts() {
        // A box subtending about 10 x 10 degrees straight ahead.
        let d = 10.0;
        let half = d * (5f64.to_radians()).tan();
        let aabb = Aabb::new(vec3(-half, d, -half), vec3(half, d + 1e-6, half));
        let n = visible_region_rays(&ViewSpec::default(), &Pose::default(), &aabb).len();
        assert!((81..=121).contains(&n), "{n}");
        let sparse = ViewSpec { ray_density: 0.5, ..ViewSpec::default() };
        let m = visible_region_rays(&sparse, &Pose::default(), &aabb).len();
        assert!((16..=36).contains(&m), "{m}");
        let behind = Aabb::new(vec3(-half, -d, -half), vec3(half, -d + 1e-6, half));
        let narrow = ViewSpec { horizontal: 90f64.to_radians(), ..ViewSpec::default() };
        assert!(visible_region_rays(&narrow, &Pose::default(), &behind).is_empty());
    }

    #[test]
    fn wraparound_arc_behind() {
        let aabb = Aabb::new(vec3(-0.5, -10.0, -0.5), vec3(0.5, -9.0, 0.5));
        let b = angular_bounds(&Pose::default(), &aabb);
        assert!(b.azimuth_width < 10f64.to_radians(), "{b:?}");
        let rays = visible_region_rays(&ViewSpec::default(), &Pose::default(), &aabb);
        assert!(!rays.is_empty());
        assert!(rays.iter().all(|r| r.y < 0.0));
    }

    #[test]
    fn viewer_inside_target_sees_it() {
        let target = slab(Vec3::ZERO, vec3(2.0, 2.0, 2.0));
        assert!(can_see(&Pose::default(), &target, &[], &ViewSpec::default()));
    }
}
