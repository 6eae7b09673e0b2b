//! Per-triangle predicates: watertight ray intersection, closest point and a
//! tolerance-aware triangle/triangle penetration test.

use crate::geom::{vec3, Vec3};

use super::PENETRATION_TOLERANCE;

/// Rays whose projected triangle area falls below this are treated as misses.
pub const DETERMINANT_EPSILON: f64 = 1e-12;

/// Fixed, deliberately irregular direction used for ray-parity containment.
pub const PARITY_DIRECTION: Vec3 = vec3(0.528_734_591_020_385_8, 0.619_748_150_283_122_5, 0.579_999_604_398_104_4);

/// Watertight ray/triangle intersection (shear-and-scale formulation).
/// Returns the hit distance along `dir` (in units of `|dir|`), which may be
/// negative or zero; callers filter the range they need.
pub fn ray_triangle(origin: Vec3, dir: Vec3, tri: &[Vec3; 3]) -> Option<f64> {
    let abs = [dir.x.abs(), dir.y.abs(), dir.z.abs()];
    let kz = if abs[0] > abs[1] {
        if abs[0] > abs[2] {
            0
        } else {
            2
        }
    } else if abs[1] > abs[2] {
        1
    } else {
        2
    };
    let mut kx = (kz + 1) % 3;
    let mut ky = (kx + 1) % 3;
    if dir[kz] < 0.0 {
        std::mem::swap(&mut kx, &mut ky);
    }
    let sx = dir[kx] / dir[kz];
    let sy = dir[ky] / dir[kz];
    let sz = 1.0 / dir[kz];

    let a = tri[0] - origin;
    let b = tri[1] - origin;
    let c = tri[2] - origin;
    let ax = a[kx] - sx * a[kz];
    let ay = a[ky] - sy * a[kz];
    let bx = b[kx] - sx * b[kz];
    let by = b[ky] - sy * b[kz];
    let cx = c[kx] - sx * c[kz];
    let cy = c[ky] - sy * c[kz];

    let u = cx * by - cy * bx;
    let v = ax * cy - ay * cx;
    let w = bx * ay - by * ax;
    if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
        return None;
    }
    let det = u + v + w;
    if det.abs() < DETERMINANT_EPSILON {
        return None;
    }
    let t = (u * sz * a[kz] + v * sz * b[kz] + w * sz * c[kz]) / det;
    Some(t)
}

/// Closest point on triangle `abc` to `p`.
pub fn closest_point(p: Vec3, tri: &[Vec3; 3]) -> Vec3 {
    let [a, b, c] = *tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn point_distance(p: Vec3, tri: &[Vec3; 3]) -> f64 {
    p.distance(closest_point(p, tri))
}

/// Interval of the triangle's cut by the plane (signed distances `d`) projected
/// onto `axis`. Requires vertices strictly on both sides of the plane.
fn plane_cut_interval(tri: &[Vec3; 3], d: [f64; 3], axis: Vec3) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..3 {
        let j = (i + 1) % 3;
        if d[i] == 0.0 {
            let s = axis.dot(tri[i]);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        if (d[i] < 0.0 && d[j] > 0.0) || (d[i] > 0.0 && d[j] < 0.0) {
            let p = tri[i] + (tri[j] - tri[i]) * (d[i] / (d[i] - d[j]));
            let s = axis.dot(p);
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    (lo, hi)
}

fn signed_distances(tri: &[Vec3; 3], origin: Vec3, unit_normal: Vec3) -> [f64; 3] {
    [
        unit_normal.dot(tri[0] - origin),
        unit_normal.dot(tri[1] - origin),
        unit_normal.dot(tri[2] - origin),
    ]
}

fn straddles(d: &[f64; 3]) -> bool {
    let tol = PENETRATION_TOLERANCE;
    let max = d[0].max(d[1]).max(d[2]);
    let min = d[0].min(d[1]).min(d[2]);
    max > tol && min < -tol
}

/// True when the two triangles cross each other with an intersection segment
/// longer than the penetration tolerance, each crossing the other's plane by more
/// than the tolerance. Coplanar and merely touching pairs report false.
pub fn triangles_penetrate(a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    let nb = (b[1] - b[0]).cross(b[2] - b[0]);
    let na = (a[1] - a[0]).cross(a[2] - a[0]);
    let (lnb, lna) = (nb.norm(), na.norm());
    if lnb == 0.0 || lna == 0.0 {
        return false;
    }
    let nb = nb / lnb;
    let da = signed_distances(a, b[0], nb);
    if !straddles(&da) {
        return false;
    }
    let na = na / lna;
    let db = signed_distances(b, a[0], na);
    if !straddles(&db) {
        return false;
    }
    let line = na.cross(nb);
    let len = line.norm();
    if len < 1e-15 {
        return false;
    }
    let line = line / len;
    let (a0, a1) = plane_cut_interval(a, da, line);
    let (b0, b1) = plane_cut_interval(b, db, line);
    a1.min(b1) - a0.max(b0) > PENETRATION_TOLERANCE
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [Vec3; 3] {
        [Vec3::from_array(a), Vec3::from_array(b), Vec3::from_array(c)]
    }

    #[test]
    fn ray_hits_center_and_misses_outside() {
        let t = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let hit = ray_triangle(vec3(0.2, 0.2, 1.0), vec3(0.0, 0.0, -1.0), &t).unwrap();
        assert!((hit - 1.0).abs() < 1e-15);
        assert!(ray_triangle(vec3(0.8, 0.8, 1.0), vec3(0.0, 0.0, -1.0), &t).is_none());
        // Parallel ray misses.
        assert!(ray_triangle(vec3(0.2, 0.2, 1.0), vec3(1.0, 0.0, 0.0), &t).is_none());
    }

    #[test]
    fn shared_edge_is_not_missed() {
        // Two triangles sharing the diagonal of the unit square; a ray through a
        // point on the diagonal must hit at least one of them.
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]);
        let t2 = tri([0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]);
        for k in 1..50 {
            let s = k as f64 / 50.0;
            let o = vec3(s, s, 1.0);
            let d = vec3(0.0, 0.0, -1.0);
            assert!(ray_triangle(o, d, &t1).is_some() || ray_triangle(o, d, &t2).is_some());
        }
    }

    #[test]
    fn closest_point_regions() {
        let t = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!((closest_point(vec3(0.2, 0.2, 3.0), &t) - vec3(0.2, 0.2, 0.0)).norm() < 1e-15);
        assert_eq!(closest_point(vec3(-1.0, -1.0, 0.0), &t), Vec3::ZERO);
        assert!((point_distance(vec3(1.0, 1.0, 0.0), &t) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn crossing_triangles_penetrate() {
        let a = tri([-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.0, -0.5, -1.0], [0.0, 0.5, -1.0], [0.0, 0.0, 1.0]);
        assert!(triangles_penetrate(&a, &b));
        assert!(triangles_penetrate(&b, &a));
    }

    #[test]
    fn coplanar_and_touching_triangles_do_not_penetrate() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.1, 0.1, 0.0], [0.9, 0.0, 0.0], [0.0, 0.9, 0.0]);
        assert!(!triangles_penetrate(&a, &b));
        // b stands on a, touching along a segment.
        let c = tri([0.1, 0.1, 0.0], [0.5, 0.1, 0.0], [0.3, 0.1, 1.0]);
        assert!(!triangles_penetrate(&a, &c));
        // ...and sinks just below the tolerance.
        let d = tri([0.1, 0.1, -5e-9], [0.5, 0.1, -5e-9], [0.3, 0.1, 1.0]);
        assert!(!triangles_penetrate(&a, &d));
        let e = tri([0.1, 0.1, -1e-3], [0.5, 0.1, -1e-3], [0.3, 0.1, 1.0]);
        assert!(triangles_penetrate(&a, &e));
    }

    #[test]
    fn separated_but_plane_crossing_triangles_do_not_penetrate() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([3.0, 3.0, -1.0], [3.0, 4.0, -1.0], [3.0, 3.5, 1.0]);
        assert!(!triangles_penetrate(&a, &b));
    }
}
