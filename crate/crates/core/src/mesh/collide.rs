//! Solid/solid intersection. The fast path (bounding spheres, boxes, BVH pair
//! traversal) and the exhaustive path share the same triangle predicate and the
//! same containment step, so they agree exactly.

use crate::geom::{Pose, Vec3};

use super::{tri, IndexedMesh, Shape, PENETRATION_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristics {
    #[default]
    On,
    /// Every triangle pair, brute-force containment. Reference behaviour.
    Off,
}

pub fn intersects(
    shape_a: &Shape,
    pose_a: &Pose,
    dims_a: Vec3,
    shape_b: &Shape,
    pose_b: &Pose,
    dims_b: Vec3,
) -> bool {
    let a = IndexedMesh::from_shape(shape_a, pose_a, dims_a);
    let b = IndexedMesh::from_shape(shape_b, pose_b, dims_b);
    meshes_intersect(&a, &b, Heuristics::On)
}

/// True iff the closed solids overlap by more than the penetration tolerance.
pub fn meshes_intersect(a: &IndexedMesh, b: &IndexedMesh, mode: Heuristics) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    match mode {
        Heuristics::On => {
            let (ca, ra) = a.bounding_sphere();
            let (cb, rb) = b.bounding_sphere();
            if ca.distance(cb) > ra + rb {
                return false;
            }
            if !a.aabb().overlaps(&b.aabb()) {
                return false;
            }
            let (ma, mb) = (a.mesh(), b.mesh());
            let crossing = a.bvh().any_overlapping_pair(b.bvh(), |ta, tb| {
                tri::triangles_penetrate(&ma.triangle(ta), &mb.triangle(tb))
            });
            crossing || nested(a, b, mode) || nested(b, a, mode)
        }
        Heuristics::Off => {
            let (ma, mb) = (a.mesh(), b.mesh());
            let crossing = (0..ma.triangle_count()).any(|ta| {
                let t = ma.triangle(ta);
                (0..mb.triangle_count()).any(|tb| tri::triangles_penetrate(&t, &mb.triangle(tb)))
            });
            crossing || nested(a, b, mode) || nested(b, a, mode)
        }
    }
}

fn near_surface(m: &IndexedMesh, p: Vec3, mode: Heuristics) -> bool {
    match mode {
        Heuristics::On => m.near_surface(p, PENETRATION_TOLERANCE),
        Heuristics::Off => {
            let mesh = m.mesh();
            (0..mesh.triangle_count()).any(|t| tri::point_distance(p, &mesh.triangle(t)) <= PENETRATION_TOLERANCE)
        }
    }
}

fn parity_inside(m: &IndexedMesh, p: Vec3, mode: Heuristics) -> bool {
    let crossings = match mode {
        Heuristics::On => m.bvh().count_crossings(m.mesh(), p, tri::PARITY_DIRECTION),
        Heuristics::Off => {
            let mesh = m.mesh();
            (0..mesh.triangle_count())
                .filter(|&t| matches!(tri::ray_triangle(p, tri::PARITY_DIRECTION, &mesh.triangle(t)), Some(d) if d > 0.0))
                .count()
        }
    };
    crossings % 2 == 1
}

/// With no crossing triangle pairs, `inner` is either entirely inside `outer` or
/// entirely outside it (up to surface contact). Decided by the first probe point
/// of `inner` (vertices, then face centroids) that is clear of `outer`'s surface;
/// when every probe lies on that surface the solids coincide.
fn nested(inner: &IndexedMesh, outer: &IndexedMesh, mode: Heuristics) -> bool {
    if !outer.mesh().is_watertight() {
        return false;
    }
    let bounds = outer.aabb().inflated(PENETRATION_TOLERANCE);
    let mesh = inner.mesh();
    let centroids = (0..mesh.triangle_count()).map(|t| {
        let [a, b, c] = mesh.triangle(t);
        (a + b + c) / 3.0
    });
    for p in mesh.vertices().iter().copied().chain(centroids) {
        if !bounds.contains(p) {
            return false;
        }
        if !near_surface(outer, p, mode) {
            return parity_inside(outer, p, mode);
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{vec3, Orientation};

    fn unit(shape: Shape, at: Vec3) -> IndexedMesh {
        IndexedMesh::from_shape(&shape, &Pose::new(at, Orientation::IDENTITY), vec3(1.0, 1.0, 1.0))
    }

    fn both(a: &IndexedMesh, b: &IndexedMesh) -> bool {
        let on = meshes_intersect(a, b, Heuristics::On);
        assert_eq!(on, meshes_intersect(a, b, Heuristics::Off));
        assert_eq!(on, meshes_intersect(b, a, Heuristics::On));
        on
    }

    #[test]
    fn separated_boxes() {
        assert!(!both(&unit(Shape::Box, Vec3::ZERO), &unit(Shape::Box, vec3(3.0, 0.0, 0.0))));
    }

    #[test]
    fn overlapping_boxes_and_identical_boxes() {
        assert!(both(&unit(Shape::Box, Vec3::ZERO), &unit(Shape::Box, vec3(0.5, 0.2, 0.1))));
        assert!(both(&unit(Shape::Box, Vec3::ZERO), &unit(Shape::Box, Vec3::ZERO)));
    }

    #[test]
    fn stacked_boxes_touch_without_intersecting() {
        assert!(!both(&unit(Shape::Box, Vec3::ZERO), &unit(Shape::Box, vec3(0.3, 0.2, 1.0))));
        assert!(both(&unit(Shape::Box, Vec3::ZERO), &unit(Shape::Box, vec3(0.3, 0.2, 1.0 - 1e-4))));
    }

    #[test]
    fn sphere_vs_box_at_half_height() {
        let sphere = IndexedMesh::from_shape(&Shape::Sphere, &Pose::default(), vec3(2.0, 2.0, 2.0));
        assert!(both(&sphere, &unit(Shape::Box, vec3(0.0, 0.0, 0.5))));
    }

    #[test]
    fn nested_solids_intersect() {
        let big = IndexedMesh::from_shape(&Shape::Box, &Pose::default(), vec3(4.0, 4.0, 4.0));
        let small = IndexedMesh::from_shape(&Shape::Sphere, &Pose::default(), vec3(0.5, 0.5, 0.5));
        assert!(both(&big, &small));
    }
}
