//! Occlusion-aware visibility: a wall hides a ball until it is removed.

use scenium::geom::{vec3, Orientation, Pose};
use scenium::mesh::{IndexedMesh, Shape};
use scenium::visibility::{can_see, visible_region_rays, ViewSpec};

fn main() {
    let viewer = Pose::default();
    let ball = IndexedMesh::from_shape(&Shape::Sphere, &Pose::new(vec3(0.0, 8.0, 0.0), Orientation::IDENTITY), vec3(1.0, 1.0, 1.0));
    let wall = IndexedMesh::from_shape(&Shape::Box, &Pose::new(vec3(0.0, 4.0, 0.0), Orientation::IDENTITY), vec3(2.0, 0.2, 2.0));
    for density in [0.5, 1.0, 4.0] {
        let spec = ViewSpec { ray_density: density, ..ViewSpec::default() };
        println!(
            "{density} rays/deg: {} lattice rays, visible {}, behind wall {}",
            visible_region_rays(&spec, &viewer, &ball.aabb()).len(),
            can_see(&viewer, &ball, &[], &spec),
            can_see(&viewer, &ball, &[&wall], &spec),
        );
    }
    let narrow = ViewSpec { horizontal: 60f64.to_radians(), ..ViewSpec::default() };
    let turned = Pose::new(vec3(0.0, 0.0, 0.0), Orientation::about_z(180f64.to_radians()));
    println!("60 deg view facing away: visible {}", can_see(&turned, &ball, &[], &narrow));
}
