//! Exact mesh intersection with and without the acceleration heuristics.

use std::time::Instant;

use scenium::geom::{vec3, Orientation, Pose};
use scenium::mesh::{meshes_intersect, Heuristics, IndexedMesh, Shape};

fn main() {
    let table = IndexedMesh::from_shape(&Shape::table(), &Pose::new(vec3(0.0, 0.0, 0.375), Orientation::IDENTITY), vec3(1.2, 0.8, 0.75));
    for (label, x, y) in [("tucked under the top", 0.0, -0.55), ("pushed into a leg", 0.45, -0.3)] {
        let pose = Pose::new(vec3(x, y, 0.5), Orientation::IDENTITY);
        let chair = IndexedMesh::from_shape(&Shape::chair(), &pose, vec3(0.5, 0.5, 1.0));
        for mode in [Heuristics::On, Heuristics::Off] {
            let t = Instant::now();
            let hit = meshes_intersect(&table, &chair, mode);
            println!(
                "chair {label}: boxes overlap {}, {mode:?}: intersect {hit} in {:?}",
                table.aabb().overlaps(&chair.aabb()),
                t.elapsed()
            );
        }
    }
}
