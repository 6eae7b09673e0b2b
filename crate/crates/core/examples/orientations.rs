//! Intrinsic yaw/pitch/roll rotations, composition and aiming.

use scenium::geom::{angles_toward, vec3, Orientation, Pose};

fn main() {
    let o = Orientation::from_euler(45f64.to_radians(), 0.0, 90f64.to_radians());
    println!("forward {:?}\nup {:?}", o.forward(), o.up());
    let (y, p, r) = o.euler_angles();
    println!("recovered angles: {:.3} {:.3} {:.3} deg", y.to_degrees(), p.to_degrees(), r.to_degrees());

    let parent = Orientation::about_z(30f64.to_radians());
    let child = parent.compose(&Orientation::from_euler(0.0, 10f64.to_radians(), 0.0));
    println!("composed yaw {:.3} pitch {:.3}", child.yaw().to_degrees(), child.pitch().to_degrees());

    let pose = Pose::new(vec3(1.0, 2.0, 3.0), o);
    let p = pose.transform_point(vec3(-2.0, 0.0, 0.0));
    println!("local (-2, 0, 0) is global {p:?}, back: {:?}", pose.inverse_transform_point(p));

    let (yaw, pitch) = angles_toward(vec3(-2.0, 0.0, 0.0), vec3(0.0, 0.0, 1.25)).unwrap();
    println!("aim from (-2,0,0) at (0,0,1.25): yaw {:.3} pitch {:.3} deg", yaw.to_degrees(), pitch.to_degrees());
}
