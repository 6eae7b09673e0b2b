//! Sample concrete scenes from a scenario and export one as JSON and OBJ.
//!
//! `cargo run --example sample_scene -- scenarios/vacuum.scn 3`

use scenium::export::{write_scene_obj, SceneDocument};
use scenium::lang::parse;
use scenium::sampler::{Sampler, SamplerConfig};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "scenarios/vacuum.scn".into());
    let count: u64 = std::env::args().nth(2).map_or(3, |n| n.parse().expect("count"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let sampler = Sampler::new(parse(&src).expect("parse"), SamplerConfig::default()).expect("program");
    for seed in 0..count {
        let scene = sampler.sample_scene(seed).expect("sample");
        println!("seed {seed}: {} rejections", scene.rejections);
        for o in scene.objects() {
            let p = o.pose.position;
            println!("  {:<8} {:<7} at ({:6.2}, {:6.2}, {:5.2}) yaw {:7.2} deg", o.name, o.kind, p.x, p.y, p.z, o.pose.orientation.yaw().to_degrees());
        }
        if seed == 0 {
            let json = SceneDocument::from_scene(&scene).to_json();
            println!("  JSON: {} bytes", json.len());
            let mut obj = Vec::new();
            write_scene_obj(&mut obj, &scene).unwrap();
            println!("  OBJ: {} lines", obj.iter().filter(|&&b| b == b'\n').count());
        }
    }
}
