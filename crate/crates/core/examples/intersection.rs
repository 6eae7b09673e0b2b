//! A car hidden behind a building until it is close: sample, simulate and
//! keep only runs that satisfy the temporal requirement.

use scenium::lang::parse;
use scenium::sampler::{Sampler, SamplerConfig};
use scenium::sim::{simulate_accepted, SimOptions};

fn main() {
    let src = std::fs::read_to_string("scenarios/intersection.scn").expect("run from crates/core");
    let sampler = Sampler::new(parse(&src).unwrap(), SamplerConfig::default()).unwrap();
    let options = SimOptions { steps: 100, dt: 0.1, coverage: None };
    for seed in 0..5 {
        let (scene, out) = simulate_accepted(&sampler, seed, &options).unwrap();
        let seen: String = out.valuations[0].iter().map(|v| if v[0] { '#' } else { '.' }).collect();
        println!("seed {seed}: {:?} after {} rejections, visibility {seen}", out.verdicts, scene.rejections);
    }
}
