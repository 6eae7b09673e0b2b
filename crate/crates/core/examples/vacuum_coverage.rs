//! Robot-vacuum falsification: how toys on the floor affect the robustness of
//! `eventually within 300 s (coverage > 1/3)`.

use scenium::lang::parse;
use scenium::sampler::{Sampler, SamplerConfig};
use scenium::sim::{simulate_accepted, CoverageSpec, SimOptions};
use scenium::temporal::stl_bounded_eventually_robustness;

fn main() {
    let runs: u64 = std::env::args().nth(1).map_or(5, |n| n.parse().expect("runs"));
    let base = std::fs::read_to_string("scenarios/vacuum.scn").expect("run from crates/core");
    let options = SimOptions { steps: 3000, dt: 0.1, coverage: Some(CoverageSpec::new("floor")) };
    for toys in [0, 1, 2, 4, 8, 16] {
        let src = format!("{base}{}", "new Toy on floor\n".repeat(toys));
        let sampler = Sampler::new(parse(&src).unwrap(), SamplerConfig::default()).unwrap();
        let (mut sum, mut falsified) = (0.0, 0);
        for seed in 0..runs {
            let (_, out) = simulate_accepted(&sampler, seed, &options).unwrap();
            let r = stl_bounded_eventually_robustness(&out.trace.signal("coverage"), 1.0 / 3.0, 3000).unwrap();
            sum += r;
            falsified += usize::from(r < 0.0);
        }
        println!("{toys:2} toys: mean robustness {:+.3}, falsified {falsified}/{runs}", sum / runs as f64);
    }
}
