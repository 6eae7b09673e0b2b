//! Four-valued monitoring of a temporal requirement over finite traces.

use scenium::lang::ast::StatementKind;
use scenium::lang::parse;
use scenium::temporal::{evaluate_whole_trace, stl_bounded_eventually_robustness, MonitorState, TemporalRequirement};

fn main() {
    let program = parse("require (not ego can see car) until distance to car < 75").unwrap();
    let StatementKind::RequireTemporal(e) = &program.statements[0].kind else { unreachable!() };
    let req = TemporalRequirement::from_expr(e);
    println!("atoms: {:?}", req.atom_names());
    let traces: [(&str, Vec<Vec<bool>>); 3] = [
        ("hidden, then close", vec![vec![false, false], vec![false, false], vec![false, true]]),
        ("seen while far", vec![vec![false, false], vec![true, false]]),
        ("hidden throughout", vec![vec![false, false]; 4]),
    ];
    for (label, trace) in traces {
        let mut state = MonitorState::new(req.formula.clone());
        for (k, values) in trace.iter().enumerate() {
            state = state.progress(values);
            println!("  {label}: after step {k} -> {}", state.finalize());
        }
        println!("{label}: {} (whole trace {})", state.finalize(), evaluate_whole_trace(&req.formula, &trace).unwrap());
    }
    let coverage = [0.0, 0.1, 0.25, 0.4, 0.45];
    println!("robustness of eventually coverage > 1/3: {:.3}", stl_bounded_eventually_robustness(&coverage, 1.0 / 3.0, 4).unwrap());
}
