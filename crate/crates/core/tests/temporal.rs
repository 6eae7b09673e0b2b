use std::collections::HashMap;

use scenium::lang::ast::StatementKind;
use scenium::lang::parse;
use scenium::temporal::*;

/// Every formula of depth at most `depth` over atoms 0 and 1.
fn formulas(depth: usize) -> Vec<FormulaRef> {
    if depth == 1 {
        return vec![atom(0), atom(1)];
    }
    let smaller = formulas(depth - 1);
    let mut out = smaller.clone();
    for f in &smaller {
        out.push(not(f.clone()));
        out.push(next(f.clone()));
        out.push(always(f.clone()));
        out.push(eventually(f.clone()));
    }
    for a in &smaller {
        for b in &smaller {
            out.push(and(a.clone(), b.clone()));
            out.push(or(a.clone(), b.clone()));
            out.push(until(a.clone(), b.clone()));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// All traces over two atoms with length in `1..=max_len`.
fn traces(max_len: usize) -> Vec<Vec<Vec<bool>>> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        for code in 0..(1u32 << (2 * len)) {
            out.push(
                (0..len)
                    .map(|k| vec![code >> (2 * k) & 1 == 1, code >> (2 * k + 1) & 1 == 1])
                    .collect(),
            );
        }
    }
    out
}

#[test]
fn monitor_agrees_with_whole_trace_evaluator() {
    let fs = formulas(3);
    let ts = traces(5);
    // Commutative and idempotent variants collapse to one normalized tree.
    assert!(fs.len() > 500 && ts.len() == 1364);
    for f in &fs {
        for t in &ts {
            let online = monitor_trace(f, t).unwrap();
            let offline = evaluate_whole_trace(f, t).unwrap();
            assert_eq!(online, offline, "{f:?} on {t:?}");
        }
    }
}

#[test]
fn definitive_verdicts_survive_extension() {
    let fs = formulas(3);
    let prefixes = traces(5);
    let suffixes = traces(3);
    for f in &fs {
        // Verdict of every prefix, walked in order so states are reused.
        let mut states: HashMap<Vec<Vec<bool>>, MonitorState> = HashMap::new();
        for p in &prefixes {
            let parent = if p.len() == 1 {
                MonitorState::new(f.clone())
            } else {
                states[&p[..p.len() - 1].to_vec()].clone()
            };
            let state = parent.progress(&p[p.len() - 1]);
            let verdict = state.finalize();
            states.insert(p.clone(), state.clone());
            if !verdict.is_definitive() {
                continue;
            }
            for s in &suffixes {
                let mut extended = p.clone();
                extended.extend(s.iter().cloned());
                let mut st = state.clone();
                for step in s {
                    st = st.progress(step);
                }
                assert_eq!(st.finalize(), verdict);
                assert_eq!(evaluate_whole_trace(f, &extended).unwrap(), verdict, "{f:?} {extended:?}");
            }
        }
    }
}

#[test]
fn negation_swaps_verdicts() {
    let fs = formulas(3);
    let ts = traces(4);
    for f in &fs {
        let nf = not(f.clone());
        for t in &ts {
            assert_eq!(monitor_trace(&nf, t).unwrap(), monitor_trace(f, t).unwrap().negated());
        }
    }
}

fn requirement(src: &str) -> TemporalRequirement {
    let p = parse(src).unwrap();
    match &p.statements[0].kind {
        StatementKind::RequireTemporal(e) | StatementKind::Require(e) => TemporalRequirement::from_expr(e),
        other => panic!("{other:?}"),
    }
}

#[test]
fn parenthesized_and_bare_requirements_agree() {
    let a = requirement("require always p");
    let b = requirement("require (always p)");
    assert_eq!(a.formula, b.formula);
    let c = requirement("require (carA not in intersection and carB not in intersection\n    until carC in intersection)");
    assert_eq!(c.atoms.len(), 3);
    assert_eq!(c.formula, until(and(not(atom(0)), not(atom(1))), atom(2)));
}

#[test]
fn shared_predicates_share_atoms() {
    let r = requirement("require (not ego can see car) until distance to car < 75 or not ego can see car");
    assert_eq!(r.atom_names(), vec!["(can-see ego car)", "(< (distance-to car) 75.0)"]);
}

#[test]
fn intersection_order_scenarios() {
    // carA, carB, carC membership per step.
    let r = requirement("require (carA not in intersection and carB not in intersection\n    until carC in intersection)");
    let good = vec![vec![false, false, false], vec![false, false, true], vec![true, false, true]];
    assert_eq!(monitor_trace(&r.formula, &good).unwrap(), Verdict::True);
    let bad = vec![vec![false, false, false], vec![true, false, false]];
    assert_eq!(monitor_trace(&r.formula, &bad).unwrap(), Verdict::False);
    let open = vec![vec![false, false, false]; 4];
    assert_eq!(monitor_trace(&r.formula, &open).unwrap(), Verdict::PresumablyFalse);
}

#[test]
fn trace_files_feed_the_monitor() {
    let r = requirement("require (not ego can see car) until distance to car < 75");
    let names = r.atom_names();
    let keys: Vec<String> = names.iter().map(|n| trace_key(n)).collect();
    assert_eq!(keys[0], "(can-see_ego_car)");
    let text = format!("# header\n{a}=0 {b}=0\n\n{a}=0 {b}=1 other=1\n", a = keys[0], b = keys[1]);
    let t = read_atom_trace(&text, &names).unwrap();
    assert_eq!(t, vec![vec![false, false], vec![false, true]]);
    assert_eq!(monitor_trace(&r.formula, &t).unwrap(), Verdict::True);
    let p = requirement("require always p");
    assert!(matches!(read_atom_trace("p=2\n", &p.atom_names()), Err(TemporalError::BadToken { line: 1, .. })));
    assert!(matches!(read_atom_trace("q=1\n", &p.atom_names()), Err(TemporalError::UnboundAtom { .. })));
    assert_eq!(read_atom_trace("\n", &p.atom_names()), Err(TemporalError::EmptyTrace));
}
