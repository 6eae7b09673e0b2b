//! Finite-trace LTL monitoring with four-valued verdicts.
//!
//! [`MonitorState`] progresses a formula one step at a time, simplifying after
//! each step; [`evaluate_whole_trace`] is an independent reference evaluator.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lang::ast::{BinaryOp, Expr, ExprKind, TemporalOp, UnaryOp};
use crate::lang::sexpr_expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemporalError {
    #[error("empty trace")]
    EmptyTrace,
    #[error("empty signal")]
    EmptySignal,
    #[error("step {step} has no value for atom {atom}")]
    MissingAtom { step: usize, atom: usize },
    #[error("line {line}: expected name=0 or name=1, found '{token}'")]
    BadToken { line: usize, token: String },
    #[error("line {line}: no value for atom '{atom}'")]
    UnboundAtom { line: usize, atom: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    True,
    False,
    PresumablyTrue,
    PresumablyFalse,
}

impl Verdict {
    /// Requirement acceptance merges definitive and presumptive truth.
    pub fn accepted(self) -> bool {
        matches!(self, Verdict::True | Verdict::PresumablyTrue)
    }

    pub fn is_definitive(self) -> bool {
        matches!(self, Verdict::True | Verdict::False)
    }

    pub fn negated(self) -> Verdict {
        match self {
            Verdict::True => Verdict::False,
            Verdict::False => Verdict::True,
            Verdict::PresumablyTrue => Verdict::PresumablyFalse,
            Verdict::PresumablyFalse => Verdict::PresumablyTrue,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::True => "TRUE",
            Verdict::False => "FALSE",
            Verdict::PresumablyTrue => "PRESUMABLY_TRUE",
            Verdict::PresumablyFalse => "PRESUMABLY_FALSE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type FormulaRef = Arc<Formula>;

/// LTL syntax tree over numbered atoms. Conjunction and disjunction are n-ary
/// and kept flattened, sorted and deduplicated by the smart constructors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Const(bool),
    Atom(usize),
    Not(FormulaRef),
    And(Vec<FormulaRef>),
    Or(Vec<FormulaRef>),
    Next(FormulaRef),
    /// Residual of a progressed `next`: the body must hold at a following step,
    /// which must exist.
    Pending(FormulaRef),
    Always(FormulaRef),
    Eventually(FormulaRef),
    Until(FormulaRef, FormulaRef),
}

pub fn constant(b: bool) -> FormulaRef {
    Arc::new(Formula::Const(b))
}

pub fn atom(i: usize) -> FormulaRef {
    Arc::new(Formula::Atom(i))
}

pub fn not(f: FormulaRef) -> FormulaRef {
    match &*f {
        Formula::Const(b) => constant(!b),
        Formula::Not(inner) => inner.clone(),
        _ => Arc::new(Formula::Not(f)),
    }
}

pub fn and(a: FormulaRef, b: FormulaRef) -> FormulaRef {
    junction(true, vec![a, b])
}

pub fn or(a: FormulaRef, b: FormulaRef) -> FormulaRef {
    junction(false, vec![a, b])
}

pub fn next(f: FormulaRef) -> FormulaRef {
    Arc::new(Formula::Next(f))
}

pub fn always(f: FormulaRef) -> FormulaRef {
    Arc::new(Formula::Always(f))
}

pub fn eventually(f: FormulaRef) -> FormulaRef {
    Arc::new(Formula::Eventually(f))
}

pub fn until(a: FormulaRef, b: FormulaRef) -> FormulaRef {
    Arc::new(Formula::Until(a, b))
}

fn members(f: &Formula, conj: bool) -> Option<&[FormulaRef]> {
    match (f, conj) {
        (Formula::And(xs), true) | (Formula::Or(xs), false) => Some(xs),
        _ => None,
    }
}

/// Builds an n-ary conjunction (`conj`) or disjunction with constant folding,
/// flattening, idempotence and absorption. No complement rule: `x and not x`
/// stays as is.
fn junction(conj: bool, items: Vec<FormulaRef>) -> FormulaRef {
    let unit = conj;
    let mut flat: Vec<FormulaRef> = Vec::with_capacity(items.len());
    for it in items {
        match &*it {
            Formula::Const(b) if *b == unit => {}
            Formula::Const(_) => return it,
            _ => match members(&it, conj) {
                Some(xs) => flat.extend(xs.iter().cloned()),
                None => flat.push(it),
            },
        }
    }
    flat.sort();
    flat.dedup();
    // Absorption: a and (a or b) = a, a or (a and b) = a.
    let snapshot = flat.clone();
    flat.retain(|x| match members(x, !conj) {
        Some(inner) => !inner.iter().any(|m| snapshot.binary_search(m).is_ok()),
        None => true,
    });
    match flat.len() {
        0 => constant(unit),
        1 => flat.pop().unwrap(),
        _ if conj => Arc::new(Formula::And(flat)),
        _ => Arc::new(Formula::Or(flat)),
    }
}

impl Formula {
    pub fn as_const(&self) -> Option<bool> {
        match self {
            Formula::Const(b) => Some(*b),
            _ => None,
        }
    }

    /// Largest atom index plus one.
    pub fn atom_count(&self) -> usize {
        match self {
            Formula::Const(_) => 0,
            Formula::Atom(i) => i + 1,
            Formula::Not(a) | Formula::Next(a) | Formula::Pending(a) | Formula::Always(a) | Formula::Eventually(a) => {
                a.atom_count()
            }
            Formula::Until(a, b) => a.atom_count().max(b.atom_count()),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().map(|x| x.atom_count()).max().unwrap_or(0),
        }
    }
}

/// One progression step: the returned formula must hold from the next step on.
pub fn progress_formula(f: &FormulaRef, values: &[bool]) -> FormulaRef {
    match &**f {
        Formula::Const(_) => f.clone(),
        Formula::Atom(i) => constant(values[*i]),
        Formula::Not(a) => not(progress_formula(a, values)),
        Formula::And(xs) => junction(true, xs.iter().map(|x| progress_formula(x, values)).collect()),
        Formula::Or(xs) => junction(false, xs.iter().map(|x| progress_formula(x, values)).collect()),
        Formula::Next(a) => Arc::new(Formula::Pending(a.clone())),
        Formula::Pending(a) => progress_formula(a, values),
        Formula::Always(a) => and(progress_formula(a, values), f.clone()),
        Formula::Eventually(a) => or(progress_formula(a, values), f.clone()),
        Formula::Until(a, b) => or(progress_formula(b, values), and(progress_formula(a, values), f.clone())),
    }
}

/// Neutral evaluation at the end of a trace (empty remainder).
fn neutral_at_end(f: &Formula) -> bool {
    match f {
        Formula::Const(b) => *b,
        Formula::Atom(_) | Formula::Next(_) | Formula::Pending(_) => false,
        Formula::Not(a) => !neutral_at_end(a),
        Formula::And(xs) => xs.iter().all(|x| neutral_at_end(x)),
        Formula::Or(xs) => xs.iter().any(|x| neutral_at_end(x)),
        Formula::Always(_) => true,
        Formula::Eventually(_) | Formula::Until(..) => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorState {
    formula: FormulaRef,
    step: usize,
}

impl MonitorState {
    pub fn new(formula: FormulaRef) -> MonitorState {
        MonitorState { formula, step: 0 }
    }

    pub fn formula(&self) -> &FormulaRef {
        &self.formula
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Constant truth value once progression has settled it.
    pub fn settled(&self) -> Option<bool> {
        self.formula.as_const()
    }

    pub fn progress(&self, values: &[bool]) -> MonitorState {
        if self.settled().is_some() {
            return MonitorState {
                formula: self.formula.clone(),
                step: self.step + 1,
            };
        }
        MonitorState {
            formula: progress_formula(&self.formula, values),
            step: self.step + 1,
        }
    }

    pub fn finalize(&self) -> Verdict {
        match self.settled() {
            Some(true) => Verdict::True,
            Some(false) => Verdict::False,
            None if neutral_at_end(&self.formula) => Verdict::PresumablyTrue,
            None => Verdict::PresumablyFalse,
        }
    }
}

/// Runs a fresh monitor over the whole trace.
pub fn monitor_trace(formula: &FormulaRef, trace: &[Vec<bool>]) -> Result<Verdict, TemporalError> {
    check_trace(formula, trace)?;
    let mut state = MonitorState::new(formula.clone());
    for step in trace {
        state = state.progress(step);
    }
    Ok(state.finalize())
}

fn check_trace(formula: &Formula, trace: &[Vec<bool>]) -> Result<(), TemporalError> {
    if trace.is_empty() {
        return Err(TemporalError::EmptyTrace);
    }
    let need = formula.atom_count();
    for (step, v) in trace.iter().enumerate() {
        if v.len() < need {
            return Err(TemporalError::MissingAtom { step, atom: v.len() });
        }
    }
    Ok(())
}

/// Per-position truth under the three finite-trace readings: strong (the
/// unseen future is hostile), weak (it is friendly) and neutral.
#[derive(Debug, Clone, Copy)]
struct Triple {
    s: bool,
    w: bool,
    f: bool,
}

/// Truth of `f` at positions `0..=n`, where position `n` lies past the end.
fn evaluate_positions(f: &Formula, trace: &[Vec<bool>]) -> Vec<Triple> {
    let n = trace.len();
    let past_end = |neutral: bool| Triple { s: false, w: true, f: neutral };
    let mut out = vec![past_end(false); n + 1];
    match f {
        Formula::Const(b) => out.fill(Triple { s: *b, w: *b, f: *b }),
        Formula::Atom(i) => {
            for (k, step) in trace.iter().enumerate() {
                let v = step[*i];
                out[k] = Triple { s: v, w: v, f: v };
            }
        }
        Formula::Not(a) => {
            let a = evaluate_positions(a, trace);
            for (o, x) in out.iter_mut().zip(&a) {
                *o = Triple { s: !x.w, w: !x.s, f: !x.f };
            }
        }
        Formula::And(xs) | Formula::Or(xs) => {
            let conj = matches!(f, Formula::And(_));
            out.fill(Triple { s: conj, w: conj, f: conj });
            for x in xs {
                let v = evaluate_positions(x, trace);
                for (o, x) in out.iter_mut().zip(&v) {
                    if conj {
                        *o = Triple { s: o.s && x.s, w: o.w && x.w, f: o.f && x.f };
                    } else {
                        *o = Triple { s: o.s || x.s, w: o.w || x.w, f: o.f || x.f };
                    }
                }
            }
        }
        Formula::Next(a) | Formula::Pending(a) => {
            let a = evaluate_positions(a, trace);
            for k in 0..n {
                out[k] = if k + 1 < n { a[k + 1] } else { past_end(false) };
            }
        }
        Formula::Always(a) => {
            let a = evaluate_positions(a, trace);
            out[n] = past_end(true);
            for k in (0..n).rev() {
                let later = out[k + 1];
                out[k] = Triple { s: a[k].s && later.s, w: a[k].w && later.w, f: a[k].f && later.f };
            }
        }
        Formula::Eventually(a) => {
            let a = evaluate_positions(a, trace);
            for k in (0..n).rev() {
                let later = out[k + 1];
                out[k] = Triple { s: a[k].s || later.s, w: a[k].w || later.w, f: a[k].f || later.f };
            }
        }
        Formula::Until(a, b) => {
            let a = evaluate_positions(a, trace);
            let b = evaluate_positions(b, trace);
            for k in (0..n).rev() {
                let later = out[k + 1];
                out[k] = Triple {
                    s: b[k].s || (a[k].s && later.s),
                    w: b[k].w || (a[k].w && later.w),
                    f: b[k].f || (a[k].f && later.f),
                };
            }
        }
    }
    out
}

/// Reference verdict computed from the whole trace at once.
pub fn evaluate_whole_trace(formula: &Formula, trace: &[Vec<bool>]) -> Result<Verdict, TemporalError> {
    check_trace(formula, trace)?;
    let t = evaluate_positions(formula, trace)[0];
    Ok(if t.s {
        Verdict::True
    } else if !t.w {
        Verdict::False
    } else if t.f {
        Verdict::PresumablyTrue
    } else {
        Verdict::PresumablyFalse
    })
}

/// Robustness of `F_[0,window] (signal > threshold)`: the best margin within
/// the window. The window is clamped to the signal length.
pub fn stl_bounded_eventually_robustness(signal: &[f64], threshold: f64, window: usize) -> Result<f64, TemporalError> {
    if signal.is_empty() {
        return Err(TemporalError::EmptySignal);
    }
    let end = window.min(signal.len() - 1);
    Ok(signal[..=end].iter().map(|v| v - threshold).fold(f64::NEG_INFINITY, f64::max))
}

/// A formula together with the scene predicates its atoms stand for.
#[derive(Debug, Clone)]
pub struct TemporalRequirement {
    pub formula: FormulaRef,
    pub atoms: Vec<Expr>,
    /// The requirement as written, for diagnostics.
    pub text: String,
}

impl TemporalRequirement {
    /// Splits a requirement expression into temporal structure and atomic
    /// predicates. Structurally identical predicates share one atom.
    pub fn from_expr(expr: &Expr) -> TemporalRequirement {
        let mut atoms = Vec::new();
        let mut index = HashMap::new();
        let formula = lower(expr, &mut atoms, &mut index);
        TemporalRequirement {
            formula,
            atoms,
            text: crate::lang::pretty_expr(expr),
        }
    }

    /// Atom names as printed trees; for bare names this is the name itself.
    pub fn atom_names(&self) -> Vec<String> {
        self.atoms.iter().map(sexpr_expr).collect()
    }
}

fn lower(e: &Expr, atoms: &mut Vec<Expr>, index: &mut HashMap<String, usize>) -> FormulaRef {
    match &e.kind {
        ExprKind::Bool(b) => constant(*b),
        ExprKind::Unary { op: UnaryOp::Not, operand } => not(lower(operand, atoms, index)),
        ExprKind::Binary { op: BinaryOp::And, lhs, rhs } => and(lower(lhs, atoms, index), lower(rhs, atoms, index)),
        ExprKind::Binary { op: BinaryOp::Or, lhs, rhs } => or(lower(lhs, atoms, index), lower(rhs, atoms, index)),
        ExprKind::Temporal { op, operand } => {
            let inner = lower(operand, atoms, index);
            match op {
                TemporalOp::Always => always(inner),
                TemporalOp::Eventually => eventually(inner),
                TemporalOp::Next => next(inner),
            }
        }
        ExprKind::Until { lhs, rhs } => until(lower(lhs, atoms, index), lower(rhs, atoms, index)),
        _ => {
            let key = sexpr_expr(e);
            let i = *index.entry(key).or_insert_with(|| {
                atoms.push(e.clone());
                atoms.len() - 1
            });
            atom(i)
        }
    }
}

/// The token naming an atom in a trace file.
pub fn trace_key(atom: &str) -> String {
    atom.split_whitespace().collect::<Vec<_>>().join("_")
}

/// Reads a trace file: one line per step holding whitespace-separated
/// `name=0|1` pairs. Blank lines and `#` comments are skipped; names not in
/// `atoms` are ignored. Whitespace inside an atom name is written as `_`
/// (see [`trace_key`]).
pub fn read_atom_trace(text: &str, atoms: &[String]) -> Result<Vec<Vec<bool>>, TemporalError> {
    let mut steps = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut values: HashMap<&str, bool> = HashMap::new();
        for token in line.split_whitespace() {
            let bad = || TemporalError::BadToken { line: n + 1, token: token.to_string() };
            let (name, v) = token.rsplit_once('=').ok_or_else(bad)?;
            let v = match v {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            values.insert(name, v);
        }
        let row = atoms
            .iter()
            .map(|a| {
                values
                    .get(trace_key(a).as_str())
                    .copied()
                    .ok_or_else(|| TemporalError::UnboundAtom { line: n + 1, atom: a.clone() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        steps.push(row);
    }
    if steps.is_empty() {
        return Err(TemporalError::EmptyTrace);
    }
    Ok(steps)
}
