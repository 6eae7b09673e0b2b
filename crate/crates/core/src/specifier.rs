//! Specifier priorities and evaluation planning.
//!
//! Each specifier declares which properties it sets and at what priority
//! (lower wins). `on` is the one modifying specifier: it adjusts whatever
//! position the winner produced. Resolution picks winners, adds defaults for
//! the rest, and orders everything so each step runs after the properties it
//! reads.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use thiserror::Error;

use crate::lang::ast::{Direction, Expr, ExprKind, Specifier, SpecifierKind};
use crate::lang::{sexpr_specifier, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Specified {
    pub priority: u32,
    pub modifying: bool,
}

const fn plain(priority: u32) -> Specified {
    Specified { priority, modifying: false }
}

pub type PriorityTable = BTreeMap<String, Specified>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecifierError {
    #[error("unknown specifier '{0}'")]
    UnknownSpecifier(String),
    #[error("conflicting specifiers for property '{property}': {first} and {second}")]
    Conflict {
        property: String,
        first: String,
        second: String,
        span: Span,
    },
    #[error("circular dependency among specifiers involving {0}")]
    Cycle(String),
    #[error("default for '{property}' may not depend on the object's own {depends_on}")]
    InvalidDefault { property: String, depends_on: String },
}

impl SpecifierError {
    pub fn span(&self) -> Option<Span> {
        match self {
            SpecifierError::Conflict { span, .. } => Some(*span),
            _ => None,
        }
    }
}

fn table(entries: &[(&str, Specified)]) -> PriorityTable {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Properties set by a specifier, by name. `with` takes its property after a
/// space, as in `"with width"`.
pub fn priority_table(name: &str) -> Result<PriorityTable, SpecifierError> {
    let positional = [("position", plain(1)), ("parentOrientation", plain(3))];
    Ok(match name {
        "at" | "offsetBy" => table(&[("position", plain(1))]),
        "leftOf" | "rightOf" | "aheadOf" | "behind" | "above" | "below" => table(&positional),
        "on" => table(&[
            ("position", Specified { priority: 1, modifying: true }),
            ("parentOrientation", plain(2)),
        ]),
        "facing" => table(&[("yaw", plain(1)), ("pitch", plain(1)), ("roll", plain(1))]),
        "facingToward" => table(&[("yaw", plain(1))]),
        "facingDirectlyToward" => table(&[("yaw", plain(1)), ("pitch", plain(1))]),
        "visibleFrom" => table(&[("position", plain(3))]),
        "behavior" => table(&[("behavior", plain(1))]),
        other => match other.strip_prefix("with ") {
            Some(p) if !p.trim().is_empty() => table(&[(p.trim(), plain(1))]),
            _ => return Err(SpecifierError::UnknownSpecifier(other.to_string())),
        },
    })
}

/// Table name of a parsed specifier, as accepted by [`priority_table`].
pub fn specifier_name(kind: &SpecifierKind) -> String {
    match kind {
        SpecifierKind::At(_) => "at".into(),
        SpecifierKind::OffsetBy(_) => "offsetBy".into(),
        SpecifierKind::Positional { direction, .. } => match direction {
            Direction::LeftOf => "leftOf",
            Direction::RightOf => "rightOf",
            Direction::AheadOf => "aheadOf",
            Direction::Behind => "behind",
            Direction::Above => "above",
            Direction::Below => "below",
        }
        .into(),
        SpecifierKind::On(_) => "on".into(),
        SpecifierKind::Facing(_) => "facing".into(),
        SpecifierKind::FacingToward(_) => "facingToward".into(),
        SpecifierKind::FacingDirectlyToward(_) => "facingDirectlyToward".into(),
        SpecifierKind::With { property, .. } => format!("with {property}"),
        SpecifierKind::Behavior { .. } => "behavior".into(),
        SpecifierKind::Visible { .. } => "visibleFrom".into(),
    }
}

/// Properties of the object under construction read through `self.P`.
pub fn self_references(e: &Expr, out: &mut BTreeSet<String>) {
    match &e.kind {
        ExprKind::Attribute { base, name } => {
            if matches!(base.kind, ExprKind::SelfRef) {
                out.insert(name.clone());
            } else {
                self_references(base, out);
            }
        }
        ExprKind::Number(_) | ExprKind::Str(_) | ExprKind::Bool(_) | ExprKind::Name(_) | ExprKind::Ego => {}
        ExprKind::SelfRef => {
            out.insert("self".into());
        }
        ExprKind::Vector(items) => items.iter().for_each(|x| self_references(x, out)),
        ExprKind::Call { args, .. } => args.iter().for_each(|x| self_references(x, out)),
        ExprKind::Unary { operand, .. } | ExprKind::Temporal { operand, .. } => self_references(operand, out),
        ExprKind::Deg(x) | ExprKind::DistanceTo(x) => self_references(x, out),
        ExprKind::Binary { lhs, rhs, .. } | ExprKind::Until { lhs, rhs } => {
            self_references(lhs, out);
            self_references(rhs, out);
        }
        ExprKind::CanSee { viewer, target } => {
            self_references(viewer, out);
            self_references(target, out);
        }
        ExprKind::In { subject, region } => {
            self_references(subject, out);
            self_references(region, out);
        }
        // A nested object has its own `self`.
        ExprKind::New(_) => {}
    }
}

/// Where an unspecified property's value comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DefaultSource {
    /// Root-kind default with fixed dependencies.
    Builtin { reads: Vec<String> },
    Expr(Expr),
}

/// Properties every object ends up with, and what their root defaults read.
pub const MANDATORY: &[&str] = &[
    "position",
    "parentOrientation",
    "yaw",
    "pitch",
    "roll",
    "width",
    "length",
    "height",
    "shape",
    "baseOffset",
    "color",
    "allowCollisions",
    "viewAngles",
    "visibleDistance",
    "rayDensity",
    "behavior",
];

/// Root defaults for all mandatory properties.
pub fn builtin_defaults() -> BTreeMap<String, DefaultSource> {
    MANDATORY
        .iter()
        .map(|p| {
            let reads = if *p == "baseOffset" { vec!["height".to_string()] } else { Vec::new() };
            (p.to_string(), DefaultSource::Builtin { reads })
        })
        .collect()
}

const POSE_PROPERTIES: &[&str] = &["position", "parentOrientation", "yaw", "pitch", "roll", "orientation"];

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    /// Run specifier `index`; it sets `sets` and adjusts `modifies`.
    Specifier {
        index: usize,
        sets: Vec<String>,
        modifies: Vec<String>,
    },
    Default(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub steps: Vec<Step>,
    /// Winning specifier index per specified property.
    pub winners: BTreeMap<String, usize>,
    /// Modifying specifier index per modified property.
    pub modifiers: BTreeMap<String, usize>,
}

impl Plan {
    pub fn winner(&self, property: &str) -> Option<usize> {
        self.winners.get(property).copied()
    }
}

/// Properties a specifier reads from the object under construction, given
/// what it sets and modifies in this plan.
fn specifier_reads(spec: &SpecifierKind, sets: &[String], modifies: &[String]) -> BTreeSet<String> {
    let mut reads = BTreeSet::new();
    let exprs: Vec<&Expr> = match spec {
        SpecifierKind::At(e)
        | SpecifierKind::OffsetBy(e)
        | SpecifierKind::On(e)
        | SpecifierKind::Facing(e)
        | SpecifierKind::FacingToward(e)
        | SpecifierKind::FacingDirectlyToward(e) => vec![e],
        SpecifierKind::Positional { target, by, .. } => std::iter::once(target).chain(by.as_ref()).collect(),
        SpecifierKind::With { value, .. } => vec![value],
        SpecifierKind::Behavior { args, .. } => args.iter().collect(),
        SpecifierKind::Visible { from } => from.iter().collect(),
    };
    for e in exprs {
        self_references(e, &mut reads);
    }
    match spec {
        SpecifierKind::Positional { direction, .. } => {
            reads.insert(
                match direction {
                    Direction::LeftOf | Direction::RightOf => "width",
                    Direction::AheadOf | Direction::Behind => "length",
                    Direction::Above | Direction::Below => "height",
                }
                .into(),
            );
        }
        SpecifierKind::On(_) => {
            reads.insert("baseOffset".into());
            if !sets.iter().any(|s| s == "parentOrientation") {
                reads.insert("parentOrientation".into());
            }
            if modifies.iter().any(|s| s == "position") {
                reads.insert("position".into());
            }
        }
        SpecifierKind::FacingToward(_) | SpecifierKind::FacingDirectlyToward(_) => {
            reads.insert("position".into());
            reads.insert("parentOrientation".into());
        }
        _ => {}
    }
    reads
}

/// Picks a winner per property and orders specifier and default evaluations
/// so every step follows the providers of what it reads. Ties between
/// independent steps break on a canonical key, so permuting the specifier list
/// yields the same plan up to specifier indices.
pub fn resolve(specifiers: &[Specifier], defaults: &BTreeMap<String, DefaultSource>) -> Result<Plan, SpecifierError> {
    let mut best: BTreeMap<String, (Specified, usize)> = BTreeMap::new();
    let mut modifiers: BTreeMap<String, usize> = BTreeMap::new();
    for (i, s) in specifiers.iter().enumerate() {
        for (prop, sp) in priority_table(&specifier_name(&s.kind))? {
            if sp.modifying {
                if let Some(&j) = modifiers.get(&prop) {
                    return Err(conflict(&prop, &specifiers[j], s));
                }
                modifiers.insert(prop, i);
                continue;
            }
            match best.get(&prop) {
                Some((cur, _)) if cur.priority < sp.priority => {}
                Some((cur, j)) if cur.priority == sp.priority => {
                    let (a, b) = if *j < i { (&specifiers[*j], s) } else { (s, &specifiers[*j]) };
                    return Err(conflict(&prop, a, b));
                }
                _ => {
                    best.insert(prop, (sp, i));
                }
            }
        }
    }
    let winners: BTreeMap<String, usize> = best.into_iter().map(|(p, (_, i))| (p, i)).collect();

    // A modifier with no winner to modify specifies the property itself.
    let mut sets: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut mods: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (p, &i) in &winners {
        sets.entry(i).or_default().push(p.clone());
    }
    for (p, &i) in &modifiers {
        if winners.contains_key(p) {
            mods.entry(i).or_default().push(p.clone());
        } else {
            sets.entry(i).or_default().push(p.clone());
        }
    }

    let mut nodes: Vec<Node> = Vec::new();
    let mut spec_indices: BTreeSet<usize> = sets.keys().copied().collect();
    spec_indices.extend(mods.keys().copied());
    for i in spec_indices {
        let s = sets.remove(&i).unwrap_or_default();
        let m = mods.remove(&i).unwrap_or_default();
        let reads = specifier_reads(&specifiers[i].kind, &s, &m);
        nodes.push(Node {
            key: format!("spec:{}", sexpr_specifier(&specifiers[i])),
            tiebreak: i,
            step: Step::Specifier { index: i, sets: s, modifies: m },
            reads,
        });
    }
    for (p, src) in defaults {
        if winners.contains_key(p) || modifiers.contains_key(p) {
            continue;
        }
        let reads: BTreeSet<String> = match src {
            DefaultSource::Builtin { reads } => reads.iter().cloned().collect(),
            DefaultSource::Expr(e) => {
                let mut r = BTreeSet::new();
                self_references(e, &mut r);
                r
            }
        };
        if let Some(bad) = reads.iter().find(|r| POSE_PROPERTIES.contains(&r.as_str()) || *r == "self") {
            return Err(SpecifierError::InvalidDefault {
                property: p.clone(),
                depends_on: bad.clone(),
            });
        }
        nodes.push(Node {
            key: format!("default:{p}"),
            tiebreak: 0,
            step: Step::Default(p.clone()),
            reads,
        });
    }

    // Final provider of each property: the modifier if any, else the setter.
    let mut setter: BTreeMap<&str, usize> = BTreeMap::new();
    let mut modifier_node: BTreeMap<&str, usize> = BTreeMap::new();
    for (n, node) in nodes.iter().enumerate() {
        match &node.step {
            Step::Specifier { sets, modifies, .. } => {
                for p in sets {
                    setter.insert(p, n);
                }
                for p in modifies {
                    modifier_node.insert(p, n);
                }
            }
            Step::Default(p) => {
                setter.insert(p, n);
            }
        }
    }
    let mut edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
    let mut indegree = vec![0usize; nodes.len()];
    for (n, node) in nodes.iter().enumerate() {
        let mut deps = BTreeSet::new();
        for r in &node.reads {
            let provider = match modifier_node.get(r.as_str()) {
                Some(&m) if m != n => Some(m),
                _ => setter.get(r.as_str()).copied(),
            };
            if let Some(p) = provider {
                deps.insert(p);
            }
        }
        if let Step::Specifier { modifies, .. } = &node.step {
            for p in modifies {
                if let Some(&s) = setter.get(p.as_str()) {
                    deps.insert(s);
                }
            }
        }
        for d in deps {
            if d == n {
                return Err(SpecifierError::Cycle(node.key.clone()));
            }
            if edges[d].insert(n) {
                indegree[n] += 1;
            }
        }
    }

    let mut ready: BinaryHeap<Reverse<(String, usize, usize)>> = BinaryHeap::new();
    for (n, node) in nodes.iter().enumerate() {
        if indegree[n] == 0 {
            ready.push(Reverse((node.key.clone(), node.tiebreak, n)));
        }
    }
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(Reverse((_, _, n))) = ready.pop() {
        order.push(n);
        for &m in &edges[n] {
            indegree[m] -= 1;
            if indegree[m] == 0 {
                ready.push(Reverse((nodes[m].key.clone(), nodes[m].tiebreak, m)));
            }
        }
    }
    if order.len() < nodes.len() {
        let stuck = (0..nodes.len()).find(|n| indegree[*n] > 0).unwrap_or(0);
        return Err(SpecifierError::Cycle(nodes[stuck].key.clone()));
    }
    let mut slots: Vec<Option<Step>> = nodes.into_iter().map(|n| Some(n.step)).collect();
    Ok(Plan {
        steps: order.into_iter().map(|n| slots[n].take().expect("each node once")).collect(),
        winners,
        modifiers,
    })
}

struct Node {
    key: String,
    tiebreak: usize,
    step: Step,
    reads: BTreeSet<String>,
}

fn conflict(property: &str, a: &Specifier, b: &Specifier) -> SpecifierError {
    SpecifierError::Conflict {
        property: property.to_string(),
        first: crate::lang::pretty_specifier(a),
        second: crate::lang::pretty_specifier(b),
        span: b.span,
    }
}
