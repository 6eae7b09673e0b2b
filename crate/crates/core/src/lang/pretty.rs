//! Canonical source printing and span-free s-expression dumps.

use std::fmt::Write;

use super::ast::*;

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for s in &program.statements {
        match &s.kind {
            StatementKind::Assignment { name, value } => {
                let _ = writeln!(out, "{name} = {}", top(value));
            }
            StatementKind::EgoAssignment(value) => {
                let _ = writeln!(out, "ego = {}", top(value));
            }
            StatementKind::NewObject(n) => {
                let _ = writeln!(out, "{}", new_object(n));
            }
            StatementKind::Require(e) | StatementKind::RequireTemporal(e) => {
                let _ = writeln!(out, "require {}", pretty_expr(e));
            }
            StatementKind::Mutate { targets, scale } => {
                out.push_str("mutate");
                let names: Vec<&str> = targets.iter().map(|t| t.name.as_str()).collect();
                if !names.is_empty() {
                    let _ = write!(out, " {}", names.join(", "));
                }
                if let Some(s) = scale {
                    let _ = write!(out, " by {}", pretty_expr(s));
                }
                out.push('\n');
            }
            StatementKind::KindDefinition { name, parent, defaults } => {
                out.push_str("kind ");
                out.push_str(name);
                if let Some(p) = parent {
                    let _ = write!(out, "({p})");
                }
                out.push_str(":\n");
                for d in defaults {
                    let _ = writeln!(out, "    {}: {}", d.property, pretty_expr(&d.value));
                }
            }
        }
    }
    out
}

fn top(e: &Expr) -> String {
    match &e.kind {
        ExprKind::New(n) => new_object(n),
        _ => pretty_expr(e),
    }
}

fn new_object(n: &NewObject) -> String {
    let mut s = format!("new {}", n.kind);
    for (i, spec) in n.specifiers.iter().enumerate() {
        s.push_str(if i == 0 { " " } else { ", " });
        s.push_str(&pretty_specifier(spec));
    }
    s
}

pub fn pretty_specifier(spec: &Specifier) -> String {
    match &spec.kind {
        SpecifierKind::At(e) => format!("at {}", atom(e)),
        SpecifierKind::OffsetBy(e) => format!("offset by {}", atom(e)),
        SpecifierKind::Positional { direction, target, by } => match by {
            Some(b) => format!("{} {} by {}", direction.phrase(), atom(target), atom(b)),
            None => format!("{} {}", direction.phrase(), atom(target)),
        },
        SpecifierKind::On(e) => format!("on {}", atom(e)),
        SpecifierKind::Facing(e) => format!("facing {}", atom(e)),
        SpecifierKind::FacingToward(e) => format!("facing toward {}", atom(e)),
        SpecifierKind::FacingDirectlyToward(e) => format!("facing directly toward {}", atom(e)),
        SpecifierKind::With { property, value } => format!("with {property} {}", atom(value)),
        SpecifierKind::Behavior { name, args } => {
            format!("with behavior {name}({})", args.iter().map(pretty_expr).collect::<Vec<_>>().join(", "))
        }
        SpecifierKind::Visible { from: Some(e) } => format!("visible from {}", atom(e)),
        SpecifierKind::Visible { from: None } => "visible".into(),
    }
}

fn is_atomic(e: &Expr) -> bool {
    matches!(
        e.kind,
        ExprKind::Number(_)
            | ExprKind::Str(_)
            | ExprKind::Bool(_)
            | ExprKind::Name(_)
            | ExprKind::Ego
            | ExprKind::SelfRef
            | ExprKind::Vector(_)
            | ExprKind::Attribute { .. }
            | ExprKind::Call { .. }
            | ExprKind::Deg(_)
    )
}

fn atom(e: &Expr) -> String {
    if is_atomic(e) {
        pretty_expr(e)
    } else {
        format!("({})", pretty_expr(e))
    }
}

fn number(v: f64) -> String {
    format!("{v:?}")
}

fn string_literal(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn pretty_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Number(v) => number(*v),
        ExprKind::Str(s) => string_literal(s),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Name(n) => n.clone(),
        ExprKind::Ego => "ego".into(),
        ExprKind::SelfRef => "self".into(),
        ExprKind::Vector(items) => format!("({})", items.iter().map(pretty_expr).collect::<Vec<_>>().join(", ")),
        ExprKind::Attribute { base, name } => format!("{}.{name}", atom(base)),
        ExprKind::Call { func, args } => format!("{func}({})", args.iter().map(pretty_expr).collect::<Vec<_>>().join(", ")),
        ExprKind::Unary { op: UnaryOp::Neg, operand } => format!("-{}", atom(operand)),
        ExprKind::Unary { op: UnaryOp::Not, operand } => format!("not {}", atom(operand)),
        ExprKind::Binary { op, lhs, rhs } => format!("{} {} {}", atom(lhs), op.symbol(), atom(rhs)),
        ExprKind::Deg(x) => format!("{} deg", atom(x)),
        ExprKind::DistanceTo(x) => format!("distance to {}", atom(x)),
        ExprKind::CanSee { viewer, target } => format!("{} can see {}", atom(viewer), atom(target)),
        ExprKind::In { subject, region } => format!("{} in {}", atom(subject), atom(region)),
        ExprKind::New(n) => new_object(n),
        ExprKind::Temporal { op, operand } => format!("{} {}", op.keyword(), atom(operand)),
        ExprKind::Until { lhs, rhs } => format!("{} until {}", atom(lhs), atom(rhs)),
    }
}

/// Span-free tree dump, one statement per line.
pub fn sexpr(program: &Program) -> String {
    program
        .statements
        .iter()
        .map(statement_sexpr)
        .collect::<Vec<_>>()
        .join("\n")
}

fn statement_sexpr(s: &Statement) -> String {
    match &s.kind {
        StatementKind::Assignment { name, value } => format!("(assign {name} {})", sexpr_expr(value)),
        StatementKind::EgoAssignment(v) => format!("(assign-ego {})", sexpr_expr(v)),
        StatementKind::NewObject(n) => new_sexpr(n),
        StatementKind::Require(e) => format!("(require {})", sexpr_expr(e)),
        StatementKind::RequireTemporal(e) => format!("(require-temporal {})", sexpr_expr(e)),
        StatementKind::Mutate { targets, scale } => {
            let mut s = String::from("(mutate");
            for t in targets {
                s.push(' ');
                s.push_str(&t.name);
            }
            if let Some(e) = scale {
                let _ = write!(s, " :by {}", sexpr_expr(e));
            }
            s.push(')');
            s
        }
        StatementKind::KindDefinition { name, parent, defaults } => {
            let mut s = format!("(kind {name} {}", parent.as_deref().unwrap_or("-"));
            for d in defaults {
                let _ = write!(s, " ({} {})", d.property, sexpr_expr(&d.value));
            }
            s.push(')');
            s
        }
    }
}

fn new_sexpr(n: &NewObject) -> String {
    let mut s = format!("(new {}", n.kind);
    for spec in &n.specifiers {
        s.push(' ');
        s.push_str(&sexpr_specifier(spec));
    }
    s.push(')');
    s
}

pub fn sexpr_specifier(spec: &Specifier) -> String {
    match &spec.kind {
        SpecifierKind::At(e) => format!("(at {})", sexpr_expr(e)),
        SpecifierKind::OffsetBy(e) => format!("(offset-by {})", sexpr_expr(e)),
        SpecifierKind::Positional { direction, target, by } => {
            let head = direction.phrase().replace(' ', "-");
            match by {
                Some(b) => format!("({head} {} :by {})", sexpr_expr(target), sexpr_expr(b)),
                None => format!("({head} {})", sexpr_expr(target)),
            }
        }
        SpecifierKind::On(e) => format!("(on {})", sexpr_expr(e)),
        SpecifierKind::Facing(e) => format!("(facing {})", sexpr_expr(e)),
        SpecifierKind::FacingToward(e) => format!("(facing-toward {})", sexpr_expr(e)),
        SpecifierKind::FacingDirectlyToward(e) => format!("(facing-directly-toward {})", sexpr_expr(e)),
        SpecifierKind::With { property, value } => format!("(with {property} {})", sexpr_expr(value)),
        SpecifierKind::Behavior { name, args } => {
            let mut s = format!("(behavior {name}");
            for a in args {
                s.push(' ');
                s.push_str(&sexpr_expr(a));
            }
            s.push(')');
            s
        }
        SpecifierKind::Visible { from: Some(e) } => format!("(visible {})", sexpr_expr(e)),
        SpecifierKind::Visible { from: None } => "(visible)".into(),
    }
}

pub fn sexpr_expr(e: &Expr) -> String {
    let list = |head: &str, items: &[&Expr]| {
        let mut s = format!("({head}");
        for i in items {
            s.push(' ');
            s.push_str(&sexpr_expr(i));
        }
        s.push(')');
        s
    };
    match &e.kind {
        ExprKind::Number(v) => number(*v),
        ExprKind::Str(s) => format!("{s:?}"),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Name(n) => n.clone(),
        ExprKind::Ego => "ego".into(),
        ExprKind::SelfRef => "self".into(),
        ExprKind::Vector(items) => list("vec", &items.iter().collect::<Vec<_>>()),
        ExprKind::Attribute { base, name } => format!("(. {} {name})", sexpr_expr(base)),
        ExprKind::Call { func, args } => list(&format!("call {func}"), &args.iter().collect::<Vec<_>>()),
        ExprKind::Unary { op: UnaryOp::Neg, operand } => list("neg", &[operand]),
        ExprKind::Unary { op: UnaryOp::Not, operand } => list("not", &[operand]),
        ExprKind::Binary { op, lhs, rhs } => list(op.symbol(), &[lhs, rhs]),
        ExprKind::Deg(x) => list("deg", &[x]),
        ExprKind::DistanceTo(x) => list("distance-to", &[x]),
        ExprKind::CanSee { viewer, target } => list("can-see", &[viewer, target]),
        ExprKind::In { subject, region } => list("in", &[subject, region]),
        ExprKind::New(n) => new_sexpr(n),
        ExprKind::Temporal { op, operand } => list(op.keyword(), &[operand]),
        ExprKind::Until { lhs, rhs } => list("until", &[lhs, rhs]),
    }
}
