//! Syntax tree for scenario programs. Every node carries its source span.

use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub kind: StatementKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    Assignment { name: String, value: Expr },
    EgoAssignment(Expr),
    /// Bare object creation, e.g. `new Plane at (2,0,0)`.
    NewObject(NewObject),
    /// Static requirement (no temporal operators).
    Require(Expr),
    /// Requirement containing at least one temporal operator.
    RequireTemporal(Expr),
    Mutate { targets: Vec<Ident>, scale: Option<Expr> },
    KindDefinition {
        name: String,
        parent: Option<String>,
        defaults: Vec<PropertyDefault>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyDefault {
    pub property: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewObject {
    pub kind: String,
    pub specifiers: Vec<Specifier>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Specifier {
    pub kind: SpecifierKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    LeftOf,
    RightOf,
    AheadOf,
    Behind,
    Above,
    Below,
}

impl Direction {
    pub fn phrase(self) -> &'static str {
        match self {
            Direction::LeftOf => "left of",
            Direction::RightOf => "right of",
            Direction::AheadOf => "ahead of",
            Direction::Behind => "behind",
            Direction::Above => "above",
            Direction::Below => "below",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecifierKind {
    At(Expr),
    OffsetBy(Expr),
    Positional {
        direction: Direction,
        target: Expr,
        by: Option<Expr>,
    },
    On(Expr),
    Facing(Expr),
    FacingToward(Expr),
    FacingDirectlyToward(Expr),
    With { property: String, value: Expr },
    /// `with behavior Name(args)`.
    Behavior { name: String, args: Vec<Expr> },
    Visible { from: Option<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalOp {
    Always,
    Eventually,
    Next,
}

impl TemporalOp {
    pub fn keyword(self) -> &'static str {
        match self {
            TemporalOp::Always => "always",
            TemporalOp::Eventually => "eventually",
            TemporalOp::Next => "next",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Str(String),
    Bool(bool),
    Name(String),
    Ego,
    SelfRef,
    /// 2 or 3 components as written; two-component tuples get z = 0 on evaluation.
    Vector(Vec<Expr>),
    Attribute { base: Box<Expr>, name: String },
    Call { func: String, args: Vec<Expr> },
    Unary { op: UnaryOp, operand: Box<Expr> },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Deg(Box<Expr>),
    DistanceTo(Box<Expr>),
    CanSee { viewer: Box<Expr>, target: Box<Expr> },
    In { subject: Box<Expr>, region: Box<Expr> },
    New(NewObject),
    Temporal { op: TemporalOp, operand: Box<Expr> },
    Until { lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    /// True if a temporal operator occurs anywhere inside.
    pub fn is_temporal(&self) -> bool {
        match &self.kind {
            ExprKind::Temporal { .. } | ExprKind::Until { .. } => true,
            ExprKind::Unary { operand, .. } => operand.is_temporal(),
            ExprKind::Binary { lhs, rhs, .. } => lhs.is_temporal() || rhs.is_temporal(),
            ExprKind::Vector(items) => items.iter().any(Expr::is_temporal),
            ExprKind::Call { args, .. } => args.iter().any(Expr::is_temporal),
            ExprKind::Attribute { base, .. } | ExprKind::Deg(base) | ExprKind::DistanceTo(base) => base.is_temporal(),
            ExprKind::CanSee { viewer: a, target: b } | ExprKind::In { subject: a, region: b } => {
                a.is_temporal() || b.is_temporal()
            }
            _ => false,
        }
    }
}
