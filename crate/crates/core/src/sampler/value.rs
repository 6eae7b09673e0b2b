use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::geom::{Orientation, Vec3};
use crate::mesh::Region;

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorSpec {
    pub name: String,
    pub args: Vec<Value>,
}

/// Runtime value of a scenario expression.
#[derive(Debug, Clone)]
pub enum Value {
    None,
    Number(f64),
    Bool(bool),
    Str(String),
    Vector(Vec3),
    Orientation(Orientation),
    /// Index into the scene's object list.
    Object(usize),
    Region(Arc<Region>),
    Behavior(BehaviorSpec),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::None => "none",
            Value::Number(_) => "number",
            Value::Bool(_) => "boolean",
            Value::Str(_) => "string",
            Value::Vector(_) => "vector",
            Value::Orientation(_) => "orientation",
            Value::Object(_) => "object",
            Value::Region(_) => "region",
            Value::Behavior(_) => "behavior",
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<Vec3> {
        match self {
            Value::Vector(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::None, Value::None) => true,
            (Value::Number(a), Value::Number(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Vector(a), Value::Vector(b)) => a == b,
            (Value::Orientation(a), Value::Orientation(b)) => a == b,
            (Value::Object(a), Value::Object(b)) => a == b,
            (Value::Region(a), Value::Region(b)) => Arc::ptr_eq(a, b),
            (Value::Behavior(a), Value::Behavior(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::None => f.write_str("none"),
            Value::Number(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Vector(v) => write!(f, "{v}"),
            Value::Orientation(o) => {
                let (y, p, r) = o.euler_angles();
                write!(f, "orientation({y}, {p}, {r})")
            }
            Value::Object(i) => write!(f, "object #{i}"),
            Value::Region(_) => f.write_str("region"),
            Value::Behavior(b) => write!(f, "{}(...)", b.name),
        }
    }
}

/// Property name to value for one object.
pub type PropertyTable = BTreeMap<String, Value>;
