//! Expression evaluation against a scene under construction.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::geom::{Pose, Vec3};
use crate::lang::ast::{BinaryOp, Expr, ExprKind, UnaryOp};
use crate::lang::Span;
use crate::mesh::{Aabb, IndexedMesh, Region};
use crate::rng::SceneRng;
use crate::visibility::{can_see, ViewSpec, OCCLUSION_TIE};

use super::error::{Fault, ProgramError, RejectCause};
use super::scene::{SceneObject, World};
use super::value::{PropertyTable, Value};

/// Variables bound by assignments.
pub type Env = HashMap<String, Value>;

pub struct Ctx<'a> {
    pub world: &'a World,
    pub env: &'a Env,
    pub rng: &'a mut SceneRng,
    /// Properties of the object under construction, for `self.P`.
    pub this: Option<&'a PropertyTable>,
}

fn type_error(expected: &str, found: &Value, span: Span) -> Fault {
    ProgramError::new(format!("expected {expected}, found {}", found.type_name()), span).into()
}

fn geometry(e: impl std::fmt::Display) -> Fault {
    RejectCause::Geometry(e.to_string()).into()
}

impl Ctx<'_> {
    pub fn number(&mut self, e: &Expr) -> Result<f64, Fault> {
        match self.eval(e)? {
            Value::Number(x) => Ok(x),
            other => Err(type_error("a number", &other, e.span)),
        }
    }

    pub fn boolean(&mut self, e: &Expr) -> Result<bool, Fault> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            other => Err(type_error("a boolean", &other, e.span)),
        }
    }

    pub fn vector(&mut self, e: &Expr) -> Result<Vec3, Fault> {
        match self.eval(e)? {
            Value::Vector(v) => Ok(v),
            other => Err(type_error("a vector", &other, e.span)),
        }
    }

    pub fn object(&mut self, e: &Expr) -> Result<usize, Fault> {
        match self.eval(e)? {
            Value::Object(i) => Ok(i),
            other => Err(type_error("an object", &other, e.span)),
        }
    }

    /// A location: an object's position or a vector.
    pub fn point(&mut self, e: &Expr) -> Result<Vec3, Fault> {
        let v = self.eval(e)?;
        self.point_of(v, e.span)
    }

    pub fn point_of(&self, v: Value, span: Span) -> Result<Vec3, Fault> {
        match v {
            Value::Vector(v) => Ok(v),
            Value::Object(i) => Ok(self.world.objects[i].pose.position),
            other => Err(type_error("an object or vector", &other, span)),
        }
    }

    fn ego(&self, span: Span) -> Result<&SceneObject, Fault> {
        match self.world.ego {
            Some(i) => Ok(&self.world.objects[i]),
            None => Err(ProgramError::new("ego is not defined yet", span).into()),
        }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Value, Fault> {
        let span = e.span;
        Ok(match &e.kind {
            ExprKind::Number(x) => Value::Number(*x),
            ExprKind::Str(s) => Value::Str(s.clone()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Name(n) => match self.env.get(n) {
                Some(v) => v.clone(),
                None => return Err(ProgramError::new(format!("unknown name '{n}'"), span).into()),
            },
            ExprKind::Ego => Value::Object(self.world.ego.ok_or_else(|| ProgramError::new("ego is not defined yet", span))?),
            ExprKind::SelfRef => return Err(ProgramError::new("'self' must be followed by a property", span).into()),
            ExprKind::Vector(items) => {
                let mut c = [0.0; 3];
                for (k, item) in items.iter().enumerate() {
                    c[k] = self.number(item)?;
                }
                Value::Vector(Vec3::from_array(c))
            }
            ExprKind::Attribute { base, name } => {
                if matches!(base.kind, ExprKind::SelfRef) {
                    return match self.this.and_then(|t| t.get(name)) {
                        Some(v) => Ok(v.clone()),
                        None => Err(ProgramError::new(format!("self.{name} is not available here"), span).into()),
                    };
                }
                let b = self.eval(base)?;
                self.attribute(b, name, span)?
            }
            ExprKind::Call { func, args } => self.call(func, args, span)?,
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand)?;
                match (op, v) {
                    (UnaryOp::Neg, Value::Number(x)) => Value::Number(-x),
                    (UnaryOp::Neg, Value::Vector(v)) => Value::Vector(-v),
                    (UnaryOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (UnaryOp::Neg, other) => return Err(type_error("a number or vector", &other, operand.span)),
                    (UnaryOp::Not, other) => return Err(type_error("a boolean", &other, operand.span)),
                }
            }
            ExprKind::Binary { op, lhs, rhs } => self.binary(*op, lhs, rhs, span)?,
            ExprKind::Deg(x) => match self.eval(x)? {
                Value::Number(v) => Value::Number(v * PI / 180.0),
                Value::Vector(v) => Value::Vector(v * (PI / 180.0)),
                other => return Err(type_error("a number", &other, x.span)),
            },
            ExprKind::DistanceTo(x) => {
                let p = self.point(x)?;
                Value::Number(self.ego(span)?.pose.position.distance(p))
            }
            ExprKind::CanSee { viewer, target } => {
                let v = self.eval(viewer)?;
                let t = self.eval(target)?;
                Value::Bool(self.can_see(v, t, viewer.span, target.span)?)
            }
            ExprKind::In { subject, region } => {
                let p = self.point(subject)?;
                let r = self.eval(region)?;
                let inside = match r {
                    Value::Region(r) => r.contains_point(p).map_err(geometry)?,
                    Value::Object(i) => self.world.objects[i].mesh.contains_point(p).map_err(geometry)?,
                    other => return Err(type_error("a region or object", &other, region.span)),
                };
                Value::Bool(inside)
            }
            ExprKind::New(_) => {
                return Err(ProgramError::new("objects can only be created by a statement or an assignment", span).into())
            }
            ExprKind::Temporal { .. } | ExprKind::Until { .. } => {
                return Err(ProgramError::new("temporal operators are only allowed in require statements", span).into())
            }
        })
    }

    fn attribute(&self, base: Value, name: &str, span: Span) -> Result<Value, Fault> {
        let missing = || -> Fault { ProgramError::new(format!("no attribute '{name}' on {}", base.type_name()), span).into() };
        Ok(match &base {
            Value::Object(i) => {
                let o = &self.world.objects[*i];
                match name {
                    "position" => Value::Vector(o.pose.position),
                    "orientation" => Value::Orientation(o.pose.orientation),
                    "name" => Value::Str(o.name.clone()),
                    "basePoint" => Value::Vector(o.base_point()),
                    _ => o.property(name).cloned().ok_or_else(missing)?,
                }
            }
            Value::Vector(v) => match name {
                "x" => Value::Number(v.x),
                "y" => Value::Number(v.y),
                "z" => Value::Number(v.z),
                _ => return Err(missing()),
            },
            Value::Orientation(o) => match name {
                "yaw" => Value::Number(o.yaw()),
                "pitch" => Value::Number(o.pitch()),
                "roll" => Value::Number(o.roll()),
                _ => return Err(missing()),
            },
            _ => return Err(missing()),
        })
    }

    fn call(&mut self, func: &str, args: &[Expr], span: Span) -> Result<Value, Fault> {
        let arity = |n: usize| -> Result<(), Fault> {
            if args.len() == n {
                Ok(())
            } else {
                Err(ProgramError::new(format!("{func} takes {n} arguments, got {}", args.len()), span).into())
            }
        };
        Ok(match func {
            "Range" => {
                arity(2)?;
                let (lo, hi) = (self.number(&args[0])?, self.number(&args[1])?);
                if !(lo <= hi) {
                    return Err(ProgramError::new(format!("Range({lo}, {hi}) has low > high"), span).into());
                }
                Value::Number(self.rng.range(lo, hi))
            }
            "Normal" => {
                arity(2)?;
                let (mean, sd) = (self.number(&args[0])?, self.number(&args[1])?);
                if !(sd >= 0.0) {
                    return Err(ProgramError::new(format!("Normal stddev {sd} is negative"), span).into());
                }
                Value::Number(self.rng.normal(mean, sd))
            }
            "Uniform" => {
                if args.is_empty() {
                    return Err(ProgramError::new("Uniform needs at least one option", span).into());
                }
                let options = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                let k = self.rng.index(options.len());
                options[k].clone()
            }
            "BoxRegion" => {
                arity(2)?;
                let (c, d) = (self.vector(&args[0])?, self.vector(&args[1])?);
                Value::Region(Arc::new(Region::Box(Aabb::new(c - d / 2.0, c + d / 2.0))))
            }
            "abs" | "sqrt" => {
                arity(1)?;
                let x = self.number(&args[0])?;
                Value::Number(if func == "abs" { x.abs() } else { x.sqrt() })
            }
            "min" | "max" => {
                if args.is_empty() {
                    return Err(ProgramError::new(format!("{func} needs arguments"), span).into());
                }
                let xs = args.iter().map(|a| self.number(a)).collect::<Result<Vec<_>, _>>()?;
                let fold = if func == "min" { f64::min } else { f64::max };
                Value::Number(xs.into_iter().reduce(fold).unwrap_or(f64::NAN))
            }
            _ => return Err(ProgramError::new(format!("unknown function '{func}'"), span).into()),
        })
    }

    fn binary(&mut self, op: BinaryOp, lhs: &Expr, rhs: &Expr, span: Span) -> Result<Value, Fault> {
        match op {
            BinaryOp::And => return Ok(Value::Bool(self.boolean(lhs)? && self.boolean(rhs)?)),
            BinaryOp::Or => return Ok(Value::Bool(self.boolean(lhs)? || self.boolean(rhs)?)),
            _ => {}
        }
        let a = self.eval(lhs)?;
        let b = self.eval(rhs)?;
        let mismatch = || -> Fault {
            ProgramError::new(
                format!("cannot apply '{}' to {} and {}", op.symbol(), a.type_name(), b.type_name()),
                span,
            )
            .into()
        };
        Ok(match (op, &a, &b) {
            (BinaryOp::Eq, _, _) => Value::Bool(a == b),
            (BinaryOp::Ne, _, _) => Value::Bool(a != b),
            (BinaryOp::Add, Value::Number(x), Value::Number(y)) => Value::Number(x + y),
            (BinaryOp::Sub, Value::Number(x), Value::Number(y)) => Value::Number(x - y),
            (BinaryOp::Mul, Value::Number(x), Value::Number(y)) => Value::Number(x * y),
            (BinaryOp::Div, Value::Number(x), Value::Number(y)) => Value::Number(x / y),
            (BinaryOp::Add, Value::Vector(x), Value::Vector(y)) => Value::Vector(*x + *y),
            (BinaryOp::Sub, Value::Vector(x), Value::Vector(y)) => Value::Vector(*x - *y),
            (BinaryOp::Mul, Value::Vector(v), Value::Number(k)) | (BinaryOp::Mul, Value::Number(k), Value::Vector(v)) => {
                Value::Vector(*v * *k)
            }
            (BinaryOp::Div, Value::Vector(v), Value::Number(k)) => Value::Vector(*v / *k),
            (BinaryOp::Lt, Value::Number(x), Value::Number(y)) => Value::Bool(x < y),
            (BinaryOp::Le, Value::Number(x), Value::Number(y)) => Value::Bool(x <= y),
            (BinaryOp::Gt, Value::Number(x), Value::Number(y)) => Value::Bool(x > y),
            (BinaryOp::Ge, Value::Number(x), Value::Number(y)) => Value::Bool(x >= y),
            _ => return Err(mismatch()),
        })
    }

    fn can_see(&self, viewer: Value, target: Value, vspan: Span, tspan: Span) -> Result<bool, Fault> {
        let (pose, spec, skip_viewer) = match viewer {
            Value::Object(i) => (self.world.objects[i].pose, self.world.objects[i].view_spec(), Some(i)),
            Value::Vector(p) => (Pose::new(p, Default::default()), ViewSpec::default(), None),
            other => return Err(type_error("an object or vector", &other, vspan)),
        };
        match target {
            Value::Object(j) => {
                let occluders: Vec<&IndexedMesh> = self
                    .world
                    .objects
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| Some(*k) != skip_viewer && *k != j)
                    .map(|(_, o)| o.mesh.as_ref())
                    .collect();
                Ok(can_see(&pose, &self.world.objects[j].mesh, &occluders, &spec))
            }
            Value::Vector(p) => Ok(point_visible(&pose, p, &spec, self.world, skip_viewer)),
            other => Err(type_error("an object or vector", &other, tspan)),
        }
    }
}

/// Line of sight to a bare point: inside the view region, within range and
/// not blocked by any object other than the viewer.
fn point_visible(viewer: &Pose, p: Vec3, spec: &ViewSpec, world: &World, skip: Option<usize>) -> bool {
    let d = p - viewer.position;
    let dist = d.norm();
    if dist > spec.visible_distance {
        return false;
    }
    if dist == 0.0 {
        return true;
    }
    let local = viewer.orientation.apply_inverse(d);
    let az = (-local.x).atan2(local.y);
    let el = local.z.atan2(local.x.hypot(local.y));
    if !spec.contains_angles(az, el) {
        return false;
    }
    let dir = d / dist;
    world
        .objects
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != skip)
        .all(|(_, o)| o.mesh.ray_nearest(viewer.position, dir, dist - OCCLUSION_TIE).is_none())
}

