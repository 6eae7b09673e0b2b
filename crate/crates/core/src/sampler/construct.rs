//! Evaluating a resolved plan into a property table.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{PI, TAU};
use std::path::PathBuf;
use std::sync::Mutex;

use crate::geom::{angles_toward, vec3, Orientation, Pose, Vec3};
use crate::lang::ast::{Direction, Specifier, SpecifierKind};
use crate::lang::Span;
use crate::mesh::{load_mesh, project_onto, top_surface, top_surface_of, Region, Shape, DEFAULT_TOP_SURFACE_ANGLE};
use crate::rng::SceneRng;
use crate::specifier::{DefaultSource, Plan, Step};
use crate::visibility::DEFAULT_VISIBLE_DISTANCE;

use super::error::{Fault, ProgramError, RejectCause};
use super::eval::{Ctx, Env};
use super::scene::World;
use super::value::{BehaviorSpec, PropertyTable, Value};

const VISIBLE_SAMPLING_ATTEMPTS: usize = 1000;

fn reject(msg: impl Into<String>) -> Fault {
    RejectCause::Geometry(msg.into()).into()
}

fn own_number(props: &PropertyTable, name: &str, span: Span) -> Result<f64, Fault> {
    match props.get(name) {
        Some(Value::Number(x)) => Ok(*x),
        Some(v) => Err(ProgramError::new(format!("property '{name}' must be a number, found {}", v.type_name()), span).into()),
        None => Err(ProgramError::new(format!("property '{name}' is not available yet"), span).into()),
    }
}

fn own_vector(props: &PropertyTable, name: &str, span: Span) -> Result<Vec3, Fault> {
    match props.get(name) {
        Some(Value::Vector(v)) => Ok(*v),
        Some(v) => Err(ProgramError::new(format!("property '{name}' must be a vector, found {}", v.type_name()), span).into()),
        None => Err(ProgramError::new(format!("property '{name}' is not available yet"), span).into()),
    }
}

fn own_orientation(props: &PropertyTable, span: Span) -> Result<Orientation, Fault> {
    match props.get("parentOrientation") {
        Some(Value::Orientation(o)) => Ok(*o),
        Some(Value::Vector(v)) => Ok(Orientation::from_euler(v.x, v.y, v.z)),
        Some(v) => Err(ProgramError::new(format!("parentOrientation must be an orientation, found {}", v.type_name()), span).into()),
        None => Err(ProgramError::new("parentOrientation is not available yet", span).into()),
    }
}

/// Value of a root-kind default.
fn builtin_value(property: &str, props: &PropertyTable, ray_density: f64, span: Span) -> Result<Value, Fault> {
    Ok(match property {
        "position" => Value::Vector(Vec3::ZERO),
        "parentOrientation" => Value::Orientation(Orientation::IDENTITY),
        "yaw" | "pitch" | "roll" => Value::Number(0.0),
        "width" | "length" | "height" => Value::Number(1.0),
        "shape" => Value::Str("box".into()),
        "baseOffset" => Value::Vector(vec3(0.0, 0.0, -own_number(props, "height", span)? / 2.0)),
        "allowCollisions" => Value::Bool(false),
        "viewAngles" => Value::Vector(vec3(TAU, PI, 0.0)),
        "visibleDistance" => Value::Number(DEFAULT_VISIBLE_DISTANCE),
        "rayDensity" => Value::Number(ray_density),
        _ => Value::None,
    })
}

/// Runs every step of `plan` in order and returns the finished property table.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_plan(
    plan: &Plan,
    specifiers: &[Specifier],
    defaults: &BTreeMap<String, DefaultSource>,
    world: &World,
    env: &Env,
    rng: &mut SceneRng,
    ray_density: f64,
    span: Span,
) -> Result<PropertyTable, Fault> {
    let mut props = PropertyTable::new();
    for step in &plan.steps {
        match step {
            Step::Default(p) => {
                let v = match &defaults[p] {
                    DefaultSource::Builtin { .. } => builtin_value(p, &props, ray_density, span)?,
                    DefaultSource::Expr(e) => Ctx {
                        world,
                        env,
                        rng,
                        this: Some(&props),
                    }
                    .eval(e)?,
                };
                props.insert(p.clone(), v);
            }
            Step::Specifier { index, sets, modifies } => {
                let out = apply_specifier(&specifiers[*index], sets, modifies, &props, world, env, rng)?;
                props.extend(out);
            }
        }
    }
    Ok(props)
}

fn placement_region(v: Value, world: &World, span: Span) -> Result<Region, Fault> {
    let region = match v {
        Value::Object(i) => {
            let o = &world.objects[i];
            top_surface(&o.shape, &o.pose, o.dims)
        }
        Value::Region(r) => match r.as_ref() {
            Region::Surface(_) => r.as_ref().clone(),
            Region::Volume(m) => top_surface_of(m.mesh(), DEFAULT_TOP_SURFACE_ANGLE),
            Region::Box(b) => top_surface(&Shape::Box, &Pose::new(b.center(), Orientation::IDENTITY), b.extent()),
            Region::Empty | Region::All => return Err(reject("cannot place an object on an unbounded or empty region")),
        },
        other => {
            return Err(ProgramError::new(format!("'on' needs an object or region, found {}", other.type_name()), span).into())
        }
    };
    if matches!(region, Region::Empty) {
        return Err(reject("placement surface has no upward-facing faces"));
    }
    Ok(region)
}

fn apply_specifier(
    spec: &Specifier,
    sets: &[String],
    modifies: &[String],
    props: &PropertyTable,
    world: &World,
    env: &Env,
    rng: &mut SceneRng,
) -> Result<Vec<(String, Value)>, Fault> {
    let sets_p = |p: &str| sets.iter().any(|s| s == p);
    let span = spec.span;
    let mut out: Vec<(String, Value)> = Vec::new();
    let mut ctx = Ctx {
        world,
        env,
        rng,
        this: Some(props),
    };
    match &spec.kind {
        SpecifierKind::At(e) => out.push(("position".into(), Value::Vector(ctx.vector(e)?))),
        SpecifierKind::OffsetBy(e) => {
            let v = ctx.vector(e)?;
            let ego = world.ego.ok_or_else(|| ProgramError::new("'offset by' is relative to ego, which is not defined yet", span))?;
            out.push(("position".into(), Value::Vector(world.objects[ego].pose.transform_point(v))));
        }
        SpecifierKind::Positional { direction, target, by } => {
            let t = ctx.eval(target)?;
            let d = match by {
                Some(b) => ctx.number(b)?,
                None => 0.0,
            };
            let (tp, to, td) = match t {
                Value::Object(i) => {
                    let o = &world.objects[i];
                    (o.pose.position, o.pose.orientation, o.dims)
                }
                Value::Vector(v) => (v, Orientation::IDENTITY, Vec3::ZERO),
                other => {
                    return Err(ProgramError::new(format!("expected an object or vector, found {}", other.type_name()), target.span).into())
                }
            };
            let half = |own: &str, theirs: f64| -> Result<f64, Fault> { Ok(theirs / 2.0 + own_number(props, own, span)? / 2.0 + d) };
            let off = match direction {
                Direction::LeftOf => vec3(-half("width", td.x)?, 0.0, 0.0),
                Direction::RightOf => vec3(half("width", td.x)?, 0.0, 0.0),
                Direction::AheadOf => vec3(0.0, half("length", td.y)?, 0.0),
                Direction::Behind => vec3(0.0, -half("length", td.y)?, 0.0),
                Direction::Above => vec3(0.0, 0.0, half("height", td.z)?),
                Direction::Below => vec3(0.0, 0.0, -half("height", td.z)?),
            };
            if sets_p("position") {
                out.push(("position".into(), Value::Vector(tp + to.apply(off))));
            }
            if sets_p("parentOrientation") {
                out.push(("parentOrientation".into(), Value::Orientation(to)));
            }
        }
        SpecifierKind::On(e) => {
            let target = ctx.eval(e)?;
            let region = placement_region(target, world, e.span)?;
            let base = own_vector(props, "baseOffset", span)?;
            let sets_parent = sets_p("parentOrientation");
            let (contact, normal) = if modifies.iter().any(|m| m == "position") {
                let prior = if sets_parent { Orientation::IDENTITY } else { own_orientation(props, span)? };
                let probe = own_vector(props, "position", span)? + prior.apply(base);
                let proj = project_onto(&region, probe).map_err(|e| reject(e.to_string()))?;
                (proj.point, proj.normal)
            } else {
                let (p, tri) = region.sample_surface_with_triangle(ctx.rng).map_err(|e| reject(e.to_string()))?;
                let n = match &region {
                    Region::Surface(m) => m.mesh().triangle_normal(tri),
                    _ => Vec3::Z,
                };
                (p, n)
            };
            let parent = if sets_parent {
                Orientation::aligning(Vec3::Z, normal)
            } else {
                own_orientation(props, span)?
            };
            out.push(("position".into(), Value::Vector(contact - parent.apply(base))));
            if sets_parent {
                out.push(("parentOrientation".into(), Value::Orientation(parent)));
            }
        }
        SpecifierKind::Facing(e) => {
            let (y, p, r) = match ctx.eval(e)? {
                Value::Number(y) => (y, 0.0, 0.0),
                Value::Vector(v) => (v.x, v.y, v.z),
                other => return Err(ProgramError::new(format!("facing needs a heading or (yaw, pitch, roll), found {}", other.type_name()), e.span).into()),
            };
            for (name, v) in [("yaw", y), ("pitch", p), ("roll", r)] {
                if sets_p(name) {
                    out.push((name.into(), Value::Number(v)));
                }
            }
        }
        SpecifierKind::FacingToward(e) | SpecifierKind::FacingDirectlyToward(e) => {
            let tp = ctx.point(e)?;
            let pos = own_vector(props, "position", span)?;
            let parent = own_orientation(props, span)?;
            let d = parent.apply_inverse(tp - pos);
            let (yaw, pitch) = if matches!(spec.kind, SpecifierKind::FacingDirectlyToward(_)) {
                angles_toward(Vec3::ZERO, d).map_err(|e| reject(e.to_string()))?
            } else {
                if d.x == 0.0 && d.y == 0.0 {
                    return Err(reject("facing toward a point straight above or below"));
                }
                ((-d.x).atan2(d.y), 0.0)
            };
            if sets_p("yaw") {
                out.push(("yaw".into(), Value::Number(yaw)));
            }
            if sets_p("pitch") {
                out.push(("pitch".into(), Value::Number(pitch)));
            }
        }
        SpecifierKind::With { property, value } => {
            let v = match (property.as_str(), ctx.eval(value)?) {
                ("parentOrientation", Value::Object(i)) => Value::Orientation(world.objects[i].pose.orientation),
                ("parentOrientation", Value::Vector(v)) => Value::Orientation(Orientation::from_euler(v.x, v.y, v.z)),
                (_, v) => v,
            };
            out.push((property.clone(), v));
        }
        SpecifierKind::Behavior { name, args } => {
            let args = args.iter().map(|a| ctx.eval(a)).collect::<Result<Vec<_>, _>>()?;
            out.push(("behavior".into(), Value::Behavior(BehaviorSpec { name: name.clone(), args })));
        }
        SpecifierKind::Visible { from } => {
            let viewer = match from {
                Some(f) => ctx.object(f)?,
                None => world.ego.ok_or_else(|| ProgramError::new("'visible' without 'from' needs ego", span))?,
            };
            let v = &world.objects[viewer];
            let view = v.view_spec();
            let mut placed = None;
            for _ in 0..VISIBLE_SAMPLING_ATTEMPTS {
                let z = ctx.rng.range(-1.0, 1.0);
                let phi = ctx.rng.range(-PI, PI);
                let r = view.visible_distance * ctx.rng.unit_open().cbrt();
                let s = (1.0 - z * z).max(0.0).sqrt();
                let dir = vec3(s * phi.cos(), s * phi.sin(), z);
                let local = v.pose.orientation.apply_inverse(dir);
                let az = (-local.x).atan2(local.y);
                let el = local.z.atan2(local.x.hypot(local.y));
                if view.contains_angles(az, el) {
                    placed = Some(v.pose.position + dir * r);
                    break;
                }
            }
            let p = placed.ok_or_else(|| reject(format!("could not sample a point visible from {}", v.name)))?;
            out.push(("position".into(), Value::Vector(p)));
        }
    }
    Ok(out)
}

/// Maps shape names to shapes, loading mesh files once.
#[derive(Debug, Default)]
pub struct ShapeResolver {
    base_dir: Option<PathBuf>,
    cache: Mutex<HashMap<String, Shape>>,
}

impl ShapeResolver {
    pub fn new(base_dir: Option<PathBuf>) -> ShapeResolver {
        ShapeResolver {
            base_dir,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn resolve(&self, name: &str, span: Span) -> Result<Shape, ProgramError> {
        Ok(match name {
            "box" => Shape::Box,
            "sphere" => Shape::Sphere,
            "cylinder" => Shape::Cylinder,
            "cone" => Shape::Cone,
            "builtin/chair" => Shape::chair(),
            "builtin/table" => Shape::table(),
            path => {
                let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
                if let Some(s) = cache.get(path) {
                    return Ok(s.clone());
                }
                let full = match &self.base_dir {
                    Some(dir) => dir.join(path),
                    None => PathBuf::from(path),
                };
                let shape = load_mesh(&full).map_err(|e| ProgramError::new(format!("cannot load shape '{path}': {e}"), span))?;
                cache.insert(path.to_string(), shape.clone());
                shape
            }
        })
    }
}
