//! Rejection sampling of concrete scenes from a parsed scenario.

mod construct;
mod error;
mod eval;
mod kinds;
mod scene;
mod value;

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::lang::ast::{Expr, ExprKind, NewObject, Program, SpecifierKind, StatementKind};
use crate::lang::pretty_expr;
use crate::mesh::{meshes_intersect, Heuristics, IndexedMesh, Region};
use crate::rng::SceneRng;
use crate::specifier::resolve;
use crate::temporal::TemporalRequirement;
use crate::visibility::{can_see, DEFAULT_RAY_DENSITY};

pub use construct::{evaluate_plan, ShapeResolver};
pub use error::{Fault, ProgramError, RejectCause, SampleError};
pub use eval::{Ctx, Env};
pub use kinds::{KindDef, KindRegistry, PRELUDE, ROOT_KIND};
pub use scene::{pose_from_properties, SceneObject, World};
pub use value::{BehaviorSpec, PropertyTable, Value};

pub const DEFAULT_MAX_REJECTIONS: usize = 1000;
/// Per unit of `mutate` scale.
pub const MUTATION_POSITION_STDDEV: f64 = 0.5;
pub const MUTATION_YAW_STDDEV: f64 = 5.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub max_rejections: usize,
    /// Default `rayDensity` for objects that do not set one.
    pub ray_density: f64,
    /// Directory that relative mesh paths are resolved against.
    pub base_dir: Option<PathBuf>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            max_rejections: DEFAULT_MAX_REJECTIONS,
            ray_density: DEFAULT_RAY_DENSITY,
            base_dir: None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum StaticRequirement {
    Expr(Expr),
    /// From a `visible` specifier: `viewer can see target`.
    Visible { viewer: usize, target: usize },
}

/// One accepted concrete scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub seed: u64,
    pub rejections: usize,
    pub world: World,
    pub env: Env,
    pub requirements: Vec<StaticRequirement>,
    pub temporal: Vec<TemporalRequirement>,
}

impl Scene {
    pub fn objects(&self) -> &[SceneObject] {
        &self.world.objects
    }

    pub fn get(&self, name: &str) -> Option<&SceneObject> {
        self.world.get(name)
    }

    pub fn ego(&self) -> Option<&SceneObject> {
        self.world.ego.map(|i| &self.world.objects[i])
    }

    /// Evaluates an expression against `world` (for example a simulated state
    /// of this scene) with this scene's variables.
    pub fn evaluate(&self, world: &World, e: &Expr, rng: &mut SceneRng) -> Result<Value, Fault> {
        Ctx {
            world,
            env: &self.env,
            rng,
            this: None,
        }
        .eval(e)
    }

    /// Repeats every acceptance check with the exhaustive collision test.
    pub fn recheck(&self) -> Result<(), Fault> {
        let mut rng = SceneRng::seed_from_u64(self.seed);
        check_scene(&self.world, &self.env, &self.requirements, &mut rng, Heuristics::Off)
    }
}

/// Adds Gaussian noise to x, y and yaw of each target.
pub fn apply_mutation(world: &mut World, targets: &[usize], scale: f64, rng: &mut SceneRng) -> Result<(), ProgramError> {
    for &i in targets {
        let dx = rng.normal(0.0, MUTATION_POSITION_STDDEV * scale);
        let dy = rng.normal(0.0, MUTATION_POSITION_STDDEV * scale);
        let dyaw = rng.normal(0.0, MUTATION_YAW_STDDEV * scale);
        let o = &mut world.objects[i];
        if let Some(Value::Vector(p)) = o.properties.get_mut("position") {
            p.x += dx;
            p.y += dy;
        }
        if let Some(Value::Number(y)) = o.properties.get_mut("yaw") {
            *y += dyaw;
        }
        o.refresh_pose()?;
    }
    Ok(())
}

fn check_scene(
    world: &World,
    env: &Env,
    requirements: &[StaticRequirement],
    rng: &mut SceneRng,
    heuristics: Heuristics,
) -> Result<(), Fault> {
    let objs = &world.objects;
    for i in 0..objs.len() {
        for j in i + 1..objs.len() {
            if objs[i].allows_collisions() || objs[j].allows_collisions() {
                continue;
            }
            if meshes_intersect(&objs[i].mesh, &objs[j].mesh, heuristics) {
                return Err(RejectCause::Collision(objs[i].name.clone(), objs[j].name.clone()).into());
            }
        }
    }
    for req in requirements {
        match req {
            StaticRequirement::Expr(e) => {
                let ok = Ctx {
                    world,
                    env,
                    rng,
                    this: None,
                }
                .boolean(e)?;
                if !ok {
                    return Err(RejectCause::Requirement {
                        line: e.span.start.line,
                        text: pretty_expr(e),
                    }
                    .into());
                }
            }
            StaticRequirement::Visible { viewer, target } => {
                let occluders: Vec<&IndexedMesh> = objs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| k != viewer && k != target)
                    .map(|(_, o)| o.mesh.as_ref())
                    .collect();
                let v = &objs[*viewer];
                if !can_see(&v.pose, &objs[*target].mesh, &occluders, &v.view_spec()) {
                    return Err(RejectCause::NotVisible(objs[*target].name.clone(), v.name.clone()).into());
                }
            }
        }
    }
    if let Some(Value::Region(ws)) = env.get("workspace") {
        for o in objs {
            if !inside_region(ws, &o.mesh)? {
                return Err(RejectCause::Workspace(o.name.clone()).into());
            }
        }
    }
    Ok(())
}

fn inside_region(region: &Region, mesh: &IndexedMesh) -> Result<bool, Fault> {
    match region {
        Region::All => Ok(true),
        Region::Empty => Ok(false),
        Region::Box(b) => {
            let a = mesh.aabb();
            let outer = b.inflated(crate::mesh::PENETRATION_TOLERANCE);
            Ok(outer.contains(a.min) && outer.contains(a.max))
        }
        _ => {
            for v in mesh.mesh().vertices() {
                if !region.contains_point(*v).map_err(|e| RejectCause::Geometry(e.to_string()))? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Program-level sampler: holds the parsed scenario and its kinds.
pub struct Sampler {
    program: Program,
    kinds: KindRegistry,
    config: SamplerConfig,
    shapes: ShapeResolver,
}

struct Attempt<'a> {
    sampler: &'a Sampler,
    world: World,
    env: Env,
    rng: &'a mut SceneRng,
    requirements: Vec<StaticRequirement>,
    temporal: Vec<Expr>,
    /// `None` targets every object.
    mutations: Vec<(Option<Vec<usize>>, f64)>,
}

impl Attempt<'_> {
    fn ctx(&mut self) -> Ctx<'_> {
        Ctx {
            world: &self.world,
            env: &self.env,
            rng: self.rng,
            this: None,
        }
    }

    fn construct(&mut self, n: &NewObject, name: Option<&str>) -> Result<usize, Fault> {
        let s = self.sampler;
        if !s.kinds.contains(&n.kind) {
            return Err(ProgramError::new(format!("unknown kind '{}'", n.kind), n.span).into());
        }
        let defaults = s.kinds.defaults(&n.kind, n.span)?;
        let plan = resolve(&n.specifiers, &defaults).map_err(|e| ProgramError::from_specifier(e, n.span))?;
        let props = evaluate_plan(
            &plan,
            &n.specifiers,
            &defaults,
            &self.world,
            &self.env,
            self.rng,
            s.config.ray_density,
            n.span,
        )?;
        let shape = match props.get("shape") {
            Some(Value::Str(name)) => s.shapes.resolve(name, n.span)?,
            Some(other) => {
                return Err(ProgramError::new(format!("shape must be a string, found {}", other.type_name()), n.span).into())
            }
            None => crate::mesh::Shape::Box,
        };
        let index = self.world.objects.len();
        let name = match name {
            Some(n) => n.to_string(),
            None => format!("{}{index}", n.kind.to_lowercase()),
        };
        let obj = SceneObject::new(name, n.kind.clone(), props, shape)?;
        self.world.objects.push(obj);
        for spec in &n.specifiers {
            if let SpecifierKind::Visible { from } = &spec.kind {
                let viewer = match from {
                    Some(f) => self.ctx().object(f)?,
                    None => self
                        .world
                        .ego
                        .ok_or_else(|| ProgramError::new("'visible' without 'from' needs ego", spec.span))?,
                };
                if viewer != index {
                    self.requirements.push(StaticRequirement::Visible { viewer, target: index });
                }
            }
        }
        Ok(index)
    }

    fn run(&mut self, program: &Program) -> Result<(), Fault> {
        for stmt in &program.statements {
            match &stmt.kind {
                StatementKind::Assignment { name, value } => {
                    let v = match &value.kind {
                        ExprKind::New(n) => Value::Object(self.construct(n, Some(name))?),
                        _ => self.ctx().eval(value)?,
                    };
                    self.env.insert(name.clone(), v);
                }
                StatementKind::EgoAssignment(value) => {
                    let i = match &value.kind {
                        ExprKind::New(n) => self.construct(n, Some("ego"))?,
                        _ => self.ctx().object(value)?,
                    };
                    self.world.ego = Some(i);
                }
                StatementKind::NewObject(n) => {
                    self.construct(n, None)?;
                }
                StatementKind::Require(e) => self.requirements.push(StaticRequirement::Expr(e.clone())),
                StatementKind::RequireTemporal(e) => self.temporal.push(e.clone()),
                StatementKind::Mutate { targets, scale } => {
                    let scale = match scale {
                        Some(e) => self.ctx().number(e)?,
                        None => 1.0,
                    };
                    let ids = if targets.is_empty() {
                        None
                    } else {
                        let mut ids = Vec::new();
                        for t in targets {
                            let id = if t.name == "ego" {
                                self.world.ego
                            } else {
                                match self.env.get(&t.name) {
                                    Some(Value::Object(i)) => Some(*i),
                                    _ => None,
                                }
                            };
                            ids.push(id.ok_or_else(|| ProgramError::new(format!("'{}' is not an object", t.name), t.span))?);
                        }
                        Some(ids)
                    };
                    self.mutations.push((ids, scale));
                }
                StatementKind::KindDefinition { .. } => {}
            }
        }
        let all: Vec<usize> = (0..self.world.objects.len()).collect();
        for (ids, scale) in std::mem::take(&mut self.mutations) {
            apply_mutation(&mut self.world, ids.as_deref().unwrap_or(&all), scale, self.rng)?;
        }
        check_scene(&self.world, &self.env, &self.requirements, self.rng, Heuristics::On)
    }
}

impl Sampler {
    pub fn new(program: Program, config: SamplerConfig) -> Result<Sampler, ProgramError> {
        let kinds = KindRegistry::for_program(&program)?;
        let shapes = ShapeResolver::new(config.base_dir.clone());
        Ok(Sampler {
            program,
            kinds,
            config,
            shapes,
        })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn kinds(&self) -> &KindRegistry {
        &self.kinds
    }

    /// Resolves every object's specifiers without sampling, surfacing
    /// conflicts, cycles and unknown kinds.
    pub fn check(&self) -> Result<(), ProgramError> {
        let mut news = Vec::new();
        for stmt in &self.program.statements {
            match &stmt.kind {
                StatementKind::NewObject(n) => news.push(n),
                StatementKind::Assignment { value, .. } | StatementKind::EgoAssignment(value) => {
                    if let ExprKind::New(n) = &value.kind {
                        news.push(n);
                    }
                }
                _ => {}
            }
        }
        for n in news {
            if !self.kinds.contains(&n.kind) {
                return Err(ProgramError::new(format!("unknown kind '{}'", n.kind), n.span));
            }
            let defaults = self.kinds.defaults(&n.kind, n.span)?;
            resolve(&n.specifiers, &defaults).map_err(|e| ProgramError::from_specifier(e, n.span))?;
        }
        Ok(())
    }

    /// Draws one candidate; a rejection is reported as `Fault::Reject`.
    pub fn attempt(&self, rng: &mut SceneRng) -> Result<Scene, Fault> {
        let mut a = Attempt {
            sampler: self,
            world: World::default(),
            env: Env::new(),
            rng,
            requirements: Vec::new(),
            temporal: Vec::new(),
            mutations: Vec::new(),
        };
        a.run(&self.program)?;
        Ok(Scene {
            seed: 0,
            rejections: 0,
            world: a.world,
            env: a.env,
            requirements: a.requirements,
            temporal: a.temporal.iter().map(TemporalRequirement::from_expr).collect(),
        })
    }

    /// First accepted scene drawn from `rng`, giving up after the configured
    /// number of rejections.
    pub fn sample_from(&self, rng: &mut SceneRng, seed: u64) -> Result<Scene, SampleError> {
        let mut causes: BTreeMap<RejectCause, usize> = BTreeMap::new();
        for rejections in 0..=self.config.max_rejections {
            match self.attempt(rng) {
                Ok(mut scene) => {
                    scene.seed = seed;
                    scene.rejections = rejections;
                    return Ok(scene);
                }
                Err(Fault::Program(e)) => return Err(SampleError::Program(e)),
                Err(Fault::Reject(c)) => *causes.entry(c).or_default() += 1,
            }
        }
        Err(exhausted(causes, self.config.max_rejections + 1))
    }

    pub fn sample_scene(&self, seed: u64) -> Result<Scene, SampleError> {
        self.sample_from(&mut SceneRng::seed_from_u64(seed), seed)
    }
}

/// Error for a run of rejected attempts, naming the most frequent cause.
pub fn exhausted(causes: BTreeMap<RejectCause, usize>, rejections: usize) -> SampleError {
    let (cause, count) = causes
        .into_iter()
        .fold(None, |best: Option<(RejectCause, usize)>, (c, n)| match best {
            Some((_, m)) if m >= n => best,
            _ => Some((c, n)),
        })
        .unwrap_or((RejectCause::Geometry("no attempts were made".into()), 0));
    SampleError::MaxRejectionsExceeded { rejections, cause, count }
}

