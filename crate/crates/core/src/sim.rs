//! Kinematic simulation with online requirement monitoring.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;

use crate::export::{vector, Float};
use crate::geom::{normalize_angle, vec3, Orientation, Pose, Vec3};
use crate::mesh::{meshes_intersect, Heuristics, IndexedMesh, Shape};
use crate::rng::SceneRng;
use crate::sampler::{exhausted, BehaviorSpec, Fault, ProgramError, RejectCause, SampleError, Sampler, Scene, SceneObject, Value, World};
use crate::temporal::{MonitorState, TemporalRequirement, Verdict};

pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_TURN_RATE: f64 = 1.0;
pub const COVERAGE_CELL: f64 = 0.05;
/// Heights above the floor at which obstacle footprints are probed.
const FOOTPRINT_PROBES: [f64; 5] = [0.005, 0.02, 0.05, 0.1, 0.2];

#[derive(Debug, Clone, PartialEq)]
pub enum Behavior {
    Stationary,
    ConstantVelocity(Vec3),
    Waypoints { points: Vec<Vec3>, speed: f64 },
    /// Drive straight; on contact stop and turn in place toward a random new heading.
    RandomWalk { speed: f64, turn_rate: f64 },
}

fn bad(spec: &BehaviorSpec, why: &str) -> ProgramError {
    ProgramError::unanchored(format!("invalid behavior {}: {why}", spec.name))
}

impl Behavior {
    pub fn from_spec(spec: Option<&BehaviorSpec>) -> Result<Behavior, ProgramError> {
        let Some(spec) = spec else { return Ok(Behavior::Stationary) };
        let nums: Option<Vec<f64>> = spec.args.iter().map(Value::as_number).collect();
        Ok(match spec.name.as_str() {
            "Stationary" => Behavior::Stationary,
            "ConstantVelocity" => match (spec.args.as_slice(), nums.as_deref()) {
                ([Value::Vector(v)], _) => Behavior::ConstantVelocity(*v),
                (_, Some([x, y])) => Behavior::ConstantVelocity(vec3(*x, *y, 0.0)),
                (_, Some([x, y, z])) => Behavior::ConstantVelocity(vec3(*x, *y, *z)),
                _ => return Err(bad(spec, "expected a velocity vector")),
            },
            "Waypoints" => {
                let (last, points) = spec.args.split_last().ok_or_else(|| bad(spec, "expected points and a speed"))?;
                let speed = last.as_number().ok_or_else(|| bad(spec, "the last argument must be the speed"))?;
                let points: Option<Vec<Vec3>> = points.iter().map(Value::as_vector).collect();
                let points = points.filter(|p| !p.is_empty()).ok_or_else(|| bad(spec, "expected at least one point"))?;
                if !(speed >= 0.0) {
                    return Err(bad(spec, "speed must be non-negative"));
                }
                Behavior::Waypoints { points, speed }
            }
            "RandomWalk" => {
                let n = nums.ok_or_else(|| bad(spec, "expected numbers"))?;
                let (speed, turn_rate) = match n.as_slice() {
                    [s] => (*s, DEFAULT_TURN_RATE),
                    [s, t] => (*s, *t),
                    _ => return Err(bad(spec, "expected speed and optional turn rate")),
                };
                if !(speed >= 0.0) || !(turn_rate > 0.0) {
                    return Err(bad(spec, "speed must be non-negative and turn rate positive"));
                }
                Behavior::RandomWalk { speed, turn_rate }
            }
            _ => return Err(bad(spec, "unknown behavior")),
        })
    }
}

/// Coverage tracking for a vacuum-like agent sweeping a floor.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSpec {
    pub floor: String,
    pub vacuum: String,
    pub cell: f64,
}

impl CoverageSpec {
    pub fn new(floor: impl Into<String>) -> CoverageSpec {
        CoverageSpec {
            floor: floor.into(),
            vacuum: "ego".into(),
            cell: COVERAGE_CELL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Number of Euler updates, at least 1; the trace holds `steps + 1`
    /// states, step 0 being the initial scene.
    pub steps: usize,
    pub dt: f64,
    pub coverage: Option<CoverageSpec>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            steps: 100,
            dt: DEFAULT_DT,
            coverage: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub t: f64,
    pub poses: Vec<Pose>,
    pub signals: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub names: Vec<String>,
    pub dt: f64,
    pub steps: Vec<TraceStep>,
}

#[derive(Serialize)]
struct JsonObject<'a> {
    name: &'a str,
    position: [Float; 3],
    yaw: Float,
    pitch: Float,
    roll: Float,
}

#[derive(Serialize)]
struct JsonStep<'a> {
    t: Float,
    objects: Vec<JsonObject<'a>>,
    signals: BTreeMap<&'a str, Float>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn signal(&self, name: &str) -> Vec<f64> {
        self.steps.iter().filter_map(|s| s.signals.get(name).copied()).collect()
    }

    /// One JSON object per step.
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for s in &self.steps {
            let objects = self
                .names
                .iter()
                .zip(&s.poses)
                .map(|(name, p)| {
                    let (yaw, pitch, roll) = p.orientation.euler_angles();
                    JsonObject {
                        name,
                        position: vector(p.position),
                        yaw: Float(yaw),
                        pitch: Float(pitch),
                        roll: Float(roll),
                    }
                })
                .collect();
            let step = JsonStep {
                t: Float(s.t),
                objects,
                signals: s.signals.iter().map(|(k, v)| (k.as_str(), Float(*v))).collect(),
            };
            serde_json::to_writer(&mut *out, &step)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub trace: Trace,
    /// One verdict per monitored requirement.
    pub verdicts: Vec<Verdict>,
    /// Atom valuations per requirement, per step.
    pub valuations: Vec<Vec<Vec<bool>>>,
    /// True when a requirement was definitively violated before the last step.
    pub aborted: bool,
}

impl SimOutcome {
    pub fn accepted(&self) -> bool {
        self.verdicts.iter().all(|v| v.accepted())
    }
}

struct Agent {
    behavior: Behavior,
    rng: SceneRng,
    waypoint: usize,
    turn_remaining: f64,
    stopped: bool,
}

struct Coverage {
    origin: (f64, f64),
    nx: usize,
    ny: usize,
    cell: f64,
    free: Vec<bool>,
    cleaned: Vec<bool>,
    free_count: usize,
    cleaned_count: usize,
    vacuum: usize,
}

impl Coverage {
    fn new(spec: &CoverageSpec, world: &World) -> Result<Coverage, ProgramError> {
        let floor = world
            .index_of(&spec.floor)
            .ok_or_else(|| ProgramError::unanchored(format!("no object named '{}' to measure coverage on", spec.floor)))?;
        let vacuum = if spec.vacuum == "ego" { world.ego } else { world.index_of(&spec.vacuum) }
            .ok_or_else(|| ProgramError::unanchored(format!("no vacuum object '{}'", spec.vacuum)))?;
        let b = world.objects[floor].mesh.aabb();
        let cell = spec.cell;
        let nx = ((b.max.x - b.min.x) / cell).floor().max(0.0) as usize;
        let ny = ((b.max.y - b.min.y) / cell).floor().max(0.0) as usize;
        let obstacles: Vec<_> = world
            .objects
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != floor && *k != vacuum)
            .map(|(_, o)| o.mesh.clone())
            .collect();
        let mut free = vec![false; nx * ny];
        let mut free_count = 0;
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (b.min.x + (i as f64 + 0.5) * cell, b.min.y + (j as f64 + 0.5) * cell);
                let blocked = FOOTPRINT_PROBES.iter().any(|h| {
                    let p = vec3(x, y, b.max.z + h);
                    obstacles
                        .iter()
                        .any(|m| m.aabb().contains(p) && m.contains_point(p).unwrap_or_else(|_| m.aabb().contains(p)))
                });
                if !blocked {
                    free[j * nx + i] = true;
                    free_count += 1;
                }
            }
        }
        Ok(Coverage {
            origin: (b.min.x, b.min.y),
            nx,
            ny,
            cell,
            cleaned: vec![false; nx * ny],
            free,
            free_count,
            cleaned_count: 0,
            vacuum,
        })
    }

    fn sweep(&mut self, world: &World) -> f64 {
        let o = &world.objects[self.vacuum];
        let c = o.pose.position;
        let r = o.dims.x / 2.0;
        let i0 = (((c.x - r - self.origin.0) / self.cell).floor().max(0.0)) as usize;
        let j0 = (((c.y - r - self.origin.1) / self.cell).floor().max(0.0)) as usize;
        let i1 = ((((c.x + r - self.origin.0) / self.cell).ceil()).max(0.0) as usize).min(self.nx);
        let j1 = ((((c.y + r - self.origin.1) / self.cell).ceil()).max(0.0) as usize).min(self.ny);
        for j in j0..j1 {
            for i in i0..i1 {
                let k = j * self.nx + i;
                if !self.free[k] || self.cleaned[k] {
                    continue;
                }
                let x = self.origin.0 + (i as f64 + 0.5) * self.cell;
                let y = self.origin.1 + (j as f64 + 0.5) * self.cell;
                if (x - c.x).hypot(y - c.y) <= r {
                    self.cleaned[k] = true;
                    self.cleaned_count += 1;
                }
            }
        }
        if self.free_count == 0 {
            0.0
        } else {
            self.cleaned_count as f64 / self.free_count as f64
        }
    }
}

fn collides(world: &World, mover: usize, candidate: &IndexedMesh) -> bool {
    if world.objects[mover].allows_collisions() {
        return false;
    }
    world
        .objects
        .iter()
        .enumerate()
        .any(|(k, o)| k != mover && !o.allows_collisions() && meshes_intersect(candidate, &o.mesh, Heuristics::On))
}

/// Moves `index` to `pose` unless that would put it inside another object.
fn try_move(world: &mut World, index: usize, pose: Pose) -> bool {
    let o = &world.objects[index];
    let candidate = IndexedMesh::from_shape(&o.shape, &pose, o.dims);
    if collides(world, index, &candidate) {
        return false;
    }
    world.objects[index].set_pose(pose);
    true
}

/// An upright body that is round in plan occupies the same space however it
/// is turned about the vertical; only its faceted mesh would say otherwise.
fn spins_in_place(o: &SceneObject) -> bool {
    let round = matches!(o.shape, Shape::Cylinder | Shape::Sphere | Shape::Cone) && o.dims.x == o.dims.y;
    round && o.pose.orientation.apply(vec3(0.0, 0.0, 1.0)).z > 1.0 - 1e-12
}

fn heading_of(o: &Orientation) -> f64 {
    let f = o.forward();
    (-f.x).atan2(f.y)
}

fn advance(world: &mut World, index: usize, agent: &mut Agent, dt: f64) {
    if agent.stopped {
        return;
    }
    let pose = world.objects[index].pose;
    match agent.behavior.clone() {
        Behavior::Stationary => {}
        Behavior::ConstantVelocity(v) => {
            let next = Pose::new(pose.position + v * dt, pose.orientation);
            if !try_move(world, index, next) {
                agent.stopped = true;
            }
        }
        Behavior::Waypoints { points, speed } => {
            let mut budget = speed * dt;
            let mut pos = pose.position;
            let mut orientation = pose.orientation;
            while budget > 0.0 && agent.waypoint < points.len() {
                let target = points[agent.waypoint];
                let d = target - pos;
                let dist = d.norm();
                if dist > 0.0 && (d.x != 0.0 || d.y != 0.0) {
                    let yaw = (-d.x).atan2(d.y);
                    orientation = Orientation::about_z(yaw - heading_of(&orientation)).compose(&orientation);
                }
                if dist <= budget {
                    pos = target;
                    budget -= dist;
                    agent.waypoint += 1;
                } else {
                    pos += d * (budget / dist);
                    budget = 0.0;
                }
            }
            if !try_move(world, index, Pose::new(pos, orientation)) {
                agent.stopped = true;
            }
        }
        Behavior::RandomWalk { speed, turn_rate } => {
            if agent.turn_remaining != 0.0 {
                let max = turn_rate * dt;
                let turn = agent.turn_remaining.clamp(-max, max);
                let next = Pose::new(pose.position, Orientation::about_z(turn).compose(&pose.orientation));
                let spins_freely = spins_in_place(&world.objects[index]);
                if spins_freely {
                    world.objects[index].set_pose(next);
                    agent.turn_remaining -= turn;
                } else if try_move(world, index, next) {
                    agent.turn_remaining -= turn;
                } else {
                    agent.turn_remaining = 0.0;
                }
                if agent.turn_remaining.abs() < 1e-12 {
                    agent.turn_remaining = 0.0;
                }
                return;
            }
            let f = pose.orientation.forward();
            let dir = vec3(f.x, f.y, 0.0).normalized();
            let next = Pose::new(pose.position + dir * (speed * dt), pose.orientation);
            if !try_move(world, index, next) {
                let delta = agent.rng.range(PI / 2.0, 3.0 * PI / 2.0);
                agent.turn_remaining = normalize_angle(delta);
            }
        }
    }
}

fn valuate(scene: &Scene, world: &World, req: &TemporalRequirement, rng: &mut SceneRng) -> Result<Vec<bool>, ProgramError> {
    req.atoms
        .iter()
        .map(|a| match scene.evaluate(world, a, rng) {
            Ok(Value::Bool(b)) => Ok(b),
            Ok(other) => Err(ProgramError::new(format!("requirement atom must be a boolean, found {}", other.type_name()), a.span)),
            Err(Fault::Program(e)) => Err(e),
            Err(Fault::Reject(c)) => Err(ProgramError::new(c.to_string(), a.span)),
        })
        .collect()
}

/// Runs the scene forward, monitoring `monitors` on every state from the
/// initial one. Stops early once any requirement is definitively violated.
pub fn run_simulation(
    scene: &Scene,
    options: &SimOptions,
    monitors: &[TemporalRequirement],
    rng: &mut SceneRng,
) -> Result<SimOutcome, ProgramError> {
    if !(options.dt > 0.0) {
        return Err(ProgramError::unanchored("dt must be positive"));
    }
    if options.steps == 0 {
        return Err(ProgramError::unanchored("a simulation needs at least one step"));
    }
    let mut world = scene.world.clone();
    let mut agents = Vec::with_capacity(world.objects.len());
    for o in &world.objects {
        agents.push(Agent {
            behavior: Behavior::from_spec(o.behavior())?,
            rng: rng.fork(),
            waypoint: 0,
            turn_remaining: 0.0,
            stopped: false,
        });
    }
    let mut coverage = match &options.coverage {
        Some(spec) => Some(Coverage::new(spec, &world)?),
        None => None,
    };
    let mut states: Vec<MonitorState> = monitors.iter().map(|m| MonitorState::new(m.formula.clone())).collect();
    let mut valuations = vec![Vec::new(); monitors.len()];
    let mut trace = Trace {
        names: world.objects.iter().map(|o| o.name.clone()).collect(),
        dt: options.dt,
        steps: Vec::with_capacity(options.steps + 1),
    };
    let mut aborted = false;
    for step in 0..=options.steps {
        if step > 0 {
            for (i, agent) in agents.iter_mut().enumerate() {
                advance(&mut world, i, agent, options.dt);
            }
        }
        let mut signals = BTreeMap::new();
        if let Some(c) = coverage.as_mut() {
            signals.insert("coverage".to_string(), c.sweep(&world));
        }
        trace.steps.push(TraceStep {
            t: step as f64 * options.dt,
            poses: world.objects.iter().map(|o| o.pose).collect(),
            signals,
        });
        for (k, m) in monitors.iter().enumerate() {
            let values = valuate(scene, &world, m, rng)?;
            states[k] = states[k].progress(&values);
            valuations[k].push(values);
        }
        if states.iter().any(|s| s.settled() == Some(false)) {
            aborted = step < options.steps;
            break;
        }
    }
    Ok(SimOutcome {
        trace,
        verdicts: states.iter().map(MonitorState::finalize).collect(),
        valuations,
        aborted,
    })
}

/// Samples scenes from `seed` until one's simulation satisfies every temporal
/// requirement (verdict true or presumably true).
pub fn simulate_accepted(sampler: &Sampler, seed: u64, options: &SimOptions) -> Result<(Scene, SimOutcome), SampleError> {
    let mut rng = SceneRng::seed_from_u64(seed);
    let mut causes = BTreeMap::new();
    let mut total = 0;
    for _ in 0..=sampler.config().max_rejections {
        let mut scene = sampler.sample_from(&mut rng, seed)?;
        total += scene.rejections;
        let monitors = scene.temporal.clone();
        let outcome = run_simulation(&scene, options, &monitors, &mut rng)?;
        if outcome.accepted() {
            scene.rejections = total;
            return Ok((scene, outcome));
        }
        total += 1;
        let failed = outcome
            .verdicts
            .iter()
            .position(|v| !v.accepted())
            .map(|k| monitors[k].text.clone())
            .unwrap_or_default();
        *causes.entry(RejectCause::Temporal(failed)).or_default() += 1;
    }
    Err(exhausted(causes, total))
}
