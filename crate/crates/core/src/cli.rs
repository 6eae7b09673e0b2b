//! The `scenium` command line: check, sample, simulate and check-trace.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::export::{write_scene_obj, SceneDocument};
use crate::lang::{format_at, format_diagnostic_in, parse, LangError};
use crate::sampler::{ProgramError, SampleError, Sampler, SamplerConfig, DEFAULT_MAX_REJECTIONS};
use crate::sim::{simulate_accepted, CoverageSpec, SimOptions, DEFAULT_DT};
use crate::temporal::{monitor_trace, read_atom_trace, stl_bounded_eventually_robustness, TemporalError, TemporalRequirement};
use crate::visibility::DEFAULT_RAY_DENSITY;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROGRAM: i32 = 1;
pub const EXIT_EXHAUSTED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scenium", version, about = "Probabilistic 3D scenario sampling and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Obj,
}

#[derive(Debug, clap::Args)]
struct Sampling {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_REJECTIONS)]
    max_rejections: usize,
    /// Rays per degree for visibility checks.
    #[arg(long, env = "SCENIUM_RAY_DENSITY", default_value_t = DEFAULT_RAY_DENSITY)]
    ray_density: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and resolve a scenario without sampling it.
    Check { file: PathBuf },
    /// Sample concrete scenes.
    Sample {
        file: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Sample scenes and run them forward, monitoring temporal requirements.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Track the fraction of this object's top surface swept by the ego.
        #[arg(long)]
        coverage: Option<String>,
        /// Robustness threshold for `eventually (coverage > threshold)`.
        #[arg(long, default_value_t = 1.0 / 3.0)]
        coverage_threshold: f64,
        /// Horizon of the eventually operator, in seconds.
        #[arg(long, default_value_t = 300.0)]
        horizon: f64,
    },
    /// Monitor a recorded trace of atom values against a formula.
    CheckTrace { trace: PathBuf, formula: String },
}

#[derive(Debug, Error)]
enum CliError {
    /// Already rendered for the user.
    #[error("{0}")]
    Program(String),
    #[error("{0}")]
    Exhausted(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Program(_) => EXIT_PROGRAM,
            CliError::Exhausted(_) => EXIT_EXHAUSTED,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PROGRAM } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_string().trim_end());
            e.code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Check { file } => {
            let (source, sampler) = load(&file, SamplerConfig::default())?;
            sampler.check().map_err(|e| program_error(&file, &source, &e))?;
            let n = sampler.program().statements.len();
            writeln!(out, "{}: ok ({n} statements)", file.display()).map_err(io_err(Path::new("<stdout>")))?;
            Ok(())
        }
        Command::Sample {
            file,
            sampling,
            count,
            out: dir,
            format,
        } => sample(&file, &sampling, count, &dir, format, out, err),
        Command::Simulate {
            file,
            sampling,
            steps,
            dt,
            runs,
            out: dir,
            coverage,
            coverage_threshold,
            horizon,
        } => {
            let options = SimOptions {
                steps,
                dt,
                coverage: coverage.map(CoverageSpec::new),
            };
            let metric = options.coverage.is_some().then_some((coverage_threshold, horizon));
            simulate(&file, &sampling, &options, runs, &dir, metric, out)
        }
        Command::CheckTrace { trace, formula } => {
            let text = fs::read_to_string(&trace).map_err(io_err(&trace))?;
            let src = format!("require {formula}");
            let program = parse(&src).map_err(|e| CliError::Program(format_diagnostic_in("<formula>", &e, &src)))?;
            let expr = match program.statements.first().map(|s| &s.kind) {
                Some(crate::lang::ast::StatementKind::Require(e) | crate::lang::ast::StatementKind::RequireTemporal(e))
                    if program.statements.len() == 1 =>
                {
                    e
                }
                _ => return Err(CliError::Program("the formula must be a single requirement expression".into())),
            };
            let req = TemporalRequirement::from_expr(expr);
            let values = read_atom_trace(&text, &req.atom_names()).map_err(|e| trace_error(&trace, e))?;
            let verdict = monitor_trace(&req.formula, &values).map_err(|e| trace_error(&trace, e))?;
            writeln!(out, "{verdict}").map_err(io_err(Path::new("<stdout>")))?;
            Ok(())
        }
    }
}

fn trace_error(path: &Path, e: TemporalError) -> CliError {
    CliError::Program(format!("{}: {e}", path.display()))
}

fn read(file: &Path) -> Result<String, CliError> {
    fs::read_to_string(file).map_err(io_err(file))
}

fn program_error(file: &Path, source: &str, e: &ProgramError) -> CliError {
    let name = file.display().to_string();
    CliError::Program(match e.span {
        Some(span) => format_at(Some(&name), span.start.line, span.start.column, &e.message, source),
        None => format!("{name}: error: {}", e.message),
    })
}

fn lang_error(file: &Path, source: &str, e: &LangError) -> CliError {
    CliError::Program(format_diagnostic_in(&file.display().to_string(), e, source))
}

fn load(file: &Path, config: SamplerConfig) -> Result<(String, Sampler), CliError> {
    let source = read(file)?;
    let program = parse(&source).map_err(|e| lang_error(file, &source, &e))?;
    let sampler = Sampler::new(program, config).map_err(|e| program_error(file, &source, &e))?;
    Ok((source, sampler))
}

fn config(s: &Sampling) -> SamplerConfig {
    SamplerConfig {
        max_rejections: s.max_rejections,
        ray_density: s.ray_density,
        base_dir: None,
    }
}

fn sample_error(file: &Path, source: &str, seed: u64, e: SampleError) -> CliError {
    match e {
        SampleError::Program(p) => program_error(file, source, &p),
        e @ SampleError::MaxRejectionsExceeded { .. } => CliError::Exhausted(format!("seed {seed}: {e}")),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn sample(
    file: &Path,
    sampling: &Sampling,
    count: usize,
    dir: &Path,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let (source, sampler) = load(file, config(sampling))?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let seeds: Vec<u64> = (0..count as u64).map(|k| sampling.seed.wrapping_add(k)).collect();
    let results: Vec<_> = seeds.par_iter().map(|&seed| (seed, sampler.sample_scene(seed))).collect();
    let stdout = Path::new("<stdout>");
    let mut failure = None;
    for (seed, result) in results {
        match result {
            Ok(scene) => {
                let path = match format {
                    Format::Json => {
                        let path = dir.join(format!("scene_{seed}.json"));
                        write_file(&path, SceneDocument::from_scene(&scene).to_json().as_bytes())?;
                        path
                    }
                    Format::Obj => {
                        let path = dir.join(format!("scene_{seed}.obj"));
                        let mut buf = Vec::new();
                        write_scene_obj(&mut buf, &scene).map_err(io_err(&path))?;
                        write_file(&path, &buf)?;
                        path
                    }
                };
                writeln!(out, "seed {seed}: {} rejections -> {}", scene.rejections, path.display()).map_err(io_err(stdout))?;
            }
            // Keep writing the scenes that did succeed; report the first failure at the end.
            Err(e) => {
                let e = sample_error(file, &source, seed, e);
                if let CliError::Exhausted(msg) = &e {
                    let _ = writeln!(err, "{msg}");
                }
                failure.get_or_insert(e);
            }
        }
    }
    match failure {
        None => Ok(()),
        Some(CliError::Exhausted(_)) => Err(CliError::Exhausted(format!("{}: sampling exhausted", file.display()))),
        Some(e) => Err(e),
    }
}

fn simulate(
    file: &Path,
    sampling: &Sampling,
    options: &SimOptions,
    runs: usize,
    dir: &Path,
    metric: Option<(f64, f64)>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (source, sampler) = load(file, config(sampling))?;
    if !(options.dt > 0.0) || options.steps == 0 {
        return Err(CliError::Program("--steps must be at least 1 and --dt positive".into()));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let seeds: Vec<u64> = (0..runs as u64).map(|k| sampling.seed.wrapping_add(k)).collect();
    let results: Vec<_> = seeds
        .par_iter()
        .map(|&seed| (seed, simulate_accepted(&sampler, seed, options)))
        .collect();
    let window = metric.map(|(_, h)| (h / options.dt).round() as usize);
    let mut summary = String::from("run\tseed\trejections\tsteps\tverdicts");
    if metric.is_some() {
        summary.push_str("\trobustness");
    }
    summary.push('\n');
    let mut robustness = Vec::new();
    for (run, (seed, result)) in results.into_iter().enumerate() {
        let (scene, outcome) = result.map_err(|e| sample_error(file, &source, seed, e))?;
        let path = dir.join(format!("trace_{seed}.jsonl"));
        let mut buf = Vec::new();
        outcome.trace.write_jsonl(&mut buf).map_err(io_err(&path))?;
        write_file(&path, &buf)?;
        let verdicts: Vec<&str> = outcome.verdicts.iter().map(|v| v.as_str()).collect();
        let verdicts = if verdicts.is_empty() { "-".to_string() } else { verdicts.join(",") };
        let _ = write!(summary, "{run}\t{seed}\t{}\t{}\t{verdicts}", scene.rejections, outcome.trace.len());
        if let (Some((threshold, _)), Some(window)) = (metric, window) {
            let signal = outcome.trace.signal("coverage");
            let r = stl_bounded_eventually_robustness(&signal, threshold, window)
                .map_err(|e| CliError::Program(e.to_string()))?;
            robustness.push(r);
            let _ = write!(summary, "\t{r:.6}");
        }
        summary.push('\n');
    }
    if !robustness.is_empty() {
        let mean = robustness.iter().sum::<f64>() / robustness.len() as f64;
        let _ = writeln!(summary, "mean robustness\t{mean:.6}");
    }
    let path = dir.join("summary.tsv");
    write_file(&path, summary.as_bytes())?;
    out.write_all(summary.as_bytes()).map_err(io_err(Path::new("<stdout>")))?;
    Ok(())
}
