//! The `mfjump` command line.
//!
//! Every command reads a [`RunConfig`] (file plus flag overrides, flags win),
//! writes its outputs into a staging directory next to the requested one and
//! renames it into place once everything is written.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{gronwall_constant, gronwall_exp_moment_bound};
use crate::config::{ModelSource, RateExperiment, RunConfig};
use crate::engine::simulate_particle_system;
use crate::error::{Error, Result};
use crate::experiments::{run_chaos, run_fournier_check, run_gn_rate, run_moment_audit, ChaosOptions, ChaosResult};
use crate::measure::io::write_flow;
use crate::model::probe::{probe_boundedness, validate_model, ProbeReport};
use crate::model::{DeclaredBounds, ModelSpec};
use crate::noise::build_bundle;
use crate::picard::{solve_flow, window_length};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;
/// A run that started but failed numerically (non-finite state, saturation).
pub const EXIT_FAILURE: i32 = 5;

const METADATA: &str = "metadata.json";

#[derive(Debug, Parser)]
#[command(name = "mfjump", version, about = "Mean-field jump-diffusion simulator and experiment runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Worker threads for replica-level parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Probe the model's Lipschitz and boundedness assumptions.
    Validate,
    /// Solve the limit flow by Picard iteration.
    Solve,
    /// Simulate the N-particle system.
    Simulate,
    /// Coupled propagation-of-chaos experiment.
    Chaos,
    /// Rate experiments (fournier, gn, moments).
    Rates,
    /// Gronwall and window constants from declared bounds.
    Bounds,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Solve => "solve",
            Command::Simulate => "simulate",
            Command::Chaos => "chaos",
            Command::Rates => "rates",
            Command::Bounds => "bounds",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML config, or JSON (including a previous run's metadata.json).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Catalog model id.
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Comma-separated particle counts.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Picard sample count M.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub replicas: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub experiment: Option<RateExperiment>,
    /// Draw the limit copy's initial state independently in `chaos`.
    #[arg(long, global = true)]
    pub independent_initial: bool,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(id) = &self.model {
            c.model = ModelSource::Catalog(id.clone());
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f.clone() { c.$f = v; })* };
        }
        set!(horizon, dt, n, ns, samples, tol, max_iter, replicas, seed, out, experiment);
        if self.independent_initial {
            c.independent_initial = true;
        }
        Ok(c)
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => EXIT_IO,
        Error::FlowNotConverged => EXIT_NOT_CONVERGED,
        Error::UnknownModel(_) | Error::Config(_) | Error::InvalidGrid(_) | Error::MissingBound(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let mut cfg = cli.overrides.resolve()?;
    cfg.command = Some(cli.command.name().to_string());
    cfg.validate()?;
    let spec = cfg.model_spec()?;
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        let mut stage = Staging::new(&cfg.out)?;
        let code = match cli.command {
            Command::Validate => cmd_validate(&cfg, &spec, &mut stage)?,
            Command::Solve => cmd_solve(&cfg, &spec, &mut stage)?,
            Command::Simulate => cmd_simulate(&cfg, &spec, &mut stage)?,
            Command::Chaos => cmd_chaos(&cfg, &spec, &mut stage)?,
            Command::Rates => cmd_rates(&cfg, &spec, &mut stage)?,
            Command::Bounds => cmd_bounds(&cfg, &spec, &mut stage)?,
        };
        stage.write(METADATA, cfg.to_json()?.as_bytes())?;
        stage.commit()?;
        Ok(code)
    })
}

/// A sibling directory that becomes the output directory on [`commit`].
///
/// [`commit`]: Staging::commit
struct Staging {
    target: PathBuf,
    temp: PathBuf,
    committed: bool,
}

impl Staging {
    fn new(target: &Path) -> Result<Self> {
        let name = target
            .file_name()
            .ok_or_else(|| Error::Config(format!("output path {} has no file name", target.display())))?;
        let mut temp_name = OsString::from(".");
        temp_name.push(name);
        temp_name.push(".partial");
        let temp = target.with_file_name(temp_name);
        if let Some(parent) = temp.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        if temp.exists() {
            fs::remove_dir_all(&temp).map_err(|e| Error::io(&temp, e))?;
        }
        fs::create_dir(&temp).map_err(|e| Error::io(&temp, e))?;
        Ok(Self {
            target: target.to_path_buf(),
            temp,
            committed: false,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.temp.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| Error::io(path, e))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn create(&self, name: &str) -> Result<std::io::BufWriter<fs::File>> {
        let path = self.path(name);
        let f = fs::File::create(&path).map_err(|e| Error::io(path, e))?;
        Ok(std::io::BufWriter::new(f))
    }

    /// Replaces a previous run's directory; refuses to touch anything else.
    fn commit(mut self) -> Result<()> {
        if self.target.exists() {
            if !self.target.join(METADATA).is_file() {
                return Err(Error::io(
                    &self.target,
                    std::io::Error::new(
                        std::io::ErrorKind::AlreadyExists,
                        "exists and is not a previous output directory",
                    ),
                ));
            }
            fs::remove_dir_all(&self.target).map_err(|e| Error::io(&self.target, e))?;
        }
        fs::rename(&self.temp, &self.target).map_err(|e| Error::io(&self.target, e))?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.temp);
        }
    }
}

fn flush(mut w: impl Write, path: &str) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn cmd_validate(cfg: &RunConfig, spec: &ModelSpec, stage: &mut Staging) -> Result<i32> {
    let report = validate_model(spec, &cfg.probe, cfg.probe_points)?;
    stage.write_json("report.json", &report)?;
    for c in &report.checks {
        let status = if c.passed { "ok" } else { "FAIL" };
        println!("{:<24} {status:<4} max ratio {:.4}", c.name, c.max_ratio);
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_solve(cfg: &RunConfig, spec: &ModelSpec, stage: &mut Staging) -> Result<i32> {
    let grid = cfg.grid()?;
    let (flow, diag) = solve_flow(spec, &grid, &cfg.picard_options())?;
    let mut w = stage.create("flow.csv")?;
    write_flow(&mut w, &flow)?;
    flush(w, "flow.csv")?;
    stage.write_json("diagnostics.json", &diag)?;
    println!(
        "converged={} windows={} max iterations per window={} final distance={:.3e}",
        diag.converged,
        diag.windows.len(),
        diag.max_window_iterations(),
        diag.final_distance
    );
    Ok(if diag.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn cmd_simulate(cfg: &RunConfig, spec: &ModelSpec, stage: &mut Staging) -> Result<i32> {
    #[derive(Serialize)]
    struct Summary<'a> {
        model: &'a str,
        n: usize,
        steps: usize,
        candidate_events: usize,
        accepted_jumps: usize,
        terminal_mean: f64,
    }
    let grid = cfg.grid()?;
    let bundle = build_bundle(cfg.seed, cfg.n, &grid, spec.dominating_rate()?, spec.mark_law)?;
    let paths = simulate_particle_system(spec, cfg.n, &bundle.view(), &grid)?;
    let mut w = stage.create("paths.csv")?;
    paths.write_paths_csv(&mut w)?;
    flush(w, "paths.csv")?;
    let mut w = stage.create("jumps.csv")?;
    paths.write_jumps_csv(&mut w)?;
    flush(w, "jumps.csv")?;
    let accepted = paths.jump_log().iter().filter(|j| j.accepted).count();
    let terminal = paths.terminal();
    let summary = Summary {
        model: &spec.id,
        n: cfg.n,
        steps: grid.steps(),
        candidate_events: paths.jump_log().len(),
        accepted_jumps: accepted,
        terminal_mean: terminal.iter().sum::<f64>() / terminal.len() as f64,
    };
    stage.write_json("summary.json", &summary)?;
    println!("simulated {} particles over {} steps, {accepted} accepted jumps", cfg.n, grid.steps());
    Ok(EXIT_OK)
}

fn chaos_options(cfg: &RunConfig) -> ChaosOptions {
    ChaosOptions {
        ns: cfg.ns.clone(),
        horizon: cfg.horizon,
        dt: cfg.dt,
        replicas: cfg.replicas,
        seed: cfg.seed,
        independent_initial: cfg.independent_initial,
        n_mark_samples: cfg.n_mark_samples,
        picard: cfg.picard_options(),
    }
}

fn cmd_chaos(cfg: &RunConfig, spec: &ModelSpec, stage: &mut Staging) -> Result<i32> {
    let result: ChaosResult = run_chaos(spec, &chaos_options(cfg))?;
    let mut w = stage.create("chaos.csv")?;
    result.write_csv(&mut w)?;
    flush(w, "chaos.csv")?;
    stage.write_json("summary.json", &result)?;
    for p in &result.points {
        println!("N={:<6} error {:.5} ± {:.5}", p.n, p.mean, p.stderr);
    }
    if let Some(fit) = result.fit {
        println!("slope {:.3}", fit.slope);
    }
    println!("strictly decreasing: {}", result.strictly_decreasing);
    Ok(EXIT_OK)
}

fn cmd_rates(cfg: &RunConfig, spec: &ModelSpec, stage: &mut Staging) -> Result<i32> {
    let mut w = csv::Writer::from_writer(stage.create("rates.csv")?);
    match cfg.experiment {
        RateExperiment::Fournier => {
            let r = run_fournier_check(&cfg.law, &cfg.ns, cfg.replicas, cfg.seed)?;
            w.write_record(["n", "replica", "w2"])?;
            for p in &r.points {
                for (i, d) in p.distances.iter().enumerate() {
                    w.write_record([p.n.to_string(), i.to_string(), d.to_string()])?;
                }
            }
            if let Some(msg) = &r.warning {
                eprintln!("warning: {msg}");
            }
            print_slope(r.fit.map(|f| f.slope));
            stage.write_json("rates.json", &r)?;
        }
        RateExperiment::Gn => {
            let r = run_gn_rate(spec, &cfg.ns, cfg.horizon, cfg.dt, cfg.replicas, cfg.seed)?;
            w.write_record(["n", "replicas", "sup_sq_mean", "sup_sq_stderr"])?;
            for p in &r.points {
                w.write_record([
                    p.n.to_string(),
                    p.replicas.to_string(),
                    p.sup_sq_mean.to_string(),
                    p.sup_sq_stderr.to_string(),
                ])?;
            }
            print_slope(r.fit.map(|f| f.slope));
            stage.write_json("rates.json", &r)?;
        }
        RateExperiment::Moments => {
            let r = run_moment_audit(spec, &cfg.ns, cfg.horizon, cfg.dt, cfg.replicas, cfg.seed)?;
            w.write_record(["n", "t", "observed", "stderr", "bound"])?;
            for c in &r.curves {
                for k in 0..c.times.len() {
                    w.write_record([
                        c.n.to_string(),
                        c.times[k].to_string(),
                        c.observed[k].to_string(),
                        c.stderr[k].to_string(),
                        c.bound[k].to_string(),
                    ])?;
                }
            }
            println!("max ratio {:.4}, uniformity {:.3}, passed {}", r.max_ratio, r.uniformity, r.passed);
            stage.write_json("rates.json", &r)?;
        }
    }
    w.flush().map_err(|e| Error::io("rates.csv", e))?;
    Ok(EXIT_OK)
}

fn print_slope(slope: Option<f64>) {
    match slope {
        Some(s) => println!("slope {s:.3}"),
        None => println!("slope undefined (zero values)"),
    }
}

#[derive(Debug, Serialize)]
struct BoundsReport<'a> {
    model: &'a str,
    declared: DeclaredBounds,
    exp_exponent: f64,
    lipschitz: f64,
    gronwall_k: f64,
    /// `E e^{a|X_0|}` by quantile quadrature of the initial law.
    initial_exp_moment: f64,
    horizon: f64,
    exp_moment_bound: f64,
    window_length: f64,
    /// False when a probe finds a coefficient above its declared bound.
    certified: bool,
    probe: ProbeReport,
}

fn cmd_bounds(cfg: &RunConfig, spec: &ModelSpec, stage: &mut Staging) -> Result<i32> {
    const NODES: usize = 100_000;
    let a = spec.exp_exponent;
    let e0 = spec
        .initial_law
        .quantile_nodes(NODES)
        .iter()
        .map(|x| (a * x.abs()).exp())
        .sum::<f64>()
        / NODES as f64;
    let e0 = e0.max(1.0);
    let probe = probe_boundedness(spec, &cfg.probe, cfg.probe_points)?;
    let report = BoundsReport {
        model: &spec.id,
        declared: spec.bounds,
        exp_exponent: a,
        lipschitz: spec.lipschitz,
        gronwall_k: gronwall_constant(spec)?,
        initial_exp_moment: e0,
        horizon: cfg.horizon,
        exp_moment_bound: gronwall_exp_moment_bound(spec, e0, cfg.horizon)?,
        window_length: window_length(spec, cfg.horizon),
        certified: probe.passed,
        probe,
    };
    stage.write_json("bounds.json", &report)?;
    println!(
        "K = {}, E e^(a|X_t|) <= {:.6e} at t = {}, certified {}",
        report.gronwall_k, report.exp_moment_bound, cfg.horizon, report.certified
    );
    Ok(if report.certified { EXIT_OK } else { EXIT_VALIDATION })
}
