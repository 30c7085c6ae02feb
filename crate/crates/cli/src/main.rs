//! `adasplit` command-line front end.
//!
//! Exit status: 0 on success, 2 for configuration or input errors, 3 when the
//! numerics abort (blow-up, step-size underflow, unreachable reference accuracy).

mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adasplit::controller::{integrate_adaptive, integrate_fixed, DriverOptions, Trajectory};
use adasplit::diagnostics::{convergence_study, efficiency_compare, write_efficiency_csv, StudyConfig};
use adasplit::schemes::{Method, Registry};
use adasplit::spectral::snapshot::write_snapshot;
use adasplit::Exec;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use output::Manifest;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(adasplit::Error),
}

impl From<adasplit::Error> for CliError {
    fn from(e: adasplit::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "adasplit", version, about = "Adaptive operator splitting for periodic reaction-diffusion systems")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Additional scheme file (TOML); may be repeated.
    #[arg(long = "schemes", global = true, value_name = "PATH")]
    schemes: Vec<PathBuf>,
    /// Output directory; overrides ADASPLIT_OUT_DIR and the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Seed for the `random` initial-condition preset.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one configuration and write its step history.
    Run,
    /// Dyadic step-size sweep with error and slope tables.
    Converge,
    /// Adaptive versus equidistant step counts and timings.
    Compare,
    /// List the registered schemes and pairs.
    Schemes,
}

struct Context {
    common: Common,
    cfg: Option<RunConfig>,
    registry: Registry,
    scheme_paths: Vec<PathBuf>,
    exec: Exec,
}

impl Context {
    fn new(common: Common, needs_config: bool) -> Result<Self, CliError> {
        let cfg = match &common.config {
            Some(p) => Some(config::load(p)?),
            None if needs_config => return Err(CliError::Config("--config is required".into())),
            None => None,
        };
        let scheme_paths = config::scheme_paths(cfg.as_ref(), common.config.as_deref(), &common.schemes);
        let registry = Registry::with_files(&scheme_paths)?;
        let exec = match common.jobs {
            Some(0) => return Err(CliError::Config("--jobs must be >= 1".into())),
            Some(1) => Exec::Sequential,
            _ => Exec::Parallel,
        };
        #[cfg(feature = "parallel")]
        if let Some(j) = common.jobs {
            // a second initialization in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
        }
        Ok(Context {
            common,
            cfg,
            registry,
            scheme_paths,
            exec,
        })
    }

    fn cfg(&self) -> &RunConfig {
        self.cfg.as_ref().expect("config checked in Context::new")
    }

    fn method(&self) -> Result<Method<'_>, CliError> {
        Ok(self.registry.method(&self.cfg().method)?)
    }

    fn out_dir(&self) -> Result<PathBuf, CliError> {
        let configured = self.cfg.as_ref().and_then(|c| c.output.dir.as_deref());
        let dir = output::resolve_dir(self.common.out.as_deref(), configured);
        output::prepare_dir(&dir)?;
        Ok(dir)
    }

    fn manifest(&self, command: &'static str) -> Result<Manifest, CliError> {
        Manifest::new(command, self.common.config.as_deref(), &self.scheme_paths, self.common.jobs, self.common.seed)
    }
}

fn write_summary(dir: &Path, lines: &[String]) -> Result<(), CliError> {
    let mut w = output::create(&dir.join("summary.txt"))?;
    for l in lines {
        writeln!(w, "{l}")?;
        println!("{l}");
    }
    w.flush()?;
    Ok(())
}

fn header(ctx: &Context) -> Vec<String> {
    config::describe(ctx.cfg())
        .into_iter()
        .map(|(k, v)| format!("{k:<10} {v}"))
        .collect()
}

fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<Vec<String>, CliError> {
    if traj.snapshots.is_empty() {
        return Ok(Vec::new());
    }
    let sub = dir.join("snapshots");
    std::fs::create_dir_all(&sub)?;
    let mut index = csv::Writer::from_path(sub.join("index.csv")).map_err(|e| CliError::Config(e.to_string()))?;
    index.write_record(["index", "t", "file"]).map_err(|e| CliError::Config(e.to_string()))?;
    for (i, (t, field)) in traj.snapshots.iter().enumerate() {
        let name = format!("snap_{i:05}.field");
        write_snapshot(output::create(&sub.join(&name))?, field)?;
        index
            .write_record([i.to_string(), t.to_string(), name])
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    index.flush()?;
    Ok(vec!["snapshots/index.csv".into()])
}

fn cmd_run(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.cfg();
    let method = ctx.method()?;
    let prob = config::build_problem(&cfg.problem, ctx.exec)?;
    let u0 = config::initial_field(&cfg.problem, prob.as_ref(), ctx.common.seed)?;
    let opts = DriverOptions {
        exec: ctx.exec,
        project_real: cfg.output.project_real,
        local_extrapolation: false,
        snapshots: config::snapshots(&cfg.output)?,
    };
    let traj = match method {
        Method::Pair(pair) => {
            let control = config::step_control(&cfg.control, pair.estimator_order())?;
            integrate_adaptive(prob.as_ref(), pair, &u0, cfg.t0, cfg.t_end, &control, &opts)?
        }
        Method::Scheme(scheme) => {
            let h = cfg
                .h
                .ok_or_else(|| CliError::Config(format!("`{}` is a scheme; fixed-step runs need `h`", scheme.name())))?;
            integrate_fixed(prob.as_ref(), scheme, &u0, cfg.t0, cfg.t_end, h, &opts)?
        }
    };
    let dir = ctx.out_dir()?;
    traj.write_csv(output::create(&dir.join("trajectory.csv"))?)?;
    let mut outputs = vec!["trajectory.csv".to_string(), "summary.txt".into()];
    outputs.extend(write_snapshots(&dir, &traj)?);
    write_snapshot(output::create(&dir.join("final.field"))?, &traj.state)?;
    outputs.push("final.field".into());
    let s = cfg.output.norm_s;
    let mut lines = header(ctx);
    lines.push(format!("accepted   {}", traj.accepted));
    lines.push(format!("rejected   {}", traj.rejected));
    lines.push(format!("flow_evals {}", traj.total_flow_evals()));
    lines.push(format!("t_final    {}", traj.t_final));
    lines.push(format!("{:<10} {:e}", format!("norm_H{s}"), traj.state.sobolev_norm(s)?));
    write_summary(&dir, &lines)?;
    eprintln!("wall time {:.3}s", traj.wall_time.as_secs_f64());
    let mut m = ctx.manifest("run")?;
    m.outputs = outputs;
    m.write(&dir)
}

fn cmd_converge(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.cfg();
    let method = ctx.method()?;
    let prob = config::build_problem(&cfg.problem, Exec::Sequential)?;
    let u0 = config::initial_field(&cfg.problem, prob.as_ref(), ctx.common.seed)?;
    let c = &cfg.converge;
    let study = StudyConfig {
        h: c
            .h
            .clone()
            .unwrap_or_else(|| StudyConfig::dyadic(c.h0, c.count, cfg.t_end).h),
        t_end: cfg.t_end - cfg.t0,
        norms: c.norms.clone(),
        exec: ctx.exec,
    };
    let report = convergence_study(prob.as_ref(), &ctx.registry, method, &u0, &study)?;
    let dir = ctx.out_dir()?;
    report.write_csv(output::create(&dir.join("convergence.csv"))?)?;
    report.write_slopes_csv(output::create(&dir.join("slopes.csv"))?)?;
    let mut lines = header(ctx);
    lines.push(format!("order      {}", report.order));
    lines.push(format!("reference  {} h={:e}", report.reference_scheme, report.reference_h));
    lines.push(format!("{:<14} {:>6} {:>10} {:>8}", "series", "norm_s", "status", "slope"));
    let show = |name: &str, s: f64, fit: &adasplit::diagnostics::SlopeFit| {
        let slope = fit.slope().map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        format!("{name:<14} {s:>6} {:>10} {slope:>8}", fit.status())
    };
    for (i, s) in report.norms.iter().enumerate() {
        lines.push(show("local", *s, &report.local_slopes[i]));
        lines.push(show("global", *s, &report.global_slopes[i]));
    }
    if let Some(f) = &report.deviation_slope {
        lines.push(show("deviation", 0.0, f));
    }
    if let Some(f) = &report.control_slope {
        lines.push(show("control_local", 0.0, f));
    }
    write_summary(&dir, &lines)?;
    let mut m = ctx.manifest("converge")?;
    m.outputs = vec!["convergence.csv".into(), "slopes.csv".into(), "summary.txt".into()];
    m.write(&dir)
}

fn cmd_compare(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.cfg();
    let pair = match ctx.method()? {
        Method::Pair(p) => p,
        Method::Scheme(s) => {
            return Err(CliError::Config(format!("compare needs a scheme pair, `{}` is a scheme", s.name())))
        }
    };
    let prob = config::build_problem(&cfg.problem, ctx.exec)?;
    let u0 = config::initial_field(&cfg.problem, prob.as_ref(), ctx.common.seed)?;
    let base = config::step_control(&cfg.control, pair.estimator_order())?;
    let tols = if cfg.compare.tols.is_empty() {
        vec![base.tol]
    } else {
        cfg.compare.tols.clone()
    };
    let opts = DriverOptions {
        exec: ctx.exec,
        project_real: cfg.output.project_real,
        ..DriverOptions::default()
    };
    let mut rows = Vec::new();
    for tol in tols {
        let mut control = base.clone();
        control.tol = tol;
        control.validate()?;
        rows.push(efficiency_compare(prob.as_ref(), pair, &control, &u0, cfg.t0, cfg.t_end, &opts)?);
    }
    let dir = ctx.out_dir()?;
    write_efficiency_csv(&rows, output::create(&dir.join("efficiency.csv"))?)?;
    let mut lines = header(ctx);
    lines.push(format!(
        "{:<20} {:>9} {:>14} {:>14} {:>9} {:>11}",
        "method", "tol", "steps_adaptive", "steps_equidist", "ratio", "h_equidist"
    ));
    for r in &rows {
        lines.push(format!(
            "{:<20} {:>9.1e} {:>14} {:>14} {:>9.3} {:>11.4e}",
            r.method,
            r.tol,
            r.steps_adaptive,
            r.steps_equidist,
            r.ratio(),
            r.h_equidist
        ));
    }
    write_summary(&dir, &lines)?;
    let mut m = ctx.manifest("compare")?;
    m.outputs = vec!["efficiency.csv".into(), "summary.txt".into()];
    m.write(&dir)
}

fn cmd_schemes(ctx: &Context) -> Result<(), CliError> {
    let reg = &ctx.registry;
    let source = |name: &str| if reg.is_builtin(name) { "builtin" } else { "file" };
    println!("{:<22} {:<16} {:>5} {:>5} {:>6} {:>8}", "name", "kind", "order", "arity", "flows", "source");
    for s in reg.schemes() {
        let kind = if s.is_complex() { "scheme/complex" } else { "scheme" };
        println!(
            "{:<22} {:<16} {:>5} {:>5} {:>6} {:>8}",
            s.name(),
            kind,
            s.order(),
            s.arity(),
            s.flow_count(),
            source(s.name())
        );
    }
    for p in reg.pairs() {
        println!(
            "{:<22} {:<16} {:>5} {:>5} {:>6} {:>8}",
            p.name(),
            p.pairing().kind(),
            p.order(),
            p.arity(),
            p.flow_count(),
            source(p.name())
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = (|| {
        let needs_config = !matches!(cli.command, Command::Schemes);
        let ctx = Context::new(cli.common.clone(), needs_config)?;
        match cli.command {
            Command::Run => cmd_run(&ctx),
            Command::Converge => cmd_converge(&ctx),
            Command::Compare => cmd_compare(&ctx),
            Command::Schemes => cmd_schemes(&ctx),
        }
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adasplit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
