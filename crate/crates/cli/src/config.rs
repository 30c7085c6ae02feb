use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use adasplit::controller::{SnapshotSchedule, StepControlConfig};
use adasplit::problems::{
    presets, GrayScott, GrayScottParams, GsSplit, LinearDiagnostic, ProblemOptions, SplitProblem, VanDerPol,
    VdpParams,
};
use adasplit::spectral::{Field, TorusGrid};
use adasplit::{Complex64, Exec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::CliError;

/// Top-level configuration file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    /// Scheme (fixed steps) or pair (adaptive) name.
    pub method: String,
    /// Extra scheme files, relative to the config file.
    #[serde(default)]
    pub scheme_files: Vec<PathBuf>,
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    /// Step size for fixed-step runs.
    pub h: Option<f64>,
    /// Step-control fields; `order_p` defaults to the order of the pair's estimate.
    #[serde(default)]
    pub control: toml::Table,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub converge: ConvergeConfig,
    #[serde(default)]
    pub compare: CompareConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// `gray-scott`, `gray-scott-abc`, `van-der-pol` or `linear`.
    pub name: String,
    #[serde(default = "default_dim")]
    pub d: usize,
    #[serde(default = "default_half_width")]
    pub a: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Initial data: `gaussian-bumps`, `stationary`, `vdp-pulse`, `smooth-bumps`, `cosine` or `random`.
    pub preset: Option<String>,
    /// Problem parameters; missing keys take the problem defaults.
    #[serde(default)]
    pub params: toml::Table,
    /// Maximal RK4 substep of the Gray–Scott reaction flow.
    pub reaction_substep: Option<f64>,
    #[serde(default)]
    pub dealias: bool,
}

fn default_dim() -> usize {
    1
}

fn default_half_width() -> f64 {
    std::f64::consts::PI
}

fn default_n() -> usize {
    64
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, relative to the working directory.
    pub dir: Option<PathBuf>,
    /// Snapshot every k-th accepted step.
    pub snapshot_every: Option<usize>,
    /// Snapshot at these times.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Sobolev index of the norm reported in the summary.
    #[serde(default)]
    pub norm_s: f64,
    /// Drop imaginary parts after every accepted step.
    #[serde(default)]
    pub project_real: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    /// Explicit step sizes; overrides `h0` and `count`.
    pub h: Option<Vec<f64>>,
    #[serde(default = "default_h0")]
    pub h0: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_norms")]
    pub norms: Vec<f64>,
}

fn default_h0() -> f64 {
    0.1
}

fn default_count() -> usize {
    6
}

fn default_norms() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            h: None,
            h0: default_h0(),
            count: default_count(),
            norms: default_norms(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Tolerances to compare at; defaults to the control tolerance.
    #[serde(default)]
    pub tols: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearParams {
    #[serde(default = "default_linear_diffusion")]
    diffusion: f64,
    #[serde(default = "default_linear_mu")]
    mu: f64,
    #[serde(default)]
    constant: bool,
}

fn default_linear_diffusion() -> f64 {
    0.1
}

fn default_linear_mu() -> f64 {
    1.0
}

/// Parse a config file.
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

pub fn parse(text: &str, source: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("{source}: {e}")))
}

/// Merge `table` over the serialized defaults and deserialize.
fn with_defaults<T>(defaults: T, table: &toml::Table, what: &str) -> Result<T, CliError>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let mut base = toml::Table::try_from(defaults).map_err(|e| CliError::Config(e.to_string()))?;
    for (k, v) in table {
        if !base.contains_key(k) {
            return Err(CliError::Config(format!("unknown {what} parameter `{k}`")));
        }
        base.insert(k.clone(), v.clone());
    }
    base.try_into().map_err(|e| CliError::Config(format!("{what} parameters: {e}")))
}

/// Build the problem described by `cfg` with pointwise work run under `exec`.
pub fn build_problem(cfg: &ProblemConfig, exec: Exec) -> Result<Box<dyn SplitProblem>, CliError> {
    let grid = TorusGrid::new(cfg.d, cfg.a, cfg.n)?;
    let options = ProblemOptions {
        exec,
        dealias: cfg.dealias,
        ..ProblemOptions::default()
    };
    let gray_scott = |split| -> Result<Box<dyn SplitProblem>, CliError> {
        let params = with_defaults(GrayScottParams::default(), &cfg.params, "gray-scott")?;
        let mut p = GrayScott::new(grid.clone(), params, split)?.with_options(options);
        if let Some(h) = cfg.reaction_substep {
            p = p.with_reaction_substep(h)?;
        }
        Ok(Box::new(p))
    };
    match cfg.name.as_str() {
        "gray-scott" => gray_scott(GsSplit::Ab),
        "gray-scott-abc" => gray_scott(GsSplit::Abc),
        "van-der-pol" => {
            let params = with_defaults(VdpParams::default(), &cfg.params, "van-der-pol")?;
            Ok(Box::new(VanDerPol::new(grid, params)?.with_options(options)))
        }
        "linear" => {
            let lp: LinearParams = toml::Value::Table(cfg.params.clone())
                .try_into()
                .map_err(|e| CliError::Config(format!("linear parameters: {e}")))?;
            let p = if lp.constant {
                LinearDiagnostic::constant_potential(grid, lp.diffusion, lp.mu)?
            } else {
                LinearDiagnostic::cosine_potential(grid, lp.diffusion, lp.mu)?
            };
            Ok(Box::new(p.with_options(options)))
        }
        other => Err(CliError::Config(format!(
            "unknown problem `{other}` (expected gray-scott, gray-scott-abc, van-der-pol or linear)"
        ))),
    }
}

/// Initial field for `prob`; `seed` drives the `random` preset.
pub fn initial_field(cfg: &ProblemConfig, prob: &dyn SplitProblem, seed: u64) -> Result<Field, CliError> {
    let grid = prob.grid();
    let m = prob.num_components();
    let default = match cfg.name.as_str() {
        "van-der-pol" => "vdp-pulse",
        "linear" => "cosine",
        _ => "gaussian-bumps",
    };
    let name = cfg.preset.as_deref().unwrap_or(default);
    let field = match name {
        "gaussian-bumps" => presets::gs_gaussian_bumps(grid),
        "stationary" => presets::gs_stationary(grid),
        "vdp-pulse" => presets::vdp_pulse(grid),
        "smooth-bumps" => presets::smooth_bumps(grid),
        "cosine" => Field::from_fn(grid.clone(), m, |x, _| Complex64::new(1.0 + 0.5 * x[0].cos(), 0.0)),
        "random" => random_field(grid, m, seed),
        other => return Err(CliError::Config(format!("unknown initial-condition preset `{other}`"))),
    };
    if field.num_components() != m {
        return Err(CliError::Config(format!(
            "preset `{name}` has {} components, problem `{}` needs {m}",
            field.num_components(),
            cfg.name
        )));
    }
    Ok(field)
}

/// Smooth random field: a positive offset plus decaying random Fourier modes
/// along every axis.
fn random_field(grid: &TorusGrid, m: usize, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let coeffs: Vec<(f64, Vec<(usize, f64, f64, f64)>)> = (0..m)
        .map(|_| {
            let offset = rng.random_range(0.3..0.8);
            let modes = (0..d)
                .flat_map(|axis| (1..=4).map(move |k| (axis, k)))
                .map(|(axis, k)| {
                    let w = 0.15 * (-(k as f64) * 0.7).exp();
                    (axis, k as f64, w * rng.random_range(-1.0..1.0), w * rng.random_range(-1.0..1.0))
                })
                .collect();
            (offset, modes)
        })
        .collect();
    let scale = std::f64::consts::PI / grid.half_width();
    Field::from_fn(grid.clone(), m, |x, comp| {
        let (offset, modes) = &coeffs[comp];
        let v: f64 = modes
            .iter()
            .map(|(axis, k, c, s)| {
                let arg = k * scale * x[*axis];
                c * arg.cos() + s * arg.sin()
            })
            .sum();
        Complex64::new(offset + v, 0.0)
    })
}

/// Step control from the `[control]` table; `order_p` falls back to `default_p`.
pub fn step_control(table: &toml::Table, default_p: u32) -> Result<StepControlConfig, CliError> {
    let mut cfg: StepControlConfig = toml::Value::Table(table.clone())
        .try_into()
        .map_err(|e| CliError::Config(format!("control: {e}")))?;
    if !table.contains_key("order_p") {
        cfg.order_p = default_p;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn snapshots(out: &OutputConfig) -> Result<SnapshotSchedule, CliError> {
    match (out.snapshot_every, out.snapshot_times.is_empty()) {
        (Some(_), false) => Err(CliError::Config(
            "set at most one of output.snapshot_every and output.snapshot_times".into(),
        )),
        (Some(0), _) => Err(CliError::Config("output.snapshot_every must be >= 1".into())),
        (Some(k), true) => Ok(SnapshotSchedule::EveryAccepted(k)),
        (None, false) => Ok(SnapshotSchedule::Times(out.snapshot_times.clone())),
        (None, true) => Ok(SnapshotSchedule::None),
    }
}

/// Scheme files named in the config (resolved against its directory) followed by
/// those given on the command line.
pub fn scheme_paths(cfg: Option<&RunConfig>, config_path: Option<&Path>, extra: &[PathBuf]) -> Vec<PathBuf> {
    let base = config_path.and_then(Path::parent).unwrap_or(Path::new(""));
    let mut paths: Vec<PathBuf> = cfg
        .map(|c| c.scheme_files.iter().map(|p| base.join(p)).collect())
        .unwrap_or_default();
    paths.extend(extra.iter().cloned());
    paths
}

/// Flat `key = value` view of a few config facts for the summary.
pub fn describe(cfg: &RunConfig) -> BTreeMap<&'static str, String> {
    let mut m = BTreeMap::new();
    m.insert("problem", cfg.problem.name.clone());
    m.insert("grid", format!("d={} a={} n={}", cfg.problem.d, cfg.problem.a, cfg.problem.n));
    m.insert("method", cfg.method.clone());
    m.insert("interval", format!("[{}, {}]", cfg.t0, cfg.t_end));
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        method = "Strang/TJ4c"
        t_end = 1.0
        [problem]
        name = "gray-scott"
        n = 32
    "#;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = parse(MINIMAL, "test").unwrap();
        assert_eq!(cfg.problem.d, 1);
        assert_eq!(cfg.problem.a, std::f64::consts::PI);
        assert_eq!(cfg.t0, 0.0);
        let p = build_problem(&cfg.problem, Exec::Sequential).unwrap();
        assert_eq!(p.name(), "gray-scott");
        let u0 = initial_field(&cfg.problem, p.as_ref(), 0).unwrap();
        assert_eq!(u0.num_components(), 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse(&format!("{MINIMAL}\nbogus = 1"), "t").is_err());
        let mut cfg = parse(MINIMAL, "t").unwrap();
        cfg.problem.params.insert("gamma".into(), toml::Value::Float(1.0));
        assert!(build_problem(&cfg.problem, Exec::Sequential).is_err());
    }

    #[test]
    fn partial_params_keep_defaults() {
        let mut cfg = parse(MINIMAL, "t").unwrap();
        cfg.problem.params.insert("alpha".into(), toml::Value::Float(0.05));
        let merged = with_defaults(GrayScottParams::default(), &cfg.problem.params, "gs").unwrap();
        assert_eq!(merged.alpha, 0.05);
        assert_eq!(merged.beta, GrayScottParams::default().beta);
    }

    #[test]
    fn grid_must_be_power_of_two() {
        let mut cfg = parse(MINIMAL, "t").unwrap();
        cfg.problem.n = 48;
        assert!(build_problem(&cfg.problem, Exec::Sequential).is_err());
    }

    #[test]
    fn control_defaults_take_pair_order() {
        let c = step_control(&toml::Table::new(), 2).unwrap();
        assert_eq!(c.order_p, 2);
        let mut t = toml::Table::new();
        t.insert("tol".into(), toml::Value::Float(1e-3));
        t.insert("order_p".into(), toml::Value::Integer(3));
        let c = step_control(&t, 2).unwrap();
        assert_eq!((c.tol, c.order_p), (1e-3, 3));
        t.insert("tolerance".into(), toml::Value::Float(1e-3));
        assert!(step_control(&t, 2).is_err());
    }

    #[test]
    fn random_preset_is_seeded() {
        let g = TorusGrid::new(2, 1.0, 8).unwrap();
        let a = random_field(&g, 2, 7);
        let b = random_field(&g, 2, 7);
        let c = random_field(&g, 2, 8);
        assert_eq!(a.components(), b.components());
        assert_ne!(a.components(), c.components());
    }

    #[test]
    fn snapshot_schedule_exclusive() {
        let out = OutputConfig {
            snapshot_every: Some(2),
            snapshot_times: vec![0.5],
            ..OutputConfig::default()
        };
        assert!(snapshots(&out).is_err());
    }
}
