//! Step-size selection and the adaptive and fixed-step drivers.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate, NormKind};
use crate::exec::Exec;
use crate::problems::SplitProblem;
use crate::schemes::{compose_step_counted, SchemePair, SplittingScheme};
use crate::spectral::Field;

/// Parameters of the step-size rule
/// `h_new = h * min(alpha_max, max(alpha_min, (alpha * tol / est)^(1/(p+1))))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControlConfig {
    pub tol: f64,
    pub alpha: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Order `p` of the integrator.
    pub order_p: u32,
    /// Initial step; defaults to `tol^(1/(p+1))` times the interval length.
    pub h_init: Option<f64>,
    /// Smallest step; defaults to `1e-12` times the interval length.
    pub h_min: Option<f64>,
    /// Largest step; defaults to the interval length.
    pub h_max: Option<f64>,
    /// A step is rejected when `est > reject_threshold * tol`.
    pub reject_threshold: f64,
    pub norm: NormKind,
}

impl Default for StepControlConfig {
    fn default() -> Self {
        StepControlConfig {
            tol: 1e-5,
            alpha: 0.9,
            alpha_min: 0.25,
            alpha_max: 4.0,
            order_p: 1,
            h_init: None,
            h_min: None,
            h_max: None,
            reject_threshold: 1.0,
            norm: NormKind::L2,
        }
    }
}

impl StepControlConfig {
    pub fn new(tol: f64, order_p: u32) -> Self {
        StepControlConfig {
            tol,
            order_p,
            ..StepControlConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min < 1.0) {
            return bad(format!("alpha_min must lie in (0, 1), got {}", self.alpha_min));
        }
        if !(self.alpha_max > 1.0 && self.alpha_max.is_finite()) {
            return bad(format!("alpha_max must be > 1, got {}", self.alpha_max));
        }
        if self.order_p == 0 {
            return bad("order_p must be positive".into());
        }
        if !(self.reject_threshold >= self.alpha && self.reject_threshold.is_finite()) {
            return bad(format!(
                "reject_threshold must be at least alpha ({}), got {}",
                self.alpha, self.reject_threshold
            ));
        }
        for (name, v) in [("h_init", self.h_init), ("h_min", self.h_min), ("h_max", self.h_max)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("{name} must be > 0, got {v}"));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (self.h_min, self.h_max) {
            if lo > hi {
                return bad(format!("h_min {lo} exceeds h_max {hi}"));
            }
        }
        Ok(())
    }

    /// Unclamped-by-guards factor of the step-size rule.
    pub fn factor(&self, est: f64) -> f64 {
        if est == 0.0 {
            return self.alpha_max;
        }
        let raw = (self.alpha * self.tol / est).powf(1.0 / (self.order_p as f64 + 1.0));
        raw.clamp(self.alpha_min, self.alpha_max)
    }

    fn bounds(&self, span: f64) -> (f64, f64) {
        let lo = self.h_min.unwrap_or(1e-12 * span);
        let hi = self.h_max.unwrap_or(span);
        (lo, hi.max(lo))
    }
}

/// Next step size from the rule, clamped to `[h_min, h_max]` where given.
pub fn next_step_size(h_old: f64, est: f64, cfg: &StepControlConfig) -> f64 {
    let h = h_old * cfg.factor(est);
    h.clamp(cfg.h_min.unwrap_or(0.0), cfg.h_max.unwrap_or(f64::INFINITY).max(cfg.h_min.unwrap_or(0.0)))
}

/// One attempted step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Time at the start of the step.
    pub t: f64,
    pub h: f64,
    /// Estimator norm; absent for fixed-step runs.
    pub est: Option<f64>,
    pub accepted: bool,
    pub flow_evals: usize,
}

/// When to keep copies of the state.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum SnapshotSchedule {
    #[default]
    None,
    /// Initial state and every `k`-th accepted step.
    EveryAccepted(usize),
    /// Initial state and the given times. Adaptive runs land on them exactly;
    /// fixed runs take the first step end at or after each time.
    Times(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct DriverOptions {
    pub exec: Exec,
    /// Drop imaginary parts after each accepted step.
    pub project_real: bool,
    /// Advance adaptive runs with the reference value instead of the integrator value.
    pub local_extrapolation: bool,
    pub snapshots: SnapshotSchedule,
}

impl Default for DriverOptions {
    fn default() -> Self {
        DriverOptions {
            exec: Exec::Parallel,
            project_real: false,
            local_extrapolation: false,
            snapshots: SnapshotSchedule::None,
        }
    }
}

/// Step history and final state of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<(f64, Field)>,
    pub accepted: usize,
    pub rejected: usize,
    pub wall_time: Duration,
    pub t_final: f64,
    pub state: Field,
}

/// Header of the trajectory CSV.
pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "h", "est", "accepted", "flow_evals"];

impl Trajectory {
    fn start(u0: Field, t0: f64, schedule: &SnapshotSchedule) -> Self {
        let snapshots = match schedule {
            SnapshotSchedule::None => Vec::new(),
            _ => vec![(t0, u0.clone())],
        };
        Trajectory {
            records: Vec::new(),
            snapshots,
            accepted: 0,
            rejected: 0,
            wall_time: Duration::ZERO,
            t_final: t0,
            state: u0,
        }
    }

    pub fn accepted_records(&self) -> impl Iterator<Item = &StepRecord> {
        self.records.iter().filter(|r| r.accepted)
    }

    /// Sizes of the accepted steps in order.
    pub fn accepted_steps(&self) -> Vec<f64> {
        self.accepted_records().map(|r| r.h).collect()
    }

    /// Ratios of consecutive accepted step sizes.
    pub fn step_ratios(&self) -> Vec<f64> {
        self.accepted_steps().windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn total_flow_evals(&self) -> usize {
        self.records.iter().map(|r| r.flow_evals).sum()
    }

    /// One row per attempt under [`TRAJECTORY_HEADER`].
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(TRAJECTORY_HEADER)?;
        for r in &self.records {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Outcome of a single attempt.
#[derive(Clone, Debug)]
pub struct Attempt {
    pub record: StepRecord,
    /// New state if the step was accepted.
    pub state: Option<Field>,
    /// Step size proposed by the rule.
    pub h_next: f64,
}

/// Estimate one step of size `h` from `(t, u)` and decide acceptance.
pub fn attempt_step(
    prob: &dyn SplitProblem,
    pair: &SchemePair,
    u: &Field,
    t: f64,
    h: f64,
    cfg: &StepControlConfig,
    opts: &DriverOptions,
) -> Result<Attempt> {
    let e = estimate(pair, prob, h, u, cfg.norm, opts.exec)?;
    if !e.est_norm.is_finite() {
        return Err(Error::NonFinite("error estimate"));
    }
    let accepted = e.est_norm <= cfg.reject_threshold * cfg.tol;
    let state = accepted.then(|| {
        let next = if opts.local_extrapolation { e.u_control } else { e.u_next };
        if opts.project_real {
            next.project_real()
        } else {
            next
        }
    });
    Ok(Attempt {
        record: StepRecord {
            t,
            h,
            est: Some(e.est_norm),
            accepted,
            flow_evals: e.flow_evals,
        },
        state,
        h_next: next_step_size(h, e.est_norm, cfg),
    })
}

/// Result of [`step_adaptive`].
#[derive(Clone, Debug)]
pub struct AdaptiveStep {
    pub state: Field,
    pub t: f64,
    pub h_next: f64,
    /// All attempts, the last one accepted.
    pub records: Vec<StepRecord>,
}

/// Attempt steps from `(t, u)` starting at `h`, shrinking by the rule after
/// each rejection, until one is accepted.
pub fn step_adaptive(
    prob: &dyn SplitProblem,
    pair: &SchemePair,
    u: &Field,
    t: f64,
    h: f64,
    cfg: &StepControlConfig,
    opts: &DriverOptions,
) -> Result<AdaptiveStep> {
    let h_min = cfg.h_min.unwrap_or(0.0);
    let mut h = h;
    let mut records = Vec::new();
    loop {
        let a = attempt_step(prob, pair, u, t, h, cfg, opts)?;
        records.push(a.record.clone());
        if let Some(state) = a.state {
            return Ok(AdaptiveStep {
                state,
                t: t + h,
                h_next: a.h_next,
                records,
            });
        }
        if a.h_next >= h || h <= h_min {
            return Err(Error::StepSizeUnderflow {
                t,
                h,
                est: a.record.est.unwrap_or(f64::NAN),
            });
        }
        h = a.h_next;
    }
}

/// Adaptive integration from `t0` to `t_end`. Every attempt is recorded; the
/// last step is clipped to land on `t_end`.
pub fn integrate_adaptive(
    prob: &dyn SplitProblem,
    pair: &SchemePair,
    u0: &Field,
    t0: f64,
    t_end: f64,
    cfg: &StepControlConfig,
    opts: &DriverOptions,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_interval(t0, t_end)?;
    let started = Instant::now();
    let mut traj = Trajectory::start(u0.clone(), t0, &opts.snapshots);
    if t_end == t0 {
        return Ok(traj);
    }
    let span = t_end - t0;
    let (h_min, h_max) = cfg.bounds(span);
    let cfg = StepControlConfig {
        h_min: Some(h_min),
        h_max: Some(h_max),
        ..cfg.clone()
    };
    let mut h = cfg
        .h_init
        .unwrap_or_else(|| cfg.tol.powf(1.0 / (cfg.order_p as f64 + 1.0)) * span)
        .clamp(h_min, h_max);
    let mut breakpoints = match &opts.snapshots {
        SnapshotSchedule::Times(ts) => {
            let mut ts: Vec<f64> = ts.iter().copied().filter(|&s| s > t0 && s < t_end).collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            ts
        }
        _ => Vec::new(),
    };
    breakpoints.push(t_end);
    let mut next_bp = 0;
    let mut t = t0;
    let mut u = u0.clone();
    let landing_tol = 1e-12 * span;
    while t < t_end {
        let stop = breakpoints[next_bp];
        let mut h_try = h;
        let lands = t + h_try >= stop - landing_tol;
        if lands {
            h_try = stop - t;
        }
        let a = attempt_step(prob, pair, &u, t, h_try, &cfg, opts)?;
        traj.records.push(a.record.clone());
        match a.state {
            Some(next) => {
                traj.accepted += 1;
                u = next;
                t = if lands { stop } else { t + h_try };
                // a step shortened to hit a breakpoint says little about the next one
                h = if lands && h_try < h { a.h_next.max(h) } else { a.h_next };
                let snap = match &opts.snapshots {
                    SnapshotSchedule::EveryAccepted(k) => *k > 0 && traj.accepted.is_multiple_of(*k),
                    SnapshotSchedule::Times(_) => lands && next_bp + 1 < breakpoints.len(),
                    SnapshotSchedule::None => false,
                };
                if snap {
                    traj.snapshots.push((t, u.clone()));
                }
                if lands {
                    next_bp += 1;
                }
            }
            None => {
                traj.rejected += 1;
                if h_try <= h_min * (1.0 + 1e-12) {
                    return Err(Error::StepSizeUnderflow {
                        t,
                        h: h_try,
                        est: a.record.est.unwrap_or(f64::NAN),
                    });
                }
                h = a.h_next;
            }
        }
    }
    traj.t_final = t;
    traj.state = u;
    traj.wall_time = started.elapsed();
    Ok(traj)
}

/// Number of equal steps of size about `h` covering `[t0, t_end]`.
pub fn fixed_step_count(t0: f64, t_end: f64, h: f64) -> usize {
    let q = (t_end - t0) / h;
    let r = q.round();
    if (q - r).abs() <= 1e-9 * q.max(1.0) {
        r.max(1.0) as usize
    } else {
        q.ceil() as usize
    }
}

/// Fixed-step integration with `fixed_step_count` steps; the last is clipped
/// to end at `t_end`.
pub fn integrate_fixed(
    prob: &dyn SplitProblem,
    scheme: &SplittingScheme,
    u0: &Field,
    t0: f64,
    t_end: f64,
    h: f64,
    opts: &DriverOptions,
) -> Result<Trajectory> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("step size must be > 0, got {h}")));
    }
    check_interval(t0, t_end)?;
    let started = Instant::now();
    let mut traj = Trajectory::start(u0.clone(), t0, &opts.snapshots);
    if t_end == t0 {
        return Ok(traj);
    }
    let n = fixed_step_count(t0, t_end, h);
    let mut pending: Vec<f64> = match &opts.snapshots {
        SnapshotSchedule::Times(ts) => {
            let mut ts: Vec<f64> = ts.iter().copied().filter(|&s| s > t0).collect();
            ts.sort_by(f64::total_cmp);
            ts
        }
        _ => Vec::new(),
    };
    pending.reverse();
    let mut u = u0.clone();
    let mut t = t0;
    for i in 0..n {
        let h_i = if i + 1 == n { t_end - t } else { h };
        let (next, evals) = compose_step_counted(scheme, prob, h_i, u)?;
        u = if opts.project_real { next.project_real() } else { next };
        traj.records.push(StepRecord {
            t,
            h: h_i,
            est: None,
            accepted: true,
            flow_evals: evals,
        });
        traj.accepted += 1;
        t = if i + 1 == n { t_end } else { t0 + (i + 1) as f64 * h };
        let snap = match &opts.snapshots {
            SnapshotSchedule::EveryAccepted(k) => *k > 0 && traj.accepted.is_multiple_of(*k),
            SnapshotSchedule::Times(_) => {
                let mut hit = false;
                while pending.last().is_some_and(|&s| s <= t + 1e-12 * (t_end - t0)) {
                    pending.pop();
                    hit = true;
                }
                hit
            }
            SnapshotSchedule::None => false,
        };
        if snap {
            traj.snapshots.push((t, u.clone()));
        }
    }
    traj.t_final = t;
    traj.state = u;
    traj.wall_time = started.elapsed();
    Ok(traj)
}

fn check_interval(t0: f64, t_end: f64) -> Result<()> {
    if !(t0.is_finite() && t_end.is_finite()) || t_end < t0 {
        return Err(Error::InvalidParameter(format!(
            "need finite t0 <= t_end, got [{t0}, {t_end}]"
        )));
    }
    Ok(())
}
