use std::io::Write;

use serde::Serialize;

use crate::controller::{integrate_adaptive, integrate_fixed, DriverOptions, StepControlConfig, Trajectory};
use crate::error::{Error, Result};
use crate::problems::SplitProblem;
use crate::schemes::SchemePair;
use crate::spectral::Field;

/// Adaptive versus equidistant cost at one tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencyRow {
    pub method: String,
    pub tol: f64,
    pub steps_adaptive: usize,
    pub steps_equidist: usize,
    /// Seconds.
    pub time_adaptive: f64,
    pub time_equidist: f64,
    pub rejected_adaptive: usize,
    pub h_equidist: f64,
}

impl EfficiencyRow {
    pub fn ratio(&self) -> f64 {
        self.steps_adaptive as f64 / self.steps_equidist as f64
    }
}

/// Header of the efficiency CSV.
pub const EFFICIENCY_HEADER: [&str; 8] = [
    "method",
    "tol",
    "steps_adaptive",
    "steps_equidist",
    "time_adaptive",
    "time_equidist",
    "rejected_adaptive",
    "h_equidist",
];

pub fn write_efficiency_csv<W: Write>(rows: &[EfficiencyRow], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(EFFICIENCY_HEADER)?;
    for r in rows {
        out.write_record([
            r.method.clone(),
            r.tol.to_string(),
            r.steps_adaptive.to_string(),
            r.steps_equidist.to_string(),
            r.time_adaptive.to_string(),
            r.time_equidist.to_string(),
            r.rejected_adaptive.to_string(),
            r.h_equidist.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Smallest step the controller actually needed. The clipped final step and
/// steps whose growth was capped by `alpha_max` are not limited by accuracy
/// and are skipped unless nothing else remains.
pub fn smallest_necessary_step(traj: &Trajectory, cfg: &StepControlConfig) -> Option<f64> {
    let accepted: Vec<_> = traj.accepted_records().collect();
    let body = &accepted[..accepted.len().saturating_sub(1)];
    let limited = body
        .iter()
        .filter(|r| r.est.is_some_and(|e| cfg.factor(e) < cfg.alpha_max))
        .map(|r| r.h)
        .fold(f64::INFINITY, f64::min);
    if limited.is_finite() {
        return Some(limited);
    }
    let any = body.iter().map(|r| r.h).fold(f64::INFINITY, f64::min);
    if any.is_finite() {
        Some(any)
    } else {
        accepted.first().map(|r| r.h)
    }
}

/// Run `pair` adaptively, then its integrator with equal steps of the smallest
/// necessary adaptive step size, and report both costs.
pub fn efficiency_compare(
    prob: &dyn SplitProblem,
    pair: &SchemePair,
    cfg: &StepControlConfig,
    u0: &Field,
    t0: f64,
    t_end: f64,
    opts: &DriverOptions,
) -> Result<EfficiencyRow> {
    if t_end <= t0 {
        return Err(Error::InvalidParameter(format!(
            "efficiency comparison needs t_end > t0, got [{t0}, {t_end}]"
        )));
    }
    let adaptive = integrate_adaptive(prob, pair, u0, t0, t_end, cfg, opts)?;
    let h = smallest_necessary_step(&adaptive, cfg)
        .ok_or_else(|| Error::Precondition("adaptive run took no steps".into()))?;
    let fixed = integrate_fixed(prob, pair.integrator(), u0, t0, t_end, h, opts)?;
    Ok(EfficiencyRow {
        method: pair.name().to_string(),
        tol: cfg.tol,
        steps_adaptive: adaptive.accepted,
        steps_equidist: fixed.accepted,
        time_adaptive: adaptive.wall_time.as_secs_f64(),
        time_equidist: fixed.wall_time.as_secs_f64(),
        rejected_adaptive: adaptive.rejected,
        h_equidist: h,
    })
}
