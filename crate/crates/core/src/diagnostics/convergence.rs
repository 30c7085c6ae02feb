use std::io::Write;

use super::fit::{fit_slope, SlopeFit};
use super::reference::{reference_multi, Reference};
use crate::controller::{integrate_fixed, DriverOptions};
use crate::error::{Error, Result};
use crate::estimators::{estimate, NormKind};
use crate::exec::Exec;
use crate::problems::SplitProblem;
use crate::schemes::{compose_step, Method, Registry};
use crate::spectral::Field;

/// References must be this much more accurate than the smallest studied error.
pub const REFERENCE_MARGIN: f64 = 1e-2;

/// Errors below `ROUNDING_REL * (1 + |u0|_s)` count as rounding noise.
pub const ROUNDING_REL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct StudyConfig {
    /// Dyadic step sizes, strictly decreasing, at least four.
    pub h: Vec<f64>,
    pub t_end: f64,
    /// Sobolev indices the errors are measured in.
    pub norms: Vec<f64>,
    pub exec: Exec,
}

impl StudyConfig {
    /// `count` step sizes `h0, h0/2, ...`.
    pub fn dyadic(h0: f64, count: usize, t_end: f64) -> Self {
        StudyConfig {
            h: (0..count).map(|k| h0 / 2f64.powi(k as i32)).collect(),
            t_end,
            norms: vec![0.0, 1.0, 2.0],
            exec: Exec::Parallel,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.h.len() < 4 {
            return Err(Error::InvalidParameter(format!(
                "a convergence study needs at least 4 step sizes, got {}",
                self.h.len()
            )));
        }
        if self.h.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidParameter("step sizes must be positive".into()));
        }
        for w in self.h.windows(2) {
            if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "step sizes must halve: {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if self.norms.is_empty() || self.norms.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidParameter("need at least one Sobolev index >= 0".into()));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidParameter(format!("t_end must be > 0, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// Errors and fitted slopes of a step-size sweep.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub method: String,
    pub order: u32,
    pub t_end: f64,
    pub h: Vec<f64>,
    pub norms: Vec<f64>,
    /// `local[i][k]`: one-step error in norm `norms[i]` at `h[k]`.
    pub local: Vec<Vec<f64>>,
    pub global: Vec<Vec<f64>>,
    pub local_slopes: Vec<SlopeFit>,
    pub global_slopes: Vec<SlopeFit>,
    /// Estimator norms (controller L2 norm), for pairs only.
    pub est: Option<Vec<f64>>,
    /// `|est - true local error|` in L2.
    pub deviation: Option<Vec<f64>>,
    /// L2 one-step error of the reference value of the pair.
    pub control_local: Option<Vec<f64>>,
    pub deviation_slope: Option<SlopeFit>,
    pub control_slope: Option<SlopeFit>,
    pub reference_scheme: String,
    pub reference_h: f64,
    pub reference_error: Vec<f64>,
}

impl ConvergenceReport {
    fn norm_index(&self, s: f64) -> Option<usize> {
        self.norms.iter().position(|&x| x == s)
    }

    pub fn local_slope(&self, s: f64) -> Option<f64> {
        self.norm_index(s).and_then(|i| self.local_slopes[i].slope())
    }

    pub fn global_slope(&self, s: f64) -> Option<f64> {
        self.norm_index(s).and_then(|i| self.global_slopes[i].slope())
    }

    /// `est / true local error` at the smallest step.
    pub fn estimator_ratio(&self) -> Option<f64> {
        let est = self.est.as_ref()?;
        let i = self.norm_index(0.0)?;
        let k = self.h.len() - 1;
        Some(est[k] / self.local[i][k])
    }

    /// Error table: one row per step size.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["h".to_string()];
        for s in &self.norms {
            header.push(format!("local_s{s}"));
            header.push(format!("global_s{s}"));
        }
        header.extend(["est", "deviation", "control_local"].map(String::from));
        out.write_record(&header)?;
        let opt = |v: &Option<Vec<f64>>, k: usize| v.as_ref().map(|v| v[k].to_string()).unwrap_or_default();
        for k in 0..self.h.len() {
            let mut row = vec![self.h[k].to_string()];
            for i in 0..self.norms.len() {
                row.push(self.local[i][k].to_string());
                row.push(self.global[i][k].to_string());
            }
            row.push(opt(&self.est, k));
            row.push(opt(&self.deviation, k));
            row.push(opt(&self.control_local, k));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Slope table: columns `series,norm_s,status,slope,points`.
    pub fn write_slopes_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["series", "norm_s", "status", "slope", "points"])?;
        let mut rows: Vec<(String, f64, SlopeFit)> = Vec::new();
        for (i, s) in self.norms.iter().enumerate() {
            rows.push(("local".into(), *s, self.local_slopes[i]));
            rows.push(("global".into(), *s, self.global_slopes[i]));
        }
        if let Some(f) = self.deviation_slope {
            rows.push(("deviation".into(), 0.0, f));
        }
        if let Some(f) = self.control_slope {
            rows.push(("control_local".into(), 0.0, f));
        }
        for (series, s, fit) in rows {
            let (slope, points) = match fit {
                SlopeFit::Order { slope, points, .. } => (slope.to_string(), points.to_string()),
                SlopeFit::Insufficient { points } => (String::new(), points.to_string()),
                SlopeFit::Exact => (String::new(), String::new()),
            };
            out.write_record([series, s.to_string(), fit.status().to_string(), slope, points])?;
        }
        out.flush()?;
        Ok(())
    }
}

struct Sample {
    local: Field,
    global: Field,
    est: Option<(f64, Field)>,
    pilot_local: Vec<f64>,
}

/// Sweep `cfg.h` for `method` from `u0` at time 0: one-step (local) errors,
/// errors at `t_end` (global) and, for pairs, estimator quality.
pub fn convergence_study(
    prob: &dyn SplitProblem,
    reg: &Registry,
    method: Method<'_>,
    u0: &Field,
    cfg: &StudyConfig,
) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let scheme = method.integrator();
    let p = scheme.order();
    let exec = cfg.exec;
    let opts = DriverOptions {
        exec: Exec::Sequential,
        ..DriverOptions::default()
    };
    let norms = &cfg.norms;

    let samples: Vec<Sample> = exec.try_map(&cfg.h, |&h| -> Result<Sample> {
        let local = compose_step(scheme, prob, h, u0.clone())?;
        let half = compose_step(scheme, prob, h / 2.0, u0.clone())?;
        let two_halves = compose_step(scheme, prob, h / 2.0, half)?;
        let diff = local.sub(&two_halves)?;
        let pilot_local = norms
            .iter()
            .map(|&s| diff.sobolev_norm(s).map(|e| e / (1.0 - 0.5f64.powi(p as i32))))
            .collect::<Result<Vec<_>>>()?;
        let global = integrate_fixed(prob, scheme, u0, 0.0, cfg.t_end, h, &opts)?.state;
        let est = match method.pair() {
            Some(pair) => {
                let e = estimate(pair, prob, h, u0, NormKind::L2, Exec::Sequential)?;
                Some((e.est_norm, e.u_control))
            }
            None => None,
        };
        Ok(Sample { local, global, est, pilot_local })
    })?;

    let scale: Vec<f64> = norms
        .iter()
        .map(|&s| u0.sobolev_norm(s).map(|n| 1.0 + n))
        .collect::<Result<_>>()?;
    let floor: Vec<f64> = scale.iter().map(|x| ROUNDING_REL * x).collect();
    let norm_errors = |a: &Field, b: &Field| -> Result<Vec<f64>> {
        let d = a.sub(b)?;
        norms.iter().map(|&s| d.sobolev_norm(s)).collect()
    };

    // Global reference: pilot from the two finest runs, then tightened until
    // it is REFERENCE_MARGIN below every studied error.
    let k = cfg.h.len();
    let pilot = norm_errors(&samples[k - 1].global, &samples[k - 2].global)?;
    let divisor = 2f64.powi(p as i32) - 1.0;
    let mut targets: Vec<f64> = pilot
        .iter()
        .zip(&floor)
        .map(|(e, f)| (REFERENCE_MARGIN * e / divisor).max(*f))
        .collect();
    let (global_ref, global) = refine(prob, reg, u0, cfg.t_end, norms, &mut targets, &floor, exec, |r| {
        samples.iter().map(|s| norm_errors(&s.global, &r.state)).collect()
    })?;

    // Local references, one per step size.
    let local_refs: Vec<(Reference, Vec<f64>)> = exec.try_map(&(0..k).collect::<Vec<_>>(), |&j| -> Result<(Reference, Vec<f64>)> {
        let mut targets: Vec<f64> = samples[j]
            .pilot_local
            .iter()
            .zip(&floor)
            .map(|(e, f)| (REFERENCE_MARGIN * e * 0.5f64.powi(((k - 1 - j) * (p as usize + 1)) as i32)).max(*f))
            .collect();
        let (r, errs) = refine(prob, reg, u0, cfg.h[j], norms, &mut targets, &floor, Exec::Sequential, |r| {
            Ok(vec![norm_errors(&samples[j].local, &r.state)?])
        })?;
        Ok((r, errs.into_iter().next().unwrap_or_default()))
    })?;

    let transpose = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..norms.len()).map(|i| rows.iter().map(|r| r[i]).collect()).collect()
    };
    let local = transpose(&local_refs.iter().map(|(_, e)| e.clone()).collect::<Vec<_>>());
    let global = transpose(&global);
    let ref_floor_local: Vec<f64> = (0..norms.len())
        .map(|i| local_refs.iter().map(|(r, _)| r.est_error[i]).fold(0.0, f64::max))
        .collect();
    let rounding: Vec<f64> = scale.iter().map(|x| 1e3 * f64::EPSILON * x).collect();
    let local_slopes = (0..norms.len())
        .map(|i| fit_slope(&cfg.h, &local[i], ref_floor_local[i].max(floor[i]), rounding[i]))
        .collect();
    let global_slopes = (0..norms.len())
        .map(|i| fit_slope(&cfg.h, &global[i], global_ref.est_error[i].max(floor[i]), rounding[i]))
        .collect();

    let (mut est, mut deviation, mut control_local) = (None, None, None);
    let (mut deviation_slope, mut control_slope) = (None, None);
    if method.pair().is_some() {
        let l2 = norms.iter().position(|&s| s == 0.0);
        let e: Vec<f64> = samples.iter().map(|s| s.est.as_ref().map(|e| e.0).unwrap_or(0.0)).collect();
        let ctrl: Vec<f64> = samples
            .iter()
            .zip(&local_refs)
            .map(|(s, (r, _))| {
                let u = &s.est.as_ref().expect("pairs produce estimates").1;
                u.sub(&r.state).and_then(|d| d.sobolev_norm(0.0))
            })
            .collect::<Result<_>>()?;
        let true_l2: Vec<f64> = match l2 {
            Some(i) => local[i].clone(),
            None => samples
                .iter()
                .zip(&local_refs)
                .map(|(s, (r, _))| s.local.sub(&r.state).and_then(|d| d.sobolev_norm(0.0)))
                .collect::<Result<_>>()?,
        };
        let dev: Vec<f64> = e.iter().zip(&true_l2).map(|(a, b)| (a - b).abs()).collect();
        let f0 = l2.map(|i| ref_floor_local[i]).unwrap_or(0.0).max(ROUNDING_REL * (1.0 + u0.sobolev_norm(0.0)?));
        let r0 = 1e3 * f64::EPSILON * (1.0 + u0.sobolev_norm(0.0)?);
        deviation_slope = Some(fit_slope(&cfg.h, &dev, f0, r0));
        control_slope = Some(fit_slope(&cfg.h, &ctrl, f0, r0));
        est = Some(e);
        deviation = Some(dev);
        control_local = Some(ctrl);
    }

    Ok(ConvergenceReport {
        method: method.name().to_string(),
        order: p,
        t_end: cfg.t_end,
        h: cfg.h.clone(),
        norms: norms.clone(),
        local,
        global,
        local_slopes,
        global_slopes,
        est,
        deviation,
        control_local,
        deviation_slope,
        control_slope,
        reference_scheme: global_ref.scheme.clone(),
        reference_h: global_ref.h,
        reference_error: global_ref.est_error.clone(),
    })
}

/// Compute a reference meeting `targets`, evaluate the studied errors against
/// it, and tighten the targets (up to three times) until the reference error is
/// at most `REFERENCE_MARGIN` times the smallest studied error per norm.
#[allow(clippy::too_many_arguments)]
fn refine<F>(
    prob: &dyn SplitProblem,
    reg: &Registry,
    u0: &Field,
    t_end: f64,
    norms: &[f64],
    targets: &mut [f64],
    floor: &[f64],
    exec: Exec,
    errors: F,
) -> Result<(Reference, Vec<Vec<f64>>)>
where
    F: Fn(&Reference) -> Result<Vec<Vec<f64>>>,
{
    let mut attempt = 0;
    loop {
        let spec: Vec<(f64, f64)> = norms.iter().copied().zip(targets.iter().copied()).collect();
        let r = reference_multi(prob, reg, u0, 0.0, t_end, &spec, 4, exec)?;
        let errs = errors(&r)?;
        let mut ok = true;
        for i in 0..norms.len() {
            let min_err = errs.iter().map(|e| e[i]).fold(f64::INFINITY, f64::min);
            let need = (REFERENCE_MARGIN * min_err).max(floor[i]);
            if r.est_error[i] > need {
                ok = false;
                targets[i] = need;
            }
        }
        if ok {
            return Ok((r, errs));
        }
        attempt += 1;
        if attempt >= 3 {
            let (i, _) = r
                .est_error
                .iter()
                .zip(targets.iter())
                .enumerate()
                .map(|(i, (e, t))| (i, e / t))
                .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            return Err(Error::ReferenceAccuracy {
                target: targets[i],
                achieved: r.est_error[i],
                h: r.h,
            });
        }
    }
}
