use crate::controller::{integrate_fixed, DriverOptions};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::problems::SplitProblem;
use crate::schemes::{Registry, SplittingScheme};
use crate::spectral::Field;

/// Most steps a reference run may take.
pub const MAX_REFERENCE_STEPS: usize = 1 << 17;

/// A high-accuracy solution at one time.
#[derive(Clone, Debug)]
pub struct Reference {
    pub state: Field,
    pub scheme: String,
    /// Step size of the returned run (0 for an empty interval).
    pub h: f64,
    /// Estimated error of `state` in each requested norm.
    pub est_error: Vec<f64>,
}

/// Fixed-step solution with the highest-order parabolic-safe registered
/// scheme, halving the step until the Richardson error estimate
/// `|U_h - U_{h/2}|_s / (2^p - 1)` meets `target` in the `H^s` norm.
pub fn reference_solution(
    prob: &dyn SplitProblem,
    reg: &Registry,
    u0: &Field,
    t0: f64,
    t_end: f64,
    target: f64,
    s: f64,
) -> Result<Reference> {
    reference_multi(prob, reg, u0, t0, t_end, &[(s, target)], 4, Exec::Parallel)
}

/// Pick the scheme used for references.
pub fn reference_scheme<'a>(prob: &dyn SplitProblem, reg: &'a Registry) -> Result<&'a SplittingScheme> {
    let scheme = reg
        .highest_order(prob.arity())
        .ok_or_else(|| Error::Precondition(format!("no scheme of arity {} registered", prob.arity())))?;
    if scheme.order() < 2 {
        return Err(Error::Precondition(format!(
            "reference needs a scheme of order >= 2, best is {} (order {})",
            scheme.name(),
            scheme.order()
        )));
    }
    Ok(scheme)
}

/// Like [`reference_solution`] with one `(s, target)` requirement per norm,
/// starting from `min_steps` steps.
#[allow(clippy::too_many_arguments)]
pub fn reference_multi(
    prob: &dyn SplitProblem,
    reg: &Registry,
    u0: &Field,
    t0: f64,
    t_end: f64,
    targets: &[(f64, f64)],
    min_steps: usize,
    exec: Exec,
) -> Result<Reference> {
    let scheme = reference_scheme(prob, reg)?;
    if t_end == t0 {
        return Ok(Reference {
            state: u0.clone(),
            scheme: scheme.name().to_string(),
            h: 0.0,
            est_error: vec![0.0; targets.len()],
        });
    }
    let opts = DriverOptions {
        exec,
        ..DriverOptions::default()
    };
    let span = t_end - t0;
    let run = |n: usize| integrate_fixed(prob, scheme, u0, t0, t_end, span / n as f64, &opts).map(|t| t.state);
    let divisor = 2f64.powi(scheme.order() as i32) - 1.0;
    let mut n = min_steps.max(1);
    let mut coarse = run(n).ok();
    let mut last_err = f64::INFINITY;
    while 2 * n <= MAX_REFERENCE_STEPS {
        let fine = run(2 * n);
        if let (Some(c), Ok(f)) = (&coarse, &fine) {
            let diff = f.sub(c)?;
            let errs = targets
                .iter()
                .map(|&(s, _)| diff.sobolev_norm(s).map(|e| e / divisor))
                .collect::<Result<Vec<f64>>>()?;
            if errs.iter().zip(targets).all(|(e, (_, tgt))| e <= tgt) {
                return Ok(Reference {
                    state: f.clone(),
                    scheme: scheme.name().to_string(),
                    h: span / (2 * n) as f64,
                    est_error: errs,
                });
            }
            last_err = errs
                .iter()
                .zip(targets)
                .map(|(e, (_, tgt))| e / tgt)
                .fold(0.0, f64::max);
        }
        coarse = fine.ok();
        n *= 2;
    }
    Err(Error::ReferenceAccuracy {
        target: targets.iter().map(|t| t.1).fold(f64::INFINITY, f64::min),
        achieved: last_err,
        h: span / n as f64,
    })
}
