//! Splitting schemes, the composition engine, adjoints and the registry.

mod pair;
mod registry;
mod scheme;

pub use pair::{Pairing, SchemePair};
pub use registry::{load_schemes, Method, Registry};
pub use scheme::{builtin, Flow, SplittingScheme, CONSISTENCY_TOL};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problems::SplitProblem;
use crate::spectral::Field;

/// Apply `flows` (in order) with step `h`. Returns the new state and the number
/// of flow calls made.
pub fn apply_flows(prob: &dyn SplitProblem, flows: &[Flow], h: f64, u: Field) -> Result<(Field, usize)> {
    if !h.is_finite() {
        return Err(Error::Precondition(format!("step size must be finite, got {h}")));
    }
    if h == 0.0 {
        return Ok((u, 0));
    }
    let mut u = u;
    for f in flows {
        u = prob.flow(f.op, f.coeff * h, u)?;
    }
    Ok((u, flows.len()))
}

/// One step `S(h, u)` of `scheme`. Zero coefficients skip the flow call.
pub fn compose_step(scheme: &SplittingScheme, prob: &dyn SplitProblem, h: f64, u: Field) -> Result<Field> {
    compose_step_counted(scheme, prob, h, u).map(|(f, _)| f)
}

/// [`compose_step`] that also reports the number of flow calls.
pub fn compose_step_counted(
    scheme: &SplittingScheme,
    prob: &dyn SplitProblem,
    h: f64,
    u: Field,
) -> Result<(Field, usize)> {
    if scheme.arity() != prob.arity() {
        return Err(Error::ArityMismatch {
            scheme: scheme.arity(),
            problem: prob.arity(),
        });
    }
    apply_flows(prob, &scheme.flows(), h, u)
}

/// Stage table from real coefficients.
pub fn real_stages(stages: &[&[f64]]) -> Vec<Vec<Complex64>> {
    stages
        .iter()
        .map(|st| st.iter().map(|&x| Complex64::new(x, 0.0)).collect())
        .collect()
}
