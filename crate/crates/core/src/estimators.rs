//! Local error estimators built from scheme pairs.
//!
//! Each estimator returns the integrator value `S(h, u)`, a reference value
//! `S_bar(h, u)` of higher order, and the norm of `P(h, u) = S - S_bar`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::problems::SplitProblem;
use crate::schemes::{apply_flows, compose_step_counted, Pairing, SchemePair, SplittingScheme};
use crate::spectral::Field;

/// Norm used for the error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Continuous L2 norm over all components (Sobolev index 0).
    #[default]
    L2,
    /// Largest nodal modulus over all components.
    Max,
}

/// Controller norm of `p`.
pub fn controller_norm(p: &Field, kind: NormKind) -> f64 {
    match kind {
        NormKind::L2 => p.sobolev_norm(0.0).expect("s = 0 is a valid index"),
        NormKind::Max => p.max_norm(),
    }
}

#[derive(Clone, Debug)]
pub struct EstimateResult {
    /// Integrator value `S(h, u)`.
    pub u_next: Field,
    /// Reference value `S_bar(h, u)`.
    pub u_control: Field,
    /// Norm of the estimate `P(h, u)`.
    pub est_norm: f64,
    /// Flow calls spent on this estimate.
    pub flow_evals: usize,
}

/// Dispatch on the pairing kind.
pub fn estimate(
    pair: &SchemePair,
    prob: &dyn SplitProblem,
    h: f64,
    u: &Field,
    norm: NormKind,
    exec: Exec,
) -> Result<EstimateResult> {
    match pair.pairing() {
        Pairing::Embedded { .. } => estimate_embedded(pair, prob, h, u, norm, exec),
        Pairing::AdjointAverage | Pairing::Palindromic => estimate_adjoint_average(pair, prob, h, u, norm, exec),
        Pairing::Milne { .. } => estimate_milne(pair, prob, h, u, norm, exec),
    }
}

fn both(
    exec: Exec,
    a: &SplittingScheme,
    b: &SplittingScheme,
    prob: &dyn SplitProblem,
    h: f64,
    u: &Field,
) -> Result<((Field, usize), (Field, usize))> {
    let (ra, rb) = exec.join(
        || compose_step_counted(a, prob, h, u.clone()),
        || compose_step_counted(b, prob, h, u.clone()),
    );
    Ok((ra?, rb?))
}

/// Embedded pair: the shared flow prefix is evaluated once.
pub fn estimate_embedded(
    pair: &SchemePair,
    prob: &dyn SplitProblem,
    h: f64,
    u: &Field,
    norm: NormKind,
    exec: Exec,
) -> Result<EstimateResult> {
    let Pairing::Embedded {
        controller,
        shared_prefix_len,
    } = pair.pairing()
    else {
        return Err(Error::Precondition(format!("{} is not an embedded pair", pair.name())));
    };
    check_arity(pair, prob)?;
    let k = *shared_prefix_len;
    let fi = pair.integrator().flows();
    let fc = controller.flows();
    let (prefix, n0) = apply_flows(prob, &fi[..k], h, u.clone())?;
    let (ri, rc) = exec.join(
        || apply_flows(prob, &fi[k..], h, prefix.clone()),
        || apply_flows(prob, &fc[k..], h, prefix.clone()),
    );
    let ((u_next, ni), (u_control, nc)) = (ri?, rc?);
    let est_norm = controller_norm(&u_next.sub(&u_control)?, norm);
    Ok(EstimateResult {
        u_next,
        u_control,
        est_norm,
        flow_evals: n0 + ni + nc,
    })
}

/// Adjoint averaging: `S_bar = (S + S*)/2`, `P = (S - S*)/2`. Also serves
/// palindromic pairs, whose adjoint is the mirrored scheme.
pub fn estimate_adjoint_average(
    pair: &SchemePair,
    prob: &dyn SplitProblem,
    h: f64,
    u: &Field,
    norm: NormKind,
    exec: Exec,
) -> Result<EstimateResult> {
    let adjoint = match (pair.pairing(), pair.adjoint_scheme()) {
        (Pairing::AdjointAverage | Pairing::Palindromic, Some(adj)) => adj,
        _ => {
            return Err(Error::Precondition(format!(
                "{} is not an adjoint-average pair",
                pair.name()
            )))
        }
    };
    if pair.order().is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "adjoint averaging needs odd order, {} has order {}",
            pair.integrator().name(),
            pair.order()
        )));
    }
    check_arity(pair, prob)?;
    let ((s, n1), (s_adj, n2)) = both(exec, pair.integrator(), adjoint, prob, h, u)?;
    let half = Complex64::new(0.5, 0.0);
    let u_control = Field::linear_combination(&[(half, &s), (half, &s_adj)])?;
    let p = Field::linear_combination(&[(half, &s), (-half, &s_adj)])?;
    let est_norm = controller_norm(&p, norm);
    if est_norm == 0.0 && h != 0.0 && pair.integrator().is_self_adjoint() {
        log::warn!("pair {}: degenerate estimate, S equals its adjoint", pair.name());
    }
    Ok(EstimateResult {
        u_next: s,
        u_control,
        est_norm,
        flow_evals: n1 + n2,
    })
}

/// Milne device: `S_bar = -g/(1-g) S + 1/(1-g) S~`, `P = (S - S~)/(1-g)`.
pub fn estimate_milne(
    pair: &SchemePair,
    prob: &dyn SplitProblem,
    h: f64,
    u: &Field,
    norm: NormKind,
    exec: Exec,
) -> Result<EstimateResult> {
    let Pairing::Milne { partner, gamma } = pair.pairing() else {
        return Err(Error::Precondition(format!("{} is not a Milne pair", pair.name())));
    };
    if (gamma - 1.0).norm() < 1e-12 {
        return Err(Error::InvalidPair {
            name: pair.name().to_string(),
            reason: "gamma must differ from 1".into(),
        });
    }
    check_arity(pair, prob)?;
    let ((s, n1), (s_tilde, n2)) = both(exec, pair.integrator(), partner, prob, h, u)?;
    let (u_control, p) = milne_combination(&s, &s_tilde, *gamma)?;
    Ok(EstimateResult {
        est_norm: controller_norm(&p, norm),
        u_next: s,
        u_control,
        flow_evals: n1 + n2,
    })
}

/// Milne reference value and estimate from the two scheme results.
pub fn milne_combination(s: &Field, s_tilde: &Field, gamma: Complex64) -> Result<(Field, Field)> {
    let w = 1.0 / (1.0 - gamma);
    let u_control = Field::linear_combination(&[(-gamma * w, s), (w, s_tilde)])?;
    let p = Field::linear_combination(&[(w, s), (-w, s_tilde)])?;
    Ok((u_control, p))
}

fn check_arity(pair: &SchemePair, prob: &dyn SplitProblem) -> Result<()> {
    if pair.arity() != prob.arity() {
        return Err(Error::ArityMismatch {
            scheme: pair.arity(),
            problem: prob.arity(),
        });
    }
    Ok(())
}
