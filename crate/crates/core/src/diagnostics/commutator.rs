use num_complex::Complex64;

use crate::error::Result;
use crate::problems::{gs_commutator_ab, gs_lie_bracket_ab, GrayScott, GrayScottParams, GsSplit, ProblemOptions, SplitProblem};
use crate::spectral::{Field, TorusGrid};

/// Default finite-difference increment.
pub const FD_DELTA: f64 = 1e-2;

/// RK4 substep used for the reaction flow inside the finite differences.
const FD_REACTION_SUBSTEP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct CommutatorReport {
    /// `[A,B](U)` by operator application.
    pub commutator: Field,
    /// Vector-field Lie bracket `A'B - B'A`.
    pub lie_bracket: Field,
    /// Richardson-extrapolated finite-difference bracket of the sub-flows.
    pub finite_difference: Field,
    /// `|fd - commutator| / |commutator|` in L2.
    pub rel_diff_commutator: f64,
    /// `|fd - lie_bracket| / |lie_bracket|` in L2.
    pub rel_diff_lie_bracket: f64,
    /// `(m, |[A,B](U)|_{H^m} on n points, same on 2n points)`.
    pub sobolev: Vec<(u32, f64, f64)>,
    /// Relative change of the L2 norm of the commutator under refinement.
    pub refinement_change: f64,
    /// Spectral tail energy fraction of the input.
    pub tail_fraction: f64,
}

/// Mixed central difference of the group commutator
/// `phi_B(-s) phi_A(-t) phi_B(s) phi_A(t) U` at `s = t = 0`, negated so that it
/// approximates `A'(U) B(U) - B'(U) A(U)`.
pub fn fd_lie_bracket(prob: &dyn SplitProblem, u: &Field, delta: f64) -> Result<Field> {
    let psi = |s: f64, t: f64| -> Result<Field> {
        let c = |x: f64| Complex64::new(x, 0.0);
        let w = prob.flow(0, c(t), u.clone())?;
        let w = prob.flow(1, c(s), w)?;
        let w = prob.flow(0, c(-t), w)?;
        prob.flow(1, c(-s), w)
    };
    let d = |h: f64| -> Result<Field> {
        let w = 1.0 / (4.0 * h * h);
        let (pp, pm, mp, mm) = (psi(h, h)?, psi(h, -h)?, psi(-h, h)?, psi(-h, -h)?);
        Field::linear_combination(&[
            (Complex64::new(w, 0.0), &pp.to_nodal()),
            (Complex64::new(-w, 0.0), &pm.to_nodal()),
            (Complex64::new(-w, 0.0), &mp.to_nodal()),
            (Complex64::new(w, 0.0), &mm.to_nodal()),
        ])
    };
    let coarse = d(delta)?;
    let fine = d(delta / 2.0)?;
    Field::linear_combination(&[
        (Complex64::new(-4.0 / 3.0, 0.0), &fine),
        (Complex64::new(1.0 / 3.0, 0.0), &coarse),
    ])
}

/// Compare the Gray–Scott commutator with a finite-difference bracket of the
/// two sub-flows and track its Sobolev norms under grid refinement.
pub fn commutator_check(
    params: &GrayScottParams,
    grid: &TorusGrid,
    init: &dyn Fn(&TorusGrid) -> Field,
) -> Result<CommutatorReport> {
    let u = init(grid);
    let opts = ProblemOptions {
        allow_backward_diffusion: true,
        ..ProblemOptions::default()
    };
    let prob = GrayScott::new(grid.clone(), *params, GsSplit::Ab)?
        .with_reaction_substep(FD_REACTION_SUBSTEP)?
        .with_options(opts);
    let commutator = gs_commutator_ab(&u, params)?;
    let lie_bracket = gs_lie_bracket_ab(&u, params)?;
    let finite_difference = fd_lie_bracket(&prob, &u, FD_DELTA)?;
    let rel = |x: &Field| -> Result<f64> {
        let n = x.sobolev_norm(0.0)?;
        Ok(finite_difference.sub(x)?.sobolev_norm(0.0)? / n)
    };
    let rel_diff_commutator = rel(&commutator)?;
    let rel_diff_lie_bracket = rel(&lie_bracket)?;

    let fine_grid = grid.refined(2)?;
    let fine = gs_commutator_ab(&init(&fine_grid), params)?;
    let sobolev = [0u32, 1]
        .iter()
        .map(|&m| Ok((m, commutator.sobolev_norm(m as f64)?, fine.sobolev_norm(m as f64)?)))
        .collect::<Result<Vec<_>>>()?;
    let refinement_change = (sobolev[0].2 - sobolev[0].1).abs() / sobolev[0].1;

    Ok(CommutatorReport {
        tail_fraction: u.tail_energy_fraction(),
        commutator,
        lie_bracket,
        finite_difference,
        rel_diff_commutator,
        rel_diff_lie_bracket,
        sobolev,
        refinement_change,
    })
}
