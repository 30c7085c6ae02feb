//! Split evolution problems `u' = A(u) + B(u) [+ C(u)]` on the torus.
//!
//! Every sub-operator exposes its flow map `phi(t, u)` for real or complex `t`
//! and its vector field. Flows are exact wherever a closed form exists; the
//! two-operator Gray–Scott reaction flow is integrated with classical RK4.

mod gray_scott;
mod linear;
pub mod presets;
mod van_der_pol;

pub use gray_scott::{
    gs_b_flow_analytic, gs_c_flow_analytic, gs_commutator_ab, gs_lie_bracket_ab,
    gs_linear_flow, gs_reaction_flow_rk4, GrayScott, GrayScottParams, GsSplit,
};
pub use linear::LinearDiagnostic;
pub use van_der_pol::{expm2, vdp_b_flow_analytic, vdp_linear_flow, VanDerPol, VdpParams};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral::{Field, TorusGrid};

/// An evolution equation split into 2 or 3 sub-operators.
pub trait SplitProblem: Send + Sync {
    fn name(&self) -> &str;

    /// Number of sub-operators.
    fn arity(&self) -> usize;

    fn grid(&self) -> &TorusGrid;

    fn num_components(&self) -> usize;

    /// Flow of sub-operator `op` over (possibly complex) time `t`.
    fn flow(&self, op: usize, t: Complex64, u: Field) -> Result<Field>;

    /// Vector field of sub-operator `op`, returned in nodal form.
    fn vector_field(&self, op: usize, u: &Field) -> Result<Field>;

    /// Sum of all sub-operator vector fields.
    fn full_vector_field(&self, u: &Field) -> Result<Field> {
        let mut acc = self.vector_field(0, u)?;
        for op in 1..self.arity() {
            acc = acc.add(&self.vector_field(op, u)?)?;
        }
        Ok(acc)
    }
}

/// Settings shared by the concrete problems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemOptions {
    /// Policy for pointwise nonlinear updates.
    pub exec: Exec,
    /// Apply the 2/3 rule after every nonlinear sub-flow.
    pub dealias: bool,
    /// Permit diffusion flows with `Re(t) < 0` (normally an error).
    pub allow_backward_diffusion: bool,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        ProblemOptions {
            exec: Exec::Parallel,
            dealias: false,
            allow_backward_diffusion: false,
        }
    }
}

impl ProblemOptions {
    pub(crate) fn check_diffusion_time(&self, t: Complex64) -> Result<()> {
        if t.re < 0.0 && !self.allow_backward_diffusion {
            return Err(Error::UnstableDiffusion(t.re));
        }
        Ok(())
    }

    pub(crate) fn finish_nonlinear(&self, f: Field) -> Field {
        if self.dealias {
            f.dealias_two_thirds()
        } else {
            f
        }
    }
}

pub(crate) fn check_op(op: usize, arity: usize) -> Result<()> {
    if op >= arity {
        return Err(Error::Precondition(format!(
            "operator index {op} out of range for arity {arity}"
        )));
    }
    Ok(())
}

pub(crate) fn check_components(u: &Field, m: usize, who: &str) -> Result<()> {
    if u.num_components() != m {
        return Err(Error::ShapeMismatch(format!(
            "{who} expects {m} components, got {}",
            u.num_components()
        )));
    }
    Ok(())
}

/// Apply a fallible pointwise update to a two-component field (converted to nodal).
pub(crate) fn pointwise2<F>(exec: Exec, u: Field, f: F) -> Result<Field>
where
    F: Fn(&mut Complex64, &mut Complex64) -> Result<()> + Sync + Send,
{
    let mut u = u.into_nodal();
    let comps = u.components_mut();
    let (first, rest) = comps.split_at_mut(1);
    exec.try_zip_mut(&mut first[0], &mut rest[0], f)?;
    Ok(u)
}

pub(crate) fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
