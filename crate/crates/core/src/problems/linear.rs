use num_complex::Complex64;

use super::{check_components, check_op, finite, ProblemOptions, SplitProblem};
use crate::error::{Error, Result};
use crate::spectral::{Field, TorusGrid};

/// Scalar diagnostic problem `u' = c Lap u + V(x) u`, split into diffusion and
/// the potential term. Both flows are exact; with a constant potential the two
/// operators commute and every consistent splitting scheme is exact.
#[derive(Clone, Debug)]
pub struct LinearDiagnostic {
    grid: TorusGrid,
    diffusion: f64,
    potential: Vec<f64>,
    options: ProblemOptions,
}

impl LinearDiagnostic {
    pub fn new(grid: TorusGrid, diffusion: f64, potential: Vec<f64>) -> Result<Self> {
        if !(diffusion.is_finite() && diffusion >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusion must be >= 0, got {diffusion}"
            )));
        }
        if potential.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "potential has {} entries, grid has {}",
                potential.len(),
                grid.len()
            )));
        }
        Ok(LinearDiagnostic {
            grid,
            diffusion,
            potential,
            options: ProblemOptions::default(),
        })
    }

    pub fn constant_potential(grid: TorusGrid, diffusion: f64, mu: f64) -> Result<Self> {
        let len = grid.len();
        LinearDiagnostic::new(grid, diffusion, vec![mu; len])
    }

    /// `V(x) = mu cos(pi x_1 / a)`: the operators no longer commute.
    pub fn cosine_potential(grid: TorusGrid, diffusion: f64, mu: f64) -> Result<Self> {
        let w = grid.base_wavenumber();
        let potential = (0..grid.len())
            .map(|i| mu * (w * grid.node(i)[0]).cos())
            .collect();
        LinearDiagnostic::new(grid, diffusion, potential)
    }

    pub fn with_options(mut self, options: ProblemOptions) -> Self {
        self.options = options;
        self
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Modal eigenvalue of the diffusion operator.
    pub fn diffusion_eigenvalue(&self, flat: usize) -> f64 {
        let w = self.grid.base_wavenumber().powi(2);
        -self.diffusion * w * self.grid.wavevector(flat).norm_sq() as f64
    }
}

impl SplitProblem for LinearDiagnostic {
    fn name(&self) -> &str {
        "linear-diagnostic"
    }

    fn arity(&self) -> usize {
        2
    }

    fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn num_components(&self) -> usize {
        1
    }

    fn flow(&self, op: usize, t: Complex64, u: Field) -> Result<Field> {
        check_op(op, 2)?;
        check_components(&u, 1, "linear diagnostic flow")?;
        if t == Complex64::new(0.0, 0.0) {
            return Ok(u);
        }
        if op == 0 {
            self.options.check_diffusion_time(t)?;
            let mut f = u.into_modal();
            for i in 0..self.grid.len() {
                f.component_mut(0)[i] *= (self.diffusion_eigenvalue(i) * t).exp();
            }
            Ok(f)
        } else {
            let mut f = u.into_nodal();
            for (z, v) in f.component_mut(0).iter_mut().zip(&self.potential) {
                *z *= (*v * t).exp();
                if !finite(*z) {
                    return Err(Error::NonFinite("linear diagnostic potential flow"));
                }
            }
            Ok(f)
        }
    }

    fn vector_field(&self, op: usize, u: &Field) -> Result<Field> {
        check_op(op, 2)?;
        check_components(u, 1, "linear diagnostic vector field")?;
        if op == 0 {
            let mut f = u.to_modal();
            for i in 0..self.grid.len() {
                f.component_mut(0)[i] *= self.diffusion_eigenvalue(i);
            }
            Ok(f.into_nodal())
        } else {
            let mut f = u.to_nodal();
            for (z, v) in f.component_mut(0).iter_mut().zip(&self.potential) {
                *z *= *v;
            }
            Ok(f)
        }
    }
}
