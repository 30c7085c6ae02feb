use num_complex::Complex64;

use super::{check_components, check_op, finite, pointwise2, ProblemOptions, SplitProblem};
use crate::error::{Error, Result};
use crate::spectral::{symbols, Field, Repr, TorusGrid};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Parameters of the diffusive Van der Pol system
/// `u' = Du Lap u + v`, `v' = Dv Lap v + ((1 - u^2) v - u) / eps`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VdpParams {
    pub du: f64,
    pub dv: f64,
    pub eps: f64,
}

impl Default for VdpParams {
    fn default() -> Self {
        VdpParams {
            du: 1.0,
            dv: 1.0,
            eps: 1e-3,
        }
    }
}

impl VdpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {}", self.eps)));
        }
        for (name, v) in [("du", self.du), ("dv", self.dv)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Mode matrix `[[-Du k2, 1], [-1/eps, -Dv k2 + 1/eps]]` of the linear part.
    pub fn mode_matrix(&self, kappa2: f64) -> [[Complex64; 2]; 2] {
        let r = |x: f64| Complex64::new(x, 0.0);
        [
            [r(-self.du * kappa2), r(1.0)],
            [r(-1.0 / self.eps), r(-self.dv * kappa2 + 1.0 / self.eps)],
        ]
    }
}

/// Split into the linear part (diffusion, `v` in `u'`, `(v - u)/eps` in `v'`)
/// and `v' = -u^2 v / eps`.
#[derive(Clone, Debug)]
pub struct VanDerPol {
    grid: TorusGrid,
    params: VdpParams,
    options: ProblemOptions,
}

impl VanDerPol {
    pub fn new(grid: TorusGrid, params: VdpParams) -> Result<Self> {
        params.validate()?;
        Ok(VanDerPol {
            grid,
            params,
            options: ProblemOptions::default(),
        })
    }

    pub fn with_options(mut self, options: ProblemOptions) -> Self {
        self.options = options;
        self
    }

    pub fn params(&self) -> &VdpParams {
        &self.params
    }
}

impl SplitProblem for VanDerPol {
    fn name(&self) -> &str {
        "van-der-pol"
    }

    fn arity(&self) -> usize {
        2
    }

    fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn num_components(&self) -> usize {
        2
    }

    fn flow(&self, op: usize, t: Complex64, u: Field) -> Result<Field> {
        check_op(op, 2)?;
        check_components(&u, 2, "Van der Pol flow")?;
        if t == ZERO {
            return Ok(u);
        }
        if op == 0 {
            self.options.check_diffusion_time(t)?;
            linear_flow(u, t, &self.params)
        } else {
            let out = b_flow(self.options.exec, u, t, self.params.eps)?;
            Ok(self.options.finish_nonlinear(out))
        }
    }

    fn vector_field(&self, op: usize, u: &Field) -> Result<Field> {
        check_op(op, 2)?;
        check_components(u, 2, "Van der Pol vector field")?;
        let p = &self.params;
        if op == 0 {
            let grid = u.grid().clone();
            let lap = symbols::laplacian(grid.half_width());
            let modal = u.to_modal();
            let (uu, vv) = (modal.component(0), modal.component(1));
            let mut cu = Vec::with_capacity(grid.len());
            let mut cv = Vec::with_capacity(grid.len());
            for i in 0..grid.len() {
                let l = lap(&grid.wavevector(i));
                cu.push(p.du * l * uu[i] + vv[i]);
                cv.push(p.dv * l * vv[i] + (vv[i] - uu[i]) / p.eps);
            }
            Ok(Field::new(grid, vec![cu, cv], Repr::Modal)?.into_nodal())
        } else {
            let f = u.to_nodal();
            let cv: Vec<Complex64> = f
                .component(0)
                .iter()
                .zip(f.component(1))
                .map(|(a, b)| -a * a * b / p.eps)
                .collect();
            Field::nodal(u.grid().clone(), vec![vec![ZERO; cv.len()], cv])
        }
    }
}

fn linear_flow(u: Field, t: Complex64, p: &VdpParams) -> Result<Field> {
    let mut f = u.into_modal();
    let grid = f.grid().clone();
    let w = grid.base_wavenumber().powi(2);
    for i in 0..grid.len() {
        let kappa2 = w * grid.wavevector(i).norm_sq() as f64;
        let e = expm2(&p.mode_matrix(kappa2), t);
        let comps = f.components_mut();
        let (a, b) = (comps[0][i], comps[1][i]);
        comps[0][i] = e[0][0] * a + e[0][1] * b;
        comps[1][i] = e[1][0] * a + e[1][1] * b;
    }
    if !f.is_finite() {
        return Err(Error::NonFinite("Van der Pol linear flow"));
    }
    Ok(f)
}

/// Exact flow of the linear Van der Pol part, mode by mode; modal result.
pub fn vdp_linear_flow(u: &Field, t: Complex64, p: &VdpParams) -> Result<Field> {
    check_components(u, 2, "vdp_linear_flow")?;
    if t.re < 0.0 {
        return Err(Error::UnstableDiffusion(t.re));
    }
    if t == ZERO {
        return Ok(u.clone());
    }
    linear_flow(u.clone(), t, p)
}

fn b_flow(exec: crate::exec::Exec, u: Field, t: Complex64, eps: f64) -> Result<Field> {
    pointwise2(exec, u, move |u, v| {
        *v *= (-(*u * *u) * t / eps).exp();
        if !finite(*v) {
            return Err(Error::NonFinite("Van der Pol B flow"));
        }
        Ok(())
    })
}

/// Exact flow of `v' = -u^2 v / eps` with `u` frozen.
pub fn vdp_b_flow_analytic(u: &Field, t: Complex64, p: &VdpParams) -> Result<Field> {
    check_components(u, 2, "vdp_b_flow_analytic")?;
    if t == ZERO {
        return Ok(u.clone());
    }
    b_flow(crate::exec::Exec::Parallel, u.clone(), t, p.eps)
}

/// `exp(M t)` for a complex 2x2 matrix.
///
/// With `tau = tr(M t)` and `q^2 = tau^2/4 - det(M t)`,
/// `exp(M t) = e^{tau/2} (cosh q I + sinh(q)/q (M t - tau/2 I))`. The defective
/// case `q = 0` is covered by the series of `sinh(q)/q`; for larger `|q|` the
/// exponentials `e^{tau/2 +- q}` are formed directly to avoid overflow in
/// `cosh`.
pub fn expm2(m: &[[Complex64; 2]; 2], t: Complex64) -> [[Complex64; 2]; 2] {
    let n = [[m[0][0] * t, m[0][1] * t], [m[1][0] * t, m[1][1] * t]];
    let tau = n[0][0] + n[1][1];
    let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
    let half = tau * 0.5;
    let q = (half * half - det).sqrt();
    let (c, s) = if q.norm() < 0.25 {
        let e = half.exp();
        let q2 = q * q;
        // cosh q and sinh(q)/q by their Taylor series
        let (mut cosh, mut sinhc) = (ONE, ONE);
        let (mut tc, mut ts) = (ONE, ONE);
        for j in 1..12 {
            let j = j as f64;
            tc = tc * q2 / ((2.0 * j - 1.0) * (2.0 * j));
            ts = ts * q2 / ((2.0 * j) * (2.0 * j + 1.0));
            cosh += tc;
            sinhc += ts;
        }
        (e * cosh, e * sinhc)
    } else {
        let ep = (half + q).exp();
        let em = (half - q).exp();
        ((ep + em) * 0.5, (ep - em) / (2.0 * q))
    };
    [
        [c + s * (n[0][0] - half), s * n[0][1]],
        [s * n[1][0], c + s * (n[1][1] - half)],
    ]
}
