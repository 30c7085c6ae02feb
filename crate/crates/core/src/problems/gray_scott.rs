use num_complex::Complex64;

use super::{check_components, check_op, finite, pointwise2, ProblemOptions, SplitProblem};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spectral::{symbols, Field, TorusGrid};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Riccati denominators smaller than this are treated as a pole.
const POLE_GUARD: f64 = 1e-8;

/// Gray–Scott parameters: feed rate `alpha`, kill rate `beta`, diffusion
/// coefficients `c1` (for `u`) and `c2` (for `v`).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GrayScottParams {
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for GrayScottParams {
    fn default() -> Self {
        GrayScottParams {
            alpha: 0.038,
            beta: 0.114,
            c1: 0.04,
            c2: 0.005,
        }
    }
}

impl GrayScottParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("c1", self.c1), ("c2", self.c2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Which splitting of the Gray–Scott vector field to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsSplit {
    /// Linear part `A` (diffusion, decay, feed) and reaction `B = (-uv^2, uv^2)`.
    Ab,
    /// `A`, `B = (0, uv^2)` and `C = (-uv^2, 0)`, each nonlinear flow solved in closed form.
    Abc,
}

#[derive(Clone, Debug)]
pub struct GrayScott {
    grid: TorusGrid,
    params: GrayScottParams,
    split: GsSplit,
    reaction_substep: f64,
    options: ProblemOptions,
    name: String,
}

impl GrayScott {
    pub fn new(grid: TorusGrid, params: GrayScottParams, split: GsSplit) -> Result<Self> {
        params.validate()?;
        let name = match split {
            GsSplit::Ab => "gray-scott",
            GsSplit::Abc => "gray-scott-abc",
        };
        Ok(GrayScott {
            grid,
            params,
            split,
            reaction_substep: 0.1,
            options: ProblemOptions::default(),
            name: name.to_string(),
        })
    }

    /// Maximal RK4 substep for the reaction flow of the two-operator split.
    pub fn with_reaction_substep(mut self, h_sub: f64) -> Result<Self> {
        if !(h_sub.is_finite() && h_sub > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reaction substep must be positive, got {h_sub}"
            )));
        }
        self.reaction_substep = h_sub;
        Ok(self)
    }

    pub fn with_options(mut self, options: ProblemOptions) -> Self {
        self.options = options;
        self
    }

    pub fn params(&self) -> &GrayScottParams {
        &self.params
    }

    pub fn split(&self) -> GsSplit {
        self.split
    }

    pub fn options(&self) -> &ProblemOptions {
        &self.options
    }

    pub fn reaction_substeps(&self, t: Complex64) -> usize {
        ((t.norm() / self.reaction_substep).ceil() as usize).max(1)
    }
}

impl SplitProblem for GrayScott {
    fn name(&self) -> &str {
        &self.name
    }

    fn arity(&self) -> usize {
        match self.split {
            GsSplit::Ab => 2,
            GsSplit::Abc => 3,
        }
    }

    fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn num_components(&self) -> usize {
        2
    }

    fn flow(&self, op: usize, t: Complex64, u: Field) -> Result<Field> {
        check_op(op, self.arity())?;
        check_components(&u, 2, "Gray–Scott flow")?;
        if t == ZERO {
            return Ok(u);
        }
        let exec = self.options.exec;
        match (self.split, op) {
            (_, 0) => {
                self.options.check_diffusion_time(t)?;
                Ok(linear_flow(u, t, &self.params))
            }
            (GsSplit::Ab, _) => {
                let out = rk4_reaction(exec, u, t, self.reaction_substeps(t))?;
                Ok(self.options.finish_nonlinear(out))
            }
            (GsSplit::Abc, 1) => Ok(self.options.finish_nonlinear(b_flow(exec, u, t)?)),
            (GsSplit::Abc, _) => Ok(self.options.finish_nonlinear(c_flow(exec, u, t)?)),
        }
    }

    fn vector_field(&self, op: usize, u: &Field) -> Result<Field> {
        check_op(op, self.arity())?;
        check_components(u, 2, "Gray–Scott vector field")?;
        match (self.split, op) {
            (_, 0) => linear_operator(u, &self.params, true),
            (GsSplit::Ab, _) => Ok(reaction_field(u)),
            (GsSplit::Abc, 1) => {
                let r = reaction_field(u);
                let mut comps = r.into_components();
                comps[0].iter_mut().for_each(|z| *z = ZERO);
                Field::nodal(u.grid().clone(), comps)
            }
            (GsSplit::Abc, _) => {
                let r = reaction_field(u);
                let mut comps = r.into_components();
                comps[1].iter_mut().for_each(|z| *z = ZERO);
                Field::nodal(u.grid().clone(), comps)
            }
        }
    }
}

fn linear_flow(u: Field, t: Complex64, p: &GrayScottParams) -> Field {
    let mut f = u.into_modal();
    let grid = f.grid().clone();
    let w = grid.base_wavenumber().powi(2);
    let decay = (-p.alpha * t).exp();
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let kappa2 = w * k.norm_sq() as f64;
        let eu = ((-p.c1 * kappa2 - p.alpha) * t).exp();
        let ev = ((-p.c2 * kappa2 - p.beta) * t).exp();
        let comps = f.components_mut();
        if k.is_zero() {
            // affine feed term: u_0' = -alpha u_0 + alpha
            comps[0][i] = ONE + (comps[0][i] - ONE) * decay;
        } else {
            comps[0][i] *= eu;
        }
        comps[1][i] *= ev;
    }
    f
}

/// Exact flow of the linear part `A U = (c1 Lap - alpha) u + alpha, (c2 Lap - beta) v`.
///
/// Any `t` with `Re(t) >= 0` is accepted; the result is modal.
pub fn gs_linear_flow(u: &Field, t: Complex64, p: &GrayScottParams) -> Result<Field> {
    check_components(u, 2, "gs_linear_flow")?;
    if t.re < 0.0 {
        return Err(Error::UnstableDiffusion(t.re));
    }
    if t == ZERO {
        return Ok(u.clone());
    }
    Ok(linear_flow(u.clone(), t, p))
}

/// RK4 approximation of the flow of `(u, v)' = (-uv^2, uv^2)` with `substeps` equal steps.
pub fn gs_reaction_flow_rk4(u: &Field, t: Complex64, substeps: usize) -> Result<Field> {
    check_components(u, 2, "gs_reaction_flow_rk4")?;
    rk4_reaction(Exec::Parallel, u.clone(), t, substeps.max(1))
}

fn rk4_reaction(exec: Exec, u: Field, t: Complex64, substeps: usize) -> Result<Field> {
    let dt = t / substeps as f64;
    let half = dt * 0.5;
    let sixth = dt / 6.0;
    pointwise2(exec, u, move |u, v| {
        let (mut x, mut y) = (*u, *v);
        for _ in 0..substeps {
            // k_v = -k_u at every stage, so u + v is preserved
            let k1 = x * y * y;
            let (x2, y2) = (x - half * k1, y + half * k1);
            let k2 = x2 * y2 * y2;
            let (x3, y3) = (x - half * k2, y + half * k2);
            let k3 = x3 * y3 * y3;
            let (x4, y4) = (x - dt * k3, y + dt * k3);
            let k4 = x4 * y4 * y4;
            let incr = sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x -= incr;
            y += incr;
        }
        if !(finite(x) && finite(y)) {
            return Err(Error::NonFinite("Gray–Scott RK4 reaction flow"));
        }
        *u = x;
        *v = y;
        Ok(())
    })
}

/// Exact flow of `v' = u v^2` with `u` frozen: `v <- v / (1 - u v t)`.
pub fn gs_b_flow_analytic(u: &Field, t: Complex64) -> Result<Field> {
    check_components(u, 2, "gs_b_flow_analytic")?;
    if t == ZERO {
        return Ok(u.clone());
    }
    b_flow(Exec::Parallel, u.clone(), t)
}

fn b_flow(exec: Exec, u: Field, t: Complex64) -> Result<Field> {
    pointwise2(exec, u, move |u, v| {
        let den = ONE - *u * *v * t;
        if den.norm() < POLE_GUARD || (den.im == 0.0 && den.re <= 0.0) {
            return Err(Error::BlowUp(format!(
                "Riccati flow v/(1 - u v t) hits its pole (1 - u v t = {den})"
            )));
        }
        *v /= den;
        if !finite(*v) {
            return Err(Error::NonFinite("Gray–Scott B flow"));
        }
        Ok(())
    })
}

/// Exact flow of `u' = -u v^2` with `v` frozen: `u <- u e^{-v^2 t}`.
pub fn gs_c_flow_analytic(u: &Field, t: Complex64) -> Result<Field> {
    check_components(u, 2, "gs_c_flow_analytic")?;
    if t == ZERO {
        return Ok(u.clone());
    }
    c_flow(Exec::Parallel, u.clone(), t)
}

fn c_flow(exec: Exec, u: Field, t: Complex64) -> Result<Field> {
    pointwise2(exec, u, move |u, v| {
        *u *= (-(*v * *v) * t).exp();
        if !finite(*u) {
            return Err(Error::NonFinite("Gray–Scott C flow"));
        }
        Ok(())
    })
}

/// `(c1 Lap - alpha) w1 [+ alpha], (c2 Lap - beta) w2`, evaluated spectrally; nodal result.
fn linear_operator(w: &Field, p: &GrayScottParams, affine: bool) -> Result<Field> {
    let modal = w.to_modal();
    let grid = modal.grid().clone();
    let lap = symbols::laplacian(grid.half_width());
    let sym_u = |k: &crate::spectral::Wavevector| p.c1 * lap(k) - p.alpha;
    let sym_v = |k: &crate::spectral::Wavevector| p.c2 * lap(k) - p.beta;
    let mut comps = modal.into_components();
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        comps[0][i] *= sym_u(&k);
        comps[1][i] *= sym_v(&k);
    }
    if affine {
        // the constant alpha lives in the mean mode
        comps[0][0] += p.alpha;
    }
    Ok(Field::new(grid, comps, crate::spectral::Repr::Modal)?.into_nodal())
}

/// `B(U) = (-u v^2, u v^2)`, nodal.
fn reaction_field(u: &Field) -> Field {
    let f = u.to_nodal();
    let grid = f.grid().clone();
    let (uu, vv) = (f.component(0), f.component(1));
    let r: Vec<Complex64> = uu.iter().zip(vv).map(|(a, b)| a * b * b).collect();
    let neg: Vec<Complex64> = r.iter().map(|z| -z).collect();
    Field::nodal(grid, vec![neg, r]).expect("shape preserved")
}

/// `B'(U) W = (-v^2 w1 - 2uv w2, v^2 w1 + 2uv w2)`, nodal.
fn reaction_jacobian(u: &Field, w: &Field) -> Field {
    let (u, w) = (u.to_nodal(), w.to_nodal());
    let grid = u.grid().clone();
    let out: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let (a, b) = (u.component(0)[i], u.component(1)[i]);
            let (w1, w2) = (w.component(0)[i], w.component(1)[i]);
            b * b * w1 + 2.0 * a * b * w2
        })
        .collect();
    let neg: Vec<Complex64> = out.iter().map(|z| -z).collect();
    Field::nodal(grid, vec![neg, out]).expect("shape preserved")
}

fn warn_if_under_resolved(u: &Field) {
    let tail = u.tail_energy_fraction();
    if tail > 1e-8 {
        log::warn!("commutator evaluated on an under-resolved field (tail energy fraction {tail:.3e})");
    }
}

/// `[A, B](U) = A(B(U)) - B'(U) A(U)` by operator application, with the affine
/// feed term of `A` included in both applications of `A`. Nodal result.
pub fn gs_commutator_ab(u: &Field, p: &GrayScottParams) -> Result<Field> {
    check_components(u, 2, "gs_commutator_ab")?;
    warn_if_under_resolved(u);
    let ab = linear_operator(&reaction_field(u), p, true)?;
    let bpa = reaction_jacobian(u, &linear_operator(u, p, true)?);
    ab.sub(&bpa)
}

/// Lie bracket of the two vector fields, `A'(B(U)) - B'(U) A(U)`, where `A'` is
/// the linear part of `A`. This is the bracket generated by the sub-flows; it
/// differs from [`gs_commutator_ab`] by the constant `(alpha, 0)`.
pub fn gs_lie_bracket_ab(u: &Field, p: &GrayScottParams) -> Result<Field> {
    check_components(u, 2, "gs_lie_bracket_ab")?;
    warn_if_under_resolved(u);
    let ab = linear_operator(&reaction_field(u), p, false)?;
    let bpa = reaction_jacobian(u, &linear_operator(u, p, true)?);
    ab.sub(&bpa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(1, PI, n).unwrap()
    }

    fn constant(u: f64, v: f64) -> Field {
        Field::constant(grid(8), &[re(u), re(v)])
    }

    fn assert_constant(f: &Field, c: usize, want: f64, tol: f64) {
        let f = f.to_nodal();
        for z in f.component(c) {
            assert!((z - re(want)).norm() <= tol, "got {z}, want {want}");
        }
    }

    #[test]
    fn linear_flow_constant_state() {
        let p = GrayScottParams::default();
        let out = gs_linear_flow(&constant(0.5, 0.0), re(1.0), &p).unwrap();
        let want = 1.0 + (0.5 - 1.0) * (-0.038f64).exp();
        assert!((want - 0.518645).abs() < 2e-6);
        assert_constant(&out, 0, want, 1e-14);
    }

    #[test]
    fn linear_flow_single_mode_in_v() {
        let p = GrayScottParams::default();
        let g = grid(16);
        let u = Field::from_fn(g, 2, |x, c| if c == 1 { Complex64::from_polar(1.0, x[0]) } else { re(0.0) });
        let out = gs_linear_flow(&u, re(2.0), &p).unwrap();
        let idx1 = 1; // k = 1 in FFT order
        let got = out.component(1)[idx1];
        assert!((got - re((-0.238f64).exp())).norm() < 1e-14);
    }

    #[test]
    fn linear_flow_rejects_negative_real_time() {
        let p = GrayScottParams::default();
        assert!(matches!(
            gs_linear_flow(&constant(1.0, 1.0), re(-0.1), &p),
            Err(Error::UnstableDiffusion(_))
        ));
        assert!(gs_linear_flow(&constant(1.0, 1.0), Complex64::new(0.1, -0.3), &p).is_ok());
    }

    #[test]
    fn zero_time_is_identity() {
        let p = GrayScottParams::default();
        let u = Field::from_fn(grid(16), 2, |x, c| re(0.3 + x[0].sin() * (c + 1) as f64));
        for f in [
            gs_linear_flow(&u, re(0.0), &p).unwrap(),
            gs_b_flow_analytic(&u, re(0.0)).unwrap(),
            gs_c_flow_analytic(&u, re(0.0)).unwrap(),
        ] {
            assert_eq!(f.components(), u.components());
        }
    }

    #[test]
    fn reaction_rk4_identity_when_v_vanishes() {
        let u = Field::from_fn(grid(8), 2, |x, c| if c == 0 { re(1.0 + x[0].cos()) } else { re(0.0) });
        let out = gs_reaction_flow_rk4(&u, re(3.0), 7).unwrap();
        assert_eq!(out.components(), u.components());
    }

    #[test]
    fn reaction_rk4_blow_up_reported() {
        let u = constant(10.0, 10.0);
        assert!(matches!(
            gs_reaction_flow_rk4(&u, re(-50.0), 10),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn b_flow_closed_form() {
        let out = gs_b_flow_analytic(&constant(1.0, 1.0), re(0.5)).unwrap();
        assert_constant(&out, 1, 2.0, 1e-15);
        assert_constant(&out, 0, 1.0, 0.0);
        let frozen = gs_b_flow_analytic(&constant(0.0, 0.7), re(100.0)).unwrap();
        assert_constant(&frozen, 1, 0.7, 0.0);
    }

    #[test]
    fn b_flow_pole_detected() {
        assert!(matches!(
            gs_b_flow_analytic(&constant(1.0, 1.0), re(1.0)),
            Err(Error::BlowUp(_))
        ));
        assert!(matches!(
            gs_b_flow_analytic(&constant(1.0, 1.0), re(2.0)),
            Err(Error::BlowUp(_))
        ));
        // complex step steers around the pole
        assert!(gs_b_flow_analytic(&constant(1.0, 1.0), Complex64::new(1.0, 0.5)).is_ok());
    }

    #[test]
    fn c_flow_closed_form() {
        let out = gs_c_flow_analytic(&constant(1.0, 1.0), re(1.0)).unwrap();
        assert_constant(&out, 0, (-1.0f64).exp(), 1e-15);
        assert!(((-1.0f64).exp() - 0.367879).abs() < 1e-6);
        let idle = gs_c_flow_analytic(&constant(0.4, 0.0), re(3.0)).unwrap();
        assert_constant(&idle, 0, 0.4, 0.0);
    }

    #[test]
    fn commutator_constant_fields() {
        let p = GrayScottParams::default();
        let c = gs_commutator_ab(&constant(1.0, 1.0), &p).unwrap();
        assert_constant(&c, 0, -0.152, 1e-14);
        assert_constant(&c, 1, 0.114, 1e-14);
        let z = gs_commutator_ab(&constant(0.0, 0.0), &p).unwrap();
        assert_constant(&z, 0, 0.038, 1e-15);
        assert_constant(&z, 1, 0.0, 1e-15);
    }

    #[test]
    fn commutator_with_vanishing_v() {
        let p = GrayScottParams::default();
        let u = Field::from_fn(grid(32), 2, |x, c| if c == 0 { re(0.5 + 0.2 * x[0].cos()) } else { re(0.0) });
        let c = gs_commutator_ab(&u, &p).unwrap();
        assert_constant(&c, 0, p.alpha, 1e-14);
        assert_constant(&c, 1, 0.0, 1e-14);
    }

    #[test]
    fn lie_bracket_differs_by_feed_constant() {
        let p = GrayScottParams::default();
        let u = Field::from_fn(grid(32), 2, |x, c| re(0.5 + 0.1 * c as f64 + 0.2 * x[0].cos()));
        let diff = gs_commutator_ab(&u, &p)
            .unwrap()
            .sub(&gs_lie_bracket_ab(&u, &p).unwrap())
            .unwrap();
        assert_constant(&diff, 0, p.alpha, 1e-14);
        assert_constant(&diff, 1, 0.0, 1e-14);
    }

    #[test]
    fn abc_vector_fields_sum_to_reaction() {
        let g = grid(16);
        let ab = GrayScott::new(g.clone(), GrayScottParams::default(), GsSplit::Ab).unwrap();
        let abc = GrayScott::new(g.clone(), GrayScottParams::default(), GsSplit::Abc).unwrap();
        let u = Field::from_fn(g, 2, |x, c| re(0.4 + 0.3 * (x[0] + c as f64).sin()));
        let lhs = ab.full_vector_field(&u).unwrap();
        let rhs = abc.full_vector_field(&u).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn backward_diffusion_needs_override() {
        let g = grid(8);
        let mut prob = GrayScott::new(g.clone(), GrayScottParams::default(), GsSplit::Ab).unwrap();
        let u = Field::constant(g, &[re(0.5), re(0.2)]);
        assert!(prob.flow(0, re(-0.1), u.clone()).is_err());
        prob = prob.with_options(ProblemOptions {
            allow_backward_diffusion: true,
            ..Default::default()
        });
        assert!(prob.flow(0, re(-0.1), u).is_ok());
    }
}
