//! Named initial conditions.

use num_complex::Complex64;

use crate::spectral::{Field, TorusGrid};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Gaussian bumps for Gray–Scott: `u = 0.5 + e^{-1-|x|^2}`, `v = 0.1 + e^{-1-|x|^2}`.
pub fn gs_gaussian_bumps(grid: &TorusGrid) -> Field {
    Field::from_fn(grid.clone(), 2, |x, c| {
        let r2: f64 = x.iter().map(|xi| xi * xi).sum();
        let bump = (-1.0 - r2).exp();
        re(if c == 0 { 0.5 + bump } else { 0.1 + bump })
    })
}

/// Homogeneous Gray–Scott steady state `(u, v) = (1, 0)`.
pub fn gs_stationary(grid: &TorusGrid) -> Field {
    Field::constant(grid.clone(), &[re(1.0), re(0.0)])
}

/// Van der Pol data: `u = e^{-|x|^2}`, `v = 0.2 e^{-(x_1 + 2)^2 - x_2^2 - ...}`.
pub fn vdp_pulse(grid: &TorusGrid) -> Field {
    Field::from_fn(grid.clone(), 2, |x, c| {
        if c == 0 {
            re((-x.iter().map(|xi| xi * xi).sum::<f64>()).exp())
        } else {
            let shifted: f64 = (x[0] + 2.0).powi(2) + x[1..].iter().map(|xi| xi * xi).sum::<f64>();
            re(0.2 * (-shifted).exp())
        }
    })
}

/// Narrow Gaussian bumps that are periodic to machine precision on `[-pi, pi]^d`,
/// used where spectral resolution matters (commutator checks).
pub fn smooth_bumps(grid: &TorusGrid) -> Field {
    Field::from_fn(grid.clone(), 2, |x, c| {
        let r2: f64 = x.iter().map(|xi| xi * xi).sum();
        let bump = (-4.0 * r2).exp();
        re(if c == 0 { 0.5 + 0.5 * bump } else { 0.25 + 0.5 * bump })
    })
}

/// Zero field with `m` components.
pub fn zero(grid: &TorusGrid, m: usize) -> Field {
    Field::constant(grid.clone(), &vec![re(0.0); m])
}
