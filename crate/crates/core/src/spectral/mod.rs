//! Periodic grids, Fourier transforms, spectral operators and Sobolev norms.

mod field;
mod grid;
pub mod snapshot;

pub use field::{Field, Repr};
pub use grid::{TorusGrid, Wavevector};

use num_complex::Complex64;

use crate::error::Result;

/// Nodal to modal transform (a modal input is returned unchanged).
pub fn to_modal(f: &Field) -> Field {
    f.to_modal()
}

/// Modal to nodal transform (a nodal input is returned unchanged).
pub fn to_nodal(f: &Field) -> Field {
    f.to_nodal()
}

pub fn apply_symbol(f: &Field, symbol: impl Fn(&Wavevector) -> Complex64) -> Result<Field> {
    f.apply_symbol(symbol)
}

pub fn sobolev_norm(f: &Field, s: f64) -> Result<f64> {
    f.sobolev_norm(s)
}

/// Common Fourier multipliers.
pub mod symbols {
    use super::Wavevector;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    /// `-(pi/a)^2 |k|_2^2`.
    pub fn laplacian(a: f64) -> impl Fn(&Wavevector) -> Complex64 {
        let w = (PI / a).powi(2);
        move |k| Complex64::new(-w * k.norm_sq() as f64, 0.0)
    }

    /// `i (pi/a) k_axis`; zero on the Nyquist mode of that axis.
    pub fn partial(axis: usize, a: f64) -> impl Fn(&Wavevector) -> Complex64 {
        let w = PI / a;
        move |k| {
            if k.is_nyquist(axis) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, w * k.get(axis) as f64)
            }
        }
    }
}
