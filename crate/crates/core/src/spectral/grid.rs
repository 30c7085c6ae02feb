use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic grid on the cube `[-a, a]^d` with `n` equispaced nodes per axis.
///
/// Node `j` on each axis sits at `x_j = -a + 2 a j / n`. The FFT plans for the
/// axis length are created once and shared by all clones of the grid.
#[derive(Clone)]
pub struct TorusGrid {
    d: usize,
    a: f64,
    n: usize,
    plans: Arc<Plans>,
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl TorusGrid {
    pub fn new(d: usize, a: f64, n: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {d}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {a}")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 4, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(TorusGrid {
            d,
            a,
            n,
            plans: Arc::new(plans),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_width(&self) -> f64 {
        self.a
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh width `2a/n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.a / self.n as f64
    }

    /// Volume of one quadrature cell, `(2a/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Volume of the torus, `(2a)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.a).powi(self.d as i32)
    }

    /// `pi / a`, the wavenumber of the first mode.
    pub fn base_wavenumber(&self) -> f64 {
        PI / self.a
    }

    /// Multi-index of a flat position (row-major, last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.d).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    /// Coordinates of the node at a flat position.
    pub fn node(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.d {
            x[axis] = -self.a + h * idx[axis] as f64;
        }
        x
    }

    /// Wavevector stored at a flat position of a modal array.
    pub fn wavevector(&self, flat: usize) -> Wavevector {
        let idx = self.unravel(flat);
        let n = self.n as i64;
        let mut k = [0i64; 3];
        for axis in 0..self.d {
            let m = idx[axis] as i64;
            k[axis] = if m <= n / 2 { m } else { m - n };
        }
        Wavevector { k, d: self.d, n: self.n }
    }

    pub(crate) fn forward_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.plans.forward
    }

    pub(crate) fn inverse_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.plans.inverse
    }

    /// Same geometry (the FFT plans are not compared).
    pub fn same_as(&self, other: &TorusGrid) -> bool {
        self.d == other.d && self.n == other.n && self.a == other.a
    }

    /// Grid with the same geometry and `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<TorusGrid> {
        TorusGrid::new(self.d, self.a, self.n * factor)
    }

    /// Apply a complex FFT along every axis of a flat row-major array.
    pub(crate) fn fft_all_axes(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { self.inverse_plan() } else { self.forward_plan() };
        let n = self.n;
        if self.d == 1 {
            plan.process(data);
            return;
        }
        // last axis is contiguous
        for line in data.chunks_exact_mut(n) {
            plan.process(line);
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.d - 1 {
            let stride = n.pow((self.d - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, b) in buf.iter_mut().enumerate() {
                        *b = data[base + j * stride];
                    }
                    plan.process(&mut buf);
                    for (j, b) in buf.iter().enumerate() {
                        data[base + j * stride] = *b;
                    }
                }
            }
        }
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("d", &self.d)
            .field("a", &self.a)
            .field("n", &self.n)
            .finish()
    }
}

/// Integer wavevector in the symmetric range `-n/2 < k_j <= n/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wavevector {
    k: [i64; 3],
    d: usize,
    n: usize,
}

impl Wavevector {
    pub fn components(&self) -> &[i64] {
        &self.k[..self.d]
    }

    pub fn get(&self, axis: usize) -> i64 {
        self.k[axis]
    }

    /// `|k_1| + ... + |k_d|`, the index norm used by the Sobolev weights.
    pub fn l1(&self) -> i64 {
        self.components().iter().map(|k| k.abs()).sum()
    }

    /// `k_1^2 + ... + k_d^2`, entering the Laplacian symbol.
    pub fn norm_sq(&self) -> i64 {
        self.components().iter().map(|k| k * k).sum()
    }

    pub fn is_nyquist(&self, axis: usize) -> bool {
        axis < self.d && self.k[axis] == (self.n / 2) as i64
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|&k| k == 0)
    }
}
