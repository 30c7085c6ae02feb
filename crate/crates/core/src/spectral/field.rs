use std::fmt;

use num_complex::Complex64;

use super::grid::{TorusGrid, Wavevector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Repr {
    /// Values at the grid nodes.
    Nodal,
    /// Fourier coefficients `c_k`, stored in FFT order.
    Modal,
}

impl Repr {
    pub fn name(self) -> &'static str {
        match self {
            Repr::Nodal => "nodal",
            Repr::Modal => "modal",
        }
    }
}

/// Multi-component complex field on a [`TorusGrid`].
///
/// The modal coefficients follow the normalization
/// `c_k = (2a)^{-d} \int_Q u(x) e^{-i pi k.x / a} dx`, evaluated with the
/// trapezoidal rule on the nodes, so that `c_0` is the mean of the field and
/// `u(x) = sum_k c_k e^{i pi k.x / a}` holds at every node.
#[derive(Clone)]
pub struct Field {
    grid: TorusGrid,
    comps: Vec<Vec<Complex64>>,
    repr: Repr,
}

impl Field {
    pub fn new(grid: TorusGrid, comps: Vec<Vec<Complex64>>, repr: Repr) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::ShapeMismatch("field needs at least one component".into()));
        }
        let len = grid.len();
        if let Some((i, c)) = comps.iter().enumerate().find(|(_, c)| c.len() != len) {
            return Err(Error::ShapeMismatch(format!(
                "component {i} has {} entries, grid has {len} nodes",
                c.len()
            )));
        }
        Ok(Field { grid, comps, repr })
    }

    pub fn nodal(grid: TorusGrid, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        Field::new(grid, comps, Repr::Nodal)
    }

    pub fn from_real(grid: TorusGrid, comps: Vec<Vec<f64>>) -> Result<Self> {
        let comps = comps
            .into_iter()
            .map(|c| c.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
            .collect();
        Field::nodal(grid, comps)
    }

    pub fn zeros(grid: TorusGrid, m: usize, repr: Repr) -> Self {
        let len = grid.len();
        Field {
            grid,
            comps: vec![vec![Complex64::new(0.0, 0.0); len]; m.max(1)],
            repr,
        }
    }

    /// Nodal field with component `c` at node `x` given by `f(x, c)`.
    pub fn from_fn(grid: TorusGrid, m: usize, f: impl Fn(&[f64], usize) -> Complex64) -> Self {
        let d = grid.dim();
        let comps = (0..m.max(1))
            .map(|c| {
                (0..grid.len())
                    .map(|i| f(&grid.node(i)[..d], c))
                    .collect()
            })
            .collect();
        Field { grid, comps, repr: Repr::Nodal }
    }

    pub fn constant(grid: TorusGrid, values: &[Complex64]) -> Self {
        let len = grid.len();
        Field {
            grid,
            comps: values.iter().map(|&v| vec![v; len]).collect(),
            repr: Repr::Nodal,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn num_components(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    pub fn into_modal(mut self) -> Field {
        if self.repr == Repr::Nodal {
            let inv_len = 1.0 / self.grid.len() as f64;
            for comp in &mut self.comps {
                self.grid.fft_all_axes(comp, false);
                for (i, c) in comp.iter_mut().enumerate() {
                    *c *= inv_len * node_sign(&self.grid, i);
                }
            }
            self.repr = Repr::Modal;
        }
        self
    }

    pub fn into_nodal(mut self) -> Field {
        if self.repr == Repr::Modal {
            for comp in &mut self.comps {
                for (i, c) in comp.iter_mut().enumerate() {
                    *c *= node_sign(&self.grid, i);
                }
                self.grid.fft_all_axes(comp, true);
            }
            self.repr = Repr::Nodal;
        }
        self
    }

    pub fn to_modal(&self) -> Field {
        self.clone().into_modal()
    }

    pub fn to_nodal(&self) -> Field {
        self.clone().into_nodal()
    }

    pub fn into_repr(self, repr: Repr) -> Field {
        match repr {
            Repr::Nodal => self.into_nodal(),
            Repr::Modal => self.into_modal(),
        }
    }

    /// Multiply every modal coefficient by `symbol(k)`.
    pub fn apply_symbol(&self, symbol: impl Fn(&Wavevector) -> Complex64) -> Result<Field> {
        self.expect(Repr::Modal)?;
        let mut out = self.clone();
        let sigma: Vec<Complex64> = (0..self.grid.len())
            .map(|i| symbol(&self.grid.wavevector(i)))
            .collect();
        for comp in &mut out.comps {
            for (c, s) in comp.iter_mut().zip(&sigma) {
                *c *= s;
            }
        }
        Ok(out)
    }

    /// `H^s_*` norm over all components,
    /// `((2a)^d sum_k (1 + |k|_1^{2s}) |c_k|^2)^{1/2}`.
    ///
    /// For `s = 0` the weight is taken as 1, which is the plain `L^2` norm (Parseval).
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::NegativeSobolevIndex(s));
        }
        let modal;
        let f = if self.repr == Repr::Modal {
            self
        } else {
            modal = self.to_modal();
            &modal
        };
        let weights: Vec<f64> = (0..self.grid.len())
            .map(|i| {
                if s == 0.0 {
                    1.0
                } else {
                    1.0 + (self.grid.wavevector(i).l1() as f64).powf(2.0 * s)
                }
            })
            .collect();
        let sum: f64 = f
            .comps
            .iter()
            .map(|comp| {
                comp.iter()
                    .zip(&weights)
                    .map(|(c, w)| w * c.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        Ok((self.grid.volume() * sum).sqrt())
    }

    /// `L^2` norm by the trapezoidal rule on the nodes.
    pub fn quadrature_l2(&self) -> f64 {
        let nodal;
        let f = if self.repr == Repr::Nodal {
            self
        } else {
            nodal = self.to_nodal();
            &nodal
        };
        let sum: f64 = f
            .comps
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        (self.grid.cell_volume() * sum).sqrt()
    }

    /// Largest nodal modulus over all components.
    pub fn max_norm(&self) -> f64 {
        let nodal;
        let f = if self.repr == Repr::Nodal {
            self
        } else {
            nodal = self.to_nodal();
            &nodal
        };
        f.comps
            .iter()
            .flat_map(|c| c.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    /// Largest imaginary part (in modulus) of the nodal values.
    pub fn max_imag(&self) -> f64 {
        let f = self.to_nodal();
        f.comps
            .iter()
            .flat_map(|c| c.iter().map(|z| z.im.abs()))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Drop the imaginary part of the nodal values.
    pub fn project_real(self) -> Field {
        let mut f = self.into_nodal();
        for comp in &mut f.comps {
            for z in comp.iter_mut() {
                z.im = 0.0;
            }
        }
        f
    }

    /// Zero all modes with `|k_j| > n/3` on some axis.
    pub fn dealias_two_thirds(self) -> Field {
        let repr = self.repr;
        let mut f = self.into_modal();
        let cutoff = (f.grid.points_per_axis() / 3) as i64;
        for i in 0..f.grid.len() {
            let k = f.grid.wavevector(i);
            if k.components().iter().any(|kj| kj.abs() > cutoff) {
                for comp in &mut f.comps {
                    comp[i] = Complex64::new(0.0, 0.0);
                }
            }
        }
        f.into_repr(repr)
    }

    /// Fraction of the modal energy carried by modes with `|k_j| > n/3`.
    pub fn tail_energy_fraction(&self) -> f64 {
        let f = self.to_modal();
        let cutoff = (f.grid.points_per_axis() / 3) as i64;
        let (mut tail, mut total) = (0.0, 0.0);
        for i in 0..f.grid.len() {
            let outer = f
                .grid
                .wavevector(i)
                .components()
                .iter()
                .any(|kj| kj.abs() > cutoff);
            for comp in &f.comps {
                let e = comp[i].norm_sqr();
                total += e;
                if outer {
                    tail += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    fn expect(&self, repr: Repr) -> Result<()> {
        if self.repr != repr {
            return Err(Error::Representation {
                expected: repr.name(),
                found: self.repr.name(),
            });
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Field) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::ShapeMismatch(format!(
                "grids differ: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        if self.comps.len() != other.comps.len() {
            return Err(Error::ShapeMismatch(format!(
                "component counts differ: {} vs {}",
                self.comps.len(),
                other.comps.len()
            )));
        }
        Ok(())
    }

    /// `sum_i w_i f_i` in the representation of the first field.
    pub fn linear_combination(terms: &[(Complex64, &Field)]) -> Result<Field> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Precondition("empty linear combination".into()))?;
        let repr = first.repr;
        let mut out = Field::zeros(first.grid.clone(), first.comps.len(), repr);
        for (w, f) in terms {
            out.check_compatible(f)?;
            let converted;
            let f = if f.repr == repr {
                *f
            } else {
                converted = (*f).clone().into_repr(repr);
                &converted
            };
            for (oc, fc) in out.comps.iter_mut().zip(&f.comps) {
                for (o, x) in oc.iter_mut().zip(fc) {
                    *o += w * x;
                }
            }
        }
        Ok(out)
    }

    /// `self - other`, in the representation of `self`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        let one = Complex64::new(1.0, 0.0);
        Field::linear_combination(&[(one, self), (-one, other)])
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        let one = Complex64::new(1.0, 0.0);
        Field::linear_combination(&[(one, self), (one, other)])
    }

    pub fn scale(mut self, w: Complex64) -> Field {
        for comp in &mut self.comps {
            for z in comp.iter_mut() {
                *z *= w;
            }
        }
        self
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("components", &self.comps.len())
            .field("repr", &self.repr)
            .finish()
    }
}

// Nodes start at -a, which puts a factor (-1)^(k_1+...+k_d) on every mode.
fn node_sign(grid: &TorusGrid, flat: usize) -> f64 {
    let idx = grid.unravel(flat);
    let parity: usize = idx[..grid.dim()].iter().sum();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
