use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on the consistency sums `sum a_j = sum b_j (= sum c_j) = 1`.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// One flow application: sub-operator index and its coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flow {
    pub op: usize,
    pub coeff: Complex64,
}

/// A splitting scheme
/// `S(h) = phi_B(b_s h) o phi_A(a_s h) o ... o phi_B(b_1 h) o phi_A(a_1 h)`.
///
/// Stage `j` holds `(a_j, b_j)` or `(a_j, b_j, c_j)` and is applied A first.
/// Stages are stored in canonical form: the nonzero flows, read in application
/// order, are packed greedily into A-B(-C) stages. Two schemes with the same
/// flow sequence therefore have identical coefficient tables.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingScheme {
    name: String,
    order: u32,
    arity: usize,
    stages: Vec<Vec<Complex64>>,
}

impl SplittingScheme {
    pub fn new(
        name: impl Into<String>,
        order: u32,
        arity: usize,
        stages: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let name = name.into();
        let bad = |reason: String| Error::InconsistentScheme {
            name: name.clone(),
            reason,
        };
        if !(arity == 2 || arity == 3) {
            return Err(bad(format!("arity must be 2 or 3, got {arity}")));
        }
        if order == 0 {
            return Err(bad("order must be positive".into()));
        }
        if stages.is_empty() {
            return Err(bad("no stages".into()));
        }
        for (j, st) in stages.iter().enumerate() {
            if st.len() != arity {
                return Err(bad(format!(
                    "stage {} has {} coefficients, expected {arity}",
                    j + 1,
                    st.len()
                )));
            }
            if st.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(bad(format!("stage {} has a non-finite coefficient", j + 1)));
            }
        }
        for op in 0..arity {
            let sum: Complex64 = stages.iter().map(|st| st[op]).sum();
            if (sum - 1.0).norm() > CONSISTENCY_TOL {
                return Err(bad(format!(
                    "coefficients of operator {} sum to {sum}, not 1",
                    op_label(op)
                )));
            }
        }
        let flows = flows_of(&stages);
        Ok(SplittingScheme {
            name,
            order,
            arity,
            stages: pack(&flows, arity),
        })
    }

    /// Build from a flow sequence in application order.
    pub fn from_flows(name: impl Into<String>, order: u32, arity: usize, flows: &[Flow]) -> Result<Self> {
        if flows.iter().any(|f| f.op >= arity) {
            return Err(Error::InconsistentScheme {
                name: name.into(),
                reason: format!("flow operator index out of range for arity {arity}"),
            });
        }
        SplittingScheme::new(name, order, arity, pack(flows, arity))
    }

    /// `S_1(w_1 h) o S_2(w_2 h) o ...` applied left to right, i.e. `parts[0]`
    /// acts first. Adjacent flows of the same operator are merged.
    pub fn compose(
        name: impl Into<String>,
        order: u32,
        parts: &[(&SplittingScheme, Complex64)],
    ) -> Result<Self> {
        let name = name.into();
        let arity = parts.first().map(|(s, _)| s.arity).unwrap_or(0);
        if parts.iter().any(|(s, _)| s.arity != arity) {
            return Err(Error::InconsistentScheme {
                name,
                reason: "cannot compose schemes of different arity".into(),
            });
        }
        let mut flows: Vec<Flow> = Vec::new();
        for (s, w) in parts {
            for f in s.flows() {
                let f = Flow { op: f.op, coeff: f.coeff * w };
                match flows.last_mut() {
                    Some(last) if last.op == f.op => last.coeff += f.coeff,
                    _ => flows.push(f),
                }
            }
        }
        flows.retain(|f| f.coeff != Complex64::new(0.0, 0.0));
        SplittingScheme::from_flows(name, order, arity, &flows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn stages(&self) -> &[Vec<Complex64>] {
        &self.stages
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    /// Coefficients of sub-operator `op` over all stages.
    pub fn coefficients(&self, op: usize) -> Vec<Complex64> {
        self.stages.iter().map(|st| st[op]).collect()
    }

    /// Nonzero flows in application order.
    pub fn flows(&self) -> Vec<Flow> {
        flows_of(&self.stages)
    }

    /// Number of flow calls per step.
    pub fn flow_count(&self) -> usize {
        self.stages.iter().flatten().filter(|z| **z != Complex64::new(0.0, 0.0)).count()
    }

    /// All coefficients of the first operator (diffusion) have `Re >= 0`.
    pub fn is_parabolic_safe(&self) -> bool {
        self.stages.iter().all(|st| st[0].re >= 0.0)
    }

    /// Whether any coefficient has a nonzero imaginary part.
    pub fn is_complex(&self) -> bool {
        self.stages.iter().flatten().any(|z| z.im != 0.0)
    }

    /// The adjoint `S*(h) = S(-h)^{-1}`: the flow sequence reversed, same coefficients.
    pub fn adjoint(&self) -> SplittingScheme {
        let mut flows = self.flows();
        flows.reverse();
        SplittingScheme {
            name: adjoint_name(&self.name),
            order: self.order,
            arity: self.arity,
            stages: pack(&flows, self.arity),
        }
    }

    /// The scheme with the operator roles mirrored (`A <-> B`, or `A <-> C` for
    /// three operators).
    pub fn mirrored(&self) -> SplittingScheme {
        let flows: Vec<Flow> = self
            .flows()
            .into_iter()
            .map(|f| Flow { op: self.arity - 1 - f.op, coeff: f.coeff })
            .collect();
        SplittingScheme {
            name: format!("{}~", self.name),
            order: self.order,
            arity: self.arity,
            stages: pack(&flows, self.arity),
        }
    }

    /// `adjoint(S) == S` coefficient for coefficient.
    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint().stages == self.stages
    }

    /// `adjoint(S)` equals `S` with the operator roles mirrored, so the adjoint
    /// is obtained by relabelling the sub-operators.
    pub fn is_palindromic(&self) -> bool {
        self.adjoint().stages == self.mirrored().stages
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn adjoint_name(name: &str) -> String {
    match name.strip_suffix('*') {
        Some(base) => base.to_string(),
        None => format!("{name}*"),
    }
}

pub(crate) fn op_label(op: usize) -> char {
    (b'A' + op as u8) as char
}

fn flows_of(stages: &[Vec<Complex64>]) -> Vec<Flow> {
    stages
        .iter()
        .flat_map(|st| st.iter().enumerate())
        .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
        .map(|(op, &coeff)| Flow { op, coeff })
        .collect()
}

fn pack(flows: &[Flow], arity: usize) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut stages: Vec<Vec<Complex64>> = Vec::new();
    let mut next_op = arity;
    for f in flows {
        if f.op < next_op {
            stages.push(vec![zero; arity]);
        }
        let last = stages.len() - 1;
        stages[last][f.op] = f.coeff;
        next_op = f.op + 1;
    }
    if stages.is_empty() {
        stages.push(vec![zero; arity]);
    }
    stages
}

/// Built-in schemes.
pub mod builtin {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn scheme(name: &str, order: u32, stages: &[&[f64]]) -> SplittingScheme {
        let arity = stages[0].len();
        let stages = stages.iter().map(|st| st.iter().map(|&x| r(x)).collect()).collect();
        SplittingScheme::new(name, order, arity, stages).expect("built-in scheme is consistent")
    }

    /// Weights `(g1, 1 - 2 g1)` of the complex triple jump, `g1 = 1/(2 - 2^{1/3} e^{2 pi i/3})`.
    pub fn triple_jump_weights() -> (Complex64, Complex64) {
        let w = Complex64::from_polar(2f64.powf(1.0 / 3.0), 2.0 * std::f64::consts::PI / 3.0);
        let g1 = 1.0 / (2.0 - w);
        (g1, 1.0 - 2.0 * g1)
    }

    /// First-order scheme `B(h) o A(h)`.
    pub fn lie() -> SplittingScheme {
        scheme("Lie", 1, &[&[1.0, 1.0]])
    }

    /// First-order scheme `A(h) o B(h)`.
    pub fn lie_b_first() -> SplittingScheme {
        lie().adjoint()
    }

    /// Second-order `A(h/2) o B(h) o A(h/2)`.
    pub fn strang() -> SplittingScheme {
        scheme("Strang", 2, &[&[0.5, 1.0], &[0.5, 0.0]])
    }

    /// Second-order `B(h/2) o A(h) o B(h/2)`.
    pub fn strang_b() -> SplittingScheme {
        scheme("StrangB", 2, &[&[0.0, 0.5], &[1.0, 0.5]])
    }

    /// Fourth-order complex triple jump of Strang; all `Re(a_j) > 0`.
    pub fn tj4c() -> SplittingScheme {
        let (g1, g2) = triple_jump_weights();
        let s = strang();
        SplittingScheme::compose("TJ4c", 4, &[(&s, g1), (&s, g2), (&s, g1)])
            .expect("triple jump is consistent")
    }

    pub fn lie_abc() -> SplittingScheme {
        scheme("Lie-ABC", 1, &[&[1.0, 1.0, 1.0]])
    }

    pub fn lie_abc_reversed() -> SplittingScheme {
        lie_abc().adjoint()
    }

    /// `A(h/2) B(h/2) C(h) B(h/2) A(h/2)`.
    pub fn strang_abc() -> SplittingScheme {
        scheme("Strang-ABC", 2, &[&[0.5, 0.5, 1.0], &[0.0, 0.5, 0.0], &[0.5, 0.0, 0.0]])
    }

    pub fn tj4c_abc() -> SplittingScheme {
        let (g1, g2) = triple_jump_weights();
        let s = strang_abc();
        SplittingScheme::compose("TJ4c-ABC", 4, &[(&s, g1), (&s, g2), (&s, g1)])
            .expect("triple jump is consistent")
    }

    pub fn all() -> Vec<SplittingScheme> {
        vec![
            lie(),
            lie_b_first(),
            strang(),
            strang_b(),
            tj4c(),
            lie_abc(),
            lie_abc_reversed(),
            strang_abc(),
            tj4c_abc(),
        ]
    }
}
