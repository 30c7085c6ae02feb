use num_complex::Complex64;

use super::scheme::SplittingScheme;
use crate::error::{Error, Result};

/// How the reference value of a pair is formed.
#[derive(Clone, Debug, PartialEq)]
pub enum Pairing {
    /// A controller of different order sharing the first `shared_prefix_len`
    /// flow applications with the integrator.
    Embedded {
        controller: SplittingScheme,
        shared_prefix_len: usize,
    },
    /// Reference `(S + S*)/2` with the adjoint `S*`.
    AdjointAverage,
    /// A partner of equal order whose leading error is `gamma` times that of
    /// the integrator.
    Milne { partner: SplittingScheme, gamma: Complex64 },
    /// Like [`Pairing::AdjointAverage`] for an integrator whose adjoint is its
    /// mirror image.
    Palindromic,
}

impl Pairing {
    pub fn kind(&self) -> &'static str {
        match self {
            Pairing::Embedded { .. } => "embedded",
            Pairing::AdjointAverage => "adjoint_average",
            Pairing::Milne { .. } => "milne",
            Pairing::Palindromic => "palindromic",
        }
    }
}

/// A splitting scheme together with the device used to estimate its local error.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemePair {
    name: String,
    integrator: SplittingScheme,
    pairing: Pairing,
    /// The adjoint (or mirrored) integrator for the averaging kinds.
    companion: Option<SplittingScheme>,
}

impl SchemePair {
    pub fn new(name: impl Into<String>, integrator: SplittingScheme, pairing: Pairing) -> Result<Self> {
        let name = name.into();
        let bad = |reason: String| Error::InvalidPair {
            name: name.clone(),
            reason,
        };
        let p = integrator.order();
        let companion = match &pairing {
            Pairing::Embedded {
                controller,
                shared_prefix_len,
            } => {
                if controller.arity() != integrator.arity() {
                    return Err(bad("controller arity differs from integrator".into()));
                }
                if controller.order() == p {
                    return Err(bad(format!(
                        "controller order {} must differ from integrator order {p}",
                        controller.order()
                    )));
                }
                let fi = integrator.flows();
                let fc = controller.flows();
                let k = *shared_prefix_len;
                if k > fi.len() || k > fc.len() || fi[..k] != fc[..k] {
                    return Err(bad(format!(
                        "integrator and controller do not share their first {k} flows"
                    )));
                }
                None
            }
            Pairing::AdjointAverage => {
                if p.is_multiple_of(2) {
                    return Err(bad(format!("adjoint averaging needs odd order, got {p}")));
                }
                if integrator.is_self_adjoint() {
                    log::warn!("pair {name}: integrator is self-adjoint, the estimate vanishes");
                }
                Some(integrator.adjoint())
            }
            Pairing::Palindromic => {
                if p.is_multiple_of(2) {
                    return Err(bad(format!("palindromic pairs need odd order, got {p}")));
                }
                if !integrator.is_palindromic() {
                    return Err(bad(format!(
                        "{} is not palindromic (its adjoint is not its mirror image)",
                        integrator.name()
                    )));
                }
                Some(integrator.mirrored().renamed(format!("{}*", integrator.name())))
            }
            Pairing::Milne { partner, gamma } => {
                if !(gamma.re.is_finite() && gamma.im.is_finite()) {
                    return Err(bad("gamma must be finite".into()));
                }
                if (gamma - 1.0).norm() < 1e-12 {
                    return Err(bad("gamma must differ from 1".into()));
                }
                if partner.arity() != integrator.arity() {
                    return Err(bad("partner arity differs from integrator".into()));
                }
                if partner.order() != p {
                    return Err(bad(format!(
                        "partner order {} differs from integrator order {p}",
                        partner.order()
                    )));
                }
                None
            }
        };
        Ok(SchemePair {
            name,
            integrator,
            pairing,
            companion,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn integrator(&self) -> &SplittingScheme {
        &self.integrator
    }

    pub fn pairing(&self) -> &Pairing {
        &self.pairing
    }

    /// Order `p` of the integrator, the exponent base of the step-size rule.
    pub fn order(&self) -> u32 {
        self.integrator.order()
    }

    /// Order of the leading term of the estimate, `min(p, q)` for an embedded
    /// controller of order `q` and `p` otherwise.
    pub fn estimator_order(&self) -> u32 {
        match &self.pairing {
            Pairing::Embedded { controller, .. } => self.order().min(controller.order()),
            _ => self.order(),
        }
    }

    pub fn arity(&self) -> usize {
        self.integrator.arity()
    }

    /// `S*` for the averaging kinds.
    pub fn adjoint_scheme(&self) -> Option<&SplittingScheme> {
        self.companion.as_ref()
    }

    /// Name of the second scheme involved, if any.
    pub fn partner_name(&self) -> Option<&str> {
        match &self.pairing {
            Pairing::Embedded { controller, .. } => Some(controller.name()),
            Pairing::Milne { partner, .. } => Some(partner.name()),
            _ => None,
        }
    }

    /// Flow calls per estimate.
    pub fn flow_count(&self) -> usize {
        let n = self.integrator.flow_count();
        match &self.pairing {
            Pairing::Embedded {
                controller,
                shared_prefix_len,
            } => n + controller.flow_count() - shared_prefix_len,
            Pairing::Milne { partner, .. } => n + partner.flow_count(),
            Pairing::AdjointAverage | Pairing::Palindromic => 2 * n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::scheme::builtin::*;
    use super::*;

    #[test]
    fn adjoint_average_needs_odd_order() {
        assert!(SchemePair::new("s", strang(), Pairing::AdjointAverage).is_err());
        let p = SchemePair::new("l", lie(), Pairing::AdjointAverage).unwrap();
        assert_eq!(p.adjoint_scheme().unwrap(), &lie_b_first());
        assert_eq!(p.flow_count(), 4);
    }

    #[test]
    fn milne_gamma_one_rejected() {
        let r = SchemePair::new(
            "m",
            lie(),
            Pairing::Milne { partner: lie_b_first(), gamma: Complex64::new(1.0, 0.0) },
        );
        assert!(matches!(r, Err(Error::InvalidPair { .. })));
        let r = SchemePair::new(
            "m",
            lie(),
            Pairing::Milne { partner: strang(), gamma: Complex64::new(-1.0, 0.0) },
        );
        assert!(r.is_err());
    }

    #[test]
    fn embedded_prefix_checked() {
        let ok = SchemePair::new(
            "e",
            strang(),
            Pairing::Embedded { controller: tj4c(), shared_prefix_len: 0 },
        )
        .unwrap();
        assert_eq!(ok.flow_count(), 3 + 7);
        let r = SchemePair::new(
            "e",
            strang(),
            Pairing::Embedded { controller: tj4c(), shared_prefix_len: 1 },
        );
        assert!(r.is_err());
        let r = SchemePair::new(
            "e",
            strang(),
            Pairing::Embedded { controller: strang_b(), shared_prefix_len: 0 },
        );
        assert!(r.is_err());
        let low = SchemePair::new(
            "e",
            tj4c(),
            Pairing::Embedded { controller: strang(), shared_prefix_len: 0 },
        )
        .unwrap();
        assert_eq!(low.order(), 4);
        assert_eq!(low.estimator_order(), 2);
        assert_eq!(ok.estimator_order(), 2);
    }

    #[test]
    fn palindromic_requires_mirror_symmetry() {
        let p = SchemePair::new("p", lie(), Pairing::Palindromic).unwrap();
        assert_eq!(p.adjoint_scheme().unwrap().stages(), lie().adjoint().stages());
        let b = SplittingScheme::new(
            "uneven",
            1,
            2,
            vec![
                vec![Complex64::new(0.3, 0.0), Complex64::new(1.0, 0.0)],
                vec![Complex64::new(0.7, 0.0), Complex64::new(0.0, 0.0)],
            ],
        )
        .unwrap();
        assert!(SchemePair::new("q", b, Pairing::Palindromic).is_err());
    }
}
