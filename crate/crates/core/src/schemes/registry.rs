use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pair::{Pairing, SchemePair};
use super::scheme::{builtin, SplittingScheme};
use crate::error::{Error, Result};

/// Schemes and pairs keyed by name. Names are unique across both kinds.
#[derive(Clone, Debug)]
pub struct Registry {
    schemes: Vec<SplittingScheme>,
    pairs: Vec<SchemePair>,
    builtin_schemes: usize,
    builtin_pairs: usize,
}

/// A scheme or a pair looked up by name.
#[derive(Clone, Copy, Debug)]
pub enum Method<'a> {
    Scheme(&'a SplittingScheme),
    Pair(&'a SchemePair),
}

impl<'a> Method<'a> {
    pub fn integrator(&self) -> &'a SplittingScheme {
        match self {
            Method::Scheme(s) => s,
            Method::Pair(p) => p.integrator(),
        }
    }

    pub fn name(&self) -> &'a str {
        match self {
            Method::Scheme(s) => s.name(),
            Method::Pair(p) => p.name(),
        }
    }

    pub fn pair(&self) -> Option<&'a SchemePair> {
        match self {
            Method::Pair(p) => Some(p),
            Method::Scheme(_) => None,
        }
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}

impl Registry {
    /// The built-in schemes and pairs.
    pub fn builtin() -> Self {
        let mut reg = Registry {
            schemes: Vec::new(),
            pairs: Vec::new(),
            builtin_schemes: 0,
            builtin_pairs: 0,
        };
        for s in builtin::all() {
            reg.insert_scheme(s).expect("built-in names are unique");
        }
        let minus_one = Complex64::new(-1.0, 0.0);
        let specs: [(&str, &str, Pairing); 8] = [
            ("Lie/avg", "Lie", Pairing::AdjointAverage),
            ("Lie/milne", "Lie", Pairing::Milne { partner: builtin::lie_b_first(), gamma: minus_one }),
            ("Lie/pal", "Lie", Pairing::Palindromic),
            (
                "Strang/TJ4c",
                "Strang",
                Pairing::Embedded { controller: builtin::tj4c(), shared_prefix_len: 0 },
            ),
            ("Lie-ABC/avg", "Lie-ABC", Pairing::AdjointAverage),
            (
                "Lie-ABC/milne",
                "Lie-ABC",
                Pairing::Milne { partner: builtin::lie_abc_reversed(), gamma: minus_one },
            ),
            ("Lie-ABC/pal", "Lie-ABC", Pairing::Palindromic),
            (
                "Strang-ABC/TJ4c-ABC",
                "Strang-ABC",
                Pairing::Embedded { controller: builtin::tj4c_abc(), shared_prefix_len: 0 },
            ),
        ];
        for (name, integrator, pairing) in specs {
            let s = reg.scheme(integrator).expect("built-in").clone();
            let pair = SchemePair::new(name, s, pairing).expect("built-in pair is valid");
            reg.insert_pair(pair).expect("built-in names are unique");
        }
        reg.builtin_schemes = reg.schemes.len();
        reg.builtin_pairs = reg.pairs.len();
        reg
    }

    /// Built-ins plus every scheme file in `paths`, loaded in order.
    pub fn with_files<P: AsRef<Path>>(paths: &[P]) -> Result<Self> {
        let mut reg = Registry::builtin();
        for p in paths {
            reg.load_file(p)?;
        }
        Ok(reg)
    }

    pub fn load_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        self.load_str(&text, &path.display().to_string())
    }

    /// Parse a scheme file and add its contents. Nothing is added on error.
    pub fn load_str(&mut self, text: &str, source_name: &str) -> Result<()> {
        let file: SchemeFile = toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })?;
        let mut next = self.clone();
        for def in file.scheme {
            next.insert_scheme(def.build()?)?;
        }
        for def in file.pair {
            let pair = def.build(&next)?;
            next.insert_pair(pair)?;
        }
        *self = next;
        Ok(())
    }

    fn check_fresh(&self, name: &str) -> Result<()> {
        if self.schemes.iter().any(|s| s.name() == name) || self.pairs.iter().any(|p| p.name() == name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        Ok(())
    }

    pub fn insert_scheme(&mut self, scheme: SplittingScheme) -> Result<()> {
        self.check_fresh(scheme.name())?;
        self.schemes.push(scheme);
        Ok(())
    }

    pub fn insert_pair(&mut self, pair: SchemePair) -> Result<()> {
        self.check_fresh(pair.name())?;
        self.pairs.push(pair);
        Ok(())
    }

    pub fn scheme(&self, name: &str) -> Result<&SplittingScheme> {
        self.schemes
            .iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownScheme(name.to_string()))
    }

    pub fn pair(&self, name: &str) -> Result<&SchemePair> {
        self.pairs
            .iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownScheme(name.to_string()))
    }

    pub fn method(&self, name: &str) -> Result<Method<'_>> {
        if let Ok(p) = self.pair(name) {
            return Ok(Method::Pair(p));
        }
        self.scheme(name).map(Method::Scheme)
    }

    pub fn schemes(&self) -> &[SplittingScheme] {
        &self.schemes
    }

    pub fn pairs(&self) -> &[SchemePair] {
        &self.pairs
    }

    pub fn is_builtin(&self, name: &str) -> bool {
        self.schemes[..self.builtin_schemes].iter().any(|s| s.name() == name)
            || self.pairs[..self.builtin_pairs].iter().any(|p| p.name() == name)
    }

    /// Highest-order parabolic-safe scheme of the given arity; the earliest
    /// registered wins ties.
    pub fn highest_order(&self, arity: usize) -> Option<&SplittingScheme> {
        let mut best: Option<&SplittingScheme> = None;
        for s in self.schemes.iter().filter(|s| s.arity() == arity && s.is_parabolic_safe()) {
            if best.is_none_or(|b| s.order() > b.order()) {
                best = Some(s);
            }
        }
        best
    }

    /// Serialize the non-built-in entries in the scheme-file format.
    pub fn to_toml(&self) -> String {
        let file = SchemeFile {
            scheme: self.schemes[self.builtin_schemes..].iter().map(SchemeDef::from).collect(),
            pair: self.pairs[self.builtin_pairs..].iter().map(PairDef::from).collect(),
        };
        toml::to_string(&file).expect("scheme file serializes")
    }
}

/// Load the built-in registry extended by the given scheme files.
pub fn load_schemes<P: AsRef<Path>>(paths: &[P]) -> Result<Registry> {
    Registry::with_files(paths)
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    scheme: Vec<SchemeDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pair: Vec<PairDef>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeDef {
    name: String,
    order: u32,
    arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parabolic_safe: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    palindromic: Option<bool>,
    stages: Vec<Vec<[f64; 2]>>,
}

impl SchemeDef {
    fn build(self) -> Result<SplittingScheme> {
        let stages = self
            .stages
            .iter()
            .map(|st| st.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        let s = SplittingScheme::new(self.name.clone(), self.order, self.arity, stages)?;
        let bad = |reason: &str| Error::InconsistentScheme {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.parabolic_safe == Some(true) && !s.is_parabolic_safe() {
            return Err(bad("flagged parabolic_safe but some Re(a_j) < 0"));
        }
        if self.palindromic == Some(true) && !s.is_palindromic() {
            return Err(bad("flagged palindromic but its adjoint is not its mirror image"));
        }
        Ok(s)
    }
}

impl From<&SplittingScheme> for SchemeDef {
    fn from(s: &SplittingScheme) -> Self {
        SchemeDef {
            name: s.name().to_string(),
            order: s.order(),
            arity: s.arity(),
            parabolic_safe: Some(s.is_parabolic_safe()),
            palindromic: Some(s.is_palindromic()),
            stages: s
                .stages()
                .iter()
                .map(|st| st.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum PairKind {
    Embedded,
    AdjointAverage,
    Milne,
    Palindromic,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDef {
    name: String,
    integrator: String,
    kind: PairKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    controller: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shared_prefix_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<[f64; 2]>,
}

impl PairDef {
    fn build(self, reg: &Registry) -> Result<SchemePair> {
        let missing = |field: &str| Error::InvalidPair {
            name: self.name.clone(),
            reason: format!("{:?} pair needs `{field}`", self.kind),
        };
        let integrator = reg.scheme(&self.integrator)?.clone();
        let pairing = match self.kind {
            PairKind::Embedded => {
                let controller = self.controller.as_deref().ok_or_else(|| missing("controller"))?;
                Pairing::Embedded {
                    controller: reg.scheme(controller)?.clone(),
                    shared_prefix_len: self.shared_prefix_len.unwrap_or(0),
                }
            }
            PairKind::Milne => {
                let partner = self.partner.as_deref().ok_or_else(|| missing("partner"))?;
                let [re, im] = self.gamma.ok_or_else(|| missing("gamma"))?;
                Pairing::Milne {
                    partner: reg.scheme(partner)?.clone(),
                    gamma: Complex64::new(re, im),
                }
            }
            PairKind::AdjointAverage => Pairing::AdjointAverage,
            PairKind::Palindromic => Pairing::Palindromic,
        };
        SchemePair::new(self.name, integrator, pairing)
    }
}

impl From<&SchemePair> for PairDef {
    fn from(p: &SchemePair) -> Self {
        let mut def = PairDef {
            name: p.name().to_string(),
            integrator: p.integrator().name().to_string(),
            kind: PairKind::AdjointAverage,
            controller: None,
            shared_prefix_len: None,
            partner: None,
            gamma: None,
        };
        match p.pairing() {
            Pairing::Embedded {
                controller,
                shared_prefix_len,
            } => {
                def.kind = PairKind::Embedded;
                def.controller = Some(controller.name().to_string());
                def.shared_prefix_len = Some(*shared_prefix_len);
            }
            Pairing::Milne { partner, gamma } => {
                def.kind = PairKind::Milne;
                def.partner = Some(partner.name().to_string());
                def.gamma = Some([gamma.re, gamma.im]);
            }
            Pairing::AdjointAverage => def.kind = PairKind::AdjointAverage,
            Pairing::Palindromic => def.kind = PairKind::Palindromic,
        }
        def
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[[scheme]]
name = "Yoshida-like"
order = 2
arity = 2
parabolic_safe = true
stages = [
  [[0.25, 0.1], [0.5, 0.2]],
  [[0.5, -0.2], [0.5, -0.2]],
  [[0.25, 0.1], [0.0, 0.0]],
]

[[scheme]]
name = "Lie-copy"
order = 1
arity = 2
palindromic = true
stages = [[[1.0, 0.0], [1.0, 0.0]]]

[[pair]]
name = "copy/milne"
integrator = "Lie-copy"
kind = "milne"
partner = "Lie*"
gamma = [-1.0, 0.0]

[[pair]]
name = "Strang/Y"
integrator = "Lie"
kind = "embedded"
controller = "Yoshida-like"
shared_prefix_len = 0
"#;

    #[test]
    fn empty_file_gives_builtins() {
        let mut reg = Registry::builtin();
        let before = (reg.schemes().len(), reg.pairs().len());
        reg.load_str("", "empty").unwrap();
        assert_eq!((reg.schemes().len(), reg.pairs().len()), before);
        for name in ["Lie", "Strang", "Lie*", "TJ4c", "Lie/avg", "Lie/milne", "Strang/TJ4c"] {
            assert!(reg.method(name).is_ok(), "{name}");
            assert!(reg.is_builtin(name));
        }
        assert_eq!(reg.to_toml(), "");
    }

    #[test]
    fn duplicate_builtin_rejected() {
        let mut reg = Registry::builtin();
        let text = r#"
[[scheme]]
name = "Strang"
order = 2
arity = 2
stages = [[[0.5, 0.0], [1.0, 0.0]], [[0.5, 0.0], [0.0, 0.0]]]
"#;
        assert!(matches!(reg.load_str(text, "dup"), Err(Error::DuplicateName(n)) if n == "Strang"));
    }

    #[test]
    fn inconsistent_four_stage_rejected() {
        let mut reg = Registry::builtin();
        let text = r#"
[[scheme]]
name = "off"
order = 3
arity = 2
stages = [
  [[0.251, 0.1], [0.25, 0.0]],
  [[0.25, -0.1], [0.25, 0.0]],
  [[0.25, 0.1], [0.25, 0.0]],
  [[0.25, -0.1], [0.25, 0.0]],
]
"#;
        assert!(matches!(reg.load_str(text, "off"), Err(Error::InconsistentScheme { .. })));
    }

    #[test]
    fn milne_gamma_one_in_file_rejected() {
        let mut reg = Registry::builtin();
        let text = r#"
[[pair]]
name = "bad"
integrator = "Lie"
kind = "milne"
partner = "Lie*"
gamma = [1.0, 0.0]
"#;
        assert!(matches!(reg.load_str(text, "g"), Err(Error::InvalidPair { .. })));
        assert!(reg.pair("bad").is_err());
    }

    #[test]
    fn failed_load_leaves_registry_unchanged() {
        let mut reg = Registry::builtin();
        let text = format!("{SAMPLE}\n[[pair]]\nname = \"x\"\nintegrator = \"nope\"\nkind = \"adjoint_average\"\n");
        assert!(matches!(reg.load_str(&text, "s"), Err(Error::UnknownScheme(_))));
        assert!(reg.scheme("Lie-copy").is_err());
    }

    #[test]
    fn unknown_field_is_parse_error() {
        let mut reg = Registry::builtin();
        let r = reg.load_str("[[scheme]]\nname='x'\nordr=1\n", "typo");
        assert!(matches!(r, Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip() {
        let mut reg = Registry::builtin();
        reg.load_str(SAMPLE, "sample").unwrap();
        let text = reg.to_toml();
        let mut again = Registry::builtin();
        again.load_str(&text, "round-trip").unwrap();
        assert_eq!(again.schemes(), reg.schemes());
        assert_eq!(again.pairs(), reg.pairs());
        assert_eq!(again.to_toml(), text);
    }

    #[test]
    fn highest_order_prefers_parabolic_safe() {
        let reg = Registry::builtin();
        assert_eq!(reg.highest_order(2).unwrap().name(), "TJ4c");
        assert_eq!(reg.highest_order(3).unwrap().name(), "TJ4c-ABC");
    }
}
