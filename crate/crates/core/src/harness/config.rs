//! Run configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::ExponentPair;
use crate::bounds::auto_grid;
use crate::domain::DomainSpec;

use super::HarnessError;

/// Checks a run can enable. Declaration order is execution order: the exact
/// identity checks come before anything that relies on the spectrum being
/// right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Symmetry,
    Commutator,
    Spectrum,
    Trace,
    Gradient,
    Interpolation,
    Oracle,
    Bounds,
    SpecialCases,
    Coherence,
    Chain,
    Comparison,
}

impl CheckName {
    pub const ALL: [CheckName; 12] = [
        CheckName::Symmetry,
        CheckName::Commutator,
        CheckName::Spectrum,
        CheckName::Trace,
        CheckName::Gradient,
        CheckName::Interpolation,
        CheckName::Oracle,
        CheckName::Bounds,
        CheckName::SpecialCases,
        CheckName::Coherence,
        CheckName::Chain,
        CheckName::Comparison,
    ];

    /// Checks whose failure means the operator or solver is wrong.
    pub fn is_identity(self) -> bool {
        self < CheckName::Oracle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoGrid {
    #[serde(rename = "auto-grid")]
    AutoGrid,
}

/// `(α, β)` pairs for the exponent sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweeps {
    Auto(AutoGrid),
    Pairs(Vec<[f64; 2]>),
}

impl Default for Sweeps {
    fn default() -> Self {
        Sweeps::Auto(AutoGrid::AutoGrid)
    }
}

impl Sweeps {
    pub fn validate(&self) -> Result<(), HarnessError> {
        for e in self.pairs() {
            if !(e.beta >= 0.0 && e.is_admissible()) {
                return Err(HarnessError::Config(format!(
                    "sweep pair ({}, {}) violates beta >= 0 and alpha^2 <= 2 beta",
                    e.alpha, e.beta
                )));
            }
        }
        Ok(())
    }

    pub fn pairs(&self) -> Vec<ExponentPair> {
        match self {
            Sweeps::Auto(_) => auto_grid(),
            Sweeps::Pairs(v) => v.iter().map(|[alpha, beta]| ExponentPair { alpha: *alpha, beta: *beta }).collect(),
        }
    }
}

/// Tolerance names understood by the harness, with defaults.
pub const TOLERANCES: [(&str, f64); 10] = [
    ("bounds", 1e-9),
    ("gap", 1e-10),
    ("identity", 1e-12),
    ("commutator", 1e-10),
    ("coherence", 1e-12),
    ("solver", 1e-8),
    ("orthonormality", 1e-8),
    ("oracle", 1e-2),
    ("interpolation", 1e-3),
    ("trace-order", 1.8),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    /// Number of eigenpairs to compute.
    pub k: usize,
    #[serde(default)]
    pub sweeps: Sweeps,
    /// Enabled checks; all of them when omitted.
    #[serde(default = "all_checks")]
    pub checks: Vec<CheckName>,
    /// Overrides for [`TOLERANCES`].
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    /// Path prefix for `<output>.json` and `<output>.csv`.
    #[serde(default = "default_output")]
    pub output: String,
}

fn all_checks() -> Vec<CheckName> {
    CheckName::ALL.to_vec()
}

fn default_output() -> String {
    "polyspec-report".to_string()
}

impl RunConfig {
    pub fn new(domain: DomainSpec, k: usize) -> Self {
        Self {
            domain,
            k,
            sweeps: Sweeps::default(),
            checks: all_checks(),
            tolerances: BTreeMap::new(),
            seed: 0,
            output: default_output(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.k == 0 {
            return Err(HarnessError::Config("k must be at least 1: nothing to check".into()));
        }
        validate_tolerances(&self.tolerances)?;
        self.sweeps.validate()?;
        self.domain.build_grid().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }

    /// Value of a named tolerance, falling back to its default.
    pub fn tolerance(&self, name: &str) -> f64 {
        tolerance(&self.tolerances, name)
    }

    pub fn enabled(&self, check: CheckName) -> bool {
        self.checks.contains(&check)
    }
}

/// `overrides[name]`, or the default from [`TOLERANCES`].
pub fn tolerance(overrides: &BTreeMap<String, f64>, name: &str) -> f64 {
    overrides.get(name).copied().unwrap_or_else(|| {
        TOLERANCES
            .iter()
            .find(|(known, _)| *known == name)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("no tolerance named {name}"))
    })
}

pub fn validate_tolerances(overrides: &BTreeMap<String, f64>) -> Result<(), HarnessError> {
    for (name, value) in overrides {
        if !TOLERANCES.iter().any(|(known, _)| known == name) {
            return Err(HarnessError::Config(format!("unknown tolerance '{name}'")));
        }
        if !(*value > 0.0 && value.is_finite()) {
            return Err(HarnessError::Config(format!("tolerance '{name}' must be positive, got {value}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"
k = 5
seed = 3
sweeps = "auto-grid"
checks = ["bounds", "chain"]
output = "out/square"

[tolerances]
bounds = 1e-8

[domain]
shape = "rectangle"
n = 2
extents = [1.0, 1.0]
h = [0.0625, 0.0625]
l = 1
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml(SQUARE).unwrap();
        assert_eq!(cfg.k, 5);
        assert_eq!(cfg.sweeps, Sweeps::default());
        assert_eq!(cfg.tolerance("bounds"), 1e-8);
        assert_eq!(cfg.tolerance("solver"), 1e-8);
        assert!(cfg.enabled(CheckName::Chain) && !cfg.enabled(CheckName::Trace));
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn explicit_pairs() {
        let text = SQUARE.replace(r#"sweeps = "auto-grid""#, "sweeps = [[1.0, 1.0], [2.0, 2.0]]");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.sweeps.pairs().len(), 2);
        let bad = SQUARE.replace(r#"sweeps = "auto-grid""#, "sweeps = [[2.0, 1.0]]");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn rejections() {
        for (from, to) in [
            ("k = 5", "k = 0"),
            ("bounds = 1e-8", "bogus = 1e-8"),
            ("bounds = 1e-8", "bounds = -1.0"),
            (r#"["bounds", "chain"]"#, r#"["bounds", "nope"]"#),
            ("h = [0.0625, 0.0625]", "h = [0.3, 0.3]"),
        ] {
            assert!(RunConfig::from_toml(&SQUARE.replace(from, to)).is_err(), "{to}");
        }
    }

    #[test]
    fn check_order() {
        assert!(CheckName::Commutator.is_identity());
        assert!(!CheckName::Bounds.is_identity());
        let mut sorted = CheckName::ALL.to_vec();
        sorted.sort();
        assert_eq!(sorted, CheckName::ALL.to_vec());
    }
}
