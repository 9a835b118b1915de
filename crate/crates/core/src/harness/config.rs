//! Suite configuration: one JSON document per suite.
//!
//! ```json
//! {
//!   "seed": 1,
//!   "c2_floor": null,
//!   "scenarios": [
//!     {
//!       "id": "free-sin",
//!       "potential": {"breakpoints": [0, 1], "values": [0]},
//!       "energy": 1,
//!       "init": {"x0": 0, "u0": 0, "du0": 1},
//!       "span": [0, 20],
//!       "max_step": 0.001,
//!       "checks": [{"check": "derivative_bound"}, {"check": "local_lp", "p": 2}],
//!       "expected": "pass"
//!     }
//!   ]
//! }
//! ```
//!
//! `potential` is either explicit `{"breakpoints", "values"}` or a family
//! shorthand such as `{"family": "square_well", "depth": 2, "width": 3}`.
//! Energies are a number or `{"re", "im"}`; `u0`/`du0` a number or `[re, im]`.

use std::collections::HashSet;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::constants::Energy;
use crate::error::{Error, Result};
use crate::family::{make_family, Family};
use crate::potential::PiecewisePotential;
use crate::solver::InitialData;
use crate::weight::WeightKind;

pub const DEFAULT_TAYLOR_SAMPLES: usize = 1000;
pub const DEFAULT_DECAY_FACTOR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Explicit(PiecewisePotential),
    Family(Family),
}

impl<'de> Deserialize<'de> for PotentialSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        if v.get("family").is_some() {
            Family::deserialize(v)
                .map(PotentialSpec::Family)
                .map_err(D::Error::custom)
        } else {
            PiecewisePotential::deserialize(v)
                .map(PotentialSpec::Explicit)
                .map_err(D::Error::custom)
        }
    }
}

impl PotentialSpec {
    pub fn build(&self, seed: u64) -> Result<PiecewisePotential> {
        match self {
            PotentialSpec::Explicit(v) => Ok(v.clone()),
            PotentialSpec::Family(f) => make_family(f, seed),
        }
    }

    pub fn family_name(&self) -> Option<&'static str> {
        match self {
            PotentialSpec::Explicit(_) => None,
            PotentialSpec::Family(f) => Some(f.name()),
        }
    }

    pub fn is_discretization_surrogate(&self) -> bool {
        matches!(self, PotentialSpec::Family(f) if f.is_discretization_surrogate())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    DerivativeBound,
    Persistence,
    LocalLp {
        p: f64,
    },
    DerivativeLp {
        p: f64,
    },
    Weighted {
        p: f64,
        weight: WeightKind,
        window: [f64; 2],
    },
    Decay {
        tail_fraction: f64,
        #[serde(default = "default_decay_factor")]
        factor: f64,
    },
    TaylorLower {
        #[serde(default = "default_taylor_samples")]
        samples: usize,
    },
    /// Prüfer identities; needs a real solution at `E = k² > 0`.
    Prufer,
}

fn default_decay_factor() -> f64 {
    DEFAULT_DECAY_FACTOR
}

fn default_taylor_samples() -> usize {
    DEFAULT_TAYLOR_SAMPLES
}

impl CheckSpec {
    pub fn label(&self) -> &'static str {
        match self {
            CheckSpec::DerivativeBound => "derivative_bound",
            CheckSpec::Persistence => "persistence",
            CheckSpec::LocalLp { .. } => "local_lp",
            CheckSpec::DerivativeLp { .. } => "derivative_lp",
            CheckSpec::Weighted { .. } => "weighted",
            CheckSpec::Decay { .. } => "decay",
            CheckSpec::TaylorLower { .. } => "taylor_lower",
            CheckSpec::Prufer => "prufer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    #[default]
    Pass,
    ExpectedFail,
}

/// Closed-form solutions usable in place of propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticSolution {
    /// `u = e^{-x²/2}` for `V = x²`, `E = 1`.
    HarmonicGroundState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub potential: PotentialSpec,
    pub energy: Energy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitialData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticSolution>,
    pub span: [f64; 2],
    pub max_step: f64,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub expected: Expectation,
}

impl Scenario {
    fn validate(&self) -> std::result::Result<(), (String, String)> {
        let [a, b] = self.span;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(("span".into(), format!("need finite a < b, got [{a}, {b}]")));
        }
        if !(self.max_step > 0.0) || !self.max_step.is_finite() {
            return Err(("max_step".into(), format!("need > 0, got {}", self.max_step)));
        }
        match (&self.init, &self.analytic) {
            (None, None) => return Err(("init".into(), "required unless `analytic` is set".into())),
            (Some(init), None) if !(a <= init.x0 && init.x0 <= b) => {
                return Err(("init.x0".into(), format!("{} lies outside span [{a}, {b}]", init.x0)));
            }
            (_, Some(AnalyticSolution::HarmonicGroundState)) if self.energy != Energy::real(1.0) => {
                return Err(("energy".into(), "harmonic_ground_state needs E = 1".into()));
            }
            _ => {}
        }
        for (i, c) in self.checks.iter().enumerate() {
            let p = match c {
                CheckSpec::LocalLp { p } | CheckSpec::DerivativeLp { p } | CheckSpec::Weighted { p, .. } => Some(*p),
                _ => None,
            };
            if let Some(p) = p {
                if !(p >= 1.0) || !p.is_finite() {
                    return Err((format!("checks[{i}].p"), format!("need finite p >= 1, got {p}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2_floor: Option<f64>,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
}

fn config_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        location: location.into(),
        message: message.into(),
    }
}

impl SuiteConfig {
    /// Parses and validates a suite, reporting the scenario id and field
    /// path of the first problem.
    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| config_err("<document>", e.to_string()))?;
        let obj = root
            .as_object()
            .ok_or_else(|| config_err("<document>", "expected a JSON object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "seed" | "c2_floor" | "scenarios") {
                return Err(config_err(key.clone(), "unknown field"));
            }
        }
        let seed = match obj.get("seed") {
            None => 0,
            Some(v) => v
                .as_u64()
                .ok_or_else(|| config_err("seed", "expected a nonnegative integer"))?,
        };
        let c2_floor = match obj.get("c2_floor") {
            None | Some(Value::Null) => None,
            Some(v) => Some(v.as_f64().ok_or_else(|| config_err("c2_floor", "expected a number"))?),
        };
        let raw = match obj.get("scenarios") {
            None => Vec::new(),
            Some(Value::Array(a)) => a.clone(),
            Some(_) => return Err(config_err("scenarios", "expected an array")),
        };
        let mut scenarios = Vec::with_capacity(raw.len());
        let mut seen = HashSet::new();
        for (i, v) in raw.into_iter().enumerate() {
            let id = v
                .get("id")
                .and_then(Value::as_str)
                .map(str::to_owned)
                .unwrap_or_else(|| format!("#{i}"));
            let where_ = |path: &str| format!("scenario '{id}' (scenarios[{i}]) at {path}");
            let sc: Scenario = serde_path_to_error::deserialize(v).map_err(|e| {
                let path = e.path().to_string();
                config_err(where_(&path), e.into_inner().to_string())
            })?;
            sc.validate().map_err(|(path, msg)| config_err(where_(&path), msg))?;
            if !seen.insert(sc.id.clone()) {
                return Err(config_err(where_("id"), "duplicate scenario id"));
            }
            scenarios.push(sc);
        }
        Ok(Self {
            seed,
            c2_floor,
            scenarios,
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "seed": 3,
        "scenarios": [{
            "id": "well",
            "potential": {"family": "square_well", "depth": 2, "width": 3},
            "energy": {"re": 2, "im": 1},
            "init": {"x0": 0, "u0": [1, 0.5], "du0": 0},
            "span": [-1, 4],
            "max_step": 0.01,
            "checks": [{"check": "local_lp", "p": 2}, {"check": "taylor_lower"}, {"check": "decay", "tail_fraction": 0.2}]
        }]
    }"#;

    #[test]
    fn parses_family_shorthand_and_defaults() {
        let cfg = SuiteConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.seed, 3);
        let sc = &cfg.scenarios[0];
        assert_eq!(sc.potential.family_name(), Some("square_well"));
        assert_eq!(sc.expected, Expectation::Pass);
        assert_eq!(sc.checks[1], CheckSpec::TaylorLower { samples: 1000 });
        assert_eq!(
            sc.checks[2],
            CheckSpec::Decay {
                tail_fraction: 0.2,
                factor: DEFAULT_DECAY_FACTOR
            }
        );
        assert_eq!(sc.init.unwrap().u0, num_complex::Complex64::new(1.0, 0.5));
    }

    #[test]
    fn explicit_potential() {
        let text = MINIMAL.replace(
            r#"{"family": "square_well", "depth": 2, "width": 3}"#,
            r#"{"breakpoints": [0, 1, 2], "values": [-1, 3]}"#,
        );
        let cfg = SuiteConfig::from_json(&text).unwrap();
        assert!(matches!(cfg.scenarios[0].potential, PotentialSpec::Explicit(_)));
    }

    #[test]
    fn errors_name_scenario_and_field() {
        let text = MINIMAL.replace(r#""max_step": 0.01"#, r#""max_step": "x""#);
        let err = SuiteConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("scenario 'well'") && err.contains("max_step"), "{err}");

        let text = MINIMAL.replace(r#""p": 2"#, r#""p": 0.5"#);
        let err = SuiteConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("checks[0].p"), "{err}");

        let text = MINIMAL.replace(r#""depth": 2"#, r#""depth": 2, "bogus": 1"#);
        let err = SuiteConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("potential"), "{err}");

        let text = MINIMAL.replace(r#""x0": 0"#, r#""x0": 9"#);
        let err = SuiteConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("init.x0"), "{err}");

        assert!(SuiteConfig::from_json("[1, 2]").is_err());
        assert!(SuiteConfig::from_json("{\"what\": 1}").is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let cfg = SuiteConfig::from_json(MINIMAL).unwrap();
        let mut doc: Value = serde_json::from_str(MINIMAL).unwrap();
        let sc = doc["scenarios"][0].clone();
        doc["scenarios"].as_array_mut().unwrap().push(sc);
        let err = SuiteConfig::from_json(&doc.to_string()).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
        assert_eq!(cfg.scenarios.len(), 1);
    }

    #[test]
    fn empty_suite() {
        let cfg = SuiteConfig::from_json("{}").unwrap();
        assert!(cfg.scenarios.is_empty());
    }
}
