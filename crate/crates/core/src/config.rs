//! Run configuration: JSON ingestion, validation and the built-in presets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result as GeometryResult;
use crate::sasakian::SasakianStructure;
use crate::torus::{MomentumCovector, TorusAction};

pub const COMMANDS: [&str; 6] = ["verify-structure", "check-hypotheses", "reduce", "curvature-scan", "reeb-flow", "cone-check"];
pub const PRESETS: [&str; 6] = ["ex1", "ex1gen", "ex2", "ex3", "ex4", "weighted"];

/// Named residuals a config may override, with their default tolerances.
pub const DEFAULT_TOLERANCES: [(&str, f64); 28] = [
    ("sasakian", crate::tolerances::ROUND_SASAKIAN),
    ("structure", crate::tolerances::ROUND_STRUCTURE),
    ("killing", crate::tolerances::ROUND_STRUCTURE),
    ("weighted_sasakian", crate::tolerances::WEIGHTED_SASAKIAN),
    ("weighted_structure", crate::tolerances::WEIGHTED_STRUCTURE),
    ("weighted_killing", crate::tolerances::WEIGHTED_KILLING),
    ("reeb", crate::tolerances::FRAME_BLOCKS),
    ("level_set", crate::tolerances::LEVEL_SET),
    ("reduced_contact_det", 1e-6),
    ("quotient_sasakian", crate::tolerances::QUOTIENT_SASAKIAN),
    ("projected_killing", crate::tolerances::PROJECTED_KILLING),
    ("oneill_bracket", crate::tolerances::ONEILL_BRACKET),
    ("two_path", crate::tolerances::CURVATURE_TWO_PATH),
    ("gauss_consistency", crate::tolerances::GAUSS_CONSISTENCY),
    ("bianchi", 1e-7),
    ("relations", crate::tolerances::RELATIONS),
    ("onil", crate::tolerances::RELATIONS),
    ("final_identity", crate::tolerances::FINAL_IDENTITY),
    ("nu_term", crate::tolerances::NU_TERM),
    ("positivity", crate::tolerances::POSITIVITY_SLACK),
    ("reeb_flow", crate::tolerances::REEB_FLOW),
    ("reeb_phase", crate::tolerances::REEB_FLOW),
    ("phi_zero", crate::tolerances::LEVEL_SET),
    ("cone_commutation", 0.5),
    ("symplectic_convention", 1e-10),
    ("iota_transpose", crate::tolerances::IOTA_TRANSPOSE),
    ("stratification_leak", crate::tolerances::RAY),
    ("rescaling_invariance", 0.5),
];

/// Command-specific options.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandOptions {
    /// Integration horizon for `reeb-flow` (default `2π`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// RK4 steps for `reeb-flow` (default 512).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Weights of the diagonal two-circle action, enabling the closed-form
    /// flow comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<[f64; 2]>,
    /// Directions per sample for `curvature-scan` (default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    /// Subtorus generators for a zero-level `curvature-scan`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_level_generators: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Complex dimension of the ambient `ℂⁿ`.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_weights: Option<Vec<f64>>,
    pub action_weights: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub options: CommandOptions,
}

fn default_samples() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("validation failed: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Violation>),
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Validation(v) => v,
            _ => &[],
        }
    }
}

/// Reads a JSON config. Validation against a command happens separately.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg: RunConfig = serde_json::from_str(text)?;
    if let Some(name) = cfg.preset.clone() {
        let base = preset(&name, Some(cfg.n)).map_err(|v| ConfigError::Validation(vec![v]))?;
        cfg = merge_preset(base, cfg);
    }
    Ok(cfg)
}

/// Fields left empty in `cfg` are taken from `base`.
fn merge_preset(base: RunConfig, cfg: RunConfig) -> RunConfig {
    RunConfig {
        preset: cfg.preset,
        n: cfg.n,
        sphere_weights: cfg.sphere_weights.or(base.sphere_weights),
        action_weights: if cfg.action_weights.is_empty() { base.action_weights } else { cfg.action_weights },
        mu: cfg.mu.or(base.mu),
        samples: cfg.samples,
        seed: cfg.seed,
        tolerances: cfg.tolerances,
        options: CommandOptions {
            t_max: cfg.options.t_max.or(base.options.t_max),
            steps: cfg.options.steps.or(base.options.steps),
            lambda: cfg.options.lambda.or(base.options.lambda),
            directions: cfg.options.directions.or(base.options.directions),
            zero_level_generators: cfg.options.zero_level_generators.or(base.options.zero_level_generators),
        },
    }
}

/// Built-in examples. `n` only affects `ex1gen` (complex dimension, ≥ 4).
pub fn preset(name: &str, n: Option<usize>) -> Result<RunConfig, Violation> {
    let base = |n: usize, w: Vec<Vec<f64>>, mu: Vec<f64>| RunConfig {
        preset: Some(name.to_string()),
        n,
        sphere_weights: None,
        action_weights: w,
        mu: Some(mu),
        samples: default_samples(),
        seed: 0,
        tolerances: BTreeMap::new(),
        options: CommandOptions::default(),
    };
    let cfg = match name {
        "ex1" => base(4, vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]], vec![1.0, 1.0]),
        "ex1gen" => {
            let n = n.unwrap_or(5);
            if n < 4 {
                return Err(Violation { field: "n".into(), message: format!("ex1gen needs n >= 4, got {n}") });
            }
            let mut w0 = vec![0.0; n];
            w0[0] = 1.0;
            w0[1] = 1.0;
            let w1 = (0..n).map(|j| if j >= 2 { 1.0 } else { 0.0 }).collect();
            base(n, vec![w0, w1], vec![1.0, 1.0])
        }
        "ex2" => {
            let mut c = base(4, vec![vec![-1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]], vec![1.0, 0.0]);
            c.options.zero_level_generators = Some(vec![vec![1.0, 0.0]]);
            c
        }
        "ex3" => base(4, vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 1.0]], vec![0.0, 1.0]),
        "ex4" => {
            let mut c = example4(1.0, 1.0);
            c.preset = Some(name.into());
            c
        }
        "weighted" => {
            let mut c = base(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]], vec![1.0, 1.0]);
            c.sphere_weights = Some(vec![1.0, 2.0, 3.0]);
            c
        }
        other => {
            return Err(Violation { field: "preset".into(), message: format!("unknown preset {other:?}; expected one of {PRESETS:?}") })
        }
    };
    Ok(cfg)
}

/// The diagonal weighted action `(e^{it₀λ₀}z₀, e^{it₁λ₁}z₁, z₂, z₃)` at `μ = (1,1)`.
pub fn example4(l0: f64, l1: f64) -> RunConfig {
    RunConfig {
        preset: Some("ex4".into()),
        n: 4,
        sphere_weights: None,
        action_weights: vec![vec![l0, 0.0, 0.0, 0.0], vec![0.0, l1, 0.0, 0.0]],
        mu: Some(vec![1.0, 1.0]),
        samples: default_samples(),
        seed: 0,
        tolerances: BTreeMap::new(),
        options: CommandOptions { lambda: Some([l0, l1]), ..CommandOptions::default() },
    }
}

fn needs_mu(command: &str) -> bool {
    command != "verify-structure"
}

impl RunConfig {
    /// Every violation for running `command`, not only the first.
    pub fn violations(&self, command: &str) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut push = |field: &str, message: String| v.push(Violation { field: field.into(), message });
        if !COMMANDS.contains(&command) {
            push("command", format!("unknown command {command:?}"));
        }
        if self.n < 2 {
            push("n", format!("must be at least 2, got {}", self.n));
        }
        if self.action_weights.is_empty() {
            push("action_weights", "at least one row is required".into());
        }
        for (i, row) in self.action_weights.iter().enumerate() {
            if row.len() != self.n {
                push(&format!("action_weights[{i}]"), format!("has {} entries, expected n = {}", row.len(), self.n));
            }
            if row.iter().any(|w| !w.is_finite()) {
                push(&format!("action_weights[{i}]"), "entries must be finite".into());
            }
        }
        if self.samples < 1 {
            push("samples", "must be at least 1".into());
        }
        if let Some(a) = &self.sphere_weights {
            if a.len() != self.n {
                push("sphere_weights", format!("has {} entries, expected n = {}", a.len(), self.n));
            }
            if a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                push("sphere_weights", "entries must be strictly positive".into());
            }
            if a.windows(2).any(|w| w[1] < w[0]) {
                push("sphere_weights", "entries must be nondecreasing".into());
            }
            if !self.is_round() && command != "verify-structure" {
                push("sphere_weights", format!("{command} requires the round structure (all weights equal to 1)"));
            }
        }
        match (&self.mu, needs_mu(command)) {
            (None, true) => push("mu", format!("required by {command}")),
            (Some(mu), true) => {
                if mu.len() != self.action_weights.len() {
                    push("mu", format!("has {} entries, torus dimension is {}", mu.len(), self.action_weights.len()));
                }
                if mu.iter().all(|x| *x == 0.0) {
                    push("mu", "must not be zero".into());
                }
                if mu.iter().any(|x| !x.is_finite()) {
                    push("mu", "entries must be finite".into());
                }
            }
            _ => {}
        }
        for (name, value) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(k, _)| k == name) {
                push(&format!("tolerances.{name}"), "unknown residual name".into());
            }
            if !(value.is_finite() && *value > 0.0) {
                push(&format!("tolerances.{name}"), "must be positive".into());
            }
        }
        if let Some(steps) = self.options.steps {
            if steps == 0 {
                push("options.steps", "must be positive".into());
            }
        }
        if let Some(t) = self.options.t_max {
            if !(t.is_finite() && t > 0.0) {
                push("options.t_max", "must be positive".into());
            }
        }
        if let (Some(steps), Some(t)) = (self.options.steps, self.options.t_max) {
            if (steps as f64) < 64.0 * t {
                push("options.steps", "at least 64 steps per unit time are required".into());
            }
        }
        if let Some([l0, l1]) = self.options.lambda {
            if self.action_weights != example4(l0, l1).action_weights {
                push("options.lambda", "requires action_weights [[l0,0,0,0],[0,l1,0,0]]".into());
            }
        }
        if let Some(gens) = &self.options.zero_level_generators {
            for (i, g) in gens.iter().enumerate() {
                if g.len() != self.action_weights.len() {
                    push(&format!("options.zero_level_generators[{i}]"), "length must equal the torus dimension".into());
                }
            }
        }
        v
    }

    pub fn validate(&self, command: &str) -> Result<(), ConfigError> {
        let v = self.violations(command);
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Validation(v))
        }
    }

    pub fn is_round(&self) -> bool {
        self.sphere_weights.as_ref().is_none_or(|a| a.iter().all(|x| *x == 1.0))
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES.iter().find(|(k, _)| *k == name).map(|(_, v)| *v).expect("residual name is registered")
        })
    }

    pub fn structure(&self) -> GeometryResult<SasakianStructure> {
        if self.is_round() {
            SasakianStructure::round(self.n)
        } else {
            SasakianStructure::weighted(self.sphere_weights.clone().unwrap_or_default())
        }
    }

    pub fn action(&self) -> GeometryResult<TorusAction> {
        TorusAction::new(self.action_weights.clone())
    }

    pub fn momentum_covector(&self) -> GeometryResult<MomentumCovector> {
        MomentumCovector::new(self.mu.clone().unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_examples() {
        let c = preset("ex1", None).unwrap();
        assert_eq!((c.n, c.action_weights.clone()), (4, vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]]));
        let c = preset("ex4", None).unwrap();
        assert_eq!(c.action_weights, vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]]);
        let g = preset("ex1gen", Some(6)).unwrap();
        assert_eq!(g.action_weights[1], vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(preset("ex1gen", Some(3)).is_err());
        assert!(preset("nope", None).is_err());
        for name in PRESETS {
            let c = preset(name, None).unwrap();
            assert!(c.violations("verify-structure").is_empty(), "{name}");
        }
    }

    #[test]
    fn missing_mu_is_named() {
        let mut c = preset("ex1", None).unwrap();
        c.mu = None;
        let v = c.violations("reduce");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "mu");
        assert!(c.violations("verify-structure").is_empty());
    }

    #[test]
    fn all_violations_are_collected() {
        let text = r#"{"n": 1, "action_weights": [[1.0, 2.0]], "mu": [0.0], "samples": 0,
                       "sphere_weights": [2.0], "tolerances": {"bogus": 1.0}}"#;
        let c = parse_config(text).unwrap();
        let fields: Vec<String> = c.violations("reduce").into_iter().map(|v| v.field).collect();
        for f in ["n", "action_weights[0]", "samples", "sphere_weights", "mu", "tolerances.bogus"] {
            assert!(fields.iter().any(|x| x == f), "missing {f} in {fields:?}");
        }
    }

    #[test]
    fn parse_errors_and_preset_merge() {
        assert!(matches!(parse_config("{not json"), Err(ConfigError::Parse(_))));
        assert!(matches!(parse_config(r#"{"n": 4, "action_weights": [], "extra": 1}"#), Err(ConfigError::Parse(_))));
        let c = parse_config(r#"{"preset": "ex1", "n": 4, "action_weights": [], "mu": [1.0, 2.0], "seed": 9}"#).unwrap();
        assert_eq!(c.mu, Some(vec![1.0, 2.0]));
        assert_eq!(c.action_weights.len(), 2);
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn tolerance_overrides() {
        let mut c = preset("ex1", None).unwrap();
        assert_eq!(c.tolerance("quotient_sasakian"), 1e-5);
        c.tolerances.insert("quotient_sasakian".into(), 1e-3);
        assert_eq!(c.tolerance("quotient_sasakian"), 1e-3);
    }

    #[test]
    fn config_roundtrips_through_json() {
        let c = preset("ex2", None).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
    }
}
