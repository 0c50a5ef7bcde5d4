//! Run configuration: the single JSON file driving every subcommand.
//!
//! See docs/formats.md for the schema. All outputs are pure functions of
//! the configuration bytes (including the sampling seed), which is what
//! makes reruns byte-identical.

use serde::{Deserialize, Serialize};

use fpf_chroma::expr::{parse, Expr};
use fpf_chroma::geometry::DomainComplex;
use fpf_chroma::multimap::{MultiMapSpec, Tolerances};

#[derive(Debug, Clone, thiserror::Error)]
pub enum ConfigError {
    #[error("config JSON: {0}")]
    Json(String),
    #[error("branch {branch} component {component}: {message}")]
    Expr {
        branch: usize,
        component: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    /// n branches, each a vector of k expression strings.
    pub branches: Vec<Vec<String>>,
    pub domain: DomainConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    /// Seed for all tripwire sampling.
    #[serde(default)]
    pub seed: u64,
    /// Emit an SVG plot from `color` (k <= 2 only).
    #[serde(default)]
    pub plot: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Boxes as k pairs [lo, hi] each.
    pub boxes: Vec<Vec<[f64; 2]>>,
    /// Initial grid resolution h.
    pub resolution: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_dedup")]
    pub dedup: f64,
    #[serde(default = "default_margin_goal")]
    pub margin_goal: f64,
    #[serde(default = "default_min_margin")]
    pub min_margin: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
}

fn default_dedup() -> f64 {
    1e-9
}
fn default_margin_goal() -> f64 {
    1e-3
}
fn default_min_margin() -> f64 {
    1e-6
}
fn default_max_depth() -> usize {
    12
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            dedup: default_dedup(),
            margin_goal: default_margin_goal(),
            min_margin: default_min_margin(),
            max_depth: default_max_depth(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError::Json(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dimension == 0 {
            return Err(ConfigError::Invalid("dimension must be >= 1".into()));
        }
        if self.branches.is_empty() {
            return Err(ConfigError::Invalid("at least one branch required".into()));
        }
        for (bi, branch) in self.branches.iter().enumerate() {
            if branch.len() != self.dimension {
                return Err(ConfigError::Invalid(format!(
                    "branch {bi} has {} components, expected {}",
                    branch.len(),
                    self.dimension
                )));
            }
        }
        if self.domain.boxes.is_empty() {
            return Err(ConfigError::Invalid("domain needs at least one box".into()));
        }
        if !(self.domain.resolution > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "resolution must be positive, got {}",
                self.domain.resolution
            )));
        }
        let t = &self.tolerances;
        if !(t.dedup > 0.0 && t.margin_goal > 0.0 && t.min_margin > 0.0) {
            return Err(ConfigError::Invalid(
                "tolerances must all be positive".into(),
            ));
        }
        Ok(())
    }

    /// Parse all branch expressions and bind them to the dimension.
    pub fn build_map(&self) -> Result<MultiMapSpec, ConfigError> {
        let mut branches: Vec<Vec<Expr>> = Vec::with_capacity(self.branches.len());
        for (bi, branch) in self.branches.iter().enumerate() {
            let mut exprs = Vec::with_capacity(branch.len());
            for (ci, src) in branch.iter().enumerate() {
                let e = parse(src).map_err(|err| ConfigError::Expr {
                    branch: bi,
                    component: ci,
                    message: err.to_string(),
                })?;
                exprs.push(e);
            }
            branches.push(exprs);
        }
        let tol = Tolerances {
            dedup: self.tolerances.dedup,
            margin_goal: self.tolerances.margin_goal,
        };
        MultiMapSpec::new(self.dimension, branches, tol)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn build_complex(&self) -> Result<DomainComplex, ConfigError> {
        let boxes: Vec<Vec<(f64, f64)>> = self
            .domain
            .boxes
            .iter()
            .map(|b| b.iter().map(|&[lo, hi]| (lo, hi)).collect())
            .collect();
        DomainComplex::build(&boxes, self.domain.resolution)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn color_params(&self) -> fpf_chroma::colorer::ColorParams {
        fpf_chroma::colorer::ColorParams {
            min_margin: self.tolerances.min_margin,
            fpf_margin: 4.0 * self.tolerances.min_margin,
            max_depth: self.tolerances.max_depth,
            greedy_rounds: 8,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "dimension": 1,
        "branches": [["x0+1"], ["x0+2"]],
        "domain": { "boxes": [[[0.0, 12.0]]], "resolution": 0.1 },
        "seed": 0
    }"#;

    #[test]
    fn parses_and_builds() {
        let cfg = RunConfig::from_json(GOOD).unwrap();
        let m = cfg.build_map().unwrap();
        assert_eq!(m.branch_count(), 2);
        let x = cfg.build_complex().unwrap();
        assert_eq!(x.len(), 120);
        assert_eq!(cfg.tolerances.max_depth, 12);
    }

    #[test]
    fn rejects_malformed_expression() {
        let bad = GOOD.replace("x0+1", "x0 @ 1");
        let cfg = RunConfig::from_json(&bad).unwrap();
        let err = cfg.build_map().unwrap_err();
        assert!(matches!(err, ConfigError::Expr { branch: 0, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(RunConfig::from_json("{}").is_err());
        let wrong_arity = GOOD.replace("[\"x0+2\"]", "[\"x0+2\", \"x0\"]");
        assert!(RunConfig::from_json(&wrong_arity).is_err());
        let bad_res = GOOD.replace("0.1", "0.0");
        assert!(RunConfig::from_json(&bad_res).is_err());
    }
}
