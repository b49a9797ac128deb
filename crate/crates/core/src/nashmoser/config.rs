use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Run configuration, read from JSON or TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `darboux`, `liealg-su2`, `liealg-sl2`, `liealg-heisenberg`.
    pub instance: String,
    pub t0: f64,
    pub b: f64,
    pub s: f64,
    pub r: f64,
    /// Nodes per axis of the base grid (grid instances only).
    pub grid: usize,
    /// Residual tolerance; `None` picks the instance default.
    pub tolerance: Option<f64>,
    pub nu_max: usize,
    pub theta: Option<f64>,
    pub p: Option<usize>,
    /// `(c, μ)` pairs for `c^ν t_ν^{−μ} < 1`.
    pub pairs: Vec<(f64, f64)>,
    pub seed: u64,
    /// Perturbation amplitude of the Darboux form.
    pub amp: f64,
    /// `‖g_0 − id‖` of the Lie-algebra perturbation.
    pub perturb: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            instance: "darboux".into(),
            t0: 2.0,
            b: 1.0,
            s: 1.0,
            r: 0.0,
            grid: 129,
            tolerance: None,
            nu_max: 25,
            theta: None,
            p: None,
            pairs: Vec::new(),
            seed: 1,
            amp: 0.05,
            perturb: 0.05,
        }
    }
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads `.toml` files as TOML and anything else as JSON.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_formats() {
        let j = RunConfig::from_json_str(r#"{"instance": "liealg-su2", "t0": 1.5, "pairs": [[3.0, 1.0]]}"#).unwrap();
        let t = RunConfig::from_toml_str("instance = \"liealg-su2\"\nt0 = 1.5\npairs = [[3.0, 1.0]]\n").unwrap();
        assert_eq!(j, t);
        assert_eq!(j.nu_max, 25);
        assert!(RunConfig::from_json_str(r#"{"instnce": "x"}"#).is_err());
    }
}
