use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use splitbound::constants::PiThetaChoice;
use splitbound::examples::Observable;

/// One JSON document describing an experiment. Unknown fields are rejected.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default = "default_observable")]
    pub observable: Observable,
    /// Start state; the example's default when absent.
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default = "default_pi_theta")]
    pub pi_theta: PiThetaChoice,
    #[serde(default)]
    pub certificate_override: Option<CertificateOverride>,
    #[serde(default)]
    pub bound: Option<BoundConfig>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub replicas: Option<usize>,
    #[serde(default)]
    pub t_grid: Option<GridSpec>,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub report: Option<ReportConfig>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_observable() -> Observable {
    Observable { kappa: 1.0, s: 1.0 }
}

fn default_pi_theta() -> PiThetaChoice {
    PiThetaChoice::Exact
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

/// Replaces drift constants before verification, e.g. to test that a
/// too-optimistic rate is caught.
#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateOverride {
    pub lambda: Option<f64>,
    pub b: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub delta: Option<f64>,
}

/// A bound family from the registry (or `theorem_a`) plus parameters that
/// override the certificate-derived ones.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum GridSpec {
    Values(Vec<f64>),
    Linear { from: f64, to: f64, points: usize },
    Log { from: f64, to: f64, points: usize },
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        let v: Vec<f64> = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Linear { from, to, points } | GridSpec::Log { from, to, points } => {
                if *points < 2 {
                    return Err("t_grid needs at least two points".into());
                }
                let log = matches!(self, GridSpec::Log { .. });
                if log && !(*from > 0.0) {
                    return Err("log t_grid needs a positive start".into());
                }
                let (a, b) = if log { (from.ln(), to.ln()) } else { (*from, *to) };
                (0..*points)
                    .map(|i| {
                        let x = a + (b - a) * i as f64 / (*points - 1) as f64;
                        if log { x.exp() } else { x }
                    })
                    .collect()
            }
        };
        if v.is_empty() {
            return Err("t_grid is empty".into());
        }
        if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
            return Err("t_grid must be finite and strictly increasing".into());
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub grid: GridSpec,
    pub n: f64,
    pub t: f64,
    #[serde(default = "half")]
    pub eta: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub inputs: Vec<PathBuf>,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(0) = cfg.replicas {
        return Err("replicas must be at least 1".into());
    }
    if let Some(g) = &cfg.t_grid {
        g.values()?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(GridSpec::Linear { from: 0.0, to: 1.0, points: 3 }.values().unwrap(), vec![0.0, 0.5, 1.0]);
        let g = GridSpec::Log { from: 1.0, to: 100.0, points: 3 }.values().unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert!(GridSpec::Values(vec![1.0, 1.0]).values().is_err());
    }

    #[test]
    fn seed_is_required() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"model": {"name": "geometric"}}"#).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"seed": 1, "model": {"name": "g"}, "sede": 2}"#).unwrap_err();
        assert!(err.to_string().contains("sede"));
        assert_eq!(err.line(), 1);
    }
}
