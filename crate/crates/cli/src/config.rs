//! The JSON experiment-configuration file.
//!
//! One file describes the source population plus at most one command block
//! whose fields act as defaults for the matching subcommand (command-line
//! flags override them). A block for a different subcommand, or more than
//! one block, is rejected — a config drives exactly one command.

use std::fs;
use std::path::Path;

use agesched_core::{validate_system, SourceInput, SystemSpec};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: Option<SystemBlock>,
    pub analyze: Option<AnalyzeBlock>,
    pub synthesize: Option<SynthesizeBlock>,
    pub simulate: Option<SimulateBlock>,
    pub benchmark: Option<BenchmarkBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub sources: Vec<SourceInput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeBlock {
    pub pattern: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeBlock {
    pub method: Option<String>,
    pub epsilon: Option<f64>,
    /// Grid spec, `start:step:end` or a comma-separated list.
    pub epsilons: Option<String>,
    pub iterations: Option<usize>,
    pub max_size: Option<usize>,
    pub stop_early: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub pattern: Option<String>,
    pub probabilities: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub target: Option<u64>,
    pub warmup: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkBlock {
    pub preset: Option<String>,
    pub sweep: Option<SweepBlock>,
    pub policies: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub instances: Option<usize>,
    pub is_budget: Option<String>,
    pub include_is: Option<bool>,
}

/// A custom one-dimensional sweep over a single source field.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// 1-based source index.
    pub source: usize,
    /// One of `weight`, `mean_service`, `scov`, `drop_prob`.
    pub field: String,
    pub values: Vec<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::user(format!("cannot read config {}: {}", path.display(), e)))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::user(format!("invalid config {}: {}", path.display(), e)))
    }

    /// Enforces the one-command-block rule for the invoked subcommand.
    pub fn check_single_block(&self, invoked: &str) -> Result<(), CliError> {
        let blocks: Vec<&str> = [
            ("analyze", self.analyze.is_some()),
            ("synthesize", self.synthesize.is_some()),
            ("simulate", self.simulate.is_some()),
            ("benchmark", self.benchmark.is_some()),
        ]
        .iter()
        .filter(|(_, present)| *present)
        .map(|(name, _)| *name)
        .collect();
        match blocks.as_slice() {
            [] => Ok(()),
            [one] if *one == invoked => Ok(()),
            [one] => Err(CliError::user(format!(
                "config contains a `{}` block but the `{}` command was invoked",
                one, invoked
            ))),
            many => Err(CliError::user(format!(
                "config must contain at most one command block, found {}",
                many.join(", ")
            ))),
        }
    }

    pub fn system(&self) -> Result<SystemSpec, CliError> {
        let block = self
            .system
            .as_ref()
            .ok_or_else(|| CliError::user("config is missing the `system` block".to_string()))?;
        validate_system(&block.sources).map_err(CliError::from)
    }
}

/// Parses an ε-grid spec: either `start:step:end` (inclusive, tolerant of
/// floating-point endpoints) or a comma-separated list.
pub fn parse_epsilon_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::user(format!("invalid epsilon grid `{}`: {}", spec, why));
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:end"));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad("bad start"))?;
        let step: f64 = parts[1].parse().map_err(|_| bad("bad step"))?;
        let end: f64 = parts[2].parse().map_err(|_| bad("bad end"))?;
        if !(step > 0.0) || end < start {
            return Err(bad("need step > 0 and end ≥ start"));
        }
        let count = ((end - start) / step + 0.5).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        spec.split(',')
            .map(|tok| tok.trim().parse::<f64>().map_err(|_| bad(tok)))
            .collect::<Result<Vec<f64>, CliError>>()?
    };
    if values.is_empty() {
        return Err(bad("empty"));
    }
    for &v in &values {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(bad("entries must be finite and non-negative"));
        }
    }
    Ok(values)
}

/// Applies a sweep assignment to a copy of the base sources.
pub fn apply_sweep(
    base: &[SourceInput],
    sweep: &SweepBlock,
    value: f64,
) -> Result<Vec<SourceInput>, CliError> {
    if sweep.source == 0 || sweep.source > base.len() {
        return Err(CliError::user(format!(
            "sweep source {} out of range 1..={}",
            sweep.source,
            base.len()
        )));
    }
    let mut sources = base.to_vec();
    let target = &mut sources[sweep.source - 1];
    use agesched_core::ServiceDistribution as Sd;
    match sweep.field.as_str() {
        "weight" => target.weight = value,
        "drop_prob" => target.drop_prob = value,
        "mean_service" => {
            target.service = match target.service {
                Sd::Deterministic { .. } => Sd::Deterministic { mean: value },
                Sd::Exponential { .. } => Sd::Exponential { mean: value },
                Sd::Gamma { scov, .. } => Sd::Gamma { mean: value, scov },
            }
        }
        "scov" => {
            target.service = match target.service {
                Sd::Gamma { mean, .. } => Sd::Gamma { mean, scov: value },
                other => {
                    return Err(CliError::user(format!(
                        "sweep field `scov` needs a gamma service, source {} has {:?}",
                        sweep.source, other
                    )))
                }
            }
        }
        other => {
            return Err(CliError::user(format!(
                "unknown sweep field `{}` (expected weight, mean_service, scov, or drop_prob)",
                other
            )))
        }
    }
    Ok(sources)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_grid_forms() {
        assert_eq!(parse_epsilon_grid("0:0.5:2").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_epsilon_grid("1").unwrap(), vec![1.0]);
        assert_eq!(parse_epsilon_grid("0, 2").unwrap(), vec![0.0, 2.0]);
        let dense = parse_epsilon_grid("0:0.2:2").unwrap();
        assert_eq!(dense.len(), 11);
        assert!((dense[10] - 2.0).abs() < 1e-9);
        assert!(parse_epsilon_grid("2:0.5:0").is_err());
        assert!(parse_epsilon_grid("a,b").is_err());
        assert!(parse_epsilon_grid("-1").is_err());
    }

    #[test]
    fn single_block_rule() {
        let config: ExperimentConfig =
            serde_json::from_str(r#"{"analyze": {"pattern": "1"}}"#).unwrap();
        assert!(config.check_single_block("analyze").is_ok());
        assert!(config.check_single_block("simulate").is_err());
        let two: ExperimentConfig =
            serde_json::from_str(r#"{"analyze": {}, "simulate": {}}"#).unwrap();
        assert!(two.check_single_block("analyze").is_err());
    }

    #[test]
    fn sweep_application() {
        let base = vec![SourceInput {
            weight: 1.0,
            service: agesched_core::ServiceDistribution::Deterministic { mean: 2.0 },
            drop_prob: 0.0,
        }];
        let sweep =
            SweepBlock { source: 1, field: "mean_service".into(), values: vec![5.0] };
        let out = apply_sweep(&base, &sweep, 5.0).unwrap();
        assert_eq!(out[0].service.mean(), 5.0);
        let bad = SweepBlock { source: 1, field: "scov".into(), values: vec![1.0] };
        assert!(apply_sweep(&base, &bad, 1.0).is_err());
        let oob = SweepBlock { source: 9, field: "weight".into(), values: vec![1.0] };
        assert!(apply_sweep(&base, &oob, 1.0).is_err());
    }
}
