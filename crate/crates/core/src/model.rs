//! System description: weighted sources with heterogeneous service-time
//! distributions and packet drop probabilities.
//!
//! Time is measured in service-time units; nothing here carries a physical
//! unit. A source is described by the first two moments of its service time
//! (mean `s`, second moment `q`, hence variance `v` and squared coefficient
//! of variation `c = v/s²`) plus the probability `p` that a delivered update
//! is dropped before it can be used (so `u = 1 − p` is the per-transmission
//! success probability). Weights express relative importance and are
//! normalized to sum to one; the raw values are kept so reports can echo the
//! caller's original scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Service-time distribution of one source. Only the first two moments enter
/// the analysis; the concrete family additionally fixes how the simulator
/// draws samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ServiceDistribution {
    /// Constant service time.
    Deterministic { mean: f64 },
    /// Exponential service time (scov 1).
    Exponential { mean: f64 },
    /// Gamma service time with the given squared coefficient of variation;
    /// shape = 1/scov, scale = mean·scov.
    Gamma { mean: f64, scov: f64 },
}

impl ServiceDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            ServiceDistribution::Deterministic { mean }
            | ServiceDistribution::Exponential { mean }
            | ServiceDistribution::Gamma { mean, .. } => mean,
        }
    }

    /// Squared coefficient of variation `c = var/mean²`.
    pub fn scov(&self) -> f64 {
        match *self {
            ServiceDistribution::Deterministic { .. } => 0.0,
            ServiceDistribution::Exponential { .. } => 1.0,
            ServiceDistribution::Gamma { scov, .. } => scov,
        }
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.scov() * m * m
    }

    /// Second moment `q = E[S²] = s²(1 + c)`.
    pub fn second_moment(&self) -> f64 {
        let m = self.mean();
        m * m * (1.0 + self.scov())
    }

    /// `(mean, second moment, scov)` in one call.
    pub fn moments(&self) -> (f64, f64, f64) {
        (self.mean(), self.second_moment(), self.scov())
    }
}

/// Raw, unvalidated description of one source as it arrives from a config
/// file or a test generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceInput {
    /// Relative importance weight (any positive scale).
    pub weight: f64,
    pub service: ServiceDistribution,
    /// Probability that a transmitted update is dropped, in `[0, 1)`.
    pub drop_prob: f64,
}

/// One validated source. Constructed only through [`validate_system`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceSpec {
    /// Weight as supplied by the caller.
    pub raw_weight: f64,
    /// Weight normalized so the system's weights sum to one.
    pub weight: f64,
    pub service: ServiceDistribution,
    pub drop_prob: f64,
}

impl SourceSpec {
    /// Mean service time `s`.
    pub fn mean_service(&self) -> f64 {
        self.service.mean()
    }

    /// Service second moment `q`.
    pub fn service_second_moment(&self) -> f64 {
        self.service.second_moment()
    }

    /// Service variance `v`.
    pub fn service_variance(&self) -> f64 {
        self.service.variance()
    }

    /// Service squared coefficient of variation `c`.
    pub fn service_scov(&self) -> f64 {
        self.service.scov()
    }

    /// Success probability `u = 1 − p`.
    pub fn success_prob(&self) -> f64 {
        1.0 - self.drop_prob
    }
}

/// A validated multi-source system: non-empty, weights normalized, every
/// parameter in range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSpec {
    sources: Vec<SourceSpec>,
    /// Sum of the raw weights — the factor by which a caller working on the
    /// original weight scale must multiply normalized system metrics.
    weight_scale: f64,
}

impl SystemSpec {
    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn source(&self, n: usize) -> &SourceSpec {
        &self.sources[n]
    }

    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    /// Sum of raw weights (normalized metrics × this = raw-scale metrics).
    pub fn weight_scale(&self) -> f64 {
        self.weight_scale
    }

    /// The validated sources as inputs again (normalized weights), so a
    /// system can be round-tripped through [`validate_system`].
    pub fn to_inputs(&self) -> Vec<SourceInput> {
        self.sources
            .iter()
            .map(|s| SourceInput { weight: s.weight, service: s.service, drop_prob: s.drop_prob })
            .collect()
    }
}

fn check_finite(index: usize, name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSource { index, reason: format!("{} must be finite, got {}", name, x) })
    }
}

/// Validates raw sources and produces a [`SystemSpec`] with normalized
/// weights.
///
/// Rejections: empty source list, non-positive weight or mean service time,
/// drop probability outside `[0, 1)`, negative scov, gamma without a strictly
/// positive scov. Normalization is skipped when the weights already sum to
/// one within 1e-12, which makes validation exactly idempotent.
pub fn validate_system(inputs: &[SourceInput]) -> Result<SystemSpec> {
    if inputs.is_empty() {
        return Err(Error::EmptySystem);
    }
    for (i, inp) in inputs.iter().enumerate() {
        check_finite(i, "weight", inp.weight)?;
        check_finite(i, "mean service time", inp.service.mean())?;
        check_finite(i, "scov", inp.service.scov())?;
        check_finite(i, "drop probability", inp.drop_prob)?;
        if inp.weight <= 0.0 {
            return Err(Error::InvalidSource {
                index: i,
                reason: format!("weight must be positive, got {}", inp.weight),
            });
        }
        if inp.service.mean() <= 0.0 {
            return Err(Error::InvalidSource {
                index: i,
                reason: format!("mean service time must be positive, got {}", inp.service.mean()),
            });
        }
        if inp.drop_prob < 0.0 {
            return Err(Error::InvalidSource {
                index: i,
                reason: format!("drop probability must be >= 0, got {}", inp.drop_prob),
            });
        }
        if inp.drop_prob >= 1.0 {
            return Err(Error::InvalidSource {
                index: i,
                reason: format!("drop probability must be < 1, got {}", inp.drop_prob),
            });
        }
        match inp.service {
            ServiceDistribution::Gamma { scov, .. } if scov <= 0.0 => {
                return Err(Error::InvalidSource {
                    index: i,
                    reason: format!("gamma service requires scov > 0, got {}", scov),
                });
            }
            _ => {}
        }
    }

    let total: f64 = inputs.iter().map(|s| s.weight).sum();
    let already_normalized = (total - 1.0).abs() <= 1e-12;
    let sources = inputs
        .iter()
        .map(|inp| SourceSpec {
            raw_weight: inp.weight,
            weight: if already_normalized { inp.weight } else { inp.weight / total },
            service: inp.service,
            drop_prob: inp.drop_prob,
        })
        .collect();
    Ok(SystemSpec { sources, weight_scale: total })
}

/// Convenience constructor used throughout the tests: equal-weight sources
/// with unit deterministic service and no errors.
pub fn unit_system(n: usize) -> SystemSpec {
    let inputs: Vec<SourceInput> = (0..n)
        .map(|_| SourceInput {
            weight: 1.0,
            service: ServiceDistribution::Deterministic { mean: 1.0 },
            drop_prob: 0.0,
        })
        .collect();
    validate_system(&inputs).expect("unit system is always valid")
}
