//! Discrete-event Monte Carlo check of the closed-form age metrics.
//!
//! The simulator replays the slot process literally: the scheduler picks a
//! source (by cyclic pattern or i.i.d. probabilities), the source samples a
//! service duration, the channel keeps the packet with its success
//! probability, and the receiver's age resets to the packet's own service
//! time on every delivery. Age curves are integrated exactly — each
//! inter-delivery interval contributes a trapezoid `elapsed·s_prev +
//! elapsed²/2` — so the only noise is statistical, never from time-stepping.
//!
//! Standard errors come from the method of batch means: recorded samples are
//! grouped into ≥ 30 fixed-size consecutive batches per source, and the
//! spread of batch values estimates the variance of the (autocorrelated)
//! series. Point estimates use every recorded sample, not just complete
//! batches.
//!
//! # Randomness contract
//!
//! All randomness derives from one `u64` seed through `ChaCha8Rng` counter
//! streams, so results are reproducible across runs and platforms:
//!
//! * stream `n + 1` belongs to source `n` (0-based): each transmission
//!   attempt draws the service duration first (deterministic services
//!   consume no randomness), then one uniform in `[0, 1)`, delivering iff
//!   that uniform is `< 1 − drop_prob`;
//! * stream `0` belongs to the probabilistic scheduler: one uniform per
//!   slot, mapped to a source through the cumulative probabilities in index
//!   order. Cyclic schedules never touch stream 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::Serialize;

use crate::analysis::SourceReport;
use crate::baselines::TransmissionProbabilities;
use crate::error::{Error, Result};
use crate::model::{ServiceDistribution, SystemSpec};
use crate::pattern::Pattern;

// ── configuration ───────────────────────────────────────────────────────────

/// Run length, warm-up, and seeding for one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Stop once every source has accumulated this many successful
    /// deliveries (warm-up included).
    pub target: u64,
    /// Successful deliveries per source to discard before recording. At
    /// least one delivery is always discarded — it initializes the age
    /// process.
    pub warmup: u64,
    pub seed: u64,
    /// Keep every recorded peak-age sample (for export); costs memory.
    pub record_paoi_samples: bool,
}

impl SimConfig {
    /// Warm-up actually applied: the first delivery always initializes.
    pub fn effective_warmup(&self) -> u64 {
        self.warmup.max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.target <= self.effective_warmup() {
            return Err(Error::BadParameter {
                name: "target",
                reason: format!(
                    "must exceed the effective warm-up ({}), got {}",
                    self.effective_warmup(),
                    self.target
                ),
            });
        }
        Ok(())
    }

    /// Samples per batch: at least 30 complete batches fit under the target.
    fn batch_size(&self) -> u64 {
        ((self.target - self.effective_warmup()) / 30).max(1)
    }
}

// ── estimates ───────────────────────────────────────────────────────────────

/// Point estimates and batch-means standard errors for one source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceEstimate {
    pub aoi: f64,
    pub aoi_se: f64,
    pub paoi: f64,
    pub paoi_se: f64,
    /// Successful deliveries over the whole run, warm-up included.
    pub successes: u64,
    /// Transmission attempts over the whole run (failures included).
    pub attempts: u64,
}

/// Full simulation output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimates {
    pub per_source: Vec<SourceEstimate>,
    pub system_aoi: f64,
    pub system_aoi_se: f64,
    pub system_paoi: f64,
    pub system_paoi_se: f64,
    pub total_slots: u64,
    /// Recorded peak-age samples per source, when requested.
    pub paoi_samples: Option<Vec<Vec<f64>>>,
}

// ── service sampling ────────────────────────────────────────────────────────

enum ServiceSampler {
    Const(f64),
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
}

impl ServiceSampler {
    fn new(dist: &ServiceDistribution) -> Result<Self> {
        match *dist {
            ServiceDistribution::Deterministic { mean } => Ok(ServiceSampler::Const(mean)),
            ServiceDistribution::Exponential { mean } => Exp::new(1.0 / mean)
                .map(ServiceSampler::Exp)
                .map_err(|e| Error::Internal { context: format!("exponential sampler: {}", e) }),
            ServiceDistribution::Gamma { mean, scov } => {
                // Shape/scale so that E[S] = mean and Var[S]/E[S]² = scov.
                let shape = 1.0 / scov;
                let scale = mean * scov;
                Gamma::new(shape, scale)
                    .map(ServiceSampler::Gamma)
                    .map_err(|e| Error::Internal { context: format!("gamma sampler: {}", e) })
            }
        }
    }

    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ServiceSampler::Const(m) => *m,
            ServiceSampler::Exp(d) => d.sample(rng),
            ServiceSampler::Gamma(d) => d.sample(rng),
        }
    }
}

// ── batch means ─────────────────────────────────────────────────────────────

/// Ratio series with batch-means error bars. Plain sample means are the
/// special case where every denominator is 1.
struct RatioBatches {
    batch: u64,
    total_num: f64,
    total_den: f64,
    cur_num: f64,
    cur_den: f64,
    cur_count: u64,
    values: Vec<f64>,
}

impl RatioBatches {
    fn new(batch: u64) -> Self {
        RatioBatches {
            batch,
            total_num: 0.0,
            total_den: 0.0,
            cur_num: 0.0,
            cur_den: 0.0,
            cur_count: 0,
            values: Vec::new(),
        }
    }

    #[inline]
    fn push(&mut self, num: f64, den: f64) {
        self.total_num += num;
        self.total_den += den;
        self.cur_num += num;
        self.cur_den += den;
        self.cur_count += 1;
        if self.cur_count == self.batch {
            self.values.push(self.cur_num / self.cur_den);
            self.cur_num = 0.0;
            self.cur_den = 0.0;
            self.cur_count = 0;
        }
    }

    fn point(&self) -> f64 {
        if self.total_den > 0.0 { self.total_num / self.total_den } else { f64::NAN }
    }

    /// Standard error of the point estimate from complete-batch spread;
    /// infinite when fewer than two batches completed.
    fn standard_error(&self) -> f64 {
        let b = self.values.len();
        if b < 2 {
            return f64::INFINITY;
        }
        let mean: f64 = self.values.iter().sum::<f64>() / b as f64;
        let ss: f64 = self.values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / ((b * (b - 1)) as f64)).sqrt()
    }
}

// ── the simulation loop ─────────────────────────────────────────────────────

struct SourceState {
    rng: ChaCha8Rng,
    sampler: ServiceSampler,
    success_prob: f64,
    attempts: u64,
    successes: u64,
    warmup_left: u64,
    last_completion: f64,
    last_service: f64,
    aoi: RatioBatches,
    paoi: RatioBatches,
    samples: Option<Vec<f64>>,
}

impl SourceState {
    /// Runs one transmission slot ending at the new clock value; returns the
    /// service duration so the caller can advance the clock first.
    #[inline]
    fn attempt(&mut self, clock: &mut f64) {
        let service = self.sampler.draw(&mut self.rng);
        *clock += service;
        self.attempts += 1;
        let delivered = self.rng.random::<f64>() < self.success_prob;
        if !delivered {
            return;
        }
        self.successes += 1;
        if self.warmup_left > 0 {
            self.warmup_left -= 1;
        } else {
            let elapsed = *clock - self.last_completion;
            let peak = self.last_service + elapsed;
            self.aoi.push(elapsed * self.last_service + 0.5 * elapsed * elapsed, elapsed);
            self.paoi.push(peak, 1.0);
            if let Some(samples) = self.samples.as_mut() {
                samples.push(peak);
            }
        }
        self.last_completion = *clock;
        self.last_service = service;
    }
}

fn prepare_states(system: &SystemSpec, cfg: &SimConfig) -> Result<Vec<SourceState>> {
    cfg.validate()?;
    let batch = cfg.batch_size();
    system
        .sources()
        .iter()
        .enumerate()
        .map(|(n, src)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(n as u64 + 1);
            Ok(SourceState {
                rng,
                sampler: ServiceSampler::new(&src.service)?,
                success_prob: src.success_prob(),
                attempts: 0,
                successes: 0,
                warmup_left: cfg.effective_warmup(),
                last_completion: 0.0,
                last_service: 0.0,
                aoi: RatioBatches::new(batch),
                paoi: RatioBatches::new(batch),
                samples: cfg.record_paoi_samples.then(Vec::new),
            })
        })
        .collect()
}

fn collect_estimates(
    system: &SystemSpec,
    states: Vec<SourceState>,
    total_slots: u64,
    record_samples: bool,
) -> SimEstimates {
    let mut per_source = Vec::with_capacity(states.len());
    let mut samples = record_samples.then(Vec::new);
    let mut system_aoi = 0.0;
    let mut system_paoi = 0.0;
    let mut aoi_var = 0.0;
    let mut paoi_var = 0.0;
    for (state, src) in states.into_iter().zip(system.sources()) {
        let est = SourceEstimate {
            aoi: state.aoi.point(),
            aoi_se: state.aoi.standard_error(),
            paoi: state.paoi.point(),
            paoi_se: state.paoi.standard_error(),
            successes: state.successes,
            attempts: state.attempts,
        };
        system_aoi += src.weight * est.aoi;
        system_paoi += src.weight * est.paoi;
        aoi_var += (src.weight * est.aoi_se).powi(2);
        paoi_var += (src.weight * est.paoi_se).powi(2);
        per_source.push(est);
        if let Some(all) = samples.as_mut() {
            all.push(state.samples.unwrap_or_default());
        }
    }
    SimEstimates {
        per_source,
        system_aoi,
        system_aoi_se: aoi_var.sqrt(),
        system_paoi,
        system_paoi_se: paoi_var.sqrt(),
        total_slots,
        paoi_samples: samples,
    }
}

/// Simulates the cyclic schedule `pattern` until every source has `target`
/// successful deliveries.
pub fn simulate_cyclic(
    system: &SystemSpec,
    pattern: &Pattern,
    cfg: &SimConfig,
) -> Result<SimEstimates> {
    pattern.validate_for(system.len())?;
    let mut states = prepare_states(system, cfg)?;
    let mut clock = 0.0_f64;
    let mut total_slots = 0u64;
    let mut done = 0usize;
    let n_sources = system.len();
    'outer: loop {
        for &entry in pattern.entries() {
            let state = &mut states[entry];
            state.attempt(&mut clock);
            total_slots += 1;
            if state.successes == cfg.target {
                done += 1;
                if done == n_sources {
                    break 'outer;
                }
            }
        }
    }
    Ok(collect_estimates(system, states, total_slots, cfg.record_paoi_samples))
}

/// Simulates the probabilistic scheduler until every source has `target`
/// successful deliveries.
pub fn simulate_probabilistic(
    system: &SystemSpec,
    probs: &TransmissionProbabilities,
    cfg: &SimConfig,
) -> Result<SimEstimates> {
    if probs.len() != system.len() {
        return Err(Error::BadParameter {
            name: "probabilities",
            reason: format!("expected {} entries, got {}", system.len(), probs.len()),
        });
    }
    let mut states = prepare_states(system, cfg)?;
    let mut scheduler = ChaCha8Rng::seed_from_u64(cfg.seed);
    scheduler.set_stream(0);
    let r = probs.values();
    let mut clock = 0.0_f64;
    let mut total_slots = 0u64;
    let mut done = 0usize;
    let n_sources = system.len();
    while done < n_sources {
        let x: f64 = scheduler.random();
        let mut pick = n_sources - 1;
        let mut cum = 0.0;
        for (m, &rm) in r.iter().enumerate() {
            cum += rm;
            if x < cum {
                pick = m;
                break;
            }
        }
        let state = &mut states[pick];
        state.attempt(&mut clock);
        total_slots += 1;
        if state.successes == cfg.target {
            done += 1;
        }
    }
    Ok(collect_estimates(system, states, total_slots, cfg.record_paoi_samples))
}

// ── analytic/empirical agreement ────────────────────────────────────────────

/// Largest |z| still counted as agreement.
pub const AGREEMENT_Z_LIMIT: f64 = 4.0;

/// One metric of one source compared against its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementRow {
    pub source: usize,
    pub metric: &'static str,
    pub analytic: f64,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
}

/// Outcome of an analytic-versus-simulated comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub rows: Vec<AgreementRow>,
    pub worst_abs_z: f64,
    /// Every row within [`AGREEMENT_Z_LIMIT`].
    pub all_within: bool,
}

/// z-score with a guard for (near-)deterministic estimates: when the
/// standard error is numerically zero, exact agreement scores 0 and any real
/// discrepancy scores infinite.
fn z_score(estimate: f64, se: f64, analytic: f64) -> f64 {
    let scale = analytic.abs().max(1.0);
    if se < 1e-12 * scale {
        if (estimate - analytic).abs() <= 1e-9 * scale {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (estimate - analytic) / se
    }
}

/// Scores simulated estimates against per-source closed forms.
pub fn agreement(estimates: &SimEstimates, analytic: &[SourceReport]) -> Result<Agreement> {
    if estimates.per_source.len() != analytic.len() {
        return Err(Error::BadParameter {
            name: "analytic",
            reason: format!(
                "expected {} source reports, got {}",
                estimates.per_source.len(),
                analytic.len()
            ),
        });
    }
    let mut rows = Vec::with_capacity(2 * analytic.len());
    for (n, (est, report)) in estimates.per_source.iter().zip(analytic).enumerate() {
        rows.push(AgreementRow {
            source: n,
            metric: "aoi",
            analytic: report.mean_aoi,
            estimate: est.aoi,
            se: est.aoi_se,
            z: z_score(est.aoi, est.aoi_se, report.mean_aoi),
        });
        rows.push(AgreementRow {
            source: n,
            metric: "paoi",
            analytic: report.mean_paoi,
            estimate: est.paoi,
            se: est.paoi_se,
            z: z_score(est.paoi, est.paoi_se, report.mean_paoi),
        });
    }
    let worst_abs_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let all_within = rows.iter().all(|r| r.z.abs() <= AGREEMENT_Z_LIMIT);
    Ok(Agreement { rows, worst_abs_z, all_within })
}
