//! Reference policies the synthesizers are measured against.
//!
//! Three families: plain round-robin; a greedy insertion search that grows a
//! pattern one slot at a time, keeping whichever insertion drops the system
//! age the most; and the probabilistic scheduler that picks each slot's
//! source i.i.d. with probabilities `r`, whose age metrics have closed forms
//! because the gap between successes of a source is a compound-geometric sum
//! of single-slot service times.

use serde::Serialize;

use crate::analysis::{
    evaluate_pattern, source_aoi, source_paoi, source_utilization, PatternReport, SourceReport,
};
use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::optim::paoi_frequencies;
use crate::pattern::Pattern;

// ── round-robin ─────────────────────────────────────────────────────────────

/// The pattern `1, 2, …, N`.
pub fn round_robin(n_sources: usize) -> Result<Pattern> {
    if n_sources == 0 {
        return Err(Error::EmptySystem);
    }
    Pattern::new((0..n_sources).collect())
}

// ── insertion search ────────────────────────────────────────────────────────

/// Budget for the insertion search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsConfig {
    /// Largest pattern size the search may grow to (≥ N).
    pub max_size: usize,
    /// Stop as soon as a round cannot strictly improve the system age.
    pub stop_early: bool,
}

/// What the insertion search found, plus how much work it did.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InsertionSearchOutcome {
    pub pattern: Pattern,
    pub report: PatternReport,
    /// Number of pattern evaluations performed (N·(i+1) per round at size i).
    pub evaluations: usize,
}

/// Grows a pattern from round-robin by repeated best single insertion.
///
/// Each round evaluates every `(source, position)` insertion into the current
/// size-`i` pattern — `N·(i+1)` evaluations — and adopts the best one (ties:
/// lowest source index, then lowest position), even when it does not improve,
/// unless `stop_early` is set. Returns the best pattern over all rounds,
/// including the starting round-robin.
pub fn insertion_search(system: &SystemSpec, config: &IsConfig) -> Result<InsertionSearchOutcome> {
    let n = system.len();
    if config.max_size < n {
        return Err(Error::BadParameter {
            name: "max_size",
            reason: format!("must be at least the number of sources ({}), got {}", n, config.max_size),
        });
    }
    let mut current = round_robin(n)?;
    let mut current_report = evaluate_pattern(&current, system)?;
    let mut best = (current.clone(), current_report.clone());
    let mut evaluations = 0usize;

    while current.len() < config.max_size {
        let size = current.len();
        let mut round_best: Option<(Pattern, PatternReport)> = None;
        for source in 0..n {
            for position in 0..=size {
                let mut entries = Vec::with_capacity(size + 1);
                entries.extend_from_slice(&current.entries()[..position]);
                entries.push(source);
                entries.extend_from_slice(&current.entries()[position..]);
                let candidate = Pattern::new(entries)?;
                let report = evaluate_pattern(&candidate, system)?;
                evaluations += 1;
                // Strict improvement over the running round best keeps the
                // first (lowest source, lowest position) among ties.
                if round_best.as_ref().is_none_or(|(_, r)| report.system_aoi < r.system_aoi) {
                    round_best = Some((candidate, report));
                }
            }
        }
        let (next, next_report) = round_best.expect("non-empty insertion set");
        if config.stop_early && next_report.system_aoi >= current_report.system_aoi {
            break;
        }
        current = next;
        current_report = next_report;
        if current_report.system_aoi < best.1.system_aoi {
            best = (current.clone(), current_report.clone());
        }
    }

    Ok(InsertionSearchOutcome { pattern: best.0, report: best.1, evaluations })
}

// ── probabilistic scheduling ────────────────────────────────────────────────

/// Per-slot source-selection probabilities: strictly positive, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionProbabilities {
    values: Vec<f64>,
}

impl TransmissionProbabilities {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::BadParameter { name: "probabilities", reason: "empty".into() });
        }
        for (i, &r) in values.iter().enumerate() {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::BadParameter {
                    name: "probabilities",
                    reason: format!("entry {} must be positive, got {}", i + 1, r),
                });
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::BadParameter {
                name: "probabilities",
                reason: format!("must sum to 1, got {}", sum),
            });
        }
        Ok(TransmissionProbabilities { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Gap moments of source `n` under i.i.d. per-slot selection.
///
/// A slot delivers for `n` with probability `β = r_n·u_n`; the number of
/// other slots before the next delivery is geometric, each drawn from the
/// slot mixture conditioned on "not a delivery for n". First two moments of
/// that compound-geometric sum:
/// `s̃ = ((1−β)/β)·μ_Y`, `q̃ = ((1−β)/β)·E[Y²] + 2((1−β)/β)²·μ_Y²`.
pub fn pgaw_gap_moments(
    system: &SystemSpec,
    probs: &TransmissionProbabilities,
    n: usize,
) -> Result<(f64, f64)> {
    if probs.len() != system.len() {
        return Err(Error::BadParameter {
            name: "probabilities",
            reason: format!("expected {} entries, got {}", system.len(), probs.len()),
        });
    }
    let r = probs.values();
    let src = system.source(n);
    let beta = r[n] * src.success_prob();
    let fail_mass = 1.0 - beta;
    if fail_mass <= 0.0 {
        // Single always-successful source: successes are back to back.
        return Ok((0.0, 0.0));
    }
    let mut slot_mean = 0.0;
    let mut slot_second = 0.0;
    for (m, other) in system.sources().iter().enumerate() {
        slot_mean += r[m] * other.mean_service();
        slot_second += r[m] * other.service_second_moment();
    }
    // Remove the delivery outcome's share of source n.
    let y_mean = (slot_mean - beta * src.mean_service()) / fail_mass;
    let y_second = (slot_second - beta * src.service_second_moment()) / fail_mass;
    let ratio = fail_mass / beta; // E[number of in-between slots]
    let gap_mean = ratio * y_mean;
    let gap_second = ratio * y_second + 2.0 * ratio * ratio * y_mean * y_mean;
    Ok((gap_mean, gap_second))
}

/// Closed-form analysis of the probabilistic scheduler.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgawReport {
    pub probabilities: Vec<f64>,
    pub per_source: Vec<SourceReport>,
    pub system_aoi: f64,
    pub system_paoi: f64,
}

/// Evaluates every source under selection probabilities `r`.
pub fn pgaw_evaluate(
    system: &SystemSpec,
    probs: &TransmissionProbabilities,
) -> Result<PgawReport> {
    let mut per_source = Vec::with_capacity(system.len());
    let mut system_aoi = 0.0;
    let mut system_paoi = 0.0;
    for (n, src) in system.sources().iter().enumerate() {
        let (gap_mean, gap_second) = pgaw_gap_moments(system, probs, n)?;
        let variance = (gap_second - gap_mean * gap_mean).max(0.0);
        let s = src.mean_service();
        let report = SourceReport {
            weight: src.weight,
            gap_mean,
            gap_second_moment: gap_second,
            gap_scov: if gap_mean > 0.0 { variance / (gap_mean * gap_mean) } else { 0.0 },
            utilization: source_utilization(s, src.success_prob(), gap_mean),
            mean_aoi: source_aoi(s, src.service_second_moment(), gap_mean, gap_second),
            mean_paoi: source_paoi(s, gap_mean),
        };
        system_aoi += src.weight * report.mean_aoi;
        system_paoi += src.weight * report.mean_paoi;
        per_source.push(report);
    }
    Ok(PgawReport {
        probabilities: probs.values().to_vec(),
        per_source,
        system_aoi,
        system_paoi,
    })
}

/// Which system metric a policy optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    Aoi,
    Paoi,
}

/// Best probabilistic scheduler for the chosen metric.
///
/// Peak age has the closed form `r = f*` (the square-root-law frequencies).
/// Mean age is found by simplex grid search at the given resolution followed
/// by a tenfold-finer local refinement; guarded to N ≤ 4 sources, where the
/// grid stays small.
pub fn pgaw_star(
    system: &SystemSpec,
    metric: Metric,
    resolution: f64,
) -> Result<(TransmissionProbabilities, PgawReport)> {
    match metric {
        Metric::Paoi => {
            let (_, plan) = paoi_frequencies(system)?;
            let probs = TransmissionProbabilities::new(plan.frequencies)?;
            let report = pgaw_evaluate(system, &probs)?;
            Ok((probs, report))
        }
        Metric::Aoi => {
            if system.len() > 4 {
                return Err(Error::BadParameter {
                    name: "pgaw_star",
                    reason: format!(
                        "mean-age grid search supports at most 4 sources, got {}; \
                         use a coarser external search or simulation",
                        system.len()
                    ),
                });
            }
            if !(resolution > 0.0 && resolution <= 0.1) {
                return Err(Error::BadParameter {
                    name: "resolution",
                    reason: format!("must lie in (0, 0.1], got {}", resolution),
                });
            }
            let n = system.len();
            if n == 1 {
                let probs = TransmissionProbabilities::new(vec![1.0])?;
                let report = pgaw_evaluate(system, &probs)?;
                return Ok((probs, report));
            }
            let ticks = (1.0 / resolution).round().max(n as f64) as usize;
            let coarse = search_simplex_grid(system, ticks, None)?;
            // Local refinement: tenfold finer ticks in a ±1-coarse-step box.
            let fine_ticks = ticks * 10;
            let center: Vec<usize> = coarse.0.iter().map(|&k| k * 10).collect();
            let refined = search_simplex_grid(system, fine_ticks, Some((&center, 10)))?;
            let r: Vec<f64> =
                refined.0.iter().map(|&k| k as f64 / fine_ticks as f64).collect();
            let probs = TransmissionProbabilities::new(r)?;
            let report = pgaw_evaluate(system, &probs)?;
            Ok((probs, report))
        }
    }
}

/// Enumerates integer compositions `k` of `ticks` (each entry ≥ 1), scores
/// `r = k/ticks` by system mean age, optionally restricted to a box around
/// `center`. Ties resolve to the lexicographically smallest composition.
fn search_simplex_grid(
    system: &SystemSpec,
    ticks: usize,
    window: Option<(&[usize], usize)>,
) -> Result<(Vec<usize>, f64)> {
    let n = system.len();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut k = vec![0usize; n];
    let mut stack_evaluate = |k: &[usize], best: &mut Option<(Vec<usize>, f64)>| -> Result<()> {
        let r: Vec<f64> = k.iter().map(|&x| x as f64 / ticks as f64).collect();
        let probs = TransmissionProbabilities::new(r)?;
        let report = pgaw_evaluate(system, &probs)?;
        let value = report.system_aoi;
        let replace = match best {
            None => true,
            Some((kb, vb)) => value < *vb || (value == *vb && k < kb.as_slice()),
        };
        if replace {
            *best = Some((k.to_vec(), value));
        }
        Ok(())
    };
    // Depth-first over the first n−1 coordinates; the last takes the rest.
    fn walk(
        depth: usize,
        remaining: usize,
        n: usize,
        ticks: usize,
        window: Option<(&[usize], usize)>,
        k: &mut Vec<usize>,
        eval: &mut dyn FnMut(&[usize], &mut Option<(Vec<usize>, f64)>) -> Result<()>,
        best: &mut Option<(Vec<usize>, f64)>,
    ) -> Result<()> {
        if depth == n - 1 {
            if remaining >= 1 {
                if let Some((center, radius)) = window {
                    let c = center[depth];
                    if remaining + radius < c || remaining > c + radius {
                        return Ok(());
                    }
                }
                k[depth] = remaining;
                eval(k, best)?;
            }
            return Ok(());
        }
        let tail_min = n - 1 - depth; // every later coordinate needs ≥ 1
        let (lo, hi) = match window {
            Some((center, radius)) => {
                let c = center[depth];
                (c.saturating_sub(radius).max(1), (c + radius).min(remaining.saturating_sub(tail_min)))
            }
            None => (1, remaining.saturating_sub(tail_min)),
        };
        let mut v = lo;
        while v <= hi {
            k[depth] = v;
            walk(depth + 1, remaining - v, n, ticks, window, k, eval, best)?;
            v += 1;
        }
        Ok(())
    }
    walk(0, ticks, n, ticks, window, &mut k, &mut stack_evaluate, &mut best)?;
    best.ok_or_else(|| Error::Internal {
        context: format!("simplex grid search found no feasible point at {} ticks", ticks),
    })
}
