//! Pattern synthesis: from fractional frequencies to concrete cyclic
//! schedules.
//!
//! The pipeline has two mechanical stages and two policies built on them:
//!
//! 1. **Quantization** — a fractional frequency plan `f` becomes integer
//!    appearance counts `K_n` over a cycle of length `K = ⌈(1+ε)/f_min⌉`,
//!    rounding by largest fractional part so that `Σ K_n = K` and every
//!    `|K_n − K·f_n| < 1`. The oversampling knob `ε ≥ 0` trades cycle length
//!    for quantization accuracy.
//! 2. **Spreading** — the counts are laid out as evenly as possible by a
//!    deficit round-robin: each source owns a deficit counter that fills in
//!    proportion to its count, the next slot goes to whoever would fill up
//!    first, and the chosen counter resets. Even spacing matters because age
//!    depends on the *second* moment of the gaps, not just their mean.
//!
//! On top: the peak-age synthesizer takes the closed-form frequencies and
//! runs the two stages once; the mean-age synthesizer iterates, because its
//! optimal frequencies depend on gap variability (`c̃`) that is only known
//! once a pattern exists — so it bootstraps `c̃` from the drop probabilities,
//! synthesizes candidate patterns across an `ε` grid, re-measures `c̃` on the
//! best candidate, and repeats.

use rand::prelude::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{evaluate_pattern, PatternReport};
use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::optim::{
    aoi_coefficients, paoi_frequencies, solve_aoi_fixed_point, FrequencyPlan, UtilizationVector,
};
use crate::pattern::Pattern;

// ── stage 1: quantization ───────────────────────────────────────────────────

/// Integer appearance counts per source over one cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedPlan {
    /// `K_n ≥ 1` appearances per source.
    pub counts: Vec<usize>,
    /// Cycle length `K = Σ counts`.
    pub total: usize,
    /// Oversampling parameter this plan was built with.
    pub epsilon: f64,
}

impl QuantizedPlan {
    /// Realized frequencies `K_n / K`.
    pub fn realized_frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&k| k as f64 / self.total as f64).collect()
    }
}

/// Ceiling with a snap guard: values within a relative 1e-9 of an integer are
/// treated as that integer, so `(1+2)/0.3` quantizes like the exact 10 rather
/// than the f64 10.0000000000000004.
fn snapped_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Quantizes a frequency plan: `K = ⌈(1+ε)/f_min⌉` slots, largest-fractional-
/// part rounding, ties by lowest source index.
pub fn quantize_frequencies(plan: &FrequencyPlan, epsilon: f64) -> Result<QuantizedPlan> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::BadParameter {
            name: "epsilon",
            reason: format!("must be finite and >= 0, got {}", epsilon),
        });
    }
    let f = &plan.frequencies;
    if f.is_empty() {
        return Err(Error::BadParameter { name: "frequencies", reason: "empty".into() });
    }
    for (i, &x) in f.iter().enumerate() {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::BadParameter {
                name: "frequencies",
                reason: format!("entry {} must be positive, got {}", i + 1, x),
            });
        }
    }
    let sum: f64 = f.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::BadParameter {
            name: "frequencies",
            reason: format!("must sum to 1, got {}", sum),
        });
    }

    let f_min = plan.min_frequency();
    let k_total = snapped_ceil((1.0 + epsilon) / f_min) as usize;

    let mut counts: Vec<usize> = Vec::with_capacity(f.len());
    let mut fracs: Vec<(f64, usize)> = Vec::with_capacity(f.len());
    for (i, &fi) in f.iter().enumerate() {
        let scaled = k_total as f64 * fi;
        let floor = scaled.floor();
        counts.push(floor as usize);
        fracs.push((scaled - floor, i));
    }
    let floor_sum: usize = counts.iter().sum();
    let awards = k_total.checked_sub(floor_sum).ok_or_else(|| Error::Internal {
        context: format!("quantizer floor sum {} exceeds cycle length {}", floor_sum, k_total),
    })?;
    // Largest fractional parts get the leftover slots; equal fractions go to
    // the lowest source index.
    fracs.sort_by(|l, r| r.0.partial_cmp(&l.0).unwrap().then(l.1.cmp(&r.1)));
    for &(_, i) in fracs.iter().take(awards) {
        counts[i] += 1;
    }

    let realized: usize = counts.iter().sum();
    if realized != k_total || counts.iter().any(|&k| k == 0) {
        return Err(Error::Internal {
            context: format!(
                "quantizer produced counts {:?} for cycle length {} (frequencies {:?}, epsilon {})",
                counts, k_total, f, epsilon
            ),
        });
    }
    Ok(QuantizedPlan { counts, total: k_total, epsilon })
}

// ── stage 2: deficit round-robin spreading ──────────────────────────────────

/// Tie handling when several sources would fill their deficit equally soon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Avoid repeating the immediately-previous source when another tied
    /// source exists; then lowest index. Fully reproducible.
    Deterministic,
    /// Uniform choice among the tied sources from a seeded generator;
    /// reproducible given the seed.
    Seeded(u64),
}

/// One spreading step: which source was placed and the counter state that
/// justified it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadStep {
    pub source: usize,
    /// Quantum added this round, `(1 − B_m)·K/K_m` of the winner.
    pub quantum: f64,
    /// Winner's deficit right before its reset; 1 up to rounding.
    pub pre_reset_deficit: f64,
}

/// Incremental deficit-round-robin spreader. Most callers use
/// [`spread_pattern`]; the step interface exists so tests can watch the
/// deficit counters evolve.
pub struct DrrSpreader<'a> {
    plan: &'a QuantizedPlan,
    deficits: Vec<f64>,
    emitted: Vec<usize>,
    last: Option<usize>,
    rng: Option<ChaCha8Rng>,
}

impl<'a> DrrSpreader<'a> {
    pub fn new(plan: &'a QuantizedPlan, tie: TieBreak) -> Self {
        let rng = match tie {
            TieBreak::Deterministic => None,
            TieBreak::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        DrrSpreader {
            plan,
            deficits: vec![0.0; plan.counts.len()],
            emitted: Vec::with_capacity(plan.total),
            last: None,
            rng,
        }
    }

    pub fn deficits(&self) -> &[f64] {
        &self.deficits
    }

    pub fn is_complete(&self) -> bool {
        self.emitted.len() == self.plan.total
    }

    /// Places the next slot. Must not be called once complete.
    pub fn step(&mut self) -> SpreadStep {
        debug_assert!(!self.is_complete());
        let k_total = self.plan.total as f64;
        // Time until each source's deficit would fill at its fair rate.
        let mut min_key = f64::INFINITY;
        for (n, &kn) in self.plan.counts.iter().enumerate() {
            let key = (1.0 - self.deficits[n]) * k_total / kn as f64;
            if key < min_key {
                min_key = key;
            }
        }
        let tied: Vec<usize> = self
            .plan
            .counts
            .iter()
            .enumerate()
            .filter(|&(n, &kn)| (1.0 - self.deficits[n]) * k_total / kn as f64 == min_key)
            .map(|(n, _)| n)
            .collect();
        let source = match &mut self.rng {
            Some(rng) => *tied.choose(rng).expect("at least one tied source"),
            None => {
                if tied.len() > 1 && self.last.is_some_and(|l| tied.contains(&l)) {
                    *tied.iter().find(|&&n| Some(n) != self.last).expect("another tied source")
                } else {
                    tied[0]
                }
            }
        };
        let quantum = min_key;
        for (n, &kn) in self.plan.counts.iter().enumerate() {
            self.deficits[n] += quantum * kn as f64 / k_total;
        }
        let pre_reset = self.deficits[source];
        self.deficits[source] = 0.0;
        self.emitted.push(source);
        self.last = Some(source);
        SpreadStep { source, quantum, pre_reset_deficit: pre_reset }
    }

    pub fn finish(mut self) -> Pattern {
        while !self.is_complete() {
            self.step();
        }
        Pattern::new(self.emitted).expect("plans have at least one slot")
    }
}

/// Spreads a quantized plan into a pattern with the deterministic tie-break.
pub fn spread_pattern(plan: &QuantizedPlan) -> Pattern {
    spread_pattern_with(plan, TieBreak::Deterministic)
}

/// Spreads with an explicit tie-break choice.
pub fn spread_pattern_with(plan: &QuantizedPlan, tie: TieBreak) -> Pattern {
    DrrSpreader::new(plan, tie).finish()
}

// ── peak-age synthesizer ────────────────────────────────────────────────────

/// Everything produced on the way from a system to a peak-age pattern.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpmsOutcome {
    pub utilization: UtilizationVector,
    pub frequencies: FrequencyPlan,
    pub quantized: QuantizedPlan,
    pub pattern: Pattern,
    pub report: PatternReport,
}

/// Synthesizes a pattern minimizing weighted mean peak age: closed-form
/// frequencies, quantization at the given `ε`, deficit round-robin spreading.
pub fn spms(system: &SystemSpec, epsilon: f64) -> Result<SpmsOutcome> {
    let (utilization, frequencies) = paoi_frequencies(system)?;
    let quantized = quantize_frequencies(&frequencies, epsilon)?;
    let pattern = spread_pattern(&quantized);
    let report = evaluate_pattern(&pattern, system)?;
    Ok(SpmsOutcome { utilization, frequencies, quantized, pattern, report })
}

// ── mean-age synthesizer ────────────────────────────────────────────────────

/// Search breadth of the mean-age synthesizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamsConfig {
    /// Oversampling grid; every candidate round tries each value.
    pub epsilons: Vec<f64>,
    /// Number of `c̃` refinement rounds.
    pub iterations: usize,
}

impl SamsConfig {
    /// The standard oversampling grid `{0, 0.2, …, 2.0}`.
    pub fn default_epsilons() -> Vec<f64> {
        (0..=10).map(|i| i as f64 * 0.2).collect()
    }

    /// Cheapest variant: single round, no oversampling (grid `{0}`).
    pub fn quick() -> Self {
        SamsConfig { epsilons: vec![0.0], iterations: 1 }
    }

    /// Single round over the full `ε` grid.
    pub fn single_round() -> Self {
        SamsConfig { epsilons: Self::default_epsilons(), iterations: 1 }
    }

    /// Full grid with three `c̃` refinement rounds.
    pub fn refined() -> Self {
        SamsConfig { epsilons: Self::default_epsilons(), iterations: 3 }
    }

    fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::BadParameter { name: "epsilons", reason: "empty grid".into() });
        }
        for &e in &self.epsilons {
            if !(e >= 0.0) || !e.is_finite() {
                return Err(Error::BadParameter {
                    name: "epsilons",
                    reason: format!("must be finite and >= 0, got {}", e),
                });
            }
        }
        if self.iterations == 0 {
            return Err(Error::BadParameter {
                name: "iterations",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

impl Default for SamsConfig {
    fn default() -> Self {
        Self::refined()
    }
}

/// One candidate's scoreboard entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamsCandidate {
    pub epsilon: f64,
    pub pattern_len: usize,
    pub system_aoi: f64,
    pub system_paoi: f64,
}

/// All candidates of one refinement round plus which one drove the next
/// round's `c̃` update.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamsRound {
    pub candidates: Vec<SamsCandidate>,
    pub chosen: usize,
}

/// Complete audit trail of a mean-age synthesis run.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct SamsTrace {
    pub rounds: Vec<SamsRound>,
}

/// Result of the mean-age synthesizer: the best pattern over every round and
/// `ε`, its report, and the full trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamsOutcome {
    pub pattern: Pattern,
    pub report: PatternReport,
    pub trace: SamsTrace,
}

/// Strict "is left better": lower system age, then shorter cycle, then
/// lexicographically smaller pattern. Total and deterministic.
fn better(left: &(Pattern, PatternReport), right: &(Pattern, PatternReport)) -> bool {
    if left.1.system_aoi != right.1.system_aoi {
        return left.1.system_aoi < right.1.system_aoi;
    }
    if left.0.len() != right.0.len() {
        return left.0.len() < right.0.len();
    }
    left.0 < right.0
}

/// Synthesizes a pattern minimizing weighted mean age.
///
/// The gap scovs `c̃` start at the drop probabilities (each lap past a failed
/// source is one geometric retry), and each round re-derives them from the
/// round's best candidate. The returned pattern is the best candidate seen
/// anywhere, which makes widening the `ε` grid (at one round) or adding
/// rounds (same grid) monotone improvements.
pub fn sams(system: &SystemSpec, config: &SamsConfig) -> Result<SamsOutcome> {
    config.validate()?;
    let mut gap_scov: Vec<f64> = system.sources().iter().map(|s| s.drop_prob).collect();
    let mut best: Option<(Pattern, PatternReport)> = None;
    let mut trace = SamsTrace::default();

    for _ in 0..config.iterations {
        let coeffs = aoi_coefficients(system, &gap_scov)?;
        let sol = solve_aoi_fixed_point(&coeffs)?;
        let mut round_best: Option<(usize, Pattern, PatternReport)> = None;
        let mut summaries = Vec::with_capacity(config.epsilons.len());
        for (idx, &eps) in config.epsilons.iter().enumerate() {
            let quant = quantize_frequencies(&sol.frequencies, eps)?;
            let pattern = spread_pattern(&quant);
            let report = evaluate_pattern(&pattern, system)?;
            summaries.push(SamsCandidate {
                epsilon: eps,
                pattern_len: pattern.len(),
                system_aoi: report.system_aoi,
                system_paoi: report.system_paoi,
            });
            let replaces_round_best = match &round_best {
                None => true,
                Some((_, p, r)) => {
                    better(&(pattern.clone(), report.clone()), &(p.clone(), r.clone()))
                }
            };
            if replaces_round_best {
                round_best = Some((idx, pattern.clone(), report.clone()));
            }
            let replaces_best = match &best {
                None => true,
                Some(b) => better(&(pattern.clone(), report.clone()), b),
            };
            if replaces_best {
                best = Some((pattern, report));
            }
        }
        let (chosen, _, chosen_report) = round_best.expect("at least one epsilon");
        gap_scov = chosen_report.per_source.iter().map(|s| s.gap_scov).collect();
        trace.rounds.push(SamsRound { candidates: summaries, chosen });
    }

    let (pattern, report) = best.expect("at least one round");
    Ok(SamsOutcome { pattern, report, trace })
}
