//! Exact mean age and peak-age analysis of a cyclic pattern.
//!
//! For each source `n` the age process is a sawtooth: it resets to the
//! service time of a successfully delivered update and climbs until the next
//! success. Writing `S` for a service time and `S̃` for the gap between the
//! end of one successful transmission and the start of the next (failed own
//! transmissions plus everything scheduled in between), the stationary means
//! are
//!
//! ```text
//! E[Δ] = (2s² + 4s·s̃ + q + q̃) / (2(s + s̃))        (mean age)
//! E[Φ] = 2s + s̃                                    (mean peak age)
//! ```
//!
//! with `s, q` the first two service moments and `s̃, q̃` the first two gap
//! moments. `s̃` has a short closed form. `q̃` is obtained from the truncated
//! MGF of the gap: conditioned on the success following the `k`-th cyclic
//! appearance of `n`, the gap MGF is a geometric sum over "how many further
//! appearances until a success", which collapses to a numerator/denominator
//! pair of second-order truncations. Both are handled by [`TruncatedMgf`];
//! the quotient-rule expansion at zero yields `q̃` without ever leaving
//! first-two-moment arithmetic.
//!
//! Everything here is O(K) per pattern: sub-pattern moments come from prefix
//! sums, the denominator is shared by all appearances of a source, and the
//! per-appearance numerators satisfy a cyclic one-step recursion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mgf::TruncatedMgf;
use crate::model::{SourceSpec, SystemSpec};
use crate::pattern::Pattern;

// ── sub-pattern moments ─────────────────────────────────────────────────────

/// Mean and variance of the total service time of one sub-pattern (the
/// entries strictly between two consecutive cyclic appearances of a source).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapMoment {
    pub mean: f64,
    pub variance: f64,
}

impl GapMoment {
    /// Second moment `mean² + variance`.
    pub fn second_moment(&self) -> f64 {
        self.mean * self.mean + self.variance
    }
}

/// Per-source sub-pattern structure of a pattern: for source `n` with `α_n`
/// appearances, `gaps(n)` holds one [`GapMoment`] per appearance, in cyclic
/// order of the appearances.
#[derive(Debug, Clone, PartialEq)]
pub struct SubpatternMoments {
    positions: Vec<Vec<usize>>,
    gaps: Vec<Vec<GapMoment>>,
}

impl SubpatternMoments {
    /// Extracts positions and per-gap aggregate moments in O(K + N) using
    /// prefix sums over the pattern.
    pub fn extract(pattern: &Pattern, system: &SystemSpec) -> Result<Self> {
        let n_sources = system.len();
        pattern.validate_for(n_sources)?;
        let k_total = pattern.len();
        let entries = pattern.entries();

        // prefix[i] = sum over entries < i of (mean, variance).
        let mut prefix_mean = vec![0.0f64; k_total + 1];
        let mut prefix_var = vec![0.0f64; k_total + 1];
        for (i, &e) in entries.iter().enumerate() {
            let src = system.source(e);
            prefix_mean[i + 1] = prefix_mean[i] + src.mean_service();
            prefix_var[i + 1] = prefix_var[i] + src.service_variance();
        }
        let total_mean = prefix_mean[k_total];
        let total_var = prefix_var[k_total];

        let mut positions = vec![Vec::new(); n_sources];
        for (i, &e) in entries.iter().enumerate() {
            positions[e].push(i);
        }

        let span = |from: usize, to: usize| -> GapMoment {
            // Entries in (from, to) cyclically, exclusive of both endpoints.
            if to > from {
                GapMoment {
                    mean: prefix_mean[to] - prefix_mean[from + 1],
                    variance: prefix_var[to] - prefix_var[from + 1],
                }
            } else {
                // Wraps past the end of the cycle.
                GapMoment {
                    mean: total_mean - prefix_mean[from + 1] + prefix_mean[to],
                    variance: total_var - prefix_var[from + 1] + prefix_var[to],
                }
            }
        };

        let mut gaps = Vec::with_capacity(n_sources);
        for pos in &positions {
            let alpha = pos.len();
            let mut g = Vec::with_capacity(alpha);
            for k in 0..alpha {
                let from = pos[k];
                let to = pos[(k + 1) % alpha];
                g.push(span(from, to));
            }
            gaps.push(g);
        }
        Ok(SubpatternMoments { positions, gaps })
    }

    /// Gap moments of source `n`, one per appearance.
    pub fn gaps(&self, n: usize) -> &[GapMoment] {
        &self.gaps[n]
    }

    /// Slot indices at which source `n` appears.
    pub fn positions(&self, n: usize) -> &[usize] {
        &self.positions[n]
    }

    /// The sources inside gap `k` of source `n`, in slot order. `pattern`
    /// must be the pattern this structure was extracted from.
    pub fn gap_sources(&self, pattern: &Pattern, n: usize, k: usize) -> Vec<usize> {
        let pos = &self.positions[n];
        let alpha = pos.len();
        let from = pos[k];
        let to = pos[(k + 1) % alpha];
        let entries = pattern.entries();
        let mut out = Vec::new();
        let mut i = (from + 1) % entries.len();
        while i != to {
            out.push(entries[i]);
            i = (i + 1) % entries.len();
        }
        out
    }
}

// ── gap moments via truncated expansions ────────────────────────────────────

/// Second-order expansion of the gap distribution of one source: numerator
/// per appearance and the shared denominator of the geometric sum, both
/// expanded around zero. Exposed for diagnostics and cross-checks; most
/// callers want [`gap_moments`].
#[derive(Debug, Clone, PartialEq)]
pub struct GapExpansion {
    /// Escape mass `1 − p^α` (from the computed cycle product, so the
    /// numerator consistency check is exact with respect to it).
    pub kappa: f64,
    /// `N_k`: one truncation per appearance; constant term must equal kappa.
    pub numerator: Vec<TruncatedMgf>,
    /// Shared denominator `D = 1 − (p·G)^α·Π_k G_k`; constant term is kappa.
    pub denominator: TruncatedMgf,
}

/// Builds the gap expansion of one source from its per-appearance sub-pattern
/// moments. O(α) truncated-poly operations: the full-cycle product is formed
/// once, the last appearance's numerator is accumulated directly, and the
/// remaining numerators follow the cyclic recursion
/// `N_k/u = G_k·(1 + p·G·N_{k+1}/u − cycle)`.
pub fn gap_expansion(source: &SourceSpec, gaps: &[GapMoment]) -> Result<GapExpansion> {
    let alpha = gaps.len();
    if alpha == 0 {
        return Err(Error::Internal {
            context: "gap expansion requested for a source with no appearances".into(),
        });
    }
    let u = source.success_prob();
    let p = source.drop_prob;
    let own = TruncatedMgf::from_moments(source.mean_service(), source.service_second_moment());
    let retry = own.scale(p); // p·G: one failed own transmission per extra lap

    let gap_mgf: Vec<TruncatedMgf> =
        gaps.iter().map(|g| TruncatedMgf::from_moments(g.mean, g.second_moment())).collect();

    // Full-cycle factor (p·G)^α · Π_k G_k, interleaved to keep magnitudes tame.
    let mut cycle = TruncatedMgf::ONE;
    for g in &gap_mgf {
        cycle = cycle * retry * *g;
    }
    let kappa = 1.0 - cycle.g0;
    let denominator = TruncatedMgf::ONE - cycle;

    // Last appearance directly: Σ_{j=1..α} (p·G)^{j−1} Π_{l=1..j} G_{k+l−1}.
    let last = alpha - 1;
    let mut scaled = vec![TruncatedMgf::ZERO; alpha];
    let mut acc = gap_mgf[last];
    let mut total = acc;
    for j in 2..=alpha {
        acc = acc * retry * gap_mgf[(last + j - 1) % alpha];
        total = total + acc;
    }
    scaled[last] = total;
    for k in (0..last).rev() {
        scaled[k] = gap_mgf[k] * (TruncatedMgf::ONE + retry * scaled[k + 1] - cycle);
    }
    let numerator: Vec<TruncatedMgf> = scaled.iter().map(|m| m.scale(u)).collect();

    for (k, nk) in numerator.iter().enumerate() {
        if (nk.g0 - kappa).abs() > 1e-9 {
            return Err(Error::Internal {
                context: format!(
                    "gap numerator mass drifted: appearance {} has N(0) = {:.17} but 1 - p^alpha = {:.17} \
                     (p = {}, alpha = {}, per-appearance masses {:?})",
                    k,
                    nk.g0,
                    kappa,
                    p,
                    alpha,
                    numerator.iter().map(|n| n.g0).collect::<Vec<_>>()
                ),
            });
        }
    }
    Ok(GapExpansion { kappa, numerator, denominator })
}

/// First two moments (and derived scov) of a source's gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub scov: f64,
}

/// Closed-form gap mean: `s̃ = (p·s + avg_k s_{n,k}) / u`. The failed own
/// transmissions contribute `p·s/u` in expectation; each appearance's
/// sub-pattern contributes its mean once per lap.
pub fn gap_mean_closed_form(source: &SourceSpec, gaps: &[GapMoment]) -> f64 {
    let alpha = gaps.len() as f64;
    let avg: f64 = gaps.iter().map(|g| g.mean).sum::<f64>() / alpha;
    (source.drop_prob * source.mean_service() + avg) / source.success_prob()
}

/// Gap mean recovered from the expansion's first derivative,
/// `avg_k (a_k − c)/κ`. Agrees with [`gap_mean_closed_form`] to rounding;
/// kept as an independent route for consistency tests.
pub fn gap_mean_derivative_route(exp: &GapExpansion) -> f64 {
    let c = exp.denominator.g1;
    let sum: f64 = exp.numerator.iter().map(|n| (n.g1 - c) / exp.kappa).sum();
    sum / exp.numerator.len() as f64
}

/// Gap second moment from the quotient-rule expansion of `N_k/D` at zero,
/// averaged over the appearances:
/// `q̃ = avg_k [ 2c(c − a_k)/κ² + 2(b_k − d)/κ ]`.
pub fn gap_second_moment_from_expansion(exp: &GapExpansion) -> f64 {
    let kappa = exp.kappa;
    let c = exp.denominator.g1;
    let d = exp.denominator.g2;
    let sum: f64 = exp
        .numerator
        .iter()
        .map(|n| 2.0 * c * (c - n.g1) / (kappa * kappa) + 2.0 * (n.g2 - d) / kappa)
        .sum();
    sum / exp.numerator.len() as f64
}

/// Computes all gap moments of one source. Variance is clamped at zero: the
/// analytical `q̃ − s̃²` can dip a few ulps negative for degenerate gaps.
pub fn gap_moments(source: &SourceSpec, gaps: &[GapMoment]) -> Result<GapMoments> {
    let exp = gap_expansion(source, gaps)?;
    let mean = gap_mean_closed_form(source, gaps);
    let second_moment = gap_second_moment_from_expansion(&exp);
    let variance = (second_moment - mean * mean).max(0.0);
    let scov = if mean > 0.0 { variance / (mean * mean) } else { 0.0 };
    Ok(GapMoments { mean, second_moment, variance, scov })
}

// ── per-source and system ages ──────────────────────────────────────────────

/// Stationary mean age of one source from its service and gap moments.
/// Requires `s + s̃ > 0` (guaranteed for any valid source).
pub fn source_aoi(s: f64, q: f64, gap_mean: f64, gap_second_moment: f64) -> f64 {
    (2.0 * s * s + 4.0 * s * gap_mean + q + gap_second_moment) / (2.0 * (s + gap_mean))
}

/// Stationary mean peak age of one source.
pub fn source_paoi(s: f64, gap_mean: f64) -> f64 {
    2.0 * s + gap_mean
}

/// Long-run fraction of server time spent on this source, including its
/// failed transmissions: `(s/u) / (s + s̃)`.
pub fn source_utilization(s: f64, u: f64, gap_mean: f64) -> f64 {
    (s / u) / (s + gap_mean)
}

/// Analysis results for one source under a fixed schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceReport {
    /// Normalized weight used in the system aggregates.
    pub weight: f64,
    pub gap_mean: f64,
    pub gap_second_moment: f64,
    pub gap_scov: f64,
    pub utilization: f64,
    pub mean_aoi: f64,
    pub mean_paoi: f64,
}

/// Full analysis of a pattern against a system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternReport {
    pub pattern: Pattern,
    /// `α_n`: appearances of each source per cycle.
    pub appearance_counts: Vec<usize>,
    pub per_source: Vec<SourceReport>,
    /// Weighted mean age `Σ w_n E[Δ_n]` (normalized weights).
    pub system_aoi: f64,
    /// Weighted mean peak age `Σ w_n E[Φ_n]`.
    pub system_paoi: f64,
}

impl PatternReport {
    /// Realized share of slots per source, `α_n / K`.
    pub fn realized_frequencies(&self) -> Vec<f64> {
        let k = self.pattern.len() as f64;
        self.appearance_counts.iter().map(|&a| a as f64 / k).collect()
    }
}

/// Evaluates a feasible pattern: per-source gap moments, ages, utilizations,
/// and the weighted system aggregates. O(K + N).
pub fn evaluate_pattern(pattern: &Pattern, system: &SystemSpec) -> Result<PatternReport> {
    let sub = SubpatternMoments::extract(pattern, system)?;
    let mut per_source = Vec::with_capacity(system.len());
    let mut system_aoi = 0.0;
    let mut system_paoi = 0.0;
    for (n, src) in system.sources().iter().enumerate() {
        let gm = gap_moments(src, sub.gaps(n))?;
        let s = src.mean_service();
        let q = src.service_second_moment();
        let mean_aoi = source_aoi(s, q, gm.mean, gm.second_moment);
        let mean_paoi = source_paoi(s, gm.mean);
        let report = SourceReport {
            weight: src.weight,
            gap_mean: gm.mean,
            gap_second_moment: gm.second_moment,
            gap_scov: gm.scov,
            utilization: source_utilization(s, src.success_prob(), gm.mean),
            mean_aoi,
            mean_paoi,
        };
        system_aoi += src.weight * mean_aoi;
        system_paoi += src.weight * mean_paoi;
        per_source.push(report);
    }
    Ok(PatternReport {
        pattern: pattern.clone(),
        appearance_counts: pattern.appearance_counts(system.len()),
        per_source,
        system_aoi,
        system_paoi,
    })
}
