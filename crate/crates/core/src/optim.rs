//! Optimal transmission frequencies under the fluid relaxation.
//!
//! Instead of searching patterns directly, the synthesis pipeline first asks:
//! if source `n` could be served any fraction `τ_n` of the time (Σ τ_n = 1),
//! which allocation minimizes the weighted system age? For peak age the
//! answer is closed-form (a square-root law). For mean age the allocation
//! solves a strictly convex program whose KKT conditions reduce to a scalar
//! root-finding problem, handled here by bisection. The optimal utilizations
//! are then converted to per-source transmission frequencies `f_n`
//! (transmissions of `n` per scheduled slot) that the quantizer turns into an
//! integer pattern.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemSpec;

// ── allocation types ────────────────────────────────────────────────────────

/// Fractions of server time per source; strictly positive, summing to one
/// within 1e-10.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilizationVector {
    values: Vec<f64>,
}

impl UtilizationVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::BadParameter { name: "utilization", reason: "empty".into() });
        }
        for (i, &t) in values.iter().enumerate() {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::BadParameter {
                    name: "utilization",
                    reason: format!("entry {} must be positive and finite, got {}", i + 1, t),
                });
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::BadParameter {
                name: "utilization",
                reason: format!("must sum to 1, got {}", sum),
            });
        }
        Ok(UtilizationVector { values })
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

    /// Mean time between successful updates of each source under this
    /// allocation: `s_n / (u_n · τ_n)`.
    pub fn target_periods(&self, system: &SystemSpec) -> Vec<f64> {
        self.values
            .iter()
            .zip(system.sources())
            .map(|(&t, src)| src.mean_service() / (src.success_prob() * t))
            .collect()
    }
}

/// How a frequency plan was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlanKind {
    /// Closed-form peak-age square-root law.
    PaoiClosedForm,
    /// Mean-age convex program solved by bisection.
    AoiFixedPoint,
}

/// Per-source transmission frequencies (slots of `n` per scheduled slot):
/// strictly positive, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyPlan {
    pub frequencies: Vec<f64>,
    pub kind: PlanKind,
}

impl FrequencyPlan {
    pub fn min_frequency(&self) -> f64 {
        self.frequencies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Converts a utilization vector to frequencies: slots are sized by the mean
/// service time, so `f_n ∝ τ_n / s_n`.
fn frequencies_from_utilization(
    tau: &[f64],
    mean_service: &[f64],
    kind: PlanKind,
) -> FrequencyPlan {
    let raw: Vec<f64> = tau.iter().zip(mean_service).map(|(&t, &s)| t / s).collect();
    let total: f64 = raw.iter().sum();
    FrequencyPlan { frequencies: raw.iter().map(|&r| r / total).collect(), kind }
}

// ── peak age: closed form ───────────────────────────────────────────────────

/// Optimal utilizations and frequencies for weighted mean peak age:
/// `τ_n ∝ √(w_n·s_n/u_n)`, hence `f_n ∝ √(w_n/(s_n·u_n))`.
pub fn paoi_frequencies(system: &SystemSpec) -> Result<(UtilizationVector, FrequencyPlan)> {
    let mut tau: Vec<f64> = system
        .sources()
        .iter()
        .map(|src| (src.weight * src.mean_service() / src.success_prob()).sqrt())
        .collect();
    let total: f64 = tau.iter().sum();
    for t in &mut tau {
        *t /= total;
    }
    let mean_service: Vec<f64> = system.sources().iter().map(|s| s.mean_service()).collect();
    let plan = frequencies_from_utilization(&tau, &mean_service, PlanKind::PaoiClosedForm);
    Ok((UtilizationVector::new(tau)?, plan))
}

/// Weighted mean peak age under a utilization allocation:
/// `Σ w_n·s_n/(u_n·τ_n) + Σ w_n·s_n`.
pub fn paoi_objective(system: &SystemSpec, tau: &[f64]) -> Result<f64> {
    if tau.len() != system.len() {
        return Err(Error::BadParameter {
            name: "utilization",
            reason: format!("expected {} entries, got {}", system.len(), tau.len()),
        });
    }
    let mut value = 0.0;
    for (src, &t) in system.sources().iter().zip(tau) {
        if !(t > 0.0) {
            return Err(Error::BadParameter {
                name: "utilization",
                reason: format!("entries must be positive, got {}", t),
            });
        }
        value += src.weight * src.mean_service() / (src.success_prob() * t)
            + src.weight * src.mean_service();
    }
    Ok(value)
}

// ── mean age: convex program ────────────────────────────────────────────────

/// Coefficients of the separable mean-age objective: up to constants,
/// `2·Σ w_n E[Δ_n] ≈ Σ (a_n·τ_n + b_n/τ_n)`, where the gap scovs `c̃_n` enter
/// both terms. `mean_service` is kept so utilizations can be converted to
/// frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AoiCoefficients {
    /// Cost per unit of utilization given to the source: `w·s·u·(c + c̃)`.
    pub a: Vec<f64>,
    /// Cost per unit of *starvation* (inverse utilization): `w·s·(1 + c̃)/u`.
    pub b: Vec<f64>,
    pub mean_service: Vec<f64>,
}

impl AoiCoefficients {
    /// Generic constructor; every `b_n` must be strictly positive (a source
    /// always pays for starvation), every `a_n` finite.
    pub fn new(a: Vec<f64>, b: Vec<f64>, mean_service: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() || a.len() != mean_service.len() {
            return Err(Error::BadParameter {
                name: "aoi_coefficients",
                reason: "a, b and mean_service must be non-empty and equal-length".into(),
            });
        }
        for i in 0..a.len() {
            if !a[i].is_finite()
                || !(b[i] > 0.0)
                || !b[i].is_finite()
                || !(mean_service[i] > 0.0)
            {
                return Err(Error::BadParameter {
                    name: "aoi_coefficients",
                    reason: format!(
                        "entry {}: need finite a, b > 0, s > 0 (got a={}, b={}, s={})",
                        i + 1,
                        a[i],
                        b[i],
                        mean_service[i]
                    ),
                });
            }
        }
        Ok(AoiCoefficients { a, b, mean_service })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Builds the mean-age program for a system given per-source gap scovs
/// (`c̃_n`), typically taken from a previous round's pattern analysis or
/// initialized to the drop probabilities.
pub fn aoi_coefficients(system: &SystemSpec, gap_scov: &[f64]) -> Result<AoiCoefficients> {
    if gap_scov.len() != system.len() {
        return Err(Error::BadParameter {
            name: "gap_scov",
            reason: format!("expected {} entries, got {}", system.len(), gap_scov.len()),
        });
    }
    for (i, &ct) in gap_scov.iter().enumerate() {
        if !(ct >= 0.0) || !ct.is_finite() {
            return Err(Error::BadParameter {
                name: "gap_scov",
                reason: format!("entry {} must be finite and >= 0, got {}", i + 1, ct),
            });
        }
    }
    let mut a = Vec::with_capacity(system.len());
    let mut b = Vec::with_capacity(system.len());
    let mut s = Vec::with_capacity(system.len());
    for (src, &ct) in system.sources().iter().zip(gap_scov) {
        let w = src.weight;
        let sn = src.mean_service();
        let u = src.success_prob();
        a.push(w * sn * u * (src.service_scov() + ct));
        b.push(w * sn * (1.0 + ct) / u);
        s.push(sn);
    }
    AoiCoefficients::new(a, b, s)
}

/// Result of the mean-age fixed point: the scalar root, the optimal
/// utilizations, and the corresponding frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AoiSolution {
    /// Root `x*` of `Σ √(b_n/(a_n − x)) = 1`; equals the common value of
    /// `a_n − b_n/τ_n²` at the optimum (the KKT multiplier up to sign).
    pub root: f64,
    pub utilization: UtilizationVector,
    pub frequencies: FrequencyPlan,
}

/// Solves the mean-age allocation by bisection on
/// `f(x) = Σ √(b_n/(a_n − x)) − 1`, which is strictly increasing on
/// `(−∞, min a_n)` with a unique root. The optimal utilizations are
/// `τ_n = √(b_n/(a_n − x*))`.
pub fn solve_aoi_fixed_point(coeffs: &AoiCoefficients) -> Result<AoiSolution> {
    let a_min = coeffs.a.iter().copied().fold(f64::INFINITY, f64::min);
    let b_max = coeffs.b.iter().copied().fold(0.0f64, f64::max);
    let n = coeffs.len() as f64;

    let excess = |x: f64| -> f64 {
        coeffs.a.iter().zip(&coeffs.b).map(|(&a, &b)| (b / (a - x)).sqrt()).sum::<f64>() - 1.0
    };

    // Upper end: just below the pole at min a_n, where the sum diverges.
    let mut hi = a_min - 1e-12 * a_min.abs().max(1.0);
    let mut hi_gap = 1e-12 * a_min.abs().max(1.0);
    while excess(hi) <= 0.0 {
        hi_gap *= 0.5;
        if hi_gap < f64::MIN_POSITIVE * 1e3 {
            return Err(Error::Internal {
                context: format!(
                    "mean-age bisection could not bracket the root from above (min a = {}, max b = {})",
                    a_min, b_max
                ),
            });
        }
        hi = a_min - hi_gap;
    }
    // Lower end: far enough out that every term is below 1/N.
    let mut offset = (n * n * b_max).max(1.0);
    let mut lo = a_min - offset;
    let mut widenings = 0;
    while excess(lo) >= 0.0 {
        offset *= 2.0;
        lo = a_min - offset;
        widenings += 1;
        if widenings > 200 {
            return Err(Error::Internal {
                context: "mean-age bisection could not bracket the root from below".into(),
            });
        }
    }

    let mut root = 0.5 * (lo + hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket exhausted at f64 resolution
        }
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        root = mid;
        if hi - lo <= 1e-13 * root.abs().max(1.0) {
            break;
        }
    }

    let residual = excess(root);
    if residual.abs() > 1e-10 {
        return Err(Error::Internal {
            context: format!(
                "mean-age bisection residual {} exceeds 1e-10 at root {}",
                residual, root
            ),
        });
    }

    let tau: Vec<f64> =
        coeffs.a.iter().zip(&coeffs.b).map(|(&a, &b)| (b / (a - root)).sqrt()).collect();
    let frequencies =
        frequencies_from_utilization(&tau, &coeffs.mean_service, PlanKind::AoiFixedPoint);
    Ok(AoiSolution { root, utilization: UtilizationVector::new(tau)?, frequencies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{unit_system, validate_system, ServiceDistribution, SourceInput};

    fn det(weight: f64, mean: f64, drop_prob: f64) -> SourceInput {
        SourceInput { weight, service: ServiceDistribution::Deterministic { mean }, drop_prob }
    }

    #[test]
    fn paoi_split_is_even_for_twins() {
        let sys = unit_system(2);
        let (tau, plan) = paoi_frequencies(&sys).unwrap();
        assert_eq!(tau.values(), &[0.5, 0.5]);
        assert_eq!(plan.frequencies, vec![0.5, 0.5]);
        assert!((paoi_objective(&sys, tau.values()).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn paoi_favors_lossy_sources_by_square_root_law() {
        // u = (1, 1/4): the lossy source needs √4 = 2× the frequency.
        let sys = validate_system(&[det(0.5, 1.0, 0.0), det(0.5, 1.0, 0.75)]).unwrap();
        let (_, plan) = paoi_frequencies(&sys).unwrap();
        assert!((plan.frequencies[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((plan.frequencies[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn paoi_weight_skew() {
        // Weights (0.5, 0.25, 0.25), all else equal: f ∝ √w.
        let sys = validate_system(&[det(0.5, 1.0, 0.0), det(0.25, 1.0, 0.0), det(0.25, 1.0, 0.0)])
            .unwrap();
        let (_, plan) = paoi_frequencies(&sys).unwrap();
        let expected = {
            let raw = [0.5f64.sqrt(), 0.5, 0.5];
            let t: f64 = raw.iter().sum();
            [raw[0] / t, raw[1] / t, raw[2] / t]
        };
        for (got, want) in plan.frequencies.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn paoi_closed_form_satisfies_stationarity() {
        let sys = validate_system(&[det(2.0, 3.0, 0.1), det(1.0, 0.5, 0.6), det(4.0, 1.0, 0.0)])
            .unwrap();
        let (tau, _) = paoi_frequencies(&sys).unwrap();
        // w·s/(u·τ²) must be the same for every source.
        let lambda: Vec<f64> = sys
            .sources()
            .iter()
            .zip(tau.values())
            .map(|(src, &t)| src.weight * src.mean_service() / (src.success_prob() * t * t))
            .collect();
        for l in &lambda {
            assert!((l - lambda[0]).abs() <= 1e-9 * lambda[0]);
        }
    }

    #[test]
    fn paoi_objective_rejects_bad_allocations() {
        let sys = unit_system(2);
        assert!(paoi_objective(&sys, &[0.5]).is_err());
        assert!(paoi_objective(&sys, &[1.0, 0.0]).is_err());
        assert!(paoi_objective(&sys, &[1.5, -0.5]).is_err());
    }

    #[test]
    fn aoi_coefficients_match_hand_values() {
        // Unit services, equal weights 0.5. Error-free source: a = 0, b = 0.5.
        // Lossy source (p = 0.5, c̃ = 0.5): a = 0.125, b = 1.5.
        let sys = validate_system(&[det(0.5, 1.0, 0.0), det(0.5, 1.0, 0.5)]).unwrap();
        let coeffs = aoi_coefficients(&sys, &[0.0, 0.5]).unwrap();
        assert_eq!(coeffs.a[0], 0.0);
        assert!((coeffs.b[0] - 0.5).abs() < 1e-15);
        assert!((coeffs.a[1] - 0.125).abs() < 1e-15);
        assert!((coeffs.b[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_single_source() {
        // √(1/−x) = 1 → x = −1, τ = 1.
        let coeffs = AoiCoefficients::new(vec![0.0], vec![1.0], vec![1.0]).unwrap();
        let sol = solve_aoi_fixed_point(&coeffs).unwrap();
        assert!((sol.root + 1.0).abs() < 1e-10);
        assert!((sol.utilization.values()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fixed_point_symmetric_pair() {
        // a = (0,0), b = (1/2,1/2): 2√(1/(−2x)) = 1 → x = −2, τ = (1/2,1/2).
        let coeffs = AoiCoefficients::new(vec![0.0, 0.0], vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let sol = solve_aoi_fixed_point(&coeffs).unwrap();
        assert!((sol.root + 2.0).abs() < 1e-9);
        assert!((sol.utilization.values()[0] - 0.5).abs() < 1e-10);
        assert!((sol.utilization.values()[1] - 0.5).abs() < 1e-10);
        assert_eq!(sol.frequencies.frequencies.len(), 2);
    }

    #[test]
    fn fixed_point_satisfies_kkt_conditions() {
        let coeffs = AoiCoefficients::new(
            vec![0.0, 0.125, 2.3],
            vec![0.5, 1.5, 0.9],
            vec![1.0, 1.0, 2.0],
        )
        .unwrap();
        let sol = solve_aoi_fixed_point(&coeffs).unwrap();
        let tau = sol.utilization.values();
        let total: f64 = tau.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        // a_n − b_n/τ_n² must be constant (= root) across sources.
        for i in 0..3 {
            let multiplier = coeffs.a[i] - coeffs.b[i] / (tau[i] * tau[i]);
            assert!(
                (multiplier - sol.root).abs() <= 1e-8 * sol.root.abs().max(1.0),
                "source {}: {} vs {}",
                i,
                multiplier,
                sol.root
            );
        }
        // Frequencies are utilizations divided by service time, renormalized.
        let raw: Vec<f64> = tau.iter().zip(&coeffs.mean_service).map(|(&t, &s)| t / s).collect();
        let rt: f64 = raw.iter().sum();
        for (f, r) in sol.frequencies.frequencies.iter().zip(&raw) {
            assert!((f - r / rt).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_accepts_all_zero_a() {
        // Error-free deterministic systems have a ≡ 0; x* = −(Σ√b)².
        let b = vec![0.3, 1.1, 0.25, 2.0];
        let expected = -(b.iter().map(|x: &f64| x.sqrt()).sum::<f64>()).powi(2);
        let coeffs =
            AoiCoefficients::new(vec![0.0; 4], b, vec![1.0; 4]).unwrap();
        let sol = solve_aoi_fixed_point(&coeffs).unwrap();
        assert!((sol.root - expected).abs() <= 1e-9 * expected.abs());
    }

    #[test]
    fn coefficient_validation() {
        assert!(AoiCoefficients::new(vec![], vec![], vec![]).is_err());
        assert!(AoiCoefficients::new(vec![0.0], vec![0.0], vec![1.0]).is_err());
        assert!(AoiCoefficients::new(vec![f64::NAN], vec![1.0], vec![1.0]).is_err());
        assert!(AoiCoefficients::new(vec![0.0], vec![1.0], vec![0.0]).is_err());
        let sys = unit_system(2);
        assert!(aoi_coefficients(&sys, &[0.0]).is_err());
        assert!(aoi_coefficients(&sys, &[0.0, -0.1]).is_err());
    }

    #[test]
    fn target_periods_invert_success_rate() {
        let sys = validate_system(&[det(1.0, 2.0, 0.5), det(1.0, 1.0, 0.0)]).unwrap();
        let tau = UtilizationVector::new(vec![0.8, 0.2]).unwrap();
        let periods = tau.target_periods(&sys);
        assert!((periods[0] - 2.0 / (0.5 * 0.8)).abs() < 1e-12);
        assert!((periods[1] - 1.0 / 0.2).abs() < 1e-12);
    }
}
