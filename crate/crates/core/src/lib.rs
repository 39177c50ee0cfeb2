//! Analytical evaluation and synthesis of cyclic transmission schedules that
//! keep status updates fresh.
//!
//! A monitor tracks N sources over a shared channel. Each source, when
//! scheduled, samples a fresh update (generate-at-will), transmits it for a
//! random service time, and loses it with a known drop probability. The
//! staleness of source n at the monitor is its age process Δ_n(t): it grows
//! linearly and resets to the delivered packet's own service time on every
//! successful delivery. This crate computes the long-run mean age and mean
//! peak age of every source under
//!
//! * a **cyclic schedule** — a fixed pattern of source indices repeated
//!   forever ([`analysis::evaluate_pattern`]), in closed form, exactly;
//! * a **probabilistic schedule** — each slot picks a source i.i.d.
//!   ([`baselines::pgaw_evaluate`]).
//!
//! On top of the evaluators sit optimizers and synthesizers:
//!
//! * [`optim`] finds the ideal (unquantized) per-source scheduling
//!   frequencies: a closed form for weighted peak age, a one-dimensional
//!   fixed-point solve for weighted age;
//! * [`synthesis`] rounds those frequencies to integer slot counts and
//!   spreads them into an evenly interleaved pattern (deficit round-robin),
//!   with a single-pass pipeline for peak age ([`synthesis::spms`]) and an
//!   iterated pipeline for mean age ([`synthesis::sams`]);
//! * [`baselines`] provides round-robin, a greedy insertion search, and the
//!   best probabilistic scheduler, for comparison;
//! * [`sim`] replays the slot process in Monte Carlo and scores the closed
//!   forms against batch-means error bars.
//!
//! Entries in patterns are 0-based in the API and 1-based in the text format
//! (`"1,2,1,3"`), matching how schedules are usually written down.

pub mod analysis;
pub mod baselines;
pub mod error;
pub mod mgf;
pub mod model;
pub mod optim;
pub mod pattern;
pub mod sim;
pub mod synthesis;

pub use analysis::{evaluate_pattern, PatternReport, SourceReport};
pub use baselines::{
    insertion_search, pgaw_evaluate, pgaw_star, round_robin, InsertionSearchOutcome, IsConfig,
    Metric, PgawReport, TransmissionProbabilities,
};
pub use error::{Error, Result};
pub use model::{validate_system, ServiceDistribution, SourceInput, SourceSpec, SystemSpec};
pub use optim::{
    aoi_coefficients, paoi_frequencies, paoi_objective, solve_aoi_fixed_point, AoiCoefficients,
    AoiSolution, FrequencyPlan, PlanKind, UtilizationVector,
};
pub use pattern::Pattern;
pub use sim::{
    agreement, simulate_cyclic, simulate_probabilistic, Agreement, AgreementRow, SimConfig,
    SimEstimates, SourceEstimate, AGREEMENT_Z_LIMIT,
};
pub use synthesis::{
    quantize_frequencies, sams, spms, spread_pattern, spread_pattern_with, QuantizedPlan,
    SamsConfig, SamsOutcome, SamsTrace, SpmsOutcome, TieBreak,
};
