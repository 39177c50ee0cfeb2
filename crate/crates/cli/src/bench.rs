//! The `benchmark` and `plotdata` subcommands.
//!
//! `benchmark` runs an experiment family — a one-dimensional sweep over
//! system variants crossed with a fixed policy list — and emits one CSV row
//! per (sweep point, policy). Four canned families ship with the tool:
//!
//! * `fig2` — three deterministic drop-free sources with steep weight skew,
//!   sweeping the third source's mean service time over {0.5, 1, 2, 4, 8};
//! * `fig3` — three deterministic sources with drops (0.1, 0.5, 0.95),
//!   sweeping the third source's weight 1..=10;
//! * `fig4` — randomized: each instance draws 100 unit-service sources with
//!   exponential raw weights and uniform drop rates in [0, 0.9);
//! * `fig5` — three exponential-service sources with drops (0.1, 0.5, 0.6),
//!   sweeping the third source's weight 1..=10, scored for peak age.
//!
//! Custom sweeps come from a config file: a `system` block plus a
//! `benchmark` block naming the swept field and the policy list.
//!
//! Every column except `wall_time_s` is deterministic for a given family,
//! seed, and instance count; rerunning must reproduce the file byte-for-byte
//! once that one informational column is ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use agesched_core::{
    evaluate_pattern, insertion_search, pgaw_star, round_robin, sams, spms, validate_system,
    Error, IsConfig, Metric, Pattern, PatternReport, SamsConfig, ServiceDistribution,
    SourceInput, SystemSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{apply_sweep, ExperimentConfig};
use crate::CliError;

// ── policies ────────────────────────────────────────────────────────────────

/// How large the insertion search may let the pattern grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum IsBudget {
    /// Match the pattern size the refined iterated pipeline produced
    /// at the same sweep point.
    MatchSams3,
    Fixed(usize),
}

fn parse_is_budget(spec: &str) -> Result<IsBudget, CliError> {
    let lower = spec.to_ascii_lowercase();
    if lower == "sams3" {
        return Ok(IsBudget::MatchSams3);
    }
    if let Some(n) = lower.strip_prefix("fixed:") {
        let size: usize = n
            .parse()
            .map_err(|_| CliError::user(format!("bad insertion budget `{}`", spec)))?;
        if size == 0 {
            return Err(CliError::user("insertion budget must be positive".to_string()));
        }
        return Ok(IsBudget::Fixed(size));
    }
    Err(CliError::user(format!(
        "bad insertion budget `{}` (expected `sams3` or `fixed:N`)",
        spec
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Policy {
    RoundRobin,
    Insertion(IsBudget),
    Spms(f64),
    Sams1,
    Sams2,
    Sams3,
    PgawStar(Metric),
}

impl Policy {
    fn display(&self) -> &'static str {
        match self {
            Policy::RoundRobin => "RR",
            Policy::Insertion(_) => "IS",
            Policy::Spms(_) => "SPMS",
            Policy::Sams1 => "SAMS-1",
            Policy::Sams2 => "SAMS-2",
            Policy::Sams3 => "SAMS-3",
            Policy::PgawStar(_) => "P-GAW*",
        }
    }
}

/// Mean-age grid resolution used whenever a probabilistic baseline needs one.
const PGAW_STAR_RESOLUTION: f64 = 0.02;

fn parse_policy(id: &str, budget: IsBudget) -> Result<Policy, CliError> {
    match id.to_ascii_lowercase().as_str() {
        "rr" => Ok(Policy::RoundRobin),
        "is" => Ok(Policy::Insertion(budget)),
        "spms" => Ok(Policy::Spms(2.0)),
        "sams-1" => Ok(Policy::Sams1),
        "sams-2" => Ok(Policy::Sams2),
        "sams-3" => Ok(Policy::Sams3),
        "pgaw-star-aoi" => Ok(Policy::PgawStar(Metric::Aoi)),
        "pgaw-star-paoi" => Ok(Policy::PgawStar(Metric::Paoi)),
        other => Err(CliError::user(format!(
            "unknown policy `{}` (expected rr, is, spms, sams-1, sams-2, sams-3, \
             pgaw-star-aoi, or pgaw-star-paoi)",
            other
        ))),
    }
}

// ── row execution ───────────────────────────────────────────────────────────

/// Per-sweep-point cache so the refined pipeline runs once even when both
/// the SAMS-3 policy and a size-matching insertion budget need it.
struct PointMemo {
    sams3: Option<Result<(Pattern, PatternReport), Error>>,
}

impl PointMemo {
    fn new() -> Self {
        PointMemo { sams3: None }
    }

    fn sams3(&mut self, system: &SystemSpec) -> Result<(Pattern, PatternReport), Error> {
        self.sams3
            .get_or_insert_with(|| {
                sams(system, &SamsConfig::refined()).map(|o| (o.pattern, o.report))
            })
            .clone()
    }
}

/// What one policy produced at one sweep point.
struct PolicyResult {
    system_aoi: f64,
    system_paoi: f64,
    pattern_len: Option<usize>,
}

fn run_policy(
    policy: Policy,
    system: &SystemSpec,
    memo: &mut PointMemo,
) -> Result<PolicyResult, Error> {
    match policy {
        Policy::RoundRobin => {
            let pattern = round_robin(system.len())?;
            let report = evaluate_pattern(&pattern, system)?;
            Ok(PolicyResult {
                system_aoi: report.system_aoi,
                system_paoi: report.system_paoi,
                pattern_len: Some(pattern.len()),
            })
        }
        Policy::Insertion(budget) => {
            let max_size = match budget {
                IsBudget::Fixed(n) => n.max(system.len()),
                IsBudget::MatchSams3 => memo.sams3(system)?.0.len().max(system.len()),
            };
            let outcome = insertion_search(system, &IsConfig { max_size, stop_early: true })?;
            Ok(PolicyResult {
                system_aoi: outcome.report.system_aoi,
                system_paoi: outcome.report.system_paoi,
                pattern_len: Some(outcome.pattern.len()),
            })
        }
        Policy::Spms(epsilon) => {
            let outcome = spms(system, epsilon)?;
            Ok(PolicyResult {
                system_aoi: outcome.report.system_aoi,
                system_paoi: outcome.report.system_paoi,
                pattern_len: Some(outcome.pattern.len()),
            })
        }
        Policy::Sams1 | Policy::Sams2 | Policy::Sams3 => {
            let (pattern, report) = match policy {
                Policy::Sams1 => {
                    let o = sams(system, &SamsConfig::quick())?;
                    (o.pattern, o.report)
                }
                Policy::Sams2 => {
                    let o = sams(system, &SamsConfig::single_round())?;
                    (o.pattern, o.report)
                }
                _ => memo.sams3(system)?,
            };
            Ok(PolicyResult {
                system_aoi: report.system_aoi,
                system_paoi: report.system_paoi,
                pattern_len: Some(pattern.len()),
            })
        }
        Policy::PgawStar(metric) => {
            let (_, report) = pgaw_star(system, metric, PGAW_STAR_RESOLUTION)?;
            Ok(PolicyResult {
                system_aoi: report.system_aoi,
                system_paoi: report.system_paoi,
                pattern_len: None,
            })
        }
    }
}

// ── CSV assembly ────────────────────────────────────────────────────────────

const CSV_HEADER: &str =
    "sweep,value,policy,system_aoi,system_paoi,pattern_len,weight_scale,seed,error,wall_time_s";

/// Keeps messages legal inside an unquoted CSV field.
fn sanitize(message: &str) -> String {
    message.replace(',', ";").replace('\n', " ")
}

fn push_row(
    csv: &mut String,
    sweep: &str,
    value: &str,
    policy: Policy,
    system: Option<&SystemSpec>,
    seed: Option<u64>,
    result: Result<PolicyResult, Error>,
    wall_time_s: f64,
) {
    let weight_scale =
        system.map(|s| s.weight_scale().to_string()).unwrap_or_default();
    let seed_field = seed.map(|s| s.to_string()).unwrap_or_default();
    match result {
        Ok(r) => {
            let len_field = r.pattern_len.map(|l| l.to_string()).unwrap_or_default();
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},,{:.3}",
                sweep,
                value,
                policy.display(),
                r.system_aoi,
                r.system_paoi,
                len_field,
                weight_scale,
                seed_field,
                wall_time_s
            )
            .expect("string write");
        }
        Err(e) => {
            writeln!(
                csv,
                "{},{},{},,,,{},{},{},{:.3}",
                sweep,
                value,
                policy.display(),
                weight_scale,
                seed_field,
                sanitize(&e.to_string()),
                wall_time_s
            )
            .expect("string write");
        }
    }
}

/// One sweep point: a label, the sources to evaluate, and (for randomized
/// families) the base seed to record.
struct SweepPoint {
    sweep: String,
    value: String,
    sources: Vec<SourceInput>,
    seed: Option<u64>,
}

fn run_family(
    family_line: &str,
    points: Vec<SweepPoint>,
    policies: &[Policy],
) -> String {
    let mut csv = String::new();
    writeln!(csv, "# agesched benchmark CSV v1").expect("string write");
    writeln!(csv, "{}", family_line).expect("string write");
    writeln!(
        csv,
        "# weights are normalized before evaluation; weight_scale is the raw-weight sum"
    )
    .expect("string write");
    writeln!(
        csv,
        "# wall_time_s is informational and excluded from byte-exact reproducibility"
    )
    .expect("string write");
    writeln!(csv, "{}", CSV_HEADER).expect("string write");
    for point in points {
        let system = validate_system(&point.sources);
        let mut memo = PointMemo::new();
        for &policy in policies {
            let started = Instant::now();
            let (system_ref, result) = match &system {
                Ok(sys) => (Some(sys), run_policy(policy, sys, &mut memo)),
                Err(e) => (None, Err(e.clone())),
            };
            push_row(
                &mut csv,
                &point.sweep,
                &point.value,
                policy,
                system_ref,
                point.seed,
                result,
                started.elapsed().as_secs_f64(),
            );
        }
    }
    csv
}

// ── canned families ─────────────────────────────────────────────────────────

fn det(weight: f64, mean: f64, drop_prob: f64) -> SourceInput {
    SourceInput { weight, service: ServiceDistribution::Deterministic { mean }, drop_prob }
}

fn exp(weight: f64, mean: f64, drop_prob: f64) -> SourceInput {
    SourceInput { weight, service: ServiceDistribution::Exponential { mean }, drop_prob }
}

fn fig2_points() -> Vec<SweepPoint> {
    [0.5, 1.0, 2.0, 4.0, 8.0]
        .into_iter()
        .map(|s3| SweepPoint {
            sweep: "mean_service3".to_string(),
            value: s3.to_string(),
            sources: vec![det(25.0, 5.0, 0.0), det(5.0, 2.5, 0.0), det(1.0, s3, 0.0)],
            seed: None,
        })
        .collect()
}

fn fig3_points() -> Vec<SweepPoint> {
    (1..=10)
        .map(|w3| SweepPoint {
            sweep: "weight3".to_string(),
            value: w3.to_string(),
            sources: vec![det(2.0, 10.0, 0.1), det(5.0, 1.0, 0.5), det(w3 as f64, 1.0, 0.95)],
            seed: None,
        })
        .collect()
}

fn fig5_points() -> Vec<SweepPoint> {
    (1..=10)
        .map(|w3| SweepPoint {
            sweep: "weight3".to_string(),
            value: w3.to_string(),
            sources: vec![exp(2.0, 10.0, 0.1), exp(5.0, 1.0, 0.5), exp(w3 as f64, 1.0, 0.6)],
            seed: None,
        })
        .collect()
}

/// Draws one randomized 100-source instance. Stream `instance` of the seeded
/// generator keeps instances independent yet individually reproducible; each
/// source consumes one weight draw then one drop draw.
fn fig4_instance(seed: u64, instance: u64) -> Vec<SourceInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance);
    (0..100)
        .map(|_| {
            let u: f64 = rng.random();
            let weight = if u > 0.0 { (-u.ln()).max(1e-16) } else { 1e-16 };
            let drop_prob = rng.random::<f64>() * 0.9;
            SourceInput {
                weight,
                service: ServiceDistribution::Deterministic { mean: 1.0 },
                drop_prob,
            }
        })
        .collect()
}

fn fig4_points(seed: u64, instances: usize) -> Vec<SweepPoint> {
    (0..instances)
        .map(|i| SweepPoint {
            sweep: "instance".to_string(),
            value: (i + 1).to_string(),
            sources: fig4_instance(seed, i as u64),
            seed: Some(seed),
        })
        .collect()
}

// ── the benchmark subcommand ────────────────────────────────────────────────

pub fn benchmark(
    preset: Option<String>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    instances: Option<usize>,
    is_budget: Option<String>,
    include_is: bool,
) -> Result<(), CliError> {
    let config = match &config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            cfg.check_single_block("benchmark")?;
            Some(cfg)
        }
        None => None,
    };
    let block = config.as_ref().and_then(|c| c.benchmark.as_ref());

    let preset = preset.or_else(|| block.and_then(|b| b.preset.clone()));
    let seed = seed.or_else(|| block.and_then(|b| b.seed)).unwrap_or(1);
    let instances = instances.or_else(|| block.and_then(|b| b.instances)).unwrap_or(20);
    let include_is = include_is || block.and_then(|b| b.include_is).unwrap_or(false);
    let budget_spec = is_budget.or_else(|| block.and_then(|b| b.is_budget.clone()));
    let budget = match &budget_spec {
        Some(spec) => Some(parse_is_budget(spec)?),
        None => None,
    };

    let csv = match preset.as_deref() {
        Some("fig2") => run_family(
            "# family=fig2",
            fig2_points(),
            &[
                Policy::RoundRobin,
                Policy::Insertion(budget.unwrap_or(IsBudget::MatchSams3)),
                Policy::PgawStar(Metric::Aoi),
                Policy::Sams1,
                Policy::Sams2,
                Policy::Sams3,
            ],
        ),
        Some("fig3") => run_family(
            "# family=fig3",
            fig3_points(),
            &[
                Policy::Sams1,
                Policy::Sams2,
                Policy::Sams3,
                Policy::Insertion(budget.unwrap_or(IsBudget::Fixed(75))),
                Policy::PgawStar(Metric::Aoi),
            ],
        ),
        Some("fig4") => {
            let mut policies = vec![Policy::Sams1, Policy::Sams2, Policy::Sams3];
            if include_is {
                policies.push(Policy::Insertion(budget.unwrap_or(IsBudget::MatchSams3)));
            }
            run_family(
                &format!("# family=fig4 seed={} instances={}", seed, instances),
                fig4_points(seed, instances),
                &policies,
            )
        }
        Some("fig5") => run_family(
            "# family=fig5",
            fig5_points(),
            &[Policy::Spms(2.0), Policy::PgawStar(Metric::Paoi)],
        ),
        Some(other) => {
            return Err(CliError::user(format!(
                "unknown preset `{}` (expected fig2, fig3, fig4, or fig5)",
                other
            )))
        }
        None => {
            let config = config
                .as_ref()
                .ok_or_else(|| CliError::user("give --preset or --config".to_string()))?;
            let block = config.benchmark.as_ref().ok_or_else(|| {
                CliError::user("config is missing the `benchmark` block".to_string())
            })?;
            let sweep = block.sweep.as_ref().ok_or_else(|| {
                CliError::user(
                    "custom benchmark needs a `sweep` block (or use a preset)".to_string(),
                )
            })?;
            if sweep.values.is_empty() {
                return Err(CliError::user("sweep has no values".to_string()));
            }
            let base = &config
                .system
                .as_ref()
                .ok_or_else(|| CliError::user("config is missing the `system` block".to_string()))?
                .sources;
            let default_budget = budget.unwrap_or(IsBudget::MatchSams3);
            let policies: Vec<Policy> = match &block.policies {
                Some(ids) => ids
                    .iter()
                    .map(|id| parse_policy(id, default_budget))
                    .collect::<Result<_, _>>()?,
                None => vec![
                    Policy::RoundRobin,
                    Policy::Sams3,
                    Policy::PgawStar(Metric::Aoi),
                ],
            };
            let label = format!("{}{}", sweep.field, sweep.source);
            let mut points = Vec::with_capacity(sweep.values.len());
            for &value in &sweep.values {
                points.push(SweepPoint {
                    sweep: label.clone(),
                    value: value.to_string(),
                    sources: apply_sweep(base, sweep, value)?,
                    seed: None,
                });
            }
            run_family("# family=custom", points, &policies)
        }
    };

    match out {
        Some(path) => fs::write(&path, csv)
            .map_err(|e| CliError::user(format!("cannot write {}: {}", path.display(), e))),
        None => {
            print!("{}", csv);
            Ok(())
        }
    }
}

// ── the plotdata subcommand ─────────────────────────────────────────────────

/// Reshapes a benchmark CSV into tidy `x,series,y` triples for plotting.
/// Error rows pass through with an empty `y` so row counts are preserved.
pub fn plotdata(input: &Path, metric: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    let metric_column = match metric {
        "aoi" => "system_aoi",
        "paoi" => "system_paoi",
        other => {
            return Err(CliError::user(format!(
                "unknown metric `{}` (expected aoi or paoi)",
                other
            )))
        }
    };
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::user(format!("cannot read {}: {}", input.display(), e)))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| CliError::user("input has no header row".to_string()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let position = |name: &str| {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| CliError::user(format!("input is missing the `{}` column", name)))
    };
    let value_at = position("value")?;
    let policy_at = position("policy")?;
    let metric_at = position(metric_column)?;

    let mut csv = format!("# agesched plotdata CSV v1 (metric={})\nx,series,y\n", metric);
    let mut rows = 0usize;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(CliError::user(format!("malformed row `{}`", line)));
        }
        writeln!(csv, "{},{},{}", fields[value_at], fields[policy_at], fields[metric_at])
            .expect("string write");
        rows += 1;
    }
    if rows == 0 {
        return Err(CliError::user("input has no data rows".to_string()));
    }

    match out {
        Some(path) => fs::write(&path, csv)
            .map_err(|e| CliError::user(format!("cannot write {}: {}", path.display(), e))),
        None => {
            print!("{}", csv);
            Ok(())
        }
    }
}
