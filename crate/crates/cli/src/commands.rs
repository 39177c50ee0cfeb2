//! The `analyze`, `synthesize`, and `simulate` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use agesched_core::{
    agreement, evaluate_pattern, insertion_search, round_robin, sams, simulate_cyclic,
    simulate_probabilistic, spms, Agreement, IsConfig, Pattern, PatternReport, SamsConfig,
    SimConfig, SimEstimates, SystemSpec, TransmissionProbabilities, AGREEMENT_Z_LIMIT,
};
use serde::Serialize;

use crate::config::{parse_epsilon_grid, ExperimentConfig};
use crate::CliError;

// ── shared plumbing ─────────────────────────────────────────────────────────

fn load_pattern(
    inline: Option<String>,
    file: Option<PathBuf>,
    config_value: Option<&str>,
) -> Result<Option<Pattern>, CliError> {
    let text = if let Some(p) = inline {
        Some(p)
    } else if let Some(path) = file {
        let raw = fs::read_to_string(&path).map_err(|e| {
            CliError::user(format!("cannot read pattern file {}: {}", path.display(), e))
        })?;
        Some(raw.trim().to_string())
    } else {
        config_value.map(|s| s.to_string())
    };
    match text {
        None => Ok(None),
        Some(t) => t.parse::<Pattern>().map(Some).map_err(CliError::from),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::user(format!("cannot serialize record: {}", e)))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::user(format!("cannot write {}: {}", path.display(), e)))
}

fn print_report(system: &SystemSpec, report: &PatternReport) {
    println!(
        "pattern {} over {} sources (cycle length {})",
        report.pattern,
        system.len(),
        report.pattern.len()
    );
    println!(
        "{:<8}{:>9}{:>9}{:>11}{:>11}{:>11}{:>11}",
        "source", "weight", "util", "gap-mean", "gap-scov", "aoi", "paoi"
    );
    for (n, sr) in report.per_source.iter().enumerate() {
        println!(
            "{:<8}{:>9.4}{:>9.4}{:>11.4}{:>11.4}{:>11.4}{:>11.4}",
            n + 1,
            sr.weight,
            sr.utilization,
            sr.gap_mean,
            sr.gap_scov,
            sr.mean_aoi,
            sr.mean_paoi
        );
    }
    println!(
        "system aoi {:.6}  paoi {:.6}  (normalized weights; raw-weight sum {})",
        report.system_aoi,
        report.system_paoi,
        system.weight_scale()
    );
}

// ── analyze ─────────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct AnalyzeRecord<'a> {
    pattern: String,
    weight_scale: f64,
    report: &'a PatternReport,
}

pub fn analyze(
    config_path: &Path,
    pattern: Option<String>,
    pattern_file: Option<PathBuf>,
    json: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    config.check_single_block("analyze")?;
    let system = config.system()?;
    let from_config = config.analyze.as_ref().and_then(|b| b.pattern.as_deref());
    let pattern = load_pattern(pattern, pattern_file, from_config)?
        .ok_or_else(|| CliError::user("no pattern given (flag or config block)".to_string()))?;
    let report = evaluate_pattern(&pattern, &system)?;
    print_report(&system, &report);
    if let Some(path) = json {
        let record = AnalyzeRecord {
            pattern: pattern.to_string(),
            weight_scale: system.weight_scale(),
            report: &report,
        };
        write_json(&path, &record)?;
    }
    Ok(())
}

// ── synthesize ──────────────────────────────────────────────────────────────

pub struct SynthesizeArgs {
    pub method: Option<String>,
    pub epsilon: Option<f64>,
    pub epsilons: Option<String>,
    pub iterations: Option<usize>,
    pub max_size: Option<usize>,
    pub stop_early: bool,
}

#[derive(Serialize)]
struct SynthesizeRecord<'a> {
    method: String,
    pattern: String,
    cycle_length: usize,
    epsilon: Option<f64>,
    epsilons: Option<Vec<f64>>,
    iterations: Option<usize>,
    max_size: Option<usize>,
    evaluations: Option<usize>,
    target_frequencies: Option<Vec<f64>>,
    realized_frequencies: Vec<f64>,
    weight_scale: f64,
    report: &'a PatternReport,
}

pub fn synthesize(
    config_path: &Path,
    args: SynthesizeArgs,
    out: Option<PathBuf>,
    json: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    config.check_single_block("synthesize")?;
    let system = config.system()?;
    let block = config.synthesize.as_ref();

    let method = args
        .method
        .or_else(|| block.and_then(|b| b.method.clone()))
        .ok_or_else(|| CliError::user("no method given (flag or config block)".to_string()))?;
    let epsilon = args.epsilon.or_else(|| block.and_then(|b| b.epsilon));
    let epsilons_spec = args.epsilons.or_else(|| block.and_then(|b| b.epsilons.clone()));
    let iterations = args.iterations.or_else(|| block.and_then(|b| b.iterations));
    let max_size = args.max_size.or_else(|| block.and_then(|b| b.max_size));
    let stop_early = args.stop_early || block.and_then(|b| b.stop_early).unwrap_or(false);

    let mut record_epsilon = None;
    let mut record_epsilons = None;
    let mut record_iterations = None;
    let mut record_max_size = None;
    let mut evaluations = None;
    let mut target_frequencies = None;

    let (pattern, report) = match method.as_str() {
        "spms" => {
            let eps = epsilon.unwrap_or(2.0);
            record_epsilon = Some(eps);
            let outcome = spms(&system, eps)?;
            target_frequencies = Some(outcome.frequencies.frequencies.clone());
            (outcome.pattern, outcome.report)
        }
        "sams" => {
            let grid = match epsilons_spec {
                Some(spec) => parse_epsilon_grid(&spec)?,
                None => SamsConfig::default_epsilons(),
            };
            let iters = iterations.unwrap_or(3);
            record_epsilons = Some(grid.clone());
            record_iterations = Some(iters);
            let outcome = sams(&system, &SamsConfig { epsilons: grid, iterations: iters })?;
            (outcome.pattern, outcome.report)
        }
        "rr" => {
            let pattern = round_robin(system.len())?;
            let report = evaluate_pattern(&pattern, &system)?;
            (pattern, report)
        }
        "is" => {
            let budget = max_size.unwrap_or_else(|| (2 * system.len()).max(20));
            record_max_size = Some(budget);
            let outcome = insertion_search(&system, &IsConfig { max_size: budget, stop_early })?;
            evaluations = Some(outcome.evaluations);
            (outcome.pattern, outcome.report)
        }
        other => {
            return Err(CliError::user(format!(
                "unknown method `{}` (expected spms, sams, rr, or is)",
                other
            )))
        }
    };

    println!("method {}", method);
    print_report(&system, &report);
    let realized = report.realized_frequencies();
    if let Some(targets) = &target_frequencies {
        println!("{:<8}{:>12}{:>12}", "source", "target-f", "realized-f");
        for (n, (t, r)) in targets.iter().zip(&realized).enumerate() {
            println!("{:<8}{:>12.6}{:>12.6}", n + 1, t, r);
        }
    }
    if let Some(evals) = evaluations {
        println!("insertion evaluations: {}", evals);
    }

    if let Some(path) = out {
        fs::write(&path, format!("{}\n", pattern))
            .map_err(|e| CliError::user(format!("cannot write {}: {}", path.display(), e)))?;
    }
    if let Some(path) = json {
        let record = SynthesizeRecord {
            method,
            pattern: pattern.to_string(),
            cycle_length: pattern.len(),
            epsilon: record_epsilon,
            epsilons: record_epsilons,
            iterations: record_iterations,
            max_size: record_max_size,
            evaluations,
            target_frequencies,
            realized_frequencies: realized,
            weight_scale: system.weight_scale(),
            report: &report,
        };
        write_json(&path, &record)?;
    }
    Ok(())
}

// ── simulate ────────────────────────────────────────────────────────────────

pub struct SimulateArgs {
    pub pattern: Option<String>,
    pub pattern_file: Option<PathBuf>,
    pub probabilities: Option<String>,
    pub seed: Option<u64>,
    pub target: Option<u64>,
    pub warmup: Option<u64>,
}

#[derive(Serialize)]
struct SimulateRecord<'a> {
    scheduler: &'static str,
    pattern: Option<String>,
    probabilities: Option<Vec<f64>>,
    seed: u64,
    target: u64,
    warmup: u64,
    weight_scale: f64,
    estimates: &'a SimEstimates,
    agreement: &'a Agreement,
}

fn parse_probability_list(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::user(format!("bad probability token `{}`", tok.trim())))
        })
        .collect()
}

pub fn simulate(
    config_path: &Path,
    args: SimulateArgs,
    dump_paoi: Option<PathBuf>,
    json: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    config.check_single_block("simulate")?;
    let system = config.system()?;
    let block = config.simulate.as_ref();

    let seed = args.seed.or_else(|| block.and_then(|b| b.seed)).unwrap_or(1);
    let target = args.target.or_else(|| block.and_then(|b| b.target)).unwrap_or(100_000);
    let warmup = args.warmup.or_else(|| block.and_then(|b| b.warmup)).unwrap_or(1000);
    let cfg = SimConfig { target, warmup, seed, record_paoi_samples: dump_paoi.is_some() };

    let probabilities = match args.probabilities {
        Some(spec) => Some(parse_probability_list(&spec)?),
        None => block.and_then(|b| b.probabilities.clone()),
    };
    let config_pattern = block.and_then(|b| b.pattern.as_deref());
    let pattern = load_pattern(args.pattern, args.pattern_file, config_pattern)?;

    let (scheduler, pattern_text, prob_list, mut estimates, analytic) =
        match (pattern, probabilities) {
            (Some(_), Some(_)) => {
                return Err(CliError::user(
                    "give either a pattern or probabilities, not both".to_string(),
                ))
            }
            (None, None) => {
                return Err(CliError::user(
                    "no scheduler given: provide a pattern or probabilities".to_string(),
                ))
            }
            (Some(pattern), None) => {
                let analytic = evaluate_pattern(&pattern, &system)?;
                let estimates = simulate_cyclic(&system, &pattern, &cfg)?;
                ("cyclic", Some(pattern.to_string()), None, estimates, analytic.per_source)
            }
            (None, Some(list)) => {
                let probs = TransmissionProbabilities::new(list.clone())?;
                let analytic = agesched_core::pgaw_evaluate(&system, &probs)?;
                let estimates = simulate_probabilistic(&system, &probs, &cfg)?;
                ("probabilistic", None, Some(list), estimates, analytic.per_source)
            }
        };

    let check = agreement(&estimates, &analytic)?;

    println!(
        "{} run: seed {}, target {} successes/source, warmup {}, {} slots simulated",
        scheduler, seed, target, warmup, estimates.total_slots
    );
    println!(
        "{:<8}{:<8}{:>12}{:>12}{:>12}{:>9}  {}",
        "source", "metric", "analytic", "estimate", "se", "z", "verdict"
    );
    for row in &check.rows {
        println!(
            "{:<8}{:<8}{:>12.6}{:>12.6}{:>12.6}{:>9.3}  {}",
            row.source + 1,
            row.metric,
            row.analytic,
            row.estimate,
            row.se,
            row.z,
            if row.z.abs() <= AGREEMENT_Z_LIMIT { "ok" } else { "FLAG" }
        );
    }
    println!(
        "system aoi {:.6} ± {:.6}, paoi {:.6} ± {:.6}; worst |z| {:.3}; {}",
        estimates.system_aoi,
        estimates.system_aoi_se,
        estimates.system_paoi,
        estimates.system_paoi_se,
        check.worst_abs_z,
        if check.all_within { "all within ±4" } else { "DISAGREEMENT FLAGGED" }
    );

    if let Some(path) = dump_paoi {
        let samples = estimates
            .paoi_samples
            .take()
            .expect("samples recorded when dumping was requested");
        let mut csv = String::from("source,sample\n");
        for (n, series) in samples.iter().enumerate() {
            for value in series {
                csv.push_str(&format!("{},{}\n", n + 1, value));
            }
        }
        fs::write(&path, csv)
            .map_err(|e| CliError::user(format!("cannot write {}: {}", path.display(), e)))?;
    }

    if let Some(path) = json {
        // The record stays light: raw samples go to the CSV dump only.
        estimates.paoi_samples = None;
        let record = SimulateRecord {
            scheduler,
            pattern: pattern_text,
            probabilities: prob_list,
            seed,
            target,
            warmup,
            weight_scale: system.weight_scale(),
            estimates: &estimates,
            agreement: &check,
        };
        write_json(&path, &record)?;
    }
    Ok(())
}
