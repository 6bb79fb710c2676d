//! Seeded benchmark instances and the batch runner.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{CircleId, CircleSpec, LayoutError, ProblemInstance};
use crate::permutation::{PermutationError, PermutationScheme};
use crate::solver::{solve, Solution, SolverConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid instance family: {0}")]
    InvalidFamily(String),
    #[error("all {runs} runs failed; first error: {first}")]
    AllRunsFailed { runs: usize, first: String },
    #[error("batch needs at least one run")]
    NoRuns,
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Permutation(#[from] PermutationError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Parameters of a randomly generated instance. Radii and masses are drawn
/// uniformly from their closed ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFamily {
    pub name: String,
    pub size: usize,
    pub radius_range: [f64; 2],
    pub mass_range: [f64; 2],
    pub seed: u64,
}

impl InstanceFamily {
    pub fn new(
        name: impl Into<String>,
        size: usize,
        radius_range: [f64; 2],
        mass_range: [f64; 2],
        seed: u64,
    ) -> Self {
        InstanceFamily {
            name: name.into(),
            size,
            radius_range,
            mass_range,
            seed,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.size < 4 {
            return Err(HarnessError::InvalidFamily(format!(
                "size {} is below 4",
                self.size
            )));
        }
        for (what, [lo, hi]) in [("radius", self.radius_range), ("mass", self.mass_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(HarnessError::InvalidFamily(format!(
                    "{what} range [{lo}, {hi}] must be positive and ordered"
                )));
            }
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

pub fn generate_instance(family: &InstanceFamily) -> Result<ProblemInstance, HarnessError> {
    family.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(family.seed);
    let circles = (1..=family.size as CircleId)
        .map(|id| {
            let radius = uniform(&mut rng, family.radius_range);
            let mass = uniform(&mut rng, family.mass_range);
            CircleSpec::new(id, radius, mass)
        })
        .collect();
    Ok(ProblemInstance::new(family.name.clone(), circles)?)
}

/// Frozen-seed families covering the published benchmark sizes and ranges.
pub fn reference_families() -> Vec<InstanceFamily> {
    let mut out = vec![
        InstanceFamily::new("set1-7", 7, [8.5, 12.0], [72.25, 144.0], 7007),
        InstanceFamily::new("set1-40", 40, [81.0, 120.0], [6.0, 14.0], 4040),
    ];
    let second: [(usize, [f64; 2], [f64; 2]); 10] = [
        (10, [5.0, 23.0], [20.0, 93.0]),
        (15, [6.0, 24.0], [12.0, 98.0]),
        (20, [5.0, 24.0], [11.0, 94.0]),
        (25, [6.0, 24.0], [11.0, 96.0]),
        (30, [6.0, 24.0], [12.0, 97.0]),
        (35, [7.0, 24.0], [10.0, 99.0]),
        (40, [6.0, 23.0], [12.0, 99.0]),
        (45, [6.0, 24.0], [11.0, 99.0]),
        (50, [5.0, 24.0], [10.0, 99.0]),
        (55, [6.0, 24.0], [13.0, 99.0]),
    ];
    out.extend(
        second
            .iter()
            .map(|&(n, r, m)| InstanceFamily::new(format!("set2-{n}"), n, r, m, 1000 + n as u64)),
    );
    out
}

/// Looks up a reference family by name.
pub fn reference_family(name: &str) -> Option<InstanceFamily> {
    reference_families().into_iter().find(|f| f.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchOptions {
    pub runs: usize,
    /// Worker threads; 1 runs everything on the calling thread.
    pub parallelism: usize,
    /// Draw orders with repetition once `runs` exceeds the number of
    /// distinct block shuffles.
    pub allow_repeats: bool,
}

impl BatchOptions {
    pub fn new(runs: usize, parallelism: usize) -> Self {
        BatchOptions {
            runs,
            parallelism,
            allow_repeats: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Solved { f1: f64, f2: f64 },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub index: usize,
    pub permutation: Vec<CircleId>,
    pub outcome: RunOutcome,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct BatchReport {
    pub instance_name: String,
    pub size: usize,
    pub best: Solution,
    pub best_run: usize,
    pub per_run: Vec<RunRecord>,
    pub failures: usize,
    pub min_f1: f64,
    pub mean_f1: f64,
    /// Wall time from batch start until the best run finished.
    pub time_to_best: Duration,
    pub total_elapsed: Duration,
}

impl BatchReport {
    pub fn runs(&self) -> usize {
        self.per_run.len()
    }

    /// Equality on everything but timing.
    pub fn same_result(&self, other: &BatchReport) -> bool {
        let strip = |r: &[RunRecord]| -> Vec<(usize, Vec<CircleId>, RunOutcome)> {
            r.iter()
                .map(|x| (x.index, x.permutation.clone(), x.outcome.clone()))
                .collect()
        };
        self.instance_name == other.instance_name
            && self.size == other.size
            && self.best.same_result(&other.best)
            && self.best_run == other.best_run
            && strip(&self.per_run) == strip(&other.per_run)
            && self.failures == other.failures
            && self.min_f1 == other.min_f1
            && self.mean_f1 == other.mean_f1
    }
}

/// Solves the instance once per sampled placement order and keeps the
/// smallest container. Results are reduced in run order, so the report does
/// not depend on `parallelism`.
pub fn run_batch(
    instance: &ProblemInstance,
    scheme: &PermutationScheme,
    options: BatchOptions,
    config: &SolverConfig,
) -> Result<BatchReport, HarnessError> {
    if options.runs == 0 {
        return Err(HarnessError::NoRuns);
    }
    let orders = scheme.sample(options.runs, options.allow_repeats)?;
    let start = Instant::now();

    let job = |(index, order): (usize, &Vec<CircleId>)| {
        let t0 = Instant::now();
        let cfg = SolverConfig {
            seed: config.seed.wrapping_add(index as u64),
            ..*config
        };
        let result = solve(instance, order, &cfg);
        (index, result, t0.elapsed(), start.elapsed())
    };
    let results: Vec<_> = if options.parallelism <= 1 {
        orders.iter().enumerate().map(job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.parallelism)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        pool.install(|| orders.par_iter().enumerate().map(job).collect())
    };
    let total_elapsed = start.elapsed();

    let mut per_run = Vec::with_capacity(results.len());
    let mut best: Option<(usize, Solution, Duration)> = None;
    let mut failures = 0;
    let mut first_error = None;
    let (mut sum, mut solved) = (0.0, 0usize);
    for (index, result, elapsed, finished) in results {
        let outcome = match result {
            Ok(sol) => {
                let outcome = RunOutcome::Solved {
                    f1: sol.f1,
                    f2: sol.f2,
                };
                sum += sol.f1;
                solved += 1;
                if best.as_ref().is_none_or(|(_, b, _)| sol.f1 < b.f1) {
                    best = Some((index, sol, finished));
                }
                outcome
            }
            Err(e) => {
                failures += 1;
                let msg = e.to_string();
                first_error.get_or_insert_with(|| msg.clone());
                RunOutcome::Failed(msg)
            }
        };
        per_run.push(RunRecord {
            index,
            permutation: orders[index].clone(),
            outcome,
            elapsed,
        });
    }

    let Some((best_run, best, time_to_best)) = best else {
        return Err(HarnessError::AllRunsFailed {
            runs: per_run.len(),
            first: first_error.unwrap_or_default(),
        });
    };
    Ok(BatchReport {
        instance_name: instance.name().to_string(),
        size: instance.len(),
        min_f1: best.f1,
        mean_f1: sum / solved as f64,
        best,
        best_run,
        per_run,
        failures,
        time_to_best,
        total_elapsed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub size: usize,
    pub f1: f64,
    pub f2: f64,
    pub runs: usize,
    pub failures: usize,
    pub time_to_best: Duration,
    pub total: Duration,
}

/// One row per batch, ordered by instance size.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

pub fn summarize(reports: &[BatchReport]) -> SummaryTable {
    let mut rows: Vec<SummaryRow> = reports
        .iter()
        .map(|r| SummaryRow {
            name: r.instance_name.clone(),
            size: r.size,
            f1: r.best.f1,
            f2: r.best.f2,
            runs: r.runs(),
            failures: r.failures,
            time_to_best: r.time_to_best,
            total: r.total_elapsed,
        })
        .collect();
    rows.sort_by(|a, b| a.size.cmp(&b.size).then_with(|| a.name.cmp(&b.name)));
    SummaryTable { rows }
}

impl fmt::Display for SummaryTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:>5} {:>12} {:>10} {:>6} {:>6} {:>10} {:>10}",
            "instance", "size", "f1", "f2", "runs", "failed", "t_best(s)", "t_total(s)"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<12} {:>5} {:>12.3} {:>10.3e} {:>6} {:>6} {:>10.3} {:>10.3}",
                r.name,
                r.size,
                r.f1,
                r.f2,
                r.runs,
                r.failures,
                r.time_to_best.as_secs_f64(),
                r.total.as_secs_f64()
            )?;
        }
        Ok(())
    }
}
