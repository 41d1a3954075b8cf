//! Iteration counts of the projection operator over a grid of dimensions,
//! initial sparseness levels and target sparseness levels.
//!
//! Each trial draws a unit-L2 vector with a chosen initial sparseness and
//! projects it to a target sparseness at the same L2 norm, recording how many
//! radial solves the projection needed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::projection::{l1_l2, project_nonneg, project_nonneg_in_place, ProjectionTarget};

pub const DEFAULT_DIMS: [usize; 11] = [2, 3, 5, 10, 50, 100, 500, 1000, 3000, 5000, 10000];
pub const DEFAULT_SPARSENESS_LEVELS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const DEFAULT_TRIALS: usize = 100;

/// Iteration statistics for one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub dimension: usize,
    pub initial_sparseness: f64,
    pub target_sparseness: f64,
    pub trials: usize,
    pub iterations_min: usize,
    pub iterations_mean: f64,
    pub iterations_max: usize,
}

/// A grid cell that could not be run.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCell {
    pub dimension: usize,
    pub initial_sparseness: f64,
    pub target_sparseness: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchOutcome {
    pub results: Vec<BenchResult>,
    pub skipped: Vec<SkippedCell>,
}

impl BenchOutcome {
    pub fn cell(&self, dimension: usize, initial: f64, target: f64) -> Option<&BenchResult> {
        self.results.iter().find(|r| {
            r.dimension == dimension
                && r.initial_sparseness == initial
                && r.target_sparseness == target
        })
    }
}

/// Non-negative unit-L2 vector of length `n` with sparseness `s`.
///
/// Exponentially distributed magnitudes are projected onto the target
/// norms, so the result is exact up to rounding.
pub fn generate_with_sparseness<R: Rng + ?Sized>(n: usize, s: f64, rng: &mut R) -> Result<Vec<f64>> {
    let target = ProjectionTarget::from_sparseness(s, 1.0, n)?;
    let mut v: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    project_nonneg_in_place(&mut v, &target)?;
    Ok(v)
}

/// Runs `trials` projections for every `(dimension, initial, target)` cell.
///
/// Cells run in parallel; each one draws from its own ChaCha stream keyed
/// by `seed` and the cell's position in the grid, so results do not depend
/// on scheduling.
pub fn run_grid(dims: &[usize], levels: &[f64], trials: usize, seed: u64) -> Result<BenchOutcome> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let cells: Vec<(usize, f64, f64)> = dims
        .iter()
        .flat_map(|&d| {
            levels
                .iter()
                .flat_map(move |&si| levels.iter().map(move |&st| (d, si, st)))
        })
        .collect();

    let outcomes: Vec<Result<std::result::Result<BenchResult, SkippedCell>>> = cells
        .par_iter()
        .enumerate()
        .map(|(index, &(dimension, initial, target))| {
            if let Some(reason) = infeasible(dimension, initial, target) {
                return Ok(Err(SkippedCell {
                    dimension,
                    initial_sparseness: initial,
                    target_sparseness: target,
                    reason,
                }));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            run_cell(dimension, initial, target, trials, &mut rng).map(Ok)
        })
        .collect();

    let mut outcome = BenchOutcome::default();
    for cell in outcomes {
        match cell? {
            Ok(result) => outcome.results.push(result),
            Err(skipped) => outcome.skipped.push(skipped),
        }
    }
    Ok(outcome)
}

fn infeasible(dimension: usize, initial: f64, target: f64) -> Option<String> {
    if dimension < 2 {
        return Some(format!("sparseness is undefined in dimension {dimension}"));
    }
    for s in [initial, target] {
        if !(0.0..=1.0).contains(&s) {
            return Some(format!("sparseness {s} is outside [0, 1]"));
        }
    }
    None
}

fn run_cell(
    dimension: usize,
    initial: f64,
    target: f64,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BenchResult> {
    let mut min = usize::MAX;
    let mut max = 0;
    let mut total = 0usize;
    for _ in 0..trials {
        let x = generate_with_sparseness(dimension, initial, rng)?;
        let (_, l2) = l1_l2(&x);
        let goal = ProjectionTarget::from_sparseness(target, l2, dimension)?;
        let (_, trace) = project_nonneg(&x, &goal)?;
        min = min.min(trace.iterations);
        max = max.max(trace.iterations);
        total += trace.iterations;
    }
    Ok(BenchResult {
        dimension,
        initial_sparseness: initial,
        target_sparseness: target,
        trials,
        iterations_min: min,
        iterations_mean: total as f64 / trials as f64,
        iterations_max: max,
    })
}

/// CSV with header `dim,s_init,s_target,trials,iter_min,iter_mean,iter_max`.
pub fn format_csv(results: &[BenchResult]) -> String {
    let mut out = String::from("dim,s_init,s_target,trials,iter_min,iter_mean,iter_max\n");
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.dimension,
            r.initial_sparseness,
            r.target_sparseness,
            r.trials,
            r.iterations_min,
            r.iterations_mean,
            r.iterations_max
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_csv(results: &[BenchResult], path: &Path) -> Result<()> {
    fs::write(path, format_csv(results)).map_err(|e| Error::io(path, e))
}
