//! Shared test oracles and corpus builders.
//!
//! `slot_assignment_feasible` is the independent feasibility oracle: it
//! enumerates raw job -> (calibration, slot) assignments with backtracking and
//! never consults EDF, densities, or any production scheduling path.

// Each test target compiles this module separately and uses a subset of it.
#![allow(dead_code)]

use calsched::adversary::{random_instance, RandomInstanceParams};
use calsched::domain::{CalibParams, Calibration, Instance, Job, TimeStep};
use calsched::exact::{rational, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exhaustive search over all job -> (calibration, slot) assignments.
/// Feasible iff some assignment places every job at a distinct (calibration,
/// time) pair with `r <=
/// t < d` and `t` inside that calibration's calibrated interval.
pub fn slot_assignment_feasible(
    jobs: &[Job],
    calibrations: &[Calibration],
    params: CalibParams,
) -> bool {
    // Options per job, tightest window first to fail fast.
    let mut ordered: Vec<&Job> = jobs.iter().collect();
    ordered.sort_by_key(|j| (j.window(), j.id));
    let mut used: Vec<(usize, TimeStep)> = Vec::with_capacity(jobs.len());
    place(&ordered, 0, calibrations, params, &mut used)
}

fn place(
    ordered: &[&Job],
    idx: usize,
    calibrations: &[Calibration],
    params: CalibParams,
    used: &mut Vec<(usize, TimeStep)>,
) -> bool {
    if idx == ordered.len() {
        return true;
    }
    let job = ordered[idx];
    for (cal_idx, cal) in calibrations.iter().enumerate() {
        let lo = job.release.max(cal.calibrated_start(params));
        let hi = job.deadline.min(cal.calibrated_end(params));
        for t in lo..hi {
            if used.contains(&(cal_idx, t)) {
                continue;
            }
            used.push((cal_idx, t));
            if place(ordered, idx + 1, calibrations, params, used) {
                return true;
            }
            used.pop();
        }
    }
    false
}

/// All multisets of size 0..=max_size over `items`, as sorted vectors.
pub fn multisets<T: Copy>(items: &[T], max_size: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..max_size {
        let mut next = Vec::new();
        for combo in &frontier {
            let from = combo.last().copied().unwrap_or(0);
            for i in from..items.len() {
                let mut bigger = combo.clone();
                bigger.push(i);
                out.push(bigger.iter().map(|&i| items[i]).collect());
                next.push(bigger);
            }
        }
        frontier = next;
    }
    out
}

/// All windows `(r, d)` with `0 <= r < d <= horizon` and `d - r >= 1 + lambda`.
pub fn all_windows(horizon: TimeStep, lambda: TimeStep) -> Vec<(TimeStep, TimeStep)> {
    let mut out = Vec::new();
    for r in 0..horizon {
        for d in (r + 1 + lambda)..=horizon {
            out.push((r, d));
        }
    }
    out
}

pub fn jobs_from_windows(windows: &[(TimeStep, TimeStep)]) -> Vec<Job> {
    windows
        .iter()
        .enumerate()
        .map(|(i, &(r, d))| Job::new(i as u64, r, d))
        .collect()
}

pub fn cals_from_starts(starts: &[TimeStep]) -> Vec<Calibration> {
    starts.iter().map(|&s| Calibration::new(s)).collect()
}

/// Deterministic per-seed corpus: parameter ranges are sampled from the seed
/// itself, then the jobs from `random_instance`.
pub struct CorpusSpec {
    pub lambda_range: (TimeStep, TimeStep),
    pub t_range: (TimeStep, TimeStep),
    pub n_range: (usize, usize),
    pub horizon_range: (TimeStep, TimeStep),
    pub short_fraction: Rational,
    pub alpha: Rational,
}

impl CorpusSpec {
    pub fn instance(&self, seed: u64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
        let lambda = rng.random_range(self.lambda_range.0..=self.lambda_range.1);
        let calibrated_len = rng.random_range(self.t_range.0..=self.t_range.1);
        let n = rng.random_range(self.n_range.0..=self.n_range.1);
        let horizon = rng.random_range(self.horizon_range.0..=self.horizon_range.1);
        let params = RandomInstanceParams {
            n,
            lambda,
            calibrated_len,
            horizon,
            short_fraction: self.short_fraction,
            alpha: self.alpha,
        };
        random_instance(seed, &params).expect("corpus parameters are internally consistent")
    }
}

/// All-long corpus generated at alpha = 1/2: every window is >= T/2 + lambda,
/// hence alpha-long for every alpha <= 1/2.
pub fn long_corpus_spec() -> CorpusSpec {
    CorpusSpec {
        lambda_range: (0, 3),
        t_range: (2, 12),
        n_range: (1, 40),
        horizon_range: (1, 30),
        short_fraction: rational(0, 1),
        alpha: rational(1, 2),
    }
}

/// All-short corpus at alpha = 1/3 (requires alpha*T > 1, so T >= 4).
pub fn short_corpus_spec() -> CorpusSpec {
    CorpusSpec {
        lambda_range: (0, 3),
        t_range: (4, 12),
        n_range: (1, 40),
        horizon_range: (1, 30),
        short_fraction: rational(1, 1),
        alpha: rational(1, 3),
    }
}

/// Mixed corpus at alpha = 1/3.
pub fn mixed_corpus_spec() -> CorpusSpec {
    CorpusSpec {
        lambda_range: (0, 3),
        t_range: (4, 12),
        n_range: (1, 40),
        horizon_range: (1, 30),
        short_fraction: rational(1, 2),
        alpha: rational(1, 3),
    }
}

/// Small-instance variant with a tractable oracle.
pub fn small(spec: CorpusSpec) -> CorpusSpec {
    CorpusSpec {
        n_range: (1, 7),
        horizon_range: (1, 10),
        t_range: (spec.t_range.0, spec.t_range.1.min(6)),
        lambda_range: (spec.lambda_range.0, spec.lambda_range.1.min(2)),
        ..spec
    }
}
