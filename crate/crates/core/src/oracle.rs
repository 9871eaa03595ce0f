//! Exact offline optima and lower bounds, the ground truth for every
//! competitive-ratio check.
//!
//! `min_calibrations` searches calibration-start multisets by iterative
//! deepening with EDF as the (complete) feasibility test. The fully
//! independent slot-assignment enumeration lives in the test suite and in
//! `min_machines_exhaustive`, so the EDF-completeness check is not circular.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::domain::{CalibParams, Calibration, Instance, Job, TimeStep};
use crate::edf::edf_feasible;

/// Where calibration-start candidates come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateMode {
    /// Every integer in `[max(0, min_r - lambda), max_d - lambda - 1]`.
    /// Complete: starts outside this range are useless or shiftable inward.
    #[default]
    ExhaustiveRange,
    /// Only `{d_j - lambda - k : j in J, 1 <= k <= T}` clamped to `>= 0`.
    /// An exchange-argument optimization, validated against the exhaustive
    /// range at tiny scale; the exhaustive range stays authoritative.
    ReducedSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleConfig {
    pub candidate_mode: CandidateMode,
    /// Search-node cap; exceeding it yields `BudgetExceeded`, never a wrong count.
    pub node_budget: u64,
    pub produce_witness: bool,
}

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            candidate_mode: CandidateMode::ExhaustiveRange,
            node_budget: DEFAULT_NODE_BUDGET,
            produce_witness: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Exact {
        count: usize,
        /// Non-decreasing calibration starts, when requested.
        witness: Option<Vec<TimeStep>>,
    },
    BudgetExceeded {
        nodes: u64,
    },
}

impl OracleOutcome {
    pub fn count(&self) -> Option<usize> {
        match self {
            OracleOutcome::Exact { count, .. } => Some(*count),
            OracleOutcome::BudgetExceeded { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&[TimeStep]> {
        match self {
            OracleOutcome::Exact { witness, .. } => witness.as_deref(),
            OracleOutcome::BudgetExceeded { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive enumeration: {jobs} jobs, horizon {horizon} (limits {max_jobs}, {max_horizon})")]
    SizeGuard {
        jobs: usize,
        horizon: TimeStep,
        max_jobs: usize,
        max_horizon: TimeStep,
    },
}

/// Candidate calibration starts for `instance` under `mode`, ascending.
pub fn candidate_starts(instance: &Instance, mode: CandidateMode) -> Vec<TimeStep> {
    let (Some(min_r), Some(max_d)) = (instance.min_release(), instance.max_deadline()) else {
        return Vec::new();
    };
    let lambda = instance.lambda;
    let set: BTreeSet<TimeStep> = match mode {
        CandidateMode::ExhaustiveRange => {
            let lo = (min_r - lambda).max(0);
            let hi = max_d - lambda - 1;
            (lo..=hi).collect()
        }
        CandidateMode::ReducedSet => {
            let mut set = BTreeSet::new();
            for job in &instance.jobs {
                for k in 1..=instance.calibrated_len {
                    let s = job.deadline - lambda - k;
                    if s >= 0 {
                        set.insert(s);
                    }
                }
            }
            set
        }
    };
    set.into_iter().collect()
}

/// Volume/coverage lower bound on the optimal calibration count: for each
/// candidate interval `[a, b)` on job coordinates, the jobs confined to it
/// need `ceil(N / s)` calibrations where `s = min(T, b - a, b - lambda)` is
/// the most slots one calibration can contribute inside `[a, b)` (no
/// calibrated slot exists before `lambda`, since starts are >= 0); globally,
/// `ceil(n / T)`. Always `<=` the true optimum.
pub fn opt_lower_bound(instance: &Instance) -> usize {
    let n = instance.jobs.len();
    if n == 0 {
        return 0;
    }
    let t_len = instance.calibrated_len.max(1);
    let mut best = crate::exact::ceil_div(n as i128, t_len as i128) as i64;
    let releases: BTreeSet<TimeStep> = instance.jobs.iter().map(|j| j.release).collect();
    let deadlines: BTreeSet<TimeStep> = instance.jobs.iter().map(|j| j.deadline).collect();
    for &a in &releases {
        for &b in &deadlines {
            if a >= b {
                continue;
            }
            let confined = instance
                .jobs
                .iter()
                .filter(|j| j.release >= a && j.deadline <= b)
                .count() as i64;
            let per_cal = t_len.min(b - a).min(b - instance.lambda.max(0));
            if per_cal < 1 {
                continue;
            }
            best = best.max(crate::exact::ceil_div(confined as i128, per_cal as i128) as i64);
        }
    }
    best.max(0) as usize
}

struct Search<'a> {
    jobs: &'a [Job],
    params: CalibParams,
    candidates: Vec<TimeStep>,
    /// Per candidate: how many jobs could use any of its slots. Extra copies
    /// of a start beyond that count add no usable capacity.
    max_multiplicity: Vec<usize>,
    nodes: u64,
    budget: u64,
}

enum SearchResult {
    Found(Vec<TimeStep>),
    Exhausted,
    OutOfBudget,
}

impl Search<'_> {
    fn run(&mut self, count: usize) -> SearchResult {
        let mut chosen: Vec<Calibration> = Vec::with_capacity(count);
        self.extend(&mut chosen, 0, count)
    }

    fn extend(
        &mut self,
        chosen: &mut Vec<Calibration>,
        from: usize,
        remaining: usize,
    ) -> SearchResult {
        self.nodes += 1;
        if self.nodes > self.budget {
            return SearchResult::OutOfBudget;
        }
        if remaining == 0 {
            if edf_feasible(self.jobs, chosen, self.params) {
                return SearchResult::Found(chosen.iter().map(|c| c.start).collect());
            }
            return SearchResult::Exhausted;
        }
        for i in from..self.candidates.len() {
            let start = self.candidates[i];
            let multiplicity = chosen.iter().filter(|c| c.start == start).count();
            if multiplicity >= self.max_multiplicity[i] {
                continue;
            }
            chosen.push(Calibration::new(start));
            match self.extend(chosen, i, remaining - 1) {
                SearchResult::Exhausted => {}
                other => {
                    chosen.pop();
                    return other;
                }
            }
            chosen.pop();
        }
        SearchResult::Exhausted
    }
}

/// Minimum number of calibrations that feasibly schedule `instance`, by
/// iterative deepening from `opt_lower_bound` over non-decreasing start
/// multisets drawn from the candidate set, accepting the first count with an
/// EDF-feasible choice.
pub fn min_calibrations(instance: &Instance, config: &OracleConfig) -> OracleOutcome {
    let n = instance.jobs.len();
    if n == 0 {
        return OracleOutcome::Exact {
            count: 0,
            witness: config.produce_witness.then(Vec::new),
        };
    }
    let params = instance.params();
    let candidates = candidate_starts(instance, config.candidate_mode);
    let max_multiplicity: Vec<usize> = candidates
        .iter()
        .map(|&s| {
            let cal = Calibration::new(s);
            instance
                .jobs
                .iter()
                .filter(|j| {
                    j.release < cal.calibrated_end(params)
                        && cal.calibrated_start(params) < j.deadline
                })
                .count()
        })
        .collect();
    let mut search = Search {
        jobs: &instance.jobs,
        params,
        candidates,
        max_multiplicity,
        nodes: 0,
        budget: config.node_budget,
    };
    let floor = opt_lower_bound(instance).max(1);
    for count in floor..=n {
        match search.run(count) {
            SearchResult::Found(witness) => {
                return OracleOutcome::Exact {
                    count,
                    witness: config.produce_witness.then_some(witness),
                };
            }
            SearchResult::OutOfBudget => {
                return OracleOutcome::BudgetExceeded {
                    nodes: search.nodes,
                }
            }
            SearchResult::Exhausted => {}
        }
    }
    // One calibration per job at start d - lambda - 1 is always feasible for a
    // valid instance, so the loop can only fall through on invalid input.
    OracleOutcome::BudgetExceeded {
        nodes: search.nodes,
    }
}

const MACHINE_GUARD_JOBS: usize = 7;
const MACHINE_GUARD_HORIZON: TimeStep = 10;

/// Smallest machine count for which some assignment of jobs to
/// `(machine, slot)` pairs is feasible, by exhaustive slot enumeration with
/// per-slot occupancy capped at `m`. Independent of EDF and of the density
/// bound; guarded to tiny instances.
pub fn min_machines_exhaustive(jobs: &[Job], horizon: TimeStep) -> Result<usize, OracleError> {
    let max_deadline = jobs.iter().map(|j| j.deadline).max().unwrap_or(0);
    if jobs.len() > MACHINE_GUARD_JOBS || horizon > MACHINE_GUARD_HORIZON || max_deadline > horizon
    {
        return Err(OracleError::SizeGuard {
            jobs: jobs.len(),
            horizon,
            max_jobs: MACHINE_GUARD_JOBS,
            max_horizon: MACHINE_GUARD_HORIZON,
        });
    }
    if jobs.is_empty() {
        return Ok(0);
    }
    let mut ordered: Vec<&Job> = jobs.iter().collect();
    ordered.sort_by_key(|j| (j.deadline, j.release, j.id));
    for m in 1..=jobs.len() {
        let mut occupancy: HashMap<TimeStep, usize> = HashMap::new();
        if place_jobs(&ordered, 0, m, &mut occupancy) {
            return Ok(m);
        }
    }
    Ok(jobs.len())
}

fn place_jobs(
    ordered: &[&Job],
    idx: usize,
    machines: usize,
    occupancy: &mut HashMap<TimeStep, usize>,
) -> bool {
    if idx == ordered.len() {
        return true;
    }
    let job = ordered[idx];
    for t in job.release..job.deadline {
        let used = occupancy.get(&t).copied().unwrap_or(0);
        if used < machines {
            *occupancy.entry(t).or_insert(0) += 1;
            if place_jobs(ordered, idx + 1, machines, occupancy) {
                return true;
            }
            *occupancy.get_mut(&t).unwrap() -= 1;
        }
    }
    false
}
