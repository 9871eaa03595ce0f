//! Domain types and validation: jobs, instances, calibrations, schedules.
//!
//! Time is discrete: a slot at `t` is the half-open interval `[t, t+1)`. A
//! calibration started at `s` spends `[s, s+lambda)` activating and is usable
//! during the calibrated interval `[s+lambda, s+lambda+T)`. Every job takes
//! exactly one time step.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::Rational;

/// Discrete time, bounded 64-bit. Overflow of `start + lambda + T` is a
/// validation error, not wraparound.
pub type TimeStep = i64;

pub type JobId = u64;

/// A unit-length job, live during its window `[release, deadline)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    #[serde(rename = "r")]
    pub release: TimeStep,
    #[serde(rename = "d")]
    pub deadline: TimeStep,
}

impl Job {
    pub fn new(id: JobId, release: TimeStep, deadline: TimeStep) -> Self {
        Job {
            id,
            release,
            deadline,
        }
    }

    /// Window length `deadline - release`.
    pub fn window(&self) -> TimeStep {
        self.deadline - self.release
    }
}

/// Calibration timing shared by every calibration of an instance: activation
/// length `lambda` and calibrated length `calibrated_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CalibParams {
    pub lambda: TimeStep,
    pub calibrated_len: TimeStep,
}

impl CalibParams {
    pub fn new(lambda: TimeStep, calibrated_len: TimeStep) -> Self {
        CalibParams {
            lambda,
            calibrated_len,
        }
    }

    /// Activation plus calibrated length.
    pub fn total_len(&self) -> TimeStep {
        self.lambda + self.calibrated_len
    }
}

/// One machine calibration, identified by its start time. Two calibrations may
/// share a start; the set of calibrations is a multiset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Calibration {
    pub start: TimeStep,
}

impl Calibration {
    pub fn new(start: TimeStep) -> Self {
        Calibration { start }
    }

    /// First usable slot: `start + lambda`.
    pub fn calibrated_start(&self, params: CalibParams) -> TimeStep {
        self.start + params.lambda
    }

    /// One past the last usable slot: `start + lambda + T`.
    pub fn calibrated_end(&self, params: CalibParams) -> TimeStep {
        self.start + params.lambda + params.calibrated_len
    }

    /// True when slot `t` lies in the calibrated interval.
    pub fn covers(&self, t: TimeStep, params: CalibParams) -> bool {
        self.calibrated_start(params) <= t && t < self.calibrated_end(params)
    }

    /// True when `t` lies anywhere in `[start, start + lambda + T)`,
    /// activation included.
    pub fn spans(&self, t: TimeStep, params: CalibParams) -> bool {
        self.start <= t && t < self.calibrated_end(params)
    }
}

/// A problem instance: calibration timing plus a job set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub lambda: TimeStep,
    #[serde(rename = "T")]
    pub calibrated_len: TimeStep,
    pub jobs: Vec<Job>,
}

impl Instance {
    pub fn new(lambda: TimeStep, calibrated_len: TimeStep, jobs: Vec<Job>) -> Self {
        Instance {
            lambda,
            calibrated_len,
            jobs,
        }
    }

    pub fn params(&self) -> CalibParams {
        CalibParams::new(self.lambda, self.calibrated_len)
    }

    pub fn min_release(&self) -> Option<TimeStep> {
        self.jobs.iter().map(|j| j.release).min()
    }

    pub fn max_deadline(&self) -> Option<TimeStep> {
        self.jobs.iter().map(|j| j.deadline).max()
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }
}

/// Placement of one job into one slot of one calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    pub job: JobId,
    /// Index into the schedule's calibration list.
    pub calibration: usize,
    #[serde(rename = "t")]
    pub time: TimeStep,
}

/// A complete solution: a calibration multiset plus one assignment per job.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub calibrations: Vec<Calibration>,
    pub assignments: Vec<Assignment>,
}

impl Schedule {
    pub fn calibration_count(&self) -> usize {
        self.calibrations.len()
    }
}

/// Shared configuration errors raised by controllers, generators and
/// adversaries before any stepping happens.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("alpha must lie strictly between 0 and 1, got {alpha}")]
    AlphaOutOfRange { alpha: Rational },
    #[error("bucket width T - floor(alpha*T) = {width} must be >= 1 (T={calibrated_len})")]
    BucketWidthZero {
        width: TimeStep,
        calibrated_len: TimeStep,
    },
    #[error("job {job} has window {window} < required 1 + lambda = {required}")]
    WindowTooSmall {
        job: JobId,
        window: TimeStep,
        required: TimeStep,
    },
    #[error("activation length lambda must be >= 1 for this construction, got {lambda}")]
    ActivationRequired { lambda: TimeStep },
    #[error("epsilon must be positive, got {epsilon}")]
    EpsilonNonPositive { epsilon: Rational },
    #[error("calibrated length T must be >= 1, got {calibrated_len}")]
    NonPositiveCalibratedLen { calibrated_len: TimeStep },
    #[error("no integer window length exists in the requested range: {detail}")]
    EmptyWindowRange { detail: String },
    #[error("{detail}")]
    InvalidParameter { detail: String },
}

/// A single broken rule, naming the offending job/calibration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    NegativeLambda {
        lambda: TimeStep,
    },
    NonPositiveCalibratedLen {
        calibrated_len: TimeStep,
    },
    DuplicateJobId {
        id: JobId,
    },
    NegativeRelease {
        job: JobId,
        release: TimeStep,
    },
    WindowTooSmall {
        job: JobId,
        window: TimeStep,
        required: TimeStep,
    },
    NegativeCalibrationStart {
        calibration: usize,
        start: TimeStep,
    },
    CalibrationOverflow {
        calibration: usize,
        start: TimeStep,
    },
    UnknownJob {
        job: JobId,
    },
    CalibrationIndexOutOfRange {
        calibration: usize,
        len: usize,
    },
    AssignedBeforeRelease {
        job: JobId,
        time: TimeStep,
        release: TimeStep,
    },
    AssignedPastDeadline {
        job: JobId,
        time: TimeStep,
        deadline: TimeStep,
    },
    OutsideCalibratedInterval {
        job: JobId,
        calibration: usize,
        time: TimeStep,
    },
    SlotDoubleBooked {
        calibration: usize,
        time: TimeStep,
    },
    JobAssignedTwice {
        job: JobId,
    },
    JobUnassigned {
        job: JobId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeLambda { lambda } => write!(f, "lambda {lambda} is negative"),
            Violation::NonPositiveCalibratedLen { calibrated_len } => {
                write!(f, "calibrated length T {calibrated_len} must be positive")
            }
            Violation::DuplicateJobId { id } => write!(f, "duplicate job id {id}"),
            Violation::NegativeRelease { job, release } => {
                write!(f, "job {job}: release {release} is negative")
            }
            Violation::WindowTooSmall {
                job,
                window,
                required,
            } => {
                write!(f, "job {job}: window {window} < 1 + lambda = {required}")
            }
            Violation::NegativeCalibrationStart { calibration, start } => {
                write!(f, "calibration {calibration}: start {start} is negative")
            }
            Violation::CalibrationOverflow { calibration, start } => {
                write!(
                    f,
                    "calibration {calibration}: start {start} + lambda + T overflows"
                )
            }
            Violation::UnknownJob { job } => write!(f, "assignment references unknown job {job}"),
            Violation::CalibrationIndexOutOfRange { calibration, len } => {
                write!(
                    f,
                    "calibration index {calibration} out of range (have {len})"
                )
            }
            Violation::AssignedBeforeRelease { job, time, release } => {
                write!(f, "job {job}: scheduled at {time} before release {release}")
            }
            Violation::AssignedPastDeadline {
                job,
                time,
                deadline,
            } => {
                write!(
                    f,
                    "job {job}: scheduled at {time}, past deadline {deadline}"
                )
            }
            Violation::OutsideCalibratedInterval {
                job,
                calibration,
                time,
            } => {
                write!(f, "job {job}: slot {time} outside calibrated interval of calibration {calibration}")
            }
            Violation::SlotDoubleBooked { calibration, time } => {
                write!(
                    f,
                    "slot (calibration {calibration}, t={time}) double-booked"
                )
            }
            Violation::JobAssignedTwice { job } => write!(f, "job {job} assigned more than once"),
            Violation::JobUnassigned { job } => write!(f, "job {job} never assigned"),
        }
    }
}

/// Outcome of a validation pass. Violations are data, not failures; the list
/// is sorted and deduplicated so the report is independent of input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new(mut violations: Vec<Violation>) -> Self {
        violations.sort();
        violations.dedup();
        ValidationReport { violations }
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks instance-level invariants: parameter sanity, unique job ids,
/// non-negative releases, and the feasibility window `d - r >= 1 + lambda`.
pub fn validate_instance(instance: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    if instance.lambda < 0 {
        violations.push(Violation::NegativeLambda {
            lambda: instance.lambda,
        });
    }
    if instance.calibrated_len < 1 {
        violations.push(Violation::NonPositiveCalibratedLen {
            calibrated_len: instance.calibrated_len,
        });
    }
    let mut seen: BTreeMap<JobId, usize> = BTreeMap::new();
    for job in &instance.jobs {
        *seen.entry(job.id).or_insert(0) += 1;
        if job.release < 0 {
            violations.push(Violation::NegativeRelease {
                job: job.id,
                release: job.release,
            });
        }
        let required = 1 + instance.lambda.max(0);
        if job.window() < required {
            violations.push(Violation::WindowTooSmall {
                job: job.id,
                window: job.window(),
                required,
            });
        }
    }
    for (id, count) in seen {
        if count > 1 {
            violations.push(Violation::DuplicateJobId { id });
        }
    }
    ValidationReport::new(violations)
}

/// Checks a schedule against an instance: every assignment in-window and
/// inside its calibration's calibrated interval, no slot double-booked, and
/// every job assigned exactly once.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> ValidationReport {
    let params = instance.params();
    let mut violations = Vec::new();

    for (idx, cal) in schedule.calibrations.iter().enumerate() {
        if cal.start < 0 {
            violations.push(Violation::NegativeCalibrationStart {
                calibration: idx,
                start: cal.start,
            });
        }
        let end = cal
            .start
            .checked_add(params.lambda)
            .and_then(|v| v.checked_add(params.calibrated_len));
        if end.is_none() {
            violations.push(Violation::CalibrationOverflow {
                calibration: idx,
                start: cal.start,
            });
        }
    }

    let by_id: BTreeMap<JobId, &Job> = instance.jobs.iter().map(|j| (j.id, j)).collect();
    let mut booked: HashSet<(usize, TimeStep)> = HashSet::new();
    let mut assigned: BTreeMap<JobId, usize> = BTreeMap::new();

    for a in &schedule.assignments {
        let job = match by_id.get(&a.job) {
            Some(job) => *job,
            None => {
                violations.push(Violation::UnknownJob { job: a.job });
                continue;
            }
        };
        *assigned.entry(a.job).or_insert(0) += 1;
        if a.calibration >= schedule.calibrations.len() {
            violations.push(Violation::CalibrationIndexOutOfRange {
                calibration: a.calibration,
                len: schedule.calibrations.len(),
            });
            continue;
        }
        if a.time < job.release {
            violations.push(Violation::AssignedBeforeRelease {
                job: a.job,
                time: a.time,
                release: job.release,
            });
        }
        if a.time + 1 > job.deadline {
            violations.push(Violation::AssignedPastDeadline {
                job: a.job,
                time: a.time,
                deadline: job.deadline,
            });
        }
        if !schedule.calibrations[a.calibration].covers(a.time, params) {
            violations.push(Violation::OutsideCalibratedInterval {
                job: a.job,
                calibration: a.calibration,
                time: a.time,
            });
        }
        if !booked.insert((a.calibration, a.time)) {
            violations.push(Violation::SlotDoubleBooked {
                calibration: a.calibration,
                time: a.time,
            });
        }
    }

    for job in &instance.jobs {
        match assigned.get(&job.id) {
            None => violations.push(Violation::JobUnassigned { job: job.id }),
            Some(1) => {}
            Some(_) => violations.push(Violation::JobAssignedTwice { job: job.id }),
        }
    }

    ValidationReport::new(violations)
}

/// Number of calibrations whose calibrated interval contains slot `t`.
pub fn slot_capacity(calibrations: &[Calibration], t: TimeStep, params: CalibParams) -> usize {
    calibrations.iter().filter(|c| c.covers(t, params)).count()
}

/// Distinct slot times covered by at least one calibration, ascending.
pub fn covered_slot_times(calibrations: &[Calibration], params: CalibParams) -> Vec<TimeStep> {
    let mut times: BTreeSet<TimeStep> = BTreeSet::new();
    for cal in calibrations {
        for t in cal.calibrated_start(params)..cal.calibrated_end(params) {
            times.insert(t);
        }
    }
    times.into_iter().collect()
}
