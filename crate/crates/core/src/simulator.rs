//! The online event loop: delivers jobs exactly at their release, enforces
//! the no-peeking contract between instances/adversaries and controllers,
//! maintains the committed-calibration and committed-assignment ledgers, and
//! records traces.
//!
//! Semantics are those of stepping every integer time; the loop skips ahead
//! only across gaps where the controller is idle and nothing is committed,
//! which is behaviorally identical.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    validate_instance, Assignment, CalibParams, Calibration, ConfigError, Instance, Job, JobId,
    Schedule, TimeStep, ValidationReport,
};
use crate::machines::MachineMinError;

/// What a controller emits at one time step. Calibration indices inside
/// `assignments` refer to the run-wide ledger: calibrations are appended in
/// emission order, so a controller that has emitted `k` starts so far may
/// reference indices `0..k + new_calibration_starts.len()`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepEmission {
    pub new_calibration_starts: Vec<TimeStep>,
    /// Immediate executions (`time == t`) and future commitments (`time > t`).
    pub assignments: Vec<Assignment>,
}

/// Contract errors raised by controllers themselves.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("step time {now} is not after previous step {last}")]
    NonMonotonicTime { last: TimeStep, now: TimeStep },
    #[error("job {job} released at {release} delivered at step {now}")]
    ReleaseMismatch {
        job: JobId,
        release: TimeStep,
        now: TimeStep,
    },
    #[error("job {job} (window {window}) is not alpha-{expected}; caller must pre-filter")]
    WrongJobClass {
        job: JobId,
        window: TimeStep,
        expected: &'static str,
    },
    #[error("round budget exhausted at t={time}: {rounds} rounds for {queued} queued jobs")]
    RoundBudgetExceeded {
        time: TimeStep,
        rounds: usize,
        queued: usize,
    },
    #[error(transparent)]
    MachineMin(#[from] MachineMinError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// An online algorithm under simulation. Implementations must be
/// deterministic functions of their input history.
pub trait Controller {
    fn params(&self) -> CalibParams;

    /// Advance to time `t` (strictly increasing) with the jobs released at
    /// `t`. May start calibrations (start >= t), execute jobs at `t`, and
    /// commit future executions (time > t); commitments are irrevocable.
    fn step(&mut self, t: TimeStep, released: &[Job]) -> Result<StepEmission, StepError>;

    /// True when the controller holds no unexecuted job: stepping it without
    /// releases would provably do nothing.
    fn is_idle(&self) -> bool;
}

/// Simulation failures: contract violations name the step and the rule.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("instance failed validation: {0}")]
    InvalidInstance(ValidationReport),
    #[error("controller params (lambda={controller_lambda}, T={controller_t}) do not match instance (lambda={instance_lambda}, T={instance_t})")]
    ParamsMismatch {
        controller_lambda: TimeStep,
        controller_t: TimeStep,
        instance_lambda: TimeStep,
        instance_t: TimeStep,
    },
    #[error("t={time}: controller error: {source}")]
    Step { time: TimeStep, source: StepError },
    #[error("t={time}: calibration start {start} lies in the past")]
    StartInPast { time: TimeStep, start: TimeStep },
    #[error("t={time}: assignment at {at} lies in the past")]
    AssignmentInPast { time: TimeStep, at: TimeStep },
    #[error(
        "t={time}: assignment references calibration {calibration}, only {committed} committed"
    )]
    UnknownCalibration {
        time: TimeStep,
        calibration: usize,
        committed: usize,
    },
    #[error("t={time}: job {job} assigned at {at} outside calibrated interval of calibration {calibration}")]
    OutsideCalibratedInterval {
        time: TimeStep,
        job: JobId,
        at: TimeStep,
        calibration: usize,
    },
    #[error("t={time}: unknown job {job}")]
    UnknownJob { time: TimeStep, job: JobId },
    #[error("t={time}: job {job} not yet released (release {release})")]
    JobNotReleased {
        time: TimeStep,
        job: JobId,
        release: TimeStep,
    },
    #[error("t={time}: job {job} assigned at {at} before its release {release}")]
    AssignedBeforeRelease {
        time: TimeStep,
        job: JobId,
        at: TimeStep,
        release: TimeStep,
    },
    #[error("t={time}: job {job} assigned at {at} past deadline {deadline}")]
    AssignedPastDeadline {
        time: TimeStep,
        job: JobId,
        at: TimeStep,
        deadline: TimeStep,
    },
    #[error("t={time}: slot (calibration {calibration}, t={at}) double-booked")]
    SlotDoubleBooked {
        time: TimeStep,
        calibration: usize,
        at: TimeStep,
    },
    #[error("t={time}: job {job} already assigned; commitments are irrevocable")]
    JobReassigned { time: TimeStep, job: JobId },
    #[error("{unfinished} jobs unexecuted at the simulation horizon {horizon}")]
    Unfinished {
        horizon: TimeStep,
        unfinished: usize,
    },
    #[error("adversary released job {job} with release {release} at step {now}")]
    AdversaryReleaseMismatch {
        job: JobId,
        release: TimeStep,
        now: TimeStep,
    },
}

/// One simulated time step, as recorded in the trace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: TimeStep,
    pub released: Vec<JobId>,
    pub starts: Vec<TimeStep>,
    /// Future commitments emitted at this step (execution time > t).
    pub committed: Vec<Assignment>,
    /// Assignments that materialized at this step's time.
    pub executed: Vec<Assignment>,
}

/// Full record of one simulation run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub steps: Vec<TraceStep>,
    pub schedule: Schedule,
    pub calibration_count: usize,
}

struct SimState<'a> {
    params: CalibParams,
    jobs_by_id: BTreeMap<JobId, Job>,
    ledger: Vec<Calibration>,
    booked: BTreeSet<(usize, TimeStep)>,
    assigned: BTreeSet<JobId>,
    future: BTreeMap<TimeStep, Vec<Assignment>>,
    executed: Vec<Assignment>,
    steps: Vec<TraceStep>,
    controller: &'a mut dyn Controller,
}

impl<'a> SimState<'a> {
    fn new(params: CalibParams, controller: &'a mut dyn Controller) -> Self {
        SimState {
            params,
            jobs_by_id: BTreeMap::new(),
            ledger: Vec::new(),
            booked: BTreeSet::new(),
            assigned: BTreeSet::new(),
            future: BTreeMap::new(),
            executed: Vec::new(),
            steps: Vec::new(),
            controller,
        }
    }

    /// Runs one step: deliver `released`, validate the emission, materialize
    /// whatever lands at `t`.
    fn step(&mut self, t: TimeStep, released: &[Job]) -> Result<(), SimError> {
        for job in released {
            self.jobs_by_id.insert(job.id, *job);
        }
        let emission = self
            .controller
            .step(t, released)
            .map_err(|source| SimError::Step { time: t, source })?;

        for &start in &emission.new_calibration_starts {
            if start < t {
                return Err(SimError::StartInPast { time: t, start });
            }
            self.ledger.push(Calibration::new(start));
        }

        let mut executed_now: Vec<Assignment> = self.future.remove(&t).unwrap_or_default();
        let mut committed_now: Vec<Assignment> = Vec::new();
        for a in emission.assignments {
            self.admit(t, a)?;
            if a.time == t {
                executed_now.push(a);
            } else {
                committed_now.push(a);
                self.future.entry(a.time).or_default().push(a);
            }
        }
        self.executed.extend_from_slice(&executed_now);
        self.steps.push(TraceStep {
            t,
            released: released.iter().map(|j| j.id).collect(),
            starts: emission.new_calibration_starts,
            committed: committed_now,
            executed: executed_now,
        });
        Ok(())
    }

    /// Checks every rule an assignment must satisfy at commit time.
    fn admit(&mut self, t: TimeStep, a: Assignment) -> Result<(), SimError> {
        let job = *self.jobs_by_id.get(&a.job).ok_or(SimError::UnknownJob {
            time: t,
            job: a.job,
        })?;
        if job.release > t {
            return Err(SimError::JobNotReleased {
                time: t,
                job: a.job,
                release: job.release,
            });
        }
        if a.time < t {
            return Err(SimError::AssignmentInPast {
                time: t,
                at: a.time,
            });
        }
        if a.calibration >= self.ledger.len() {
            return Err(SimError::UnknownCalibration {
                time: t,
                calibration: a.calibration,
                committed: self.ledger.len(),
            });
        }
        if !self.ledger[a.calibration].covers(a.time, self.params) {
            return Err(SimError::OutsideCalibratedInterval {
                time: t,
                job: a.job,
                at: a.time,
                calibration: a.calibration,
            });
        }
        if a.time < job.release {
            return Err(SimError::AssignedBeforeRelease {
                time: t,
                job: a.job,
                at: a.time,
                release: job.release,
            });
        }
        if a.time + 1 > job.deadline {
            return Err(SimError::AssignedPastDeadline {
                time: t,
                job: a.job,
                at: a.time,
                deadline: job.deadline,
            });
        }
        if !self.booked.insert((a.calibration, a.time)) {
            return Err(SimError::SlotDoubleBooked {
                time: t,
                calibration: a.calibration,
                at: a.time,
            });
        }
        if !self.assigned.insert(a.job) {
            return Err(SimError::JobReassigned {
                time: t,
                job: a.job,
            });
        }
        Ok(())
    }

    fn next_commitment(&self) -> Option<TimeStep> {
        self.future.keys().next().copied()
    }

    fn finish(self, horizon: TimeStep, expected_jobs: usize) -> Result<SimulationTrace, SimError> {
        let unfinished = expected_jobs.saturating_sub(self.assigned.len());
        if unfinished > 0 || !self.future.is_empty() {
            return Err(SimError::Unfinished {
                horizon,
                unfinished: unfinished.max(self.future.values().map(Vec::len).sum::<usize>()),
            });
        }
        let calibration_count = self.ledger.len();
        Ok(SimulationTrace {
            steps: self.steps,
            schedule: Schedule {
                calibrations: self.ledger,
                assignments: self.executed,
            },
            calibration_count,
        })
    }
}

/// Simulates `controller` on `instance`: jobs are delivered exactly at their
/// release, every contract violation aborts with a diagnostic, and all jobs
/// must be executed by the horizon (the maximum deadline).
pub fn run(
    instance: &Instance,
    controller: &mut dyn Controller,
) -> Result<SimulationTrace, SimError> {
    let report = validate_instance(instance);
    if !report.is_ok() {
        return Err(SimError::InvalidInstance(report));
    }
    let params = instance.params();
    let cp = controller.params();
    if cp != params {
        return Err(SimError::ParamsMismatch {
            controller_lambda: cp.lambda,
            controller_t: cp.calibrated_len,
            instance_lambda: instance.lambda,
            instance_t: instance.calibrated_len,
        });
    }
    let mut releases: BTreeMap<TimeStep, Vec<Job>> = BTreeMap::new();
    for job in &instance.jobs {
        releases.entry(job.release).or_default().push(*job);
    }
    for batch in releases.values_mut() {
        batch.sort_by_key(|j| j.id);
    }
    let Some(horizon) = instance.max_deadline() else {
        // Empty instance: nothing to deliver, nothing to run.
        return Ok(SimulationTrace::default());
    };

    let mut state = SimState::new(params, controller);
    let mut t = *releases
        .keys()
        .next()
        .expect("non-empty instance has a first release");
    loop {
        let released = releases.remove(&t).unwrap_or_default();
        state.step(t, &released)?;

        let next_release = releases.keys().next().copied();
        let next_commit = state.next_commitment();
        let next_t = if !state.controller.is_idle() {
            t + 1
        } else {
            match (next_release, next_commit) {
                (None, None) => break,
                (a, b) => a.into_iter().chain(b).min().expect("one side is Some"),
            }
        };
        if next_t > horizon {
            return state.finish(horizon, instance.jobs.len());
        }
        t = next_t;
    }
    state.finish(horizon, instance.jobs.len())
}

/// What a reactive adversary observes before releasing jobs at `t`: the
/// calibration starts the controller emitted at the previous step, and the
/// running total.
#[derive(Debug, Clone, Copy)]
pub struct AdversaryView<'a> {
    pub new_calibration_starts: &'a [TimeStep],
    pub total_calibrations: usize,
}

/// A reactive instance generator. Emissions at `t` may depend only on
/// observations up to `t`.
pub trait Adversary {
    fn params(&self) -> CalibParams;

    /// Jobs released at `t` (all with release == t), after observing `view`.
    fn step(&mut self, t: TimeStep, view: &AdversaryView<'_>) -> Vec<Job>;

    /// True once the adversary will never release another job.
    fn halted(&self) -> bool;
}

/// Runs `controller` against a reactive `adversary`: each step the adversary
/// first observes the previous step's emissions, then releases jobs. The
/// release phase ends at adversary halt or at `horizon_cap`; the run then
/// drains until every released job is executed. Returns the trace and the
/// realized instance for offline evaluation.
pub fn run_reactive(
    adversary: &mut dyn Adversary,
    controller: &mut dyn Controller,
    horizon_cap: TimeStep,
) -> Result<(SimulationTrace, Instance), SimError> {
    let params = controller.params();
    let ap = adversary.params();
    if ap != params {
        return Err(SimError::ParamsMismatch {
            controller_lambda: params.lambda,
            controller_t: params.calibrated_len,
            instance_lambda: ap.lambda,
            instance_t: ap.calibrated_len,
        });
    }

    let mut state = SimState::new(params, controller);
    let mut emitted: Vec<Job> = Vec::new();
    let mut last_starts: Vec<TimeStep> = Vec::new();
    let mut t: TimeStep = 0;
    let mut max_deadline: TimeStep = 0;

    while !adversary.halted() && t <= horizon_cap {
        let view = AdversaryView {
            new_calibration_starts: &last_starts,
            total_calibrations: state.ledger.len(),
        };
        let released = adversary.step(t, &view);
        for job in &released {
            if job.release != t {
                return Err(SimError::AdversaryReleaseMismatch {
                    job: job.id,
                    release: job.release,
                    now: t,
                });
            }
            max_deadline = max_deadline.max(job.deadline);
        }
        emitted.extend_from_slice(&released);
        state.step(t, &released)?;
        last_starts = state
            .steps
            .last()
            .map(|s| s.starts.clone())
            .unwrap_or_default();
        t += 1;
    }

    // Drain phase: no more releases; run until idle with nothing outstanding.
    loop {
        if state.controller.is_idle() && state.next_commitment().is_none() {
            break;
        }
        let next_t = if state.controller.is_idle() {
            state.next_commitment().expect("checked above")
        } else {
            t
        };
        if next_t > max_deadline {
            // Past the horizon with work outstanding: surface the miss.
            state.finish(max_deadline, emitted.len())?;
            return Err(SimError::Unfinished {
                horizon: max_deadline,
                unfinished: 0,
            });
        }
        state.step(next_t, &[])?;
        t = next_t + 1;
    }

    let trace = state.finish(max_deadline, emitted.len())?;
    let instance = Instance::new(params.lambda, params.calibrated_len, emitted);
    Ok((trace, instance))
}

/// True iff running a fresh controller on the full instance and on the
/// instance truncated to jobs with release <= `cut` produces identical trace
/// steps up to and including `cut`. Operationalizes the online contract:
/// decisions at `t` may depend only on jobs released by `t`.
///
/// The factory is handed the instance each run actually uses, so controllers
/// that smuggle the job list in at construction time are exposed too.
pub fn prefix_consistency_check<C, F>(
    make_controller: F,
    instance: &Instance,
    cut: TimeStep,
) -> Result<bool, SimError>
where
    C: Controller,
    F: Fn(&Instance) -> C,
{
    let full = run(instance, &mut make_controller(instance))?;
    let truncated = Instance::new(
        instance.lambda,
        instance.calibrated_len,
        instance
            .jobs
            .iter()
            .filter(|j| j.release <= cut)
            .copied()
            .collect(),
    );
    let trunc = run(&truncated, &mut make_controller(&truncated))?;
    let prefix = |trace: &SimulationTrace| -> Vec<TraceStep> {
        trace.steps.iter().filter(|s| s.t <= cut).cloned().collect()
    };
    Ok(prefix(&full) == prefix(&trunc))
}
