//! Online controller for alpha-long window jobs.
//!
//! At each time step, while some queued job due within `t + lambda + T + 1`
//! cannot be virtually EDF-scheduled into the free slots of the committed
//! calibrations over `[t, t + lambda + T]`, the controller starts a round of
//! calibrations: `ceil(1/alpha)` at `t` plus one at `t + T`. It then executes
//! queued jobs into the free calibrated slots at `t` in deadline order.

use std::collections::BTreeMap;

use crate::domain::{
    Assignment, CalibParams, Calibration, Instance, Job, JobId, Schedule, TimeStep,
};
use crate::edf::{virtual_check, CapacityProfile};
use crate::exact::{ceil_to_int, from_int, Rational};
use crate::integrated::{classify, JobClass};
use crate::simulator::{run, Controller, SimError, StepEmission, StepError};

#[derive(Debug, Clone)]
pub struct LongController {
    alpha: Rational,
    params: CalibParams,
    /// Pending released jobs keyed by (deadline, id): EDF order.
    queue: BTreeMap<(TimeStep, JobId), Job>,
    /// Every calibration committed so far, including future starts.
    committed: Vec<Calibration>,
    /// Slots consumed by executed jobs; never reused by the virtual check.
    consumed: CapacityProfile,
    rounds: u64,
    per_round: usize,
    last_time: Option<TimeStep>,
}

impl LongController {
    pub fn new(alpha: Rational, params: CalibParams) -> Result<Self, crate::domain::ConfigError> {
        if alpha <= from_int(0) || alpha >= from_int(1) {
            return Err(crate::domain::ConfigError::AlphaOutOfRange { alpha });
        }
        let per_round = ceil_to_int(&alpha.recip()) as usize;
        Ok(LongController {
            alpha,
            params,
            queue: BTreeMap::new(),
            committed: Vec::new(),
            consumed: CapacityProfile::new(),
            rounds: 0,
            per_round,
            last_time: None,
        })
    }

    /// Rounds of calibrations started so far; the calibration count is always
    /// `(ceil(1/alpha) + 1) * rounds`.
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn calibrations_per_round(&self) -> usize {
        self.per_round + 1
    }

    pub fn committed_calibrations(&self) -> &[Calibration] {
        &self.committed
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    fn check_contract(&mut self, t: TimeStep, released: &[Job]) -> Result<(), StepError> {
        if let Some(last) = self.last_time {
            if t <= last {
                return Err(StepError::NonMonotonicTime { last, now: t });
            }
        }
        self.last_time = Some(t);
        for job in released {
            if job.release != t {
                return Err(StepError::ReleaseMismatch {
                    job: job.id,
                    release: job.release,
                    now: t,
                });
            }
            if classify(job, &self.alpha, self.params) != JobClass::Long {
                return Err(StepError::WrongJobClass {
                    job: job.id,
                    window: job.window(),
                    expected: "long",
                });
            }
        }
        Ok(())
    }
}

impl Controller for LongController {
    fn params(&self) -> CalibParams {
        self.params
    }

    fn step(&mut self, t: TimeStep, released: &[Job]) -> Result<StepEmission, StepError> {
        self.check_contract(t, released)?;
        for job in released {
            self.queue.insert((job.deadline, job.id), *job);
        }

        let mut starts = Vec::new();
        let mut rounds_this_step = 0usize;
        let round_budget = self.queue.len();
        while virtual_check(
            self.queue.values(),
            &self.committed,
            &self.consumed,
            t,
            self.params,
        )
        .is_some()
        {
            if rounds_this_step >= round_budget {
                return Err(StepError::RoundBudgetExceeded {
                    time: t,
                    rounds: rounds_this_step,
                    queued: self.queue.len(),
                });
            }
            for _ in 0..self.per_round {
                self.committed.push(Calibration::new(t));
                starts.push(t);
            }
            self.committed
                .push(Calibration::new(t + self.params.calibrated_len));
            starts.push(t + self.params.calibrated_len);
            self.rounds += 1;
            rounds_this_step += 1;
        }

        let mut executed = Vec::new();
        loop {
            if self.queue.is_empty() {
                break;
            }
            // Free calibration covering t that ends earliest, ties by index.
            let slot = self
                .committed
                .iter()
                .enumerate()
                .filter(|(idx, c)| c.covers(t, self.params) && self.consumed.is_free(*idx, t))
                .min_by_key(|(idx, c)| (c.calibrated_end(self.params), *idx));
            let Some((idx, _)) = slot else { break };
            let (&(_, id), _) = self.queue.first_key_value().expect("queue non-empty");
            self.queue.pop_first();
            self.consumed.book(idx, t);
            executed.push(Assignment {
                job: id,
                calibration: idx,
                time: t,
            });
        }

        Ok(StepEmission {
            new_calibration_starts: starts,
            assignments: executed,
        })
    }

    fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }
}

/// Runs the long-job controller over a whole instance and returns the final
/// schedule together with the number of rounds started.
pub fn long_run(instance: &Instance, alpha: Rational) -> Result<(Schedule, u64), SimError> {
    let mut controller =
        LongController::new(alpha, instance.params()).map_err(|e| SimError::Step {
            time: 0,
            source: StepError::Config(e),
        })?;
    let trace = run(instance, &mut controller)?;
    Ok((trace.schedule, controller.rounds()))
}
