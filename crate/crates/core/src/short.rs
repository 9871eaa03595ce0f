//! Online controller for alpha-short window jobs.
//!
//! Each arriving job is reduced to the zero-activation problem (`d' = d -
//! lambda`), routed by release into a bucket of width `T - floor(alpha*T)`,
//! and handed to that bucket's online machine-minimization controller. Every
//! machine the black box opens at time `t` becomes a calibration starting at
//! `t`; every black-box execution at time `tau` becomes a committed real
//! execution at `tau + lambda` on the matching calibration — a commitment
//! made `lambda` steps in advance, never retracted.

use std::collections::BTreeMap;

use crate::domain::{Assignment, CalibParams, ConfigError, Instance, Job, Schedule, TimeStep};
use crate::exact::{ceil_to_int, floor_to_int, from_int, Rational};
use crate::integrated::{classify, JobClass};
use crate::machines::MachineMinController;
use crate::simulator::{run, Controller, SimError, StepEmission, StepError};

/// Reduces one job to the zero-activation problem: same release, deadline
/// `d - lambda`, still unit length.
pub fn reduce_job(job: &Job, lambda: TimeStep) -> Result<Job, ConfigError> {
    if job.window() < 1 + lambda {
        return Err(ConfigError::WindowTooSmall {
            job: job.id,
            window: job.window(),
            required: 1 + lambda,
        });
    }
    Ok(Job::new(job.id, job.release, job.deadline - lambda))
}

/// Bucket width `T - floor(alpha * T)`; must be >= 1.
pub fn bucket_width(calibrated_len: TimeStep, alpha: &Rational) -> Result<TimeStep, ConfigError> {
    if calibrated_len < 1 {
        return Err(ConfigError::NonPositiveCalibratedLen { calibrated_len });
    }
    let width = calibrated_len - floor_to_int(&(*alpha * from_int(calibrated_len)));
    if width < 1 {
        return Err(ConfigError::BucketWidthZero {
            width,
            calibrated_len,
        });
    }
    Ok(width)
}

/// Bucket that a job released at `release` joins: `floor(release / width)`.
pub fn bucket_index(
    release: TimeStep,
    calibrated_len: TimeStep,
    alpha: &Rational,
) -> Result<i64, ConfigError> {
    Ok(release.div_euclid(bucket_width(calibrated_len, alpha)?))
}

/// Lifts a schedule of the reduced (lambda = 0) problem back to activation
/// length `lambda`: calibration starts unchanged, every execution shifted
/// `lambda` steps later.
pub fn lift_schedule(reduced: &Schedule, lambda: TimeStep) -> Schedule {
    Schedule {
        calibrations: reduced.calibrations.clone(),
        assignments: reduced
            .assignments
            .iter()
            .map(|a| Assignment {
                job: a.job,
                calibration: a.calibration,
                time: a.time + lambda,
            })
            .collect(),
    }
}

/// `ceil(2 / (1 - alpha))`: how many buckets one calibration can intersect.
/// Analysis-side only; the controller never consults it.
pub fn cover_factor(alpha: &Rational) -> Result<i64, ConfigError> {
    if *alpha <= from_int(0) || *alpha >= from_int(1) {
        return Err(ConfigError::AlphaOutOfRange { alpha: *alpha });
    }
    Ok(ceil_to_int(&(from_int(2) / (from_int(1) - *alpha))))
}

#[derive(Debug, Clone, Default)]
struct Bucket {
    controller: MachineMinController,
    /// Machine index -> index of its calibration in this controller's ledger.
    machine_calibrations: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ShortController {
    alpha: Rational,
    params: CalibParams,
    width: TimeStep,
    /// Buckets created lazily on first routed job, keyed by bucket index.
    buckets: BTreeMap<i64, Bucket>,
    /// Calibrations this controller has emitted, in emission order.
    emitted_calibrations: usize,
    last_time: Option<TimeStep>,
}

impl ShortController {
    pub fn new(alpha: Rational, params: CalibParams) -> Result<Self, ConfigError> {
        if alpha <= from_int(0) || alpha >= from_int(1) {
            return Err(ConfigError::AlphaOutOfRange { alpha });
        }
        let width = bucket_width(params.calibrated_len, &alpha)?;
        Ok(ShortController {
            alpha,
            params,
            width,
            buckets: BTreeMap::new(),
            emitted_calibrations: 0,
            last_time: None,
        })
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    pub fn width(&self) -> TimeStep {
        self.width
    }

    pub fn calibration_count(&self) -> usize {
        self.emitted_calibrations
    }

    pub fn bucket_indices(&self) -> Vec<i64> {
        self.buckets.keys().copied().collect()
    }

    /// Total repair events across all bucket controllers.
    pub fn repairs(&self) -> u64 {
        self.buckets.values().map(|b| b.controller.repairs()).sum()
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
            if classify(job, &self.alpha, self.params) != JobClass::Short {
                return Err(StepError::WrongJobClass {
                    job: job.id,
                    window: job.window(),
                    expected: "short",
                });
            }
        }
        Ok(())
    }
}

impl Controller for ShortController {
    fn params(&self) -> CalibParams {
        self.params
    }

    fn step(&mut self, t: TimeStep, released: &[Job]) -> Result<StepEmission, StepError> {
        self.check_contract(t, released)?;

        // Route reduced jobs to their buckets.
        let mut routed: BTreeMap<i64, Vec<Job>> = BTreeMap::new();
        for job in released {
            let reduced = reduce_job(job, self.params.lambda)?;
            let k = reduced.release.div_euclid(self.width);
            // Reduced window must sit inside the bucket's T-length interval.
            let base = k * self.width;
            assert!(
                base <= reduced.release && reduced.deadline <= base + self.params.calibrated_len,
                "reduced window of job {} escapes bucket {k}",
                job.id
            );
            routed.entry(k).or_default().push(reduced);
            self.buckets.entry(k).or_default();
        }

        let mut emission = StepEmission::default();
        for (&k, bucket) in self.buckets.iter_mut() {
            if bucket.controller.is_idle() && !routed.contains_key(&k) {
                continue;
            }
            let batch = routed.remove(&k).unwrap_or_default();
            let out = bucket.controller.step(t, &batch)?;
            for _ in 0..out.opened_now {
                bucket.machine_calibrations.push(self.emitted_calibrations);
                emission.new_calibration_starts.push(t);
                self.emitted_calibrations += 1;
            }
            for (job, machine) in out.executed {
                emission.assignments.push(Assignment {
                    job,
                    calibration: bucket.machine_calibrations[machine],
                    time: t + self.params.lambda,
                });
            }
        }
        Ok(emission)
    }

    fn is_idle(&self) -> bool {
        self.buckets.values().all(|b| b.controller.is_idle())
    }
}

/// Runs the short-job controller over a whole instance.
pub fn short_run(instance: &Instance, alpha: Rational) -> Result<(Schedule, u64), SimError> {
    let mut controller =
        ShortController::new(alpha, instance.params()).map_err(|e| SimError::Step {
            time: 0,
            source: StepError::Config(e),
        })?;
    let trace = run(instance, &mut controller)?;
    Ok((trace.schedule, controller.repairs()))
}
