//! The combined controller: classify each arriving job as alpha-long or
//! alpha-short and route it to the corresponding sub-controller; merge the
//! two emission streams (long first) into one calibration ledger.

use crate::domain::{CalibParams, ConfigError, Instance, Job, Schedule, TimeStep};
use crate::exact::{ceil_to_int, from_int, Rational};
use crate::long::LongController;
use crate::short::{cover_factor, ShortController};
use crate::simulator::{run, Controller, SimError, StepEmission, StepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobClass {
    Long,
    Short,
}

/// A job is alpha-long when its window is at least `alpha * T + lambda`,
/// compared exactly in rationals; alpha-short otherwise.
pub fn classify(job: &Job, alpha: &Rational, params: CalibParams) -> JobClass {
    let window = from_int(job.window());
    let threshold = *alpha * from_int(params.calibrated_len) + from_int(params.lambda);
    if window >= threshold {
        JobClass::Long
    } else {
        JobClass::Short
    }
}

/// Default split parameter: the ratio bound is minimized at 1/3.
pub fn default_alpha() -> Rational {
    from_int(1) / from_int(3)
}

/// A competitive-ratio bound of the form `e_coeff * e + constant`, kept
/// symbolic so it can be evaluated under either certified bound of e.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioBound {
    pub e_coeff: Rational,
    pub constant: Rational,
}

impl RatioBound {
    pub fn eval(&self, e: &Rational) -> Rational {
        self.e_coeff * *e + self.constant
    }

    /// Evaluated with the certified upper bound of e: safe for `ALG <= bound *
    /// OPT` checks.
    pub fn eval_upper(&self) -> Rational {
        self.eval(&crate::exact::e_upper())
    }
}

/// Bound for the long-jobs controller alone: `ceil(1/alpha) + 1`.
pub fn long_bound(alpha: &Rational) -> Result<RatioBound, ConfigError> {
    if *alpha <= from_int(0) || *alpha >= from_int(1) {
        return Err(ConfigError::AlphaOutOfRange { alpha: *alpha });
    }
    let inv = ceil_to_int(&alpha.recip());
    Ok(RatioBound {
        e_coeff: from_int(0),
        constant: from_int(inv + 1),
    })
}

/// Bound for the short-jobs controller alone:
/// `(e + 1) * (lambda + 1) * ceil(2 / (1 - alpha))`.
pub fn short_bound(alpha: &Rational, lambda: TimeStep) -> Result<RatioBound, ConfigError> {
    let cover = cover_factor(alpha)?;
    let factor = from_int((lambda + 1) * cover);
    Ok(RatioBound {
        e_coeff: factor,
        constant: factor,
    })
}

/// Bound for the combined controller:
/// `(e + 1) * (lambda + 1) * ceil(2 / (1 - alpha)) + ceil(1/alpha) + 1`.
/// At alpha = 1/3 this is `3 * (e + 1) * lambda + 3e + 7`.
pub fn ratio_bound(alpha: &Rational, lambda: TimeStep) -> Result<RatioBound, ConfigError> {
    let combined_short = short_bound(alpha, lambda)?;
    let combined_long = long_bound(alpha)?;
    Ok(RatioBound {
        e_coeff: combined_short.e_coeff,
        constant: combined_short.constant + combined_long.constant,
    })
}

#[derive(Debug, Clone)]
pub struct IntegratedController {
    alpha: Rational,
    params: CalibParams,
    long: LongController,
    short: ShortController,
    /// Long-local calibration index -> merged ledger index.
    long_map: Vec<usize>,
    /// Short-local calibration index -> merged ledger index.
    short_map: Vec<usize>,
}

impl IntegratedController {
    pub fn new(alpha: Rational, params: CalibParams) -> Result<Self, ConfigError> {
        Ok(IntegratedController {
            alpha,
            params,
            long: LongController::new(alpha, params)?,
            short: ShortController::new(alpha, params)?,
            long_map: Vec::new(),
            short_map: Vec::new(),
        })
    }

    pub fn with_default_alpha(params: CalibParams) -> Result<Self, ConfigError> {
        Self::new(default_alpha(), params)
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    pub fn long(&self) -> &LongController {
        &self.long
    }

    pub fn short(&self) -> &ShortController {
        &self.short
    }

    /// Merged-ledger indices owned by the long side, in long-local order.
    pub fn long_map(&self) -> &[usize] {
        &self.long_map
    }

    pub fn short_map(&self) -> &[usize] {
        &self.short_map
    }

    pub fn long_calibrations(&self) -> usize {
        self.long_map.len()
    }

    pub fn short_calibrations(&self) -> usize {
        self.short_map.len()
    }
}

impl Controller for IntegratedController {
    fn params(&self) -> CalibParams {
        self.params
    }

    fn step(&mut self, t: TimeStep, released: &[Job]) -> Result<StepEmission, StepError> {
        let mut longs = Vec::new();
        let mut shorts = Vec::new();
        for job in released {
            match classify(job, &self.alpha, self.params) {
                JobClass::Long => longs.push(*job),
                JobClass::Short => shorts.push(*job),
            }
        }

        let long_out = self.long.step(t, &longs)?;
        let short_out = self.short.step(t, &shorts)?;

        let mut merged = StepEmission::default();
        let merged_len = self.long_map.len() + self.short_map.len();
        for (offset, &start) in long_out.new_calibration_starts.iter().enumerate() {
            self.long_map.push(merged_len + offset);
            merged.new_calibration_starts.push(start);
        }
        let merged_len = self.long_map.len() + self.short_map.len();
        for (offset, &start) in short_out.new_calibration_starts.iter().enumerate() {
            self.short_map.push(merged_len + offset);
            merged.new_calibration_starts.push(start);
        }
        for mut a in long_out.assignments {
            a.calibration = self.long_map[a.calibration];
            merged.assignments.push(a);
        }
        for mut a in short_out.assignments {
            a.calibration = self.short_map[a.calibration];
            merged.assignments.push(a);
        }
        Ok(merged)
    }

    fn is_idle(&self) -> bool {
        self.long.is_idle() && self.short.is_idle()
    }
}

/// Runs the combined controller over a whole instance.
pub fn integrated_run(
    instance: &Instance,
    alpha: Rational,
) -> Result<(Schedule, SimulationStats), SimError> {
    let mut controller =
        IntegratedController::new(alpha, instance.params()).map_err(|e| SimError::Step {
            time: 0,
            source: StepError::Config(e),
        })?;
    let trace = run(instance, &mut controller)?;
    let stats = SimulationStats {
        long_calibrations: controller.long_calibrations(),
        short_calibrations: controller.short_calibrations(),
        rounds: controller.long().rounds(),
        repairs: controller.short().repairs(),
    };
    Ok((trace.schedule, stats))
}

/// Side counters from one integrated run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationStats {
    pub long_calibrations: usize,
    pub short_calibrations: usize,
    pub rounds: u64,
    pub repairs: u64,
}
