//! Reactive lower-bound instance generators and a seeded random instance
//! generator for corpus experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{CalibParams, Calibration, ConfigError, Instance, Job, JobId, TimeStep};
use crate::exact::{ceil_to_int, e_lower, from_int, Rational};
use crate::machines::opt_machines;
use crate::short::reduce_job;
use crate::simulator::{Adversary, AdversaryView};

/// Watches the controller's calibrations over `[0, lambda * (lambda + T))`.
/// The first uncovered time `tau >= lambda` triggers a burst of `lambda` jobs
/// `(tau, tau + lambda + 1)` that no late calibration can serve with fewer
/// than `lambda` calibrations, while one calibration at `tau - lambda` would
/// have sufficed. If the controller keeps the whole horizon covered it has
/// already paid `lambda` calibrations, and a single tail job claims optimum 1.
///
/// For `tau < lambda` the adversary only observes: a start at `tau - lambda`
/// would be negative, so the optimum-1 argument needs `tau >= lambda`.
#[derive(Debug, Clone)]
pub struct LambdaAdversary {
    params: CalibParams,
    observed: Vec<Calibration>,
    emitted: Vec<Job>,
    next_id: JobId,
    halted: bool,
}

impl LambdaAdversary {
    pub fn new(lambda: TimeStep, calibrated_len: TimeStep) -> Result<Self, ConfigError> {
        if lambda < 1 {
            return Err(ConfigError::ActivationRequired { lambda });
        }
        if calibrated_len < 1 {
            return Err(ConfigError::NonPositiveCalibratedLen { calibrated_len });
        }
        Ok(LambdaAdversary {
            params: CalibParams::new(lambda, calibrated_len),
            observed: Vec::new(),
            emitted: Vec::new(),
            next_id: 0,
            halted: false,
        })
    }

    /// End of the coverage scan: `lambda * (lambda + T)`.
    pub fn horizon(&self) -> TimeStep {
        self.params.lambda * self.params.total_len()
    }

    pub fn emitted(&self) -> &[Job] {
        &self.emitted
    }

    fn covered(&self, t: TimeStep) -> bool {
        self.observed.iter().any(|c| c.spans(t, self.params))
    }

    fn emit(&mut self, release: TimeStep, deadline: TimeStep, count: usize) -> Vec<Job> {
        let mut burst = Vec::with_capacity(count);
        for _ in 0..count {
            burst.push(Job::new(self.next_id, release, deadline));
            self.next_id += 1;
        }
        self.emitted.extend_from_slice(&burst);
        burst
    }
}

impl Adversary for LambdaAdversary {
    fn params(&self) -> CalibParams {
        self.params
    }

    fn step(&mut self, t: TimeStep, view: &AdversaryView<'_>) -> Vec<Job> {
        self.observed.extend(
            view.new_calibration_starts
                .iter()
                .map(|&s| Calibration::new(s)),
        );
        if self.halted {
            return Vec::new();
        }
        let lambda = self.params.lambda;
        if t < lambda {
            return Vec::new();
        }
        if t < self.horizon() {
            if self.covered(t) {
                return Vec::new();
            }
            self.halted = true;
            return self.emit(t, t + lambda + 1, lambda as usize);
        }
        // Whole horizon covered: the algorithm has started >= lambda
        // calibrations already; one tail job with window [horizon, horizon +
        // lambda + T) costs the optimum exactly one more.
        self.halted = true;
        self.emit(t, t + self.params.total_len(), 1)
    }

    fn halted(&self) -> bool {
        self.halted
    }
}

/// Releases `floor(T^2 / (T - t))` jobs due at `T + lambda` for each
/// `t < T`, halting as soon as the controller's calibration count exceeds
/// `(e - epsilon) * Offline(t)`. Offline is computed on the cumulative
/// (lambda-reduced) job set via the machine-count optimum, which is exact for
/// lambda = 0. Demonstrates (not proves) the e lower bound at finite T; the
/// argument is asymptotic in T.
#[derive(Debug, Clone)]
pub struct EAdversary {
    params: CalibParams,
    epsilon: Rational,
    emitted: Vec<Job>,
    next_id: JobId,
    halted: bool,
    /// (t, online, offline) rows observed so far, for trajectory reports.
    trajectory: Vec<(TimeStep, usize, i64)>,
}

impl EAdversary {
    pub fn new(
        lambda: TimeStep,
        calibrated_len: TimeStep,
        epsilon: Rational,
    ) -> Result<Self, ConfigError> {
        if calibrated_len < 1 {
            return Err(ConfigError::NonPositiveCalibratedLen { calibrated_len });
        }
        if epsilon <= from_int(0) {
            return Err(ConfigError::EpsilonNonPositive { epsilon });
        }
        Ok(EAdversary {
            params: CalibParams::new(lambda, calibrated_len),
            epsilon,
            emitted: Vec::new(),
            next_id: 0,
            halted: false,
            trajectory: Vec::new(),
        })
    }

    pub fn emitted(&self) -> &[Job] {
        &self.emitted
    }

    pub fn trajectory(&self) -> &[(TimeStep, usize, i64)] {
        &self.trajectory
    }

    /// Offline baseline for the emitted jobs so far: machine-count optimum of
    /// the lambda-reduced set.
    fn offline(&self) -> i64 {
        let reduced: Vec<Job> = self
            .emitted
            .iter()
            .map(|j| {
                reduce_job(j, self.params.lambda)
                    .expect("emitted jobs satisfy the window assumption")
            })
            .collect();
        opt_machines(&reduced)
    }

    /// The halt rule `online > (e - epsilon) * offline`, evaluated with the
    /// certified lower bound of e.
    pub fn should_halt(&self, online: usize, offline: i64) -> bool {
        if offline <= 0 {
            return false;
        }
        from_int(online as TimeStep) > (e_lower() - self.epsilon) * from_int(offline)
    }
}

impl Adversary for EAdversary {
    fn params(&self) -> CalibParams {
        self.params
    }

    fn step(&mut self, t: TimeStep, view: &AdversaryView<'_>) -> Vec<Job> {
        if self.halted || t >= self.params.calibrated_len {
            self.halted = true;
            return Vec::new();
        }
        let offline = self.offline();
        self.trajectory.push((t, view.total_calibrations, offline));
        if self.should_halt(view.total_calibrations, offline) {
            self.halted = true;
            return Vec::new();
        }
        let t_len = self.params.calibrated_len;
        let count = (t_len * t_len) / (t_len - t);
        let deadline = t_len + self.params.lambda;
        let mut burst = Vec::with_capacity(count as usize);
        for _ in 0..count {
            burst.push(Job::new(self.next_id, t, deadline));
            self.next_id += 1;
        }
        self.emitted.extend_from_slice(&burst);
        burst
    }

    fn halted(&self) -> bool {
        self.halted
    }
}

/// Parameters for the seeded random generator.
#[derive(Debug, Clone)]
pub struct RandomInstanceParams {
    pub n: usize,
    pub lambda: TimeStep,
    pub calibrated_len: TimeStep,
    /// Releases are drawn uniformly from `[0, horizon)`.
    pub horizon: TimeStep,
    /// Probability that a job is alpha-short, as an exact fraction in [0, 1].
    pub short_fraction: Rational,
    pub alpha: Rational,
}

/// Deterministic instance generator: windows are drawn uniformly from the
/// alpha-short integer range `[1 + lambda, alpha*T + lambda)` or the
/// alpha-long range `[alpha*T + lambda, T + lambda]` according to
/// `short_fraction`. The same seed yields a byte-identical instance.
pub fn random_instance(seed: u64, params: &RandomInstanceParams) -> Result<Instance, ConfigError> {
    let RandomInstanceParams {
        n,
        lambda,
        calibrated_len,
        horizon,
        short_fraction,
        alpha,
    } = params;
    if *lambda < 0 {
        return Err(ConfigError::InvalidParameter {
            detail: format!("lambda {lambda} < 0"),
        });
    }
    if *calibrated_len < 1 {
        return Err(ConfigError::NonPositiveCalibratedLen {
            calibrated_len: *calibrated_len,
        });
    }
    if *horizon < 1 {
        return Err(ConfigError::InvalidParameter {
            detail: format!("horizon {horizon} < 1"),
        });
    }
    if *alpha <= from_int(0) || *alpha >= from_int(1) {
        return Err(ConfigError::AlphaOutOfRange { alpha: *alpha });
    }
    if *short_fraction < from_int(0) || *short_fraction > from_int(1) {
        return Err(ConfigError::InvalidParameter {
            detail: format!("short_fraction {short_fraction} outside [0, 1]"),
        });
    }

    let alpha_t = *alpha * from_int(*calibrated_len);
    // Largest integer window delta classified short: ceil(alpha*T) - 1.
    let short_hi = ceil_to_int(&alpha_t) - 1;
    let long_lo = ceil_to_int(&alpha_t);
    let long_hi = *calibrated_len;
    let wants_short = *short_fraction > from_int(0);
    if wants_short && short_hi < 1 {
        return Err(ConfigError::EmptyWindowRange {
            detail: format!("no alpha-short window exists: alpha*T = {alpha_t} <= 1"),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sf_num = *short_fraction.numer();
    let sf_den = *short_fraction.denom();
    let mut jobs = Vec::with_capacity(*n);
    for id in 0..*n {
        let release = rng.random_range(0..*horizon);
        let short = sf_num > 0 && (rng.random_range(0..sf_den)) < sf_num;
        let delta = if short {
            rng.random_range(1..=short_hi)
        } else {
            rng.random_range(long_lo..=long_hi)
        };
        jobs.push(Job::new(id as JobId, release, release + lambda + delta));
    }
    Ok(Instance::new(*lambda, *calibrated_len, jobs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_instance;
    use crate::exact::rational;
    use crate::integrated::{classify, JobClass};

    fn view(starts: &[TimeStep], total: usize) -> AdversaryView<'_> {
        AdversaryView {
            new_calibration_starts: starts,
            total_calibrations: total,
        }
    }

    #[test]
    fn lambda_adversary_emits_at_first_uncovered_time_from_lambda() {
        let mut adv = LambdaAdversary::new(2, 5).unwrap();
        // t = 0, 1: observe only even though uncovered
        assert!(adv.step(0, &view(&[], 0)).is_empty());
        assert!(adv.step(1, &view(&[], 0)).is_empty());
        // t = 2 = lambda, uncovered: burst of lambda jobs (2, 5), halt
        let burst = adv.step(2, &view(&[], 0));
        assert_eq!(burst, vec![Job::new(0, 2, 5), Job::new(1, 2, 5)]);
        assert!(adv.halted());
    }

    #[test]
    fn lambda_adversary_skips_covered_times() {
        let mut adv = LambdaAdversary::new(2, 5).unwrap();
        // a calibration at 0 spans [0, 7)
        assert!(adv.step(0, &view(&[0], 1)).is_empty());
        for t in 1..7 {
            assert!(adv.step(t, &view(&[], 1)).is_empty(), "t={t} is covered");
            assert!(!adv.halted());
        }
        // t = 7 uncovered -> burst (7, 10)
        let burst = adv.step(7, &view(&[], 1));
        assert_eq!(burst.len(), 2);
        assert_eq!((burst[0].release, burst[0].deadline), (7, 10));
    }

    #[test]
    fn lambda_adversary_tail_job_when_everything_covered() {
        let mut adv = LambdaAdversary::new(2, 5).unwrap();
        let horizon = adv.horizon();
        assert_eq!(horizon, 14);
        // calibrations at 0 and 7 cover [0, 14)
        assert!(adv.step(0, &view(&[0, 7], 2)).is_empty());
        for t in 1..14 {
            assert!(adv.step(t, &view(&[], 2)).is_empty());
        }
        let tail = adv.step(14, &view(&[], 2));
        assert_eq!(tail, vec![Job::new(0, 14, 21)]);
        assert!(adv.halted());
    }

    #[test]
    fn lambda_adversary_requires_activation() {
        assert!(LambdaAdversary::new(0, 5).is_err());
    }

    #[test]
    fn e_adversary_burst_sizes() {
        let mut adv = EAdversary::new(0, 10, rational(1, 10)).unwrap();
        let burst = adv.step(0, &view(&[], 0));
        assert_eq!(burst.len(), 10); // floor(100/10)
        assert!(burst.iter().all(|j| j.release == 0 && j.deadline == 10));
        // at t = 9 the burst is floor(100/1) = 100 jobs
        let mut late = EAdversary::new(0, 10, rational(1, 10)).unwrap();
        for t in 0..9 {
            late.step(t, &view(&[], 0));
        }
        let burst = late.step(9, &view(&[], 0));
        assert_eq!(burst.len(), 100);
        assert!(burst.iter().all(|j| j.release == 9 && j.deadline == 10));
    }

    #[test]
    fn e_adversary_halt_rule_uses_lower_e() {
        let adv = EAdversary::new(0, 10, rational(1, 10)).unwrap();
        // 5 > (e - 0.1) * 1 = 2.618...
        assert!(adv.should_halt(5, 1));
        assert!(!adv.should_halt(2, 1));
        assert!(!adv.should_halt(5, 0));
    }

    #[test]
    fn lambda_adversary_emissions_replay_from_observations() {
        // Emissions at t are a pure function of the observation stream.
        let observations: Vec<Vec<TimeStep>> = vec![
            vec![],
            vec![0],
            vec![],
            vec![7],
            vec![],
            vec![],
            vec![],
            vec![],
            vec![],
        ];
        let run = |obs: &[Vec<TimeStep>]| -> Vec<Vec<Job>> {
            let mut adv = LambdaAdversary::new(2, 5).unwrap();
            obs.iter()
                .enumerate()
                .map(|(t, starts)| adv.step(t as TimeStep, &view(starts, starts.len())))
                .collect()
        };
        assert_eq!(run(&observations), run(&observations));
        // A different observation stream may change emissions, and does here:
        // without the calibration at 0, t=2 is uncovered.
        let silent: Vec<Vec<TimeStep>> = vec![vec![]; 9];
        assert_ne!(run(&observations), run(&silent));
    }

    #[test]
    fn random_instance_is_deterministic_and_valid() {
        let params = RandomInstanceParams {
            n: 30,
            lambda: 2,
            calibrated_len: 9,
            horizon: 20,
            short_fraction: rational(1, 2),
            alpha: rational(1, 3),
        };
        let a = random_instance(7, &params).unwrap();
        let b = random_instance(7, &params).unwrap();
        assert_eq!(a, b);
        assert!(validate_instance(&a).is_ok());
        let c = random_instance(8, &params).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn short_fraction_extremes_classify_uniformly() {
        let alpha = rational(1, 3);
        let base = RandomInstanceParams {
            n: 40,
            lambda: 1,
            calibrated_len: 9,
            horizon: 15,
            short_fraction: from_int(1),
            alpha,
        };
        let all_short = random_instance(3, &base).unwrap();
        for job in &all_short.jobs {
            assert_eq!(classify(job, &alpha, all_short.params()), JobClass::Short);
        }
        let all_long = random_instance(
            3,
            &RandomInstanceParams {
                short_fraction: from_int(0),
                ..base.clone()
            },
        )
        .unwrap();
        for job in &all_long.jobs {
            assert_eq!(classify(job, &alpha, all_long.params()), JobClass::Long);
        }
    }

    #[test]
    fn impossible_short_range_is_a_config_error() {
        // alpha*T = 1 leaves no integer short window
        let params = RandomInstanceParams {
            n: 5,
            lambda: 0,
            calibrated_len: 3,
            horizon: 10,
            short_fraction: from_int(1),
            alpha: rational(1, 3),
        };
        assert!(matches!(
            random_instance(0, &params),
            Err(ConfigError::EmptyWindowRange { .. })
        ));
    }
}
