//! Online calibration scheduling of unit-time, deadline-constrained jobs.
//!
//! Machines must be calibrated before use: a calibration started at `s` takes
//! `lambda` steps to activate and then provides `T` calibrated time steps.
//! Jobs arrive online, each with an integer release time and deadline, and
//! must all be finished on time; the objective is to minimize the total
//! number of calibrations. Machines are unlimited, so a solution is just a
//! calibration multiset plus a job assignment.
//!
//! The crate provides:
//!
//! - [`domain`]: instances, schedules, and validation.
//! - [`edf`]: Earliest-Deadline-First scheduling and feasibility on a fixed
//!   calibration set, the building block everything else leans on.
//! - [`machines`]: job density, the machine-count optimum, and the online
//!   machine-minimization controller.
//! - [`long`], [`short`], [`integrated`]: the online controllers for
//!   alpha-long windows, alpha-short windows, and their combination.
//! - [`oracle`]: an exact offline minimum-calibration solver and lower
//!   bounds, the ground truth for competitive-ratio experiments.
//! - [`adversary`]: reactive lower-bound constructions and a seeded random
//!   instance generator.
//! - [`simulator`]: the online event loop enforcing the no-peeking contract,
//!   with full traces.
//!
//! All ratios (alpha, densities, bounds) are exact rationals; see [`exact`].
//!
//! ```
//! use calsched::domain::{Instance, Job, validate_schedule};
//! use calsched::exact::rational;
//! use calsched::integrated::IntegratedController;
//! use calsched::oracle::{min_calibrations, OracleConfig};
//! use calsched::simulator::run;
//!
//! // lambda = 1, T = 9, one tight job and one roomy one.
//! let instance = Instance::new(1, 9, vec![Job::new(0, 0, 3), Job::new(1, 0, 8)]);
//!
//! let mut controller = IntegratedController::new(rational(1, 3), instance.params())?;
//! let trace = run(&instance, &mut controller)?;
//! assert!(validate_schedule(&instance, &trace.schedule).is_ok());
//!
//! let opt = min_calibrations(&instance, &OracleConfig::default())
//!     .count()
//!     .expect("within budget");
//! assert!(opt <= trace.calibration_count);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod adversary;
pub mod domain;
pub mod edf;
pub mod exact;
pub mod integrated;
pub mod long;
pub mod machines;
pub mod oracle;
pub mod short;
pub mod simulator;

pub use domain::{
    slot_capacity, validate_instance, validate_schedule, Assignment, CalibParams, Calibration,
    ConfigError, Instance, Job, JobId, Schedule, TimeStep, ValidationReport, Violation,
};
pub use exact::{parse_ratio, Rational};
pub use simulator::{run, run_reactive, Controller, SimulationTrace};
