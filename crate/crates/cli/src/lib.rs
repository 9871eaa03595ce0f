//! Command-line harness around the calibration-scheduling library:
//! instance generation, validation, controller runs, oracle queries,
//! adversary experiments, and batched competitive-ratio reports.
//!
//! Exit codes: 0 success, 1 validation/parse failure (or a failed bound row),
//! 2 contract violation or usage error, 3 oracle budget exceeded.

pub mod files;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use calsched::adversary::{EAdversary, LambdaAdversary, RandomInstanceParams};
use calsched::domain::{validate_instance, validate_schedule, Instance, TimeStep};
use calsched::exact::{format_ratio, from_int, parse_ratio, Rational};
use calsched::integrated::{
    classify, long_bound, ratio_bound, short_bound, IntegratedController, JobClass, RatioBound,
};
use calsched::long::LongController;
use calsched::oracle::{
    min_calibrations, opt_lower_bound, CandidateMode, OracleConfig, OracleOutcome,
    DEFAULT_NODE_BUDGET,
};
use calsched::short::ShortController;
use calsched::simulator::{run, run_reactive, Controller, SimError, SimulationTrace};
use clap::{Parser, Subcommand, ValueEnum};
use files::FileError;
use rayon::prelude::*;

/// Environment variable holding the default oracle node budget.
pub const NODE_BUDGET_ENV: &str = "CALSCHED_NODE_BUDGET";

#[derive(Debug)]
pub enum CliError {
    File(FileError),
    Validation(String),
    Contract(String),
    Budget(String),
    BoundViolation(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::File(e) => write!(f, "{e}"),
            CliError::Validation(m) | CliError::Contract(m) | CliError::Budget(m) => {
                write!(f, "{m}")
            }
            CliError::BoundViolation(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        CliError::File(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::File(_) | CliError::Validation(_) | CliError::BoundViolation(_) => 1,
            CliError::Contract(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::InvalidInstance(report) => {
            CliError::Validation(format!("instance invalid: {report}"))
        }
        other => CliError::Contract(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Algorithm {
    Long,
    Short,
    Integrated,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Long => "long",
            Algorithm::Short => "short",
            Algorithm::Integrated => "integrated",
        }
    }

    fn bound(self, alpha: &Rational, lambda: TimeStep) -> Result<RatioBound, CliError> {
        let bound = match self {
            Algorithm::Long => long_bound(alpha),
            Algorithm::Short => short_bound(alpha, lambda),
            Algorithm::Integrated => ratio_bound(alpha, lambda),
        };
        bound.map_err(|e| CliError::Contract(e.to_string()))
    }

    fn controller(
        self,
        alpha: &Rational,
        instance: &Instance,
    ) -> Result<Box<dyn Controller>, CliError> {
        let params = instance.params();
        let contract = |e: calsched::ConfigError| CliError::Contract(e.to_string());
        let boxed: Box<dyn Controller> = match self {
            Algorithm::Long => Box::new(LongController::new(*alpha, params).map_err(contract)?),
            Algorithm::Short => Box::new(ShortController::new(*alpha, params).map_err(contract)?),
            Algorithm::Integrated => {
                Box::new(IntegratedController::new(*alpha, params).map_err(contract)?)
            }
        };
        Ok(boxed)
    }

    /// Whether this controller accepts every job of the instance.
    fn accepts(self, alpha: &Rational, instance: &Instance) -> bool {
        let params = instance.params();
        match self {
            Algorithm::Long => instance
                .jobs
                .iter()
                .all(|j| classify(j, alpha, params) == JobClass::Long),
            Algorithm::Short => instance
                .jobs
                .iter()
                .all(|j| classify(j, alpha, params) == JobClass::Short),
            Algorithm::Integrated => true,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleMode {
    Exhaustive,
    Reduced,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AdversaryKind {
    Lambda,
    E,
}

#[derive(Debug, Parser)]
#[command(
    name = "calsched",
    version,
    about = "Calibration scheduling: online controllers, exact oracle, adversary experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate seeded random instances.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of instances (seeds seed, seed+1, ...); needs --out-dir when > 1.
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(short = 'n', long, default_value_t = 20)]
        jobs: usize,
        #[arg(long, default_value_t = 1)]
        lambda: TimeStep,
        #[arg(short = 'T', long = "calibrated-len", default_value_t = 9)]
        calibrated_len: TimeStep,
        #[arg(long, default_value_t = 30)]
        horizon: TimeStep,
        /// Exact fraction p/q.
        #[arg(long, default_value = "1/3")]
        alpha: String,
        /// Exact fraction p/q in [0, 1].
        #[arg(long, default_value = "1/2")]
        short_fraction: String,
        /// Output file (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output directory for multi-instance generation ({seed}.json).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Validate an instance file, and optionally a schedule against it.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Run an online controller over an instance file.
    Run {
        #[arg(long, value_enum)]
        alg: Algorithm,
        #[arg(long, default_value = "1/3")]
        alpha: String,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule_out: Option<PathBuf>,
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Exact offline minimum calibrations with witness.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        /// Search-node budget (default from CALSCHED_NODE_BUDGET or 10^7).
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, value_enum, default_value_t = OracleMode::Exhaustive)]
        mode: OracleMode,
        /// Write the witness schedule (EDF on the witness calibrations).
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Run a reactive adversary against a controller.
    Adversary {
        #[arg(long, value_enum)]
        kind: AdversaryKind,
        #[arg(long, value_enum, default_value_t = Algorithm::Integrated)]
        alg: Algorithm,
        #[arg(long, default_value = "1/3")]
        alpha: String,
        #[arg(long, default_value_t = 2)]
        lambda: TimeStep,
        #[arg(short = 'T', long = "calibrated-len", default_value_t = 5)]
        calibrated_len: TimeStep,
        /// Halt slack for the e-adversary, exact fraction.
        #[arg(long, default_value = "1/10")]
        epsilon: String,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Write the realized instance.
        #[arg(long)]
        instance_out: Option<PathBuf>,
        /// Trajectory CSV for the e-adversary (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Batch competitive-ratio report over a corpus directory.
    Ratio {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated algorithms.
        #[arg(long, value_delimiter = ',', default_values_t = vec![Algorithm::Integrated])]
        algs: Vec<Algorithm>,
        #[arg(long, default_value = "1/3")]
        alpha: String,
        #[arg(long)]
        budget: Option<u64>,
        /// Output CSV (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Entry point shared by `main` and the integration tests.
pub fn cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(args) {
        Ok(parsed) => parsed,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(parsed.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen {
            seed,
            count,
            jobs,
            lambda,
            calibrated_len,
            horizon,
            alpha,
            short_fraction,
            out,
            out_dir,
        } => cmd_gen(
            seed,
            count,
            jobs,
            lambda,
            calibrated_len,
            horizon,
            &alpha,
            &short_fraction,
            out.as_deref(),
            out_dir.as_deref(),
        ),
        Command::Validate { instance, schedule } => cmd_validate(&instance, schedule.as_deref()),
        Command::Run {
            alg,
            alpha,
            instance,
            schedule_out,
            trace_out,
        } => cmd_run(
            alg,
            &alpha,
            &instance,
            schedule_out.as_deref(),
            trace_out.as_deref(),
        ),
        Command::Oracle {
            instance,
            budget,
            mode,
            witness_out,
        } => cmd_oracle(&instance, budget, mode, witness_out.as_deref()),
        Command::Adversary {
            kind,
            alg,
            alpha,
            lambda,
            calibrated_len,
            epsilon,
            trace_out,
            instance_out,
            out,
        } => cmd_adversary(
            kind,
            alg,
            &alpha,
            lambda,
            calibrated_len,
            &epsilon,
            trace_out.as_deref(),
            instance_out.as_deref(),
            out.as_deref(),
        ),
        Command::Ratio {
            corpus,
            algs,
            alpha,
            budget,
            out,
        } => cmd_ratio(&corpus, &algs, &alpha, budget, out.as_deref()),
    }
}

fn parse_fraction(text: &str, what: &str) -> Result<Rational, CliError> {
    parse_ratio(text).map_err(|e| CliError::Contract(format!("{what}: {e}")))
}

fn node_budget(explicit: Option<u64>) -> u64 {
    explicit
        .or_else(|| {
            std::env::var(NODE_BUDGET_ENV)
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(DEFAULT_NODE_BUDGET)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    seed: u64,
    count: u64,
    jobs: usize,
    lambda: TimeStep,
    calibrated_len: TimeStep,
    horizon: TimeStep,
    alpha: &str,
    short_fraction: &str,
    out: Option<&Path>,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let params = RandomInstanceParams {
        n: jobs,
        lambda,
        calibrated_len,
        horizon,
        short_fraction: parse_fraction(short_fraction, "--short-fraction")?,
        alpha: parse_fraction(alpha, "--alpha")?,
    };
    if count > 1 || out_dir.is_some() {
        let dir = out_dir
            .ok_or_else(|| CliError::Contract("--count > 1 requires --out-dir".to_string()))?;
        fs::create_dir_all(dir).map_err(|e| {
            CliError::File(FileError::Io {
                path: dir.to_path_buf(),
                message: e.to_string(),
            })
        })?;
        for s in seed..seed + count {
            let instance = calsched::adversary::random_instance(s, &params)
                .map_err(|e| CliError::Contract(e.to_string()))?;
            files::write_instance(&dir.join(format!("{s}.json")), &instance)?;
        }
        println!("wrote {count} instances to {}", dir.display());
        return Ok(());
    }
    let instance = calsched::adversary::random_instance(seed, &params)
        .map_err(|e| CliError::Contract(e.to_string()))?;
    match out {
        Some(path) => files::write_instance(path, &instance)?,
        None => print!("{}", files::instance_to_string(&instance)),
    }
    Ok(())
}

fn cmd_validate(instance_path: &Path, schedule_path: Option<&Path>) -> Result<(), CliError> {
    let instance = files::read_instance(instance_path)?;
    let report = validate_instance(&instance);
    if !report.is_ok() {
        return Err(CliError::Validation(format!("instance: {report}")));
    }
    if let Some(path) = schedule_path {
        let schedule = files::read_schedule(path)?;
        let report = validate_schedule(&instance, &schedule);
        if !report.is_ok() {
            return Err(CliError::Validation(format!("schedule: {report}")));
        }
    }
    println!("ok");
    Ok(())
}

fn cmd_run(
    alg: Algorithm,
    alpha: &str,
    instance_path: &Path,
    schedule_out: Option<&Path>,
    trace_out: Option<&Path>,
) -> Result<(), CliError> {
    let alpha = parse_fraction(alpha, "--alpha")?;
    let instance = files::read_instance(instance_path)?;
    let (trace, _) = run_algorithm(alg, &alpha, &instance)?;
    println!("calibrations {}", trace.calibration_count);
    if let Some(path) = schedule_out {
        files::write_schedule(path, &trace.schedule)?;
    }
    if let Some(path) = trace_out {
        files::write_trace(path, &trace)?;
    }
    Ok(())
}

/// Runs one algorithm and re-validates its output schedule; an invalid output
/// is a hard error, never silently written.
fn run_algorithm(
    alg: Algorithm,
    alpha: &Rational,
    instance: &Instance,
) -> Result<(SimulationTrace, usize), CliError> {
    let mut controller = alg.controller(alpha, instance)?;
    let trace = run(instance, controller.as_mut()).map_err(sim_error)?;
    let report = validate_schedule(instance, &trace.schedule);
    if !report.is_ok() {
        return Err(CliError::Contract(format!(
            "algorithm {} produced an invalid schedule: {report}",
            alg.name()
        )));
    }
    let cost = trace.calibration_count;
    Ok((trace, cost))
}

fn cmd_oracle(
    instance_path: &Path,
    budget: Option<u64>,
    mode: OracleMode,
    witness_out: Option<&Path>,
) -> Result<(), CliError> {
    let instance = files::read_instance(instance_path)?;
    let report = validate_instance(&instance);
    if !report.is_ok() {
        return Err(CliError::Validation(format!("instance: {report}")));
    }
    let config = OracleConfig {
        candidate_mode: match mode {
            OracleMode::Exhaustive => CandidateMode::ExhaustiveRange,
            OracleMode::Reduced => CandidateMode::ReducedSet,
        },
        node_budget: node_budget(budget),
        produce_witness: true,
    };
    match min_calibrations(&instance, &config) {
        OracleOutcome::Exact { count, witness } => {
            println!("opt {count}");
            let starts = witness.unwrap_or_default();
            println!(
                "witness {}",
                starts
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            if let Some(path) = witness_out {
                let cals: Vec<calsched::Calibration> = starts
                    .iter()
                    .map(|&s| calsched::Calibration::new(s))
                    .collect();
                let schedule =
                    calsched::edf::edf_schedule(&instance.jobs, &cals, instance.params())
                        .into_schedule()
                        .expect("oracle witness is feasible");
                files::write_schedule(path, &schedule)?;
            }
            Ok(())
        }
        OracleOutcome::BudgetExceeded { nodes } => {
            println!("lower_bound {}", opt_lower_bound(&instance));
            Err(CliError::Budget(format!(
                "oracle budget exceeded after {nodes} nodes (budget {})",
                config.node_budget
            )))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_adversary(
    kind: AdversaryKind,
    alg: Algorithm,
    alpha: &str,
    lambda: TimeStep,
    calibrated_len: TimeStep,
    epsilon: &str,
    trace_out: Option<&Path>,
    instance_out: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let alpha = parse_fraction(alpha, "--alpha")?;
    let shell = Instance::new(lambda, calibrated_len, vec![]);
    let mut controller = alg.controller(&alpha, &shell)?;
    match kind {
        AdversaryKind::Lambda => {
            let mut adversary = LambdaAdversary::new(lambda, calibrated_len)
                .map_err(|e| CliError::Contract(e.to_string()))?;
            let cap = adversary.horizon() + 1;
            let (trace, emitted) =
                run_reactive(&mut adversary, controller.as_mut(), cap).map_err(sim_error)?;
            let opt = match min_calibrations(&emitted, &OracleConfig::default()) {
                OracleOutcome::Exact { count, .. } => count,
                OracleOutcome::BudgetExceeded { nodes } => {
                    return Err(CliError::Budget(format!(
                        "oracle budget exceeded on the emitted instance ({nodes} nodes)"
                    )))
                }
            };
            println!("alg_calibrations {}", trace.calibration_count);
            println!("opt {opt}");
            if opt > 0 {
                let ratio =
                    from_int(trace.calibration_count as TimeStep) / from_int(opt as TimeStep);
                println!("ratio {}", format_ratio(&ratio));
            }
            if let Some(path) = trace_out {
                files::write_trace(path, &trace)?;
            }
            if let Some(path) = instance_out {
                files::write_instance(path, &emitted)?;
            }
            Ok(())
        }
        AdversaryKind::E => {
            let epsilon = parse_fraction(epsilon, "--epsilon")?;
            let mut adversary = EAdversary::new(lambda, calibrated_len, epsilon)
                .map_err(|e| CliError::Contract(e.to_string()))?;
            let (trace, emitted) =
                run_reactive(&mut adversary, controller.as_mut(), calibrated_len)
                    .map_err(sim_error)?;
            let mut csv = String::from("t,released_total,online,offline,ratio\n");
            for &(t, online, offline) in adversary.trajectory() {
                let released_total = emitted.jobs.iter().filter(|j| j.release <= t).count();
                let ratio = if offline > 0 {
                    format_ratio(&(from_int(online as TimeStep) / from_int(offline)))
                } else {
                    "na".to_string()
                };
                csv.push_str(&format!(
                    "{t},{released_total},{online},{offline},{ratio}\n"
                ));
            }
            match out {
                Some(path) => fs::write(path, &csv).map_err(|e| {
                    CliError::File(FileError::Io {
                        path: path.to_path_buf(),
                        message: e.to_string(),
                    })
                })?,
                None => print!("{csv}"),
            }
            eprintln!(
                "e-adversary done: {} jobs released, controller used {} calibrations",
                emitted.jobs.len(),
                trace.calibration_count
            );
            if let Some(path) = trace_out {
                files::write_trace(path, &trace)?;
            }
            if let Some(path) = instance_out {
                files::write_instance(path, &emitted)?;
            }
            Ok(())
        }
    }
}

struct RatioRow {
    seed: String,
    algorithm: &'static str,
    alpha: Rational,
    lambda: TimeStep,
    calibrated_len: TimeStep,
    n: usize,
    alg_cost: usize,
    opt: usize,
    opt_exact: bool,
    bound: Rational,
}

impl RatioRow {
    fn ratio(&self) -> Option<Rational> {
        (self.opt > 0).then(|| from_int(self.alg_cost as TimeStep) / from_int(self.opt as TimeStep))
    }

    /// Pass/fail on the bound, judged only against an exact optimum.
    fn pass(&self) -> Option<bool> {
        if !self.opt_exact {
            return None;
        }
        Some(from_int(self.alg_cost as TimeStep) <= self.bound * from_int(self.opt as TimeStep))
    }

    fn render(&self) -> String {
        let ratio = self
            .ratio()
            .map(|r| format_ratio(&r))
            .unwrap_or_else(|| "na".to_string());
        let pass = match self.pass() {
            Some(true) => "true",
            Some(false) => "false",
            None => "na",
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.algorithm,
            format_ratio(&self.alpha),
            self.lambda,
            self.calibrated_len,
            self.n,
            self.alg_cost,
            self.opt,
            if self.opt_exact {
                "exact"
            } else {
                "lower_bound"
            },
            ratio,
            format_ratio(&self.bound),
            pass,
        )
    }
}

enum RatioOutcome {
    Row(Box<RatioRow>),
    Skipped {
        seed: String,
        algorithm: &'static str,
        reason: String,
    },
}

pub const RATIO_CSV_HEADER: &str =
    "seed,algorithm,alpha,lambda,T,n,alg_cost,opt,opt_kind,ratio,bound,pass";

fn cmd_ratio(
    corpus: &Path,
    algs: &[Algorithm],
    alpha: &str,
    budget: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let alpha = parse_fraction(alpha, "--alpha")?;
    let budget = node_budget(budget);
    let mut paths: Vec<PathBuf> = fs::read_dir(corpus)
        .map_err(|e| {
            CliError::File(FileError::Io {
                path: corpus.to_path_buf(),
                message: e.to_string(),
            })
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Validation(format!(
            "no .json instances found in {}",
            corpus.display()
        )));
    }

    let pairs: Vec<(PathBuf, Algorithm)> = paths
        .iter()
        .flat_map(|p| algs.iter().map(move |&a| (p.clone(), a)))
        .collect();
    let outcomes: Vec<Result<RatioOutcome, CliError>> = pairs
        .par_iter()
        .map(|(path, alg)| ratio_pair(path, *alg, &alpha, budget))
        .collect();

    let mut rows = Vec::new();
    for outcome in outcomes {
        match outcome? {
            RatioOutcome::Row(row) => rows.push(*row),
            RatioOutcome::Skipped {
                seed,
                algorithm,
                reason,
            } => {
                eprintln!("skipped seed {seed} for {algorithm}: {reason}");
            }
        }
    }
    rows.sort_by(|a, b| {
        let num = |s: &str| s.parse::<u64>().ok();
        (num(&a.seed), a.seed.clone(), a.algorithm).cmp(&(
            num(&b.seed),
            b.seed.clone(),
            b.algorithm,
        ))
    });

    let mut csv = String::from(RATIO_CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.render());
        csv.push('\n');
    }
    match out {
        Some(path) => fs::write(path, &csv).map_err(|e| {
            CliError::File(FileError::Io {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        })?,
        None => print!("{csv}"),
    }

    let failures: Vec<&RatioRow> = rows.iter().filter(|r| r.pass() == Some(false)).collect();
    if !failures.is_empty() {
        let seeds: Vec<&str> = failures.iter().map(|r| r.seed.as_str()).collect();
        return Err(CliError::BoundViolation(format!(
            "{} rows violated their bound; reproducer seeds: {}",
            failures.len(),
            seeds.join(", ")
        )));
    }
    println!("{} rows, all bound checks passed", rows.len());
    Ok(())
}

fn ratio_pair(
    path: &Path,
    alg: Algorithm,
    alpha: &Rational,
    budget: u64,
) -> Result<RatioOutcome, CliError> {
    let seed = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let instance = files::read_instance(path)?;
    let report = validate_instance(&instance);
    if !report.is_ok() {
        return Err(CliError::Validation(format!(
            "{}: {report}",
            path.display()
        )));
    }
    if !alg.accepts(alpha, &instance) {
        return Ok(RatioOutcome::Skipped {
            seed,
            algorithm: alg.name(),
            reason: format!("instance has jobs outside the alpha-{} class", alg.name()),
        });
    }
    let (_, alg_cost) = run_algorithm(alg, alpha, &instance)?;
    let config = OracleConfig {
        node_budget: budget,
        ..OracleConfig::default()
    };
    let (opt, opt_exact) = match min_calibrations(&instance, &config) {
        OracleOutcome::Exact { count, .. } => (count, true),
        OracleOutcome::BudgetExceeded { .. } => (opt_lower_bound(&instance), false),
    };
    let bound = alg.bound(alpha, instance.lambda)?.eval_upper();
    Ok(RatioOutcome::Row(Box::new(RatioRow {
        seed,
        algorithm: alg.name(),
        alpha: *alpha,
        lambda: instance.lambda,
        calibrated_len: instance.calibrated_len,
        n: instance.jobs.len(),
        alg_cost,
        opt,
        opt_exact,
        bound,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use calsched::exact::rational;

    fn row(opt_exact: bool, alg_cost: usize, opt: usize) -> RatioRow {
        RatioRow {
            seed: "17".to_string(),
            algorithm: "integrated",
            alpha: rational(1, 3),
            lambda: 0,
            calibrated_len: 6,
            n: 3,
            alg_cost,
            opt,
            opt_exact,
            bound: rational(4, 1),
        }
    }

    #[test]
    fn ratio_rows_judge_only_exact_optima() {
        assert_eq!(row(true, 8, 2).pass(), Some(true));
        assert_eq!(row(true, 9, 2).pass(), Some(false));
        assert_eq!(row(false, 9, 2).pass(), None);
        assert!(row(false, 9, 2).render().ends_with(",lower_bound,9/2,4,na"));
        assert!(row(true, 9, 2).render().ends_with(",false"));
        assert_eq!(row(true, 0, 0).ratio(), None);
    }
}
