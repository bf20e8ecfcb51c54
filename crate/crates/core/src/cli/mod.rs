//! The `weakstat` command line.
//!
//! Exit codes: 0 on success, 1 for scenario diagnostics and runtime errors,
//! 2 for usage errors.

mod check;
mod report;

pub use check::{run_checks, CheckResult};
pub use report::{round_report, EventRow, MatrixRow, Report, StateRow};

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::dsl;
use crate::error::Error;
use crate::operator::Observable;
use crate::sampler::{
    estimate_conditional, estimate_expectations, sample_sequential, sample_weak, CountTable, SampleConfig,
};
use crate::scenarios::{self, bell_joint_table, Scenario};
use crate::tomography::{build_weak_povm, TomographyBasis};

#[derive(Parser, Debug)]
#[command(name = "weakstat", version, about = "Weak-measurement quasi-probabilities, exact and sampled")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact conditional states, query values and, for Bell/CHSH scenarios, the event table
    Exact(RunArgs),
    /// Simulate weak tomography of the initial state and reconstruct it
    Sample(RunArgs),
    /// Simulate weak-then-projective measurements and reconstruct every conditional state
    Tomo(TomoArgs),
    /// Joint quasi-probability table and CHSH value
    Bell(BellArgs),
    /// Run the invariant self-test
    Check,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Built-in scenario (double-slit, bell-chsh, entangled:d=<n>) or a .ws file
    pub scenario: String,
    /// Number of simulated shots (required by sample and tomo)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: Option<u64>,
    /// Weak-measurement strength
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, env = "WEAKSTAT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub shards: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TomoArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// PVM to post-select on (defaults to the first)
    #[arg(long)]
    pub pvm: Option<String>,
}

#[derive(Args, Debug)]
pub struct BellArgs {
    #[arg(default_value = "bell-chsh")]
    pub scenario: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

enum Failure {
    Usage(String),
    Diagnostics(Vec<String>),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command against
/// the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return e.exit_code();
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(text)) => {
            let _ = err.write_all(text.as_bytes());
            2
        }
        Err(Failure::Diagnostics(lines)) => {
            for line in lines {
                let _ = writeln!(err, "{line}");
            }
            1
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (report, output) = match command {
        Command::Exact(args) => {
            let scenario = load_scenario(&args.scenario, err)?;
            (Report::exact(&scenarios::run(&scenario)?), args.out)
        }
        Command::Bell(args) => {
            let scenario = load_scenario(&args.scenario, err)?;
            (Report::table(&bell_joint_table(&scenario)?), args.out)
        }
        Command::Sample(args) => {
            let scenario = load_scenario(&args.scenario, err)?;
            let shots = require_shots("sample", &args)?;
            (sample(&scenario, &args, shots)?, args.out)
        }
        Command::Tomo(args) => {
            let scenario = load_scenario(&args.run.scenario, err)?;
            let shots = require_shots("tomo", &args.run)?;
            (tomo(&scenario, &args.run, args.pvm.as_deref(), shots, err)?, args.run.out)
        }
        Command::Check => return Ok(self_test(out)),
    };
    let text = match output.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    };
    match &output.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?
        }
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Runtime(e.to_string()))?,
    }
    Ok(0)
}

fn require_shots(command: &str, args: &RunArgs) -> Result<u64, Failure> {
    args.shots.ok_or_else(|| {
        let mut cmd = Cli::command();
        let sub = cmd.find_subcommand_mut(command).expect("subcommand exists").clone();
        Failure::Usage(
            sub.bin_name(format!("weakstat {command}"))
                .error(ErrorKind::MissingRequiredArgument, format!("{command} requires --shots <SHOTS>"))
                .render()
                .to_string(),
        )
    })
}

fn is_builtin(name: &str) -> bool {
    matches!(name, "double-slit" | "bell-chsh") || name.starts_with("entangled:d=")
}

fn load_scenario(reference: &str, err: &mut dyn Write) -> Result<Scenario, Failure> {
    if is_builtin(reference) {
        return Ok(scenarios::builtin(reference)?);
    }
    let path = Path::new(reference);
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure::Runtime(format!(
            "cannot read scenario {reference:?}: {e} (built-ins: {})",
            scenarios::BUILTIN_NAMES.join(", ")
        ))
    })?;
    let name = path.file_stem().map_or_else(|| reference.to_string(), |s| s.to_string_lossy().into_owned());
    match dsl::load(&text, &name) {
        Ok(loaded) => {
            for w in &loaded.warnings {
                let _ = writeln!(err, "{reference}:{w}");
            }
            Ok(loaded.scenario)
        }
        Err(diags) => Err(Failure::Diagnostics(diags.iter().map(|d| format!("{reference}:{d}")).collect())),
    }
}

fn sample_config(args: &RunArgs, shots: u64) -> Result<SampleConfig, Failure> {
    Ok(SampleConfig::new(shots, args.seed)?.with_shards(args.shards as usize)?)
}

fn sampled_header(scenario: &Scenario, args: &RunArgs, shots: u64) -> Report {
    let mut report = Report::new(scenario.name.clone());
    report.epsilon = Some(args.epsilon);
    report.shots = Some(shots);
    report.seed = Some(args.seed);
    report
}

/// Weak tomography of the initial state: probe expectations and `ρ̂`.
fn sample(scenario: &Scenario, args: &RunArgs, shots: u64) -> Result<Report, Failure> {
    let basis = TomographyBasis::gell_mann(scenario.dim())?;
    let povm = build_weak_povm(&basis, args.epsilon)?;
    let counts = sample_weak(&scenario.initial, &povm, &sample_config(args, shots)?)?;
    let mut report = sampled_header(scenario, args, shots);
    for (label, e) in estimate_expectations(&counts, &povm)?.estimates {
        report.events.push(EventRow::new(format!("E[{label}]"), e.mean, Some(e.stderr)));
    }
    let whole = CountTable::new(counts.weak_labels().to_vec(), vec!["all".into()], counts.counts().to_vec())?;
    let est = estimate_conditional(&whole, &povm, &basis, "all")?;
    report.conditional_states.push(StateRow::sampled("rho".into(), None, None, &est));
    Ok(report)
}

/// Weak-then-projective simulation; every outcome with enough post-selected
/// shots gets a reconstructed `R̂`.
fn tomo(
    scenario: &Scenario,
    args: &RunArgs,
    pvm: Option<&str>,
    shots: u64,
    err: &mut dyn Write,
) -> Result<Report, Failure> {
    let pvm = match pvm {
        Some(name) => {
            scenario.pvm(name).ok_or_else(|| Failure::Runtime(format!("scenario has no PVM named {name:?}")))?
        }
        None => scenario.pvms.first().ok_or_else(|| Failure::Runtime("scenario declares no PVM".into()))?,
    };
    let basis = TomographyBasis::gell_mann(scenario.dim())?;
    let povm = build_weak_povm(&basis, args.epsilon)?;
    let counts = sample_sequential(&scenario.initial, &povm, pvm, &sample_config(args, shots)?)?;
    let mut report = sampled_header(scenario, args, shots);
    for label in pvm.labels() {
        let n: u64 = counts.post_selected(label)?.iter().sum();
        let p = n as f64 / shots as f64;
        report.events.push(EventRow::probability(
            format!("p({label})"),
            p,
            Some((p * (1.0 - p) / shots as f64).sqrt()),
        ));
        match estimate_conditional(&counts, &povm, &basis, label) {
            Ok(est) => {
                for (probe, e) in &est.expectations.estimates {
                    report.events.push(EventRow::new(format!("E[{probe}|{label}]"), e.mean, Some(e.stderr)));
                }
                debug_assert_eq!(est.state.dim(), scenario.dim());
                report.conditional_states.push(StateRow::sampled(
                    format!("R[{label}]"),
                    Some(pvm.name()),
                    Some(label),
                    &est,
                ));
            }
            Err(e @ Error::InsufficientPostSelection { .. }) => {
                let _ = writeln!(err, "warning: skipping outcome {label}: {e}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(report)
}

fn self_test(out: &mut dyn Write) -> i32 {
    let results = run_checks();
    let mut failed = 0;
    for (check, error) in &results {
        let status = if check.passed() { "PASS" } else { "FAIL" };
        failed += usize::from(!check.passed());
        let detail = match error {
            Some(e) => format!("error: {e}"),
            None => format!("residual {:.3e}, tolerance {:.0e}", check.residual, check.tolerance),
        };
        let _ = writeln!(out, "{status}  {:<24}{detail}", check.name);
    }
    let _ = writeln!(out, "{}/{} checks passed", results.len() - failed, results.len());
    i32::from(failed > 0)
}
