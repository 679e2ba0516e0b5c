//! `fragcoal`: admissibility checks, simulations, truncation studies and
//! closed-form validation for the coagulation–fragmentation equation.
//!
//! Exit status: 0 when the run passes, 1 when a hypothesis, study or check
//! fails, 2 on usage, configuration or I/O errors.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fragcoal_core::harness::{
    self, Oracle, RunConfig, RunReport, CONVERGENCE_FILE, MONITOR_NAMES, REPORT_FILE,
    VALIDATION_FILE,
};
use fragcoal_core::Error;

const DEFAULT_OUT: &str = "fragcoal-out";

#[derive(Parser, Debug)]
#[command(
    name = "fragcoal",
    version,
    about = "Coagulation-fragmentation numerical lab"
)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (JSON). The bundled example is used when absent.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir` of the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Audit the kernels against the well-posedness hypotheses.
    Check {
        /// Configuration file (same as --config).
        #[arg(value_name = "CONFIG", conflicts_with = "config")]
        path: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Checks that decide the verdict (comma separated); overrides the config.
        #[arg(long, value_delimiter = ',')]
        require: Option<Vec<String>>,
        /// Print the JSON report on stdout instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Integrate the configured problem and evaluate monitors.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Run even if the admissibility audit fails.
        #[arg(long)]
        unchecked: bool,
        /// Monitors to evaluate (comma separated); overrides the config.
        #[arg(long, value_delimiter = ',', value_parser = clap::builder::PossibleValuesParser::new(MONITOR_NAMES))]
        monitors: Option<Vec<String>>,
        /// Write the assembled operators as matrix-market text.
        #[arg(long)]
        dump_operators: bool,
    },
    /// Truncation convergence study over the configured radii.
    Converge {
        #[command(flatten)]
        common: Common,
    },
    /// Compare against a closed-form solution on a ladder of grids.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = ["pure-frag", "pure-coag"])]
        case: String,
    },
    /// Summarize a previous run's report.json.
    Report {
        /// Run directory or report file.
        #[arg(value_name = "PATH", default_value = DEFAULT_OUT)]
        path: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::bundled()),
    }
}

fn out_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn verdict(report: &RunReport) -> ExitCode {
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Check {
            path,
            common,
            require,
            json,
        } => {
            let mut cfg = load_config(path.as_deref().or(common.config.as_deref()))?;
            if require.is_some() {
                cfg.hypotheses = require;
            }
            let dir = out_dir(&common, &cfg);
            let report = harness::run_admissibility(&cfg, Some(&dir))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.table());
                println!("report: {}", dir.join(REPORT_FILE).display());
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Simulate {
            common,
            unchecked,
            monitors,
            dump_operators,
        } => {
            let mut cfg = load_config(common.config.as_deref())?;
            if let Some(m) = monitors {
                cfg.monitors = m;
            }
            let dir = out_dir(&common, &cfg);
            let outcome = harness::run_simulation(&cfg, unchecked)?;
            let report = harness::write_simulation(
                &dir,
                &outcome,
                dump_operators || cfg.output.dump_operators,
            )?;
            for s in &outcome.summary.skipped {
                log::warn!("monitor skipped: {s}");
            }
            print!("{}", report.summary());
            println!(
                "mass drift {:.3e}, {} accepted / {} rejected steps, output in {}",
                outcome.summary.mass_drift,
                outcome.summary.accepted_steps,
                outcome.summary.rejected_steps,
                dir.display()
            );
            Ok(verdict(&report))
        }
        Command::Converge { common } => {
            let cfg = load_config(common.config.as_deref())?;
            let dir = out_dir(&common, &cfg);
            let table = harness::run_truncation_study(&cfg)?;
            std::fs::create_dir_all(&dir)?;
            harness::write_convergence(
                BufWriter::new(File::create(dir.join(CONVERGENCE_FILE))?),
                &table,
            )?;
            let report = RunReport::from_convergence(&table)?;
            harness::write_report(&dir, &report)?;
            print!("{}", report.summary());
            println!("{}", table.note);
            Ok(verdict(&report))
        }
        Command::Validate { common, case } => {
            let cfg = load_config(common.config.as_deref())?;
            let case: Oracle = case.parse().map_err(Error::Config)?;
            let dir = out_dir(&common, &cfg);
            let table = harness::run_validation(case, &cfg.study)?;
            std::fs::create_dir_all(&dir)?;
            harness::write_validation(
                BufWriter::new(File::create(dir.join(VALIDATION_FILE))?),
                &table,
            )?;
            let report = RunReport::from_validation(&table)?;
            harness::write_report(&dir, &report)?;
            print!("{}", report.summary());
            Ok(verdict(&report))
        }
        Command::Report { path } => {
            let file = if path.is_dir() {
                path.join(REPORT_FILE)
            } else {
                path
            };
            let report = RunReport::load(&file)?;
            print!("{}", report.summary());
            Ok(verdict(&report))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Hypothesis(_)
        | Error::Study(_)
        | Error::Quadrature { .. }
        | Error::Divergent(_)
        | Error::Assembly(_)
        | Error::ExpAction(_) => 1,
        Error::MalformedKernel(_)
        | Error::Grid(_)
        | Error::Precondition(_)
        | Error::Config(_)
        | Error::Table { .. }
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
