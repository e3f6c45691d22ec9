//! `sqnlab` — benchmark CLI for the stochastic quasi-Newton solvers.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sqnlab::error::HarnessError;
use sqnlab::experiment::{problem_instances, run_experiment, ExperimentSpec};
use sqnlab::io::{emit_csv, emit_json, load_json, JsonReport};
use sqnlab::presets::{svm_preset, table1_preset, DEFAULT_MASTER_SEED};
use sqnlab::report::bb_fraction_report;

/// Seed override honored by every subcommand.
const SEED_ENV: &str = "SQNLAB_SEED";

#[derive(Parser)]
#[command(name = "sqnlab", version, about = "Stochastic quasi-Newton benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset benchmark battery.
    Bench {
        #[command(subcommand)]
        which: BenchCommand,
    },
    /// Run a custom experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Post-process emitted result directories.
    Report {
        #[command(subcommand)]
        which: ReportCommand,
    },
}

#[derive(Args, Clone)]
struct CommonBenchArgs {
    /// Master seed; SQNLAB_SEED overrides it.
    #[arg(long)]
    seed: Option<u64>,
    /// Repetitions per algorithm.
    #[arg(long, default_value_t = 20)]
    runs: u32,
    /// Output directory for records.csv / report.json / problem.toml.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Perturbed-quadratic battery with distance-based termination.
    Quadratic {
        /// Problem dimension.
        #[arg(long)]
        n: usize,
        /// Comma-separated diagonal value set, e.g. `0.1,1,10`.
        #[arg(long = "set", value_delimiter = ',', required = true)]
        set: Vec<f64>,
        #[command(flatten)]
        common: CommonBenchArgs,
    },
    /// Sigmoid-SVM battery under randomized stopping.
    Svm {
        #[arg(long)]
        n: usize,
        /// Total oracle-call budget per run.
        #[arg(long)]
        nsfo: u64,
        /// Labeled test pairs for the misclassification error.
        #[arg(long, default_value_t = 75_000)]
        test_size: usize,
        #[command(flatten)]
        common: CommonBenchArgs,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Accepted-secant percentages per cell from JSON reports in a directory.
    Bbfrac {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn env_seed() -> Result<Option<u64>, HarnessError> {
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| HarnessError::InvalidConfig(format!("{SEED_ENV}={text} is not a valid u64 seed"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Bench { which } => {
            let (mut spec, common) = match which {
                BenchCommand::Quadratic { n, set, common } => {
                    let seed = resolve_seed(common.seed)?;
                    (table1_preset(n, &set, seed, common.runs), common)
                }
                BenchCommand::Svm { n, nsfo, test_size, common } => {
                    let seed = resolve_seed(common.seed)?;
                    (svm_preset(n, nsfo, test_size, seed, common.runs), common)
                }
            };
            spec.output_dir = common.out;
            execute_and_emit(spec)
        }
        Command::Run { config } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| HarnessError::InvalidConfig(format!("read {config:?}: {e}")))?;
            let mut spec: ExperimentSpec = toml::from_str(&text)
                .map_err(|e| HarnessError::InvalidConfig(format!("parse {config:?}: {e}")))?;
            if let Some(seed) = env_seed()? {
                spec.master_seed = seed;
            }
            execute_and_emit(spec)
        }
        Command::Report { which } => match which {
            ReportCommand::Bbfrac { input } => report_bbfrac(&input),
        },
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, HarnessError> {
    Ok(env_seed()?.or(flag).unwrap_or(DEFAULT_MASTER_SEED))
}

fn execute_and_emit(spec: ExperimentSpec) -> Result<(), HarnessError> {
    spec.validate()?;
    let output = run_experiment(&spec)?;
    print_summary(&spec, &output.aggregates);

    if let Some(dir) = &spec.output_dir {
        fs::create_dir_all(dir)?;
        emit_csv(&output.records, &dir.join("records.csv"))?;
        let (_, problem_spec) = problem_instances(&spec);
        problem_spec
            .save(&dir.join("problem.toml"))
            .map_err(|e| HarnessError::Runtime(e.to_string()))?;
        let report = JsonReport::new(spec.clone(), output.records.clone(), output.aggregates.clone());
        emit_json(&report, &dir.join("report.json"))?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:>11.4e}")).unwrap_or_else(|| format!("{:>11}", "---"))
}

fn print_summary(spec: &ExperimentSpec, stats: &sqnlab::AggregateStats) {
    println!(
        "experiment {} [{}], n = {}, {} runs per algorithm",
        stats.experiment, stats.param_set, stats.n, stats.n_run
    );
    println!(
        "{:<10} {:>4} {:>11} {:>11} {:>11} {:>11} {:>7} {:>7} {:>7} {:>9}",
        "algo", "div", "mean_nsfo", "grad_norm", "var", "grad_sq", "err%", "bb%", "resets", "cpu(s)"
    );
    for algo in &stats.per_algorithm {
        println!(
            "{:<10} {:>4} {:>11.1} {} {} {} {:>7} {:>7} {:>7.1} {:>9.3}",
            algo.algo,
            algo.divergent_runs,
            algo.nsfo_mean,
            opt(algo.grad_norm_mean),
            opt(algo.grad_norm_var),
            opt(algo.grad_norm_sq_mean),
            algo.err_mean.map(|e| format!("{:.2}", 100.0 * e)).unwrap_or_else(|| "---".into()),
            algo.bb_fraction_mean.map(|b| format!("{:.2}", 100.0 * b)).unwrap_or_else(|| "---".into()),
            algo.resets_mean,
            algo.cpu_mean,
        );
    }
    let _ = spec;
}

fn report_bbfrac(dir: &Path) -> Result<(), HarnessError> {
    let mut records = Vec::new();
    let mut found = 0usize;
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let report = load_json(&path)?;
            records.extend(report.records);
            found += 1;
        }
    }
    if found == 0 {
        return Err(HarnessError::InvalidConfig(format!("no .json reports found in {}", dir.display())));
    }
    println!("n,param_set,algo,bb_percent,runs_with_boundaries,runs_total");
    for cell in bb_fraction_report(&records) {
        println!(
            "{},{},{},{},{},{}",
            cell.n,
            cell.param_set,
            cell.algo,
            cell.mean_percent.map(|p| format!("{p:.2}")).unwrap_or_else(|| "NA".into()),
            cell.runs_with_boundaries,
            cell.runs_total
        );
    }
    Ok(())
}
