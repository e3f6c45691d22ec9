//! Experiment specification and multi-run execution.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sqn::oracle::{BuiltProblem, ProblemSpec, StochasticProblem};
use sqn::solvers::{
    run_rsqn, run_sqn, GradientEval, InitialCurvature, InitialPoint, RunConfig, RunReport,
    StepsizeSchedule, TheoryConstants, UpdaterChoice,
};

use crate::error::{HarnessError, Result};
use crate::seed::{derive_seed, EVAL_LABEL, PROBLEM_LABEL};
use crate::stats::{aggregate, AggregateStats};

/// Problem shape; the generation seed is derived from the master seed so a
/// spec plus a master seed pins the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Quadratic {
        n: usize,
        /// Finite set the diagonal entries are drawn from; its spread sets
        /// the condition number.
        values: Vec<f64>,
    },
    SigmoidSvm {
        n: usize,
        #[serde(default = "defaults::lambda_reg")]
        lambda_reg: f64,
        #[serde(default = "defaults::sparsity")]
        sparsity: f64,
        #[serde(default = "defaults::test_size")]
        test_size: usize,
    },
}

impl ProblemConfig {
    pub fn dim(&self) -> usize {
        match self {
            ProblemConfig::Quadratic { n, .. } | ProblemConfig::SigmoidSvm { n, .. } => *n,
        }
    }

    /// The oracle-level problem spec this config pins under `master_seed`.
    pub fn to_problem_spec(&self, master_seed: u64) -> ProblemSpec {
        let seed = derive_seed(master_seed, PROBLEM_LABEL, 0);
        match self {
            ProblemConfig::Quadratic { n, values } => ProblemSpec::Quadratic {
                dim: *n,
                values: values.clone(),
                seed,
                perturbation: 0.1,
            },
            ProblemConfig::SigmoidSvm { n, lambda_reg, sparsity, test_size } => {
                ProblemSpec::SigmoidSvm {
                    dim: *n,
                    seed,
                    lambda_reg: *lambda_reg,
                    sparsity: *sparsity,
                    test_size: *test_size,
                }
            }
        }
    }
}

/// Randomized-stopping mode for one algorithm: draw the iteration count from
/// the stopping distribution built with these constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomizedSpec {
    pub constants: TheoryConstants,
}

/// One algorithm column of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    pub updater: UpdaterChoice,
    pub stepsize: StepsizeSchedule,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub zeta: f64,
    pub max_iterations: u64,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default = "defaults::initial_point")]
    pub initial_point: InitialPoint,
    #[serde(default = "defaults::initial_curvature")]
    pub initial_curvature: InitialCurvature,
    #[serde(default = "defaults::divergence_threshold")]
    pub divergence_threshold: f64,
    #[serde(default = "defaults::audit_every")]
    pub audit_every: Option<u64>,
    #[serde(default)]
    pub record_trace: bool,
    /// When set, runs under randomized stopping instead of the plain driver.
    #[serde(default)]
    pub randomized: Option<RandomizedSpec>,
}

mod defaults {
    use sqn::solvers::{InitialCurvature, InitialPoint};

    pub fn lambda_reg() -> f64 {
        0.01
    }

    pub fn sparsity() -> f64 {
        0.05
    }

    pub fn test_size() -> usize {
        75_000
    }

    pub fn batch_size() -> usize {
        1
    }

    pub fn initial_point() -> InitialPoint {
        InitialPoint::Zeros
    }

    pub fn initial_curvature() -> InitialCurvature {
        InitialCurvature::Identity
    }

    pub fn divergence_threshold() -> f64 {
        1e10
    }

    pub fn audit_every() -> Option<u64> {
        Some(100)
    }

    pub fn n_run() -> u32 {
        20
    }

    pub fn eval_size() -> usize {
        75_000
    }
}

/// A full experiment: problem, algorithm battery, and repetition plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    /// Label of the parameter cell, e.g. the value set or the oracle budget.
    #[serde(default)]
    pub param_set: String,
    pub problem: ProblemConfig,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "defaults::n_run")]
    pub n_run: u32,
    #[serde(default)]
    pub master_seed: u64,
    /// Size of the fixed evaluation set for problems without a closed-form
    /// gradient; shared across all algorithms of the experiment.
    #[serde(default = "defaults::eval_size")]
    pub eval_size: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_run < 1 {
            return Err(HarnessError::InvalidConfig("n_run must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::InvalidConfig("experiment needs at least one algorithm".into()));
        }
        let mut names: Vec<&str> = self.algorithms.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.algorithms.len() {
            return Err(HarnessError::InvalidConfig("algorithm names must be unique".into()));
        }
        for algo in &self.algorithms {
            self.run_config(algo, 0).validate().map_err(|e| {
                HarnessError::InvalidConfig(format!("algorithm {}: {e}", algo.name))
            })?;
        }
        Ok(())
    }

    /// Assembles the solver config for one run of one algorithm.
    fn run_config(&self, algo: &AlgorithmSpec, run: u32) -> RunConfig {
        let gradient_eval = match self.problem {
            ProblemConfig::Quadratic { .. } => GradientEval::Exact,
            ProblemConfig::SigmoidSvm { .. } => GradientEval::MonteCarlo {
                size: self.eval_size,
                seed: derive_seed(self.master_seed, EVAL_LABEL, 0),
            },
        };
        RunConfig {
            updater: algo.updater.clone(),
            stepsize: algo.stepsize.clone(),
            batch_size: algo.batch_size,
            zeta: algo.zeta,
            max_iterations: algo.max_iterations,
            rho: algo.rho,
            seed: derive_seed(self.master_seed, &algo.name, run),
            initial_point: algo.initial_point.clone(),
            initial_curvature: algo.initial_curvature,
            gradient_eval,
            divergence_threshold: algo.divergence_threshold,
            record_trace: algo.record_trace,
            audit_every: algo.audit_every,
        }
    }
}

/// One CSV row: a single run of a single algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub algo: String,
    pub updater: String,
    pub n: usize,
    pub param_set: String,
    pub run: u32,
    /// Oracle calls; divergent runs report the cost of a full-cap run so
    /// budget comparisons stay meaningful.
    pub n_sfo: u64,
    pub grad_norm: Option<f64>,
    pub grad_norm_sq: Option<f64>,
    pub err: Option<f64>,
    pub bb_fraction: Option<f64>,
    pub resets: u64,
    pub cpu_seconds: f64,
    pub divergent: bool,
}

/// Everything an experiment produces in memory.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub aggregates: AggregateStats,
    /// Full solver reports in (algorithm, run) order, for tests and
    /// downstream tooling.
    pub reports: Vec<RunReport>,
}

/// Executes all (algorithm, run) pairs of the experiment on a worker pool.
///
/// Per-run seeds depend only on (master seed, algorithm name, run index), so
/// the execution order never affects any trajectory. Divergent runs are
/// flagged and kept in the records; gradient statistics skip them.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let problem = spec.problem.to_problem_spec(spec.master_seed).build();

    let jobs: Vec<(usize, u32)> = (0..spec.algorithms.len())
        .flat_map(|a| (0..spec.n_run).map(move |r| (a, r)))
        .collect();

    let mut results: Vec<(usize, u32, RunRecord, RunReport)> = jobs
        .into_par_iter()
        .map(|(algo_idx, run)| {
            let algo = &spec.algorithms[algo_idx];
            let config = spec.run_config(algo, run);
            let report = execute_single(&problem, algo, &config)
                .map_err(|e| HarnessError::Runtime(format!("{} run {run}: {e}", algo.name)))?;
            let record = to_record(spec, algo, run, &report, &problem);
            Ok((algo_idx, run, record, report))
        })
        .collect::<Result<Vec<_>>>()?;

    results.sort_by_key(|(a, r, _, _)| (*a, *r));
    let records: Vec<RunRecord> = results.iter().map(|(_, _, rec, _)| rec.clone()).collect();
    let reports: Vec<RunReport> = results.into_iter().map(|(_, _, _, rep)| rep).collect();
    let aggregates = aggregate(spec, &records);
    Ok(ExperimentOutput { records, aggregates, reports })
}

fn execute_single(
    problem: &BuiltProblem,
    algo: &AlgorithmSpec,
    config: &RunConfig,
) -> sqn::error::Result<RunReport> {
    match problem {
        BuiltProblem::Quadratic(p) => dispatch(p, algo, config),
        BuiltProblem::SigmoidSvm(p) => dispatch(p, algo, config),
    }
}

fn dispatch<P: StochasticProblem>(
    problem: &P,
    algo: &AlgorithmSpec,
    config: &RunConfig,
) -> sqn::error::Result<RunReport> {
    match &algo.randomized {
        Some(spec) => run_rsqn(problem, config, &spec.constants),
        None => run_sqn(problem, config),
    }
}

fn to_record(
    spec: &ExperimentSpec,
    algo: &AlgorithmSpec,
    run: u32,
    report: &RunReport,
    problem: &BuiltProblem,
) -> RunRecord {
    let err = match problem {
        BuiltProblem::SigmoidSvm(p) if !report.divergent => {
            let x = sqn::Vector::from_column_slice(&report.final_iterate);
            Some(p.misclassification_error(&x))
        }
        _ => None,
    };
    let n_sfo = if report.divergent {
        algo.updater.sfo_cost(algo.max_iterations, algo.batch_size as u64)
    } else {
        report.n_sfo
    };
    RunRecord {
        experiment: spec.name.clone(),
        algo: algo.name.clone(),
        updater: algo.updater.name().to_string(),
        n: spec.problem.dim(),
        param_set: spec.param_set.clone(),
        run,
        n_sfo,
        grad_norm: report.grad_norm,
        grad_norm_sq: report.grad_norm_sq,
        err,
        bb_fraction: report.bb_fraction,
        resets: report.curvature_resets,
        cpu_seconds: report.wall_seconds,
        divergent: report.divergent,
    }
}

/// Convenience accessors used by tests and the CLI.
impl ExperimentOutput {
    pub fn algo_stats(&self, name: &str) -> Option<&crate::stats::AlgoStats> {
        self.aggregates.per_algorithm.iter().find(|s| s.algo == name)
    }
}

/// Builds the problem pair (instance, spec) an experiment would use;
/// exposed for tests that need direct access to the instance.
pub fn problem_instances(spec: &ExperimentSpec) -> (BuiltProblem, ProblemSpec) {
    let pspec = spec.problem.to_problem_spec(spec.master_seed);
    (pspec.build(), pspec)
}
