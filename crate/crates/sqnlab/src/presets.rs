//! Preset experiment batteries.
//!
//! `table1_preset` races the five quadratic solvers with the standard
//! settings: harmonic stepsizes `100/(1000+k)` (plus the aggressive
//! `1e4/(1e4+k)` SGD column), batch size 5, relative-distance termination at
//! 0.01, and a 10^4-iteration cap.
//!
//! `svm_preset` compares the randomized-stopping variants on the sigmoid
//! SVM: batch size 1, a shared constant stepsize `1/(2 L)` with `L` estimated
//! by the curvature probe, and per-algorithm horizons chosen so every
//! algorithm consumes at most the same oracle-call budget.

use sqn::oracle::{estimate_lipschitz, BuiltProblem, LipschitzProbe, StochasticProblem};
use sqn::rng::SeededRng;
use sqn::solvers::{InitialPoint, StepsizeSchedule, TheoryConstants, UpdaterChoice};
use sqn::updaters::{CbbConfig, DampedBfgsConfig, ResConfig};
use sqn::Vector;

use crate::experiment::{AlgorithmSpec, ExperimentSpec, ProblemConfig, RandomizedSpec};
use crate::seed::{derive_seed, PROBE_LABEL};

/// Master seed used by the CLI when none is given.
pub const DEFAULT_MASTER_SEED: u64 = 12345;

/// Oracle budgets of the standard SVM comparison grid.
pub const SVM_NSFO_GRID: [u64; 4] = [2500, 5000, 10_000, 20_000];

/// Iteration cap of the quadratic battery.
pub const QUADRATIC_ITERATION_CAP: u64 = 10_000;

fn format_value_set(values: &[f64]) -> String {
    let inner: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    format!("S={{{}}}", inner.join(","))
}

/// The quadratic comparison battery on the value set `values`.
pub fn table1_preset(n: usize, values: &[f64], master_seed: u64, n_run: u32) -> ExperimentSpec {
    let slow = StepsizeSchedule::Harmonic { a: 100.0, b: 1000.0 };
    let fast = StepsizeSchedule::Harmonic { a: 1e4, b: 1e4 };
    let base = AlgorithmSpec {
        name: String::new(),
        updater: UpdaterChoice::Sgd,
        stepsize: slow.clone(),
        batch_size: 5,
        zeta: 0.0,
        max_iterations: QUADRATIC_ITERATION_CAP,
        rho: Some(0.01),
        initial_point: InitialPoint::Zeros,
        initial_curvature: sqn::solvers::InitialCurvature::Identity,
        divergence_threshold: 1e10,
        audit_every: Some(100),
        record_trace: false,
        randomized: None,
    };
    let algorithms = vec![
        AlgorithmSpec { name: "sgd-a".into(), ..base.clone() },
        AlgorithmSpec { name: "sgd-b".into(), stepsize: fast, ..base.clone() },
        AlgorithmSpec {
            name: "res".into(),
            updater: UpdaterChoice::Res(ResConfig { shift: 1e-3, safeguard: 1e-4, skip_tol: 1e-14 }),
            zeta: 1e-4,
            ..base.clone()
        },
        AlgorithmSpec {
            name: "sdbfgs".into(),
            updater: UpdaterChoice::Sdbfgs(DampedBfgsConfig { shift: 1e-3, skip_tol: 1e-14 }),
            zeta: 1e-4,
            ..base.clone()
        },
        AlgorithmSpec {
            name: "scbb".into(),
            updater: UpdaterChoice::Scbb(CbbConfig {
                cycle: 5,
                lambda_min: 1e-6,
                lambda_max: 1e8,
                ..CbbConfig::default()
            }),
            ..base
        },
    ];
    ExperimentSpec {
        name: format!("table1-n{n}"),
        param_set: format_value_set(values),
        problem: ProblemConfig::Quadratic { n, values: values.to_vec() },
        algorithms,
        n_run,
        master_seed,
        eval_size: 75_000,
        output_dir: None,
    }
}

/// Probes the SVM instance the preset will run and returns the estimated
/// gradient Lipschitz constant along the initial shrink segment.
pub fn svm_lipschitz_estimate(problem: &ProblemConfig, master_seed: u64) -> f64 {
    let built = problem.to_problem_spec(master_seed).build();
    let BuiltProblem::SigmoidSvm(svm) = &built else {
        panic!("curvature probe is wired for the SVM problem");
    };
    let mut rng = SeededRng::new(derive_seed(master_seed, PROBE_LABEL, 0));
    let x0 = Vector::from_fn(svm.dim(), |_, _| 5.0 * rng.uniform01());
    estimate_lipschitz(svm, &x0, &mut rng, &LipschitzProbe::default(), 2.0 * svm.lambda_reg())
}

/// The randomized-stopping SVM battery under a total oracle budget.
///
/// The stopping distribution for every algorithm uses unit operator bounds
/// with the probed Lipschitz constant, which under the shared constant
/// stepsize makes the drawn iteration count uniform on each algorithm's
/// horizon — the same stopping law the plain randomized-gradient baseline
/// uses. Horizons are budget-matched: the BFGS-family variant re-evaluates
/// each batch, so it gets half the iterations of the baseline.
pub fn svm_preset(
    n: usize,
    nsfo_budget: u64,
    test_size: usize,
    master_seed: u64,
    n_run: u32,
) -> ExperimentSpec {
    let problem = ProblemConfig::SigmoidSvm {
        n,
        lambda_reg: 0.01,
        sparsity: 0.05,
        test_size,
    };
    let lipschitz = svm_lipschitz_estimate(&problem, master_seed);
    let alpha = 1.0 / (2.0 * lipschitz);
    let stepsize = StepsizeSchedule::Constant { alpha };
    let constants = TheoryConstants {
        lipschitz,
        noise_level: 1.0,
        op_lower: 1.0,
        op_upper: 1.0,
        optimality_gap: 1.0,
        batch_tuning: 1.0,
    };
    let randomized = Some(RandomizedSpec { constants });

    let base = AlgorithmSpec {
        name: String::new(),
        updater: UpdaterChoice::Sgd,
        stepsize,
        batch_size: 1,
        zeta: 0.0,
        max_iterations: 0,
        rho: None,
        initial_point: InitialPoint::ScaledUniform { lo: 0.0, hi: 1.0, scale: 5.0 },
        initial_curvature: sqn::solvers::InitialCurvature::Identity,
        divergence_threshold: 1e10,
        audit_every: Some(100),
        record_trace: false,
        randomized,
    };

    let sgd = UpdaterChoice::Sgd;
    let sdbfgs = UpdaterChoice::Sdbfgs(DampedBfgsConfig { shift: 1e-3, skip_tol: 1e-14 });
    let scbb = UpdaterChoice::Scbb(CbbConfig {
        cycle: 5,
        lambda_min: 1e-6,
        lambda_max: 1e8,
        ..CbbConfig::default()
    });
    let algorithms = vec![
        AlgorithmSpec {
            name: "rsg".into(),
            max_iterations: sgd.iterations_for_budget(nsfo_budget, 1),
            updater: sgd,
            ..base.clone()
        },
        AlgorithmSpec {
            name: "rsdbfgs".into(),
            max_iterations: sdbfgs.iterations_for_budget(nsfo_budget, 1),
            updater: sdbfgs,
            zeta: 1e-4,
            ..base.clone()
        },
        AlgorithmSpec {
            name: "rscbb".into(),
            max_iterations: scbb.iterations_for_budget(nsfo_budget, 1),
            updater: scbb,
            ..base
        },
    ];
    ExperimentSpec {
        name: format!("svm-n{n}"),
        param_set: format!("nsfo={nsfo_budget}"),
        problem,
        algorithms,
        n_run,
        master_seed,
        eval_size: 75_000,
        output_dir: None,
    }
}
