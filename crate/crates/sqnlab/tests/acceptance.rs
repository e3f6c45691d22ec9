//! Acceptance suite: desk-scale reproductions and exact invariants.
//!
//! Each test prints one `ACCEPTANCE <id>: PASS/FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`). The quantitative
//! reproductions (1–4) run the preset batteries with the default master seed
//! and 20 repetitions; the property checks (5–11) are deterministic given
//! their seeds.

use nalgebra::DMatrix;
use sqn::linalg::{min_eigenvalue, SpdMatrix, Vector};
use sqn::oracle::{
    finite_difference_check, QuadraticProblem, SigmoidSvmProblem, StochasticProblem,
};
use sqn::rng::SeededRng;
use sqn::solvers::{
    build_pr, run_sqn, sample_stopping_index, RunConfig, StepsizeSchedule, TheoryConstants,
    UpdaterChoice,
};
use sqn::updaters::{damping_coefficient, sdbfgs_update, CbbConfig, DampedBfgsConfig, ResConfig};
use sqnlab::experiment::{run_experiment, ExperimentSpec};
use sqnlab::presets::{svm_preset, table1_preset, DEFAULT_MASTER_SEED};

fn check(id: &str, ok: bool, detail: &str) {
    println!("ACCEPTANCE {id}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance {id} failed: {detail}");
}

fn retain_algorithms(spec: &mut ExperimentSpec, names: &[&str]) {
    spec.algorithms.retain(|a| names.contains(&a.name.as_str()));
    assert_eq!(spec.algorithms.len(), names.len(), "preset is missing an algorithm");
}

fn random_spd(rng: &mut SeededRng, n: usize, lo: f64, hi: f64) -> SpdMatrix {
    let eig: Vec<f64> = (0..n).map(|_| rng.uniform(lo, hi)).collect();
    let raw = DMatrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0));
    let q = raw.qr().q();
    let lam = DMatrix::from_diagonal(&Vector::from_column_slice(&eig));
    SpdMatrix::from_symmetric(&q * lam * q.transpose()).expect("symmetric by construction")
}

fn random_vec(rng: &mut SeededRng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.uniform(-2.0, 2.0))
}

#[test]
fn acceptance_01_table1_easy_cell() {
    let mut spec = table1_preset(500, &[0.1, 1.0], DEFAULT_MASTER_SEED, 20);
    retain_algorithms(&mut spec, &["sgd-a", "sdbfgs"]);
    let out = run_experiment(&spec).expect("easy cell runs");
    let sdbfgs = out.algo_stats("sdbfgs").unwrap();
    let sgd = out.algo_stats("sgd-a").unwrap();

    let nsfo = sdbfgs.nsfo_mean;
    let grad = sdbfgs.grad_norm_mean.expect("no divergent damped-BFGS runs");
    let ratio = sgd.nsfo_mean / nsfo;
    let ok = (250.0..=1500.0).contains(&nsfo) && grad <= 0.2 && ratio >= 2.0;
    check(
        "1 (quadratic easy cell)",
        ok,
        &format!(
            "SDBFGS mean N_sfo = {nsfo:.1} (band [250, 1500]), mean grad norm = {grad:.4} (<= 0.2), \
             SGD/SDBFGS oracle-cost ratio = {ratio:.2} (>= 2)"
        ),
    );
}

#[test]
fn acceptance_02_table1_hard_cell() {
    let mut spec = table1_preset(500, &[0.1, 1.0, 10.0, 100.0], DEFAULT_MASTER_SEED, 20);
    retain_algorithms(&mut spec, &["sgd-b", "scbb"]);
    let out = run_experiment(&spec).expect("hard cell runs");

    let scbb = out.algo_stats("scbb").unwrap();
    let grad = scbb.grad_norm_mean.expect("cyclic-BB runs never diverge here");

    let sgd_cap_cost = 10_000 * 5;
    let stalled = out
        .records
        .iter()
        .filter(|r| r.algo == "sgd-b" && (r.divergent || r.n_sfo >= sgd_cap_cost))
        .count();
    let ok = grad <= 0.5 && stalled >= 15;
    check(
        "2 (quadratic hard cell)",
        ok,
        &format!(
            "SCBB mean grad norm = {grad:.4} (<= 0.5); aggressive SGD divergent-or-capped in \
             {stalled}/20 runs (>= 15)"
        ),
    );
}

#[test]
fn acceptance_03_svm_cell_nsfo_5000() {
    let mut spec = svm_preset(500, 5000, 75_000, DEFAULT_MASTER_SEED, 20);
    retain_algorithms(&mut spec, &["rsg", "rsdbfgs"]);
    let out = run_experiment(&spec).expect("svm cell runs");
    let baseline = out.algo_stats("rsg").unwrap();
    let quasi = out.algo_stats("rsdbfgs").unwrap();

    let quasi_sq = quasi.grad_norm_sq_mean.unwrap();
    let base_sq = baseline.grad_norm_sq_mean.unwrap();
    let quasi_err = quasi.err_mean.unwrap();
    let base_err = baseline.err_mean.unwrap();
    let ok = quasi_sq <= 0.1 && quasi_sq <= base_sq / 3.0 && base_err - quasi_err >= 0.05;
    check(
        "3 (svm cell, budget 5000)",
        ok,
        &format!(
            "RSDBFGS mean grad^2 = {quasi_sq:.4} (<= 0.1, and <= baseline/3 = {:.4}); \
             misclassification {:.2}% vs baseline {:.2}% (gap >= 5pp)",
            base_sq / 3.0,
            100.0 * quasi_err,
            100.0 * base_err
        ),
    );
}

#[test]
fn acceptance_04_svm_bb_step_percentage() {
    let mut spec = svm_preset(500, 2500, 75_000, DEFAULT_MASTER_SEED, 20);
    retain_algorithms(&mut spec, &["rscbb"]);
    let out = run_experiment(&spec).expect("svm cell runs");
    let cells = sqnlab::bb_fraction_report(&out.records);
    assert_eq!(cells.len(), 1);
    let percent = cells[0].mean_percent.expect("every run passes cycle boundaries");
    let ok = (40.0..=90.0).contains(&percent);
    check(
        "4 (svm accepted-secant percentage, budget 2500)",
        ok,
        &format!("RSCBB keeps the secant scalar on {percent:.2}% of cycle boundaries (band [40, 90])"),
    );
}

#[test]
fn acceptance_05_damped_update_spectral_floor() {
    let cfg = DampedBfgsConfig::default();
    let mut rng = SeededRng::new(0xACCE_0005);
    let mut eig_violations = 0u32;
    let mut pairing_violations = 0u32;
    let trials = 10_000;
    for trial in 0..trials {
        let n = [2usize, 5, 20][trial % 3];
        let b = random_spd(&mut rng, n, 0.05, 50.0);
        let s = random_vec(&mut rng, n);
        let y = random_vec(&mut rng, n);
        let x = random_vec(&mut rng, n);

        let theta = damping_coefficient(&s, &y, &b);
        let r = &y * theta + b.mul_vec(&s) * (1.0 - theta);
        if s.dot(&r) < 0.2 * b.quadratic_form(&s) * (1.0 - 1e-12) {
            pairing_violations += 1;
        }
        let next = sdbfgs_update(&b, &s, &y, &x, &cfg).expect("non-degenerate step");
        if min_eigenvalue(&next) < cfg.shift - 1e-9 {
            eig_violations += 1;
        }
    }
    let ok = eig_violations == 0 && pairing_violations == 0;
    check(
        "5 (damped-update floor, 10^4 trials)",
        ok,
        &format!(
            "{trials} random updates over n in {{2,5,20}}: {eig_violations} spectral-floor violations, \
             {pairing_violations} curvature-pairing violations"
        ),
    );
}

#[test]
fn acceptance_06_modified_secant_identity() {
    let cfg = DampedBfgsConfig::default();
    let mut rng = SeededRng::new(0xACCE_0006);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let n = [2usize, 5, 20][trial % 3];
        let b = random_spd(&mut rng, n, 0.1, 10.0);
        let s = random_vec(&mut rng, n);
        let y = random_vec(&mut rng, n);
        let x = random_vec(&mut rng, n);
        let theta = damping_coefficient(&s, &y, &b);
        let r = &y * theta + b.mul_vec(&s) * (1.0 - theta);
        let next = sdbfgs_update(&b, &s, &y, &x, &cfg).expect("non-degenerate step");
        let lhs = next.mul_vec(&s);
        let rhs = &r + &s * cfg.shift;
        worst = worst.max((lhs - &rhs).norm() / rhs.norm().max(1.0));
    }
    let ok = worst <= 1e-8;
    check(
        "6 (modified secant identity, 10^3 trials)",
        ok,
        &format!("worst relative residual of B+ s = r + shift*s is {worst:.3e} (<= 1e-8)"),
    );
}

#[test]
fn acceptance_07_stopping_distribution() {
    let constants = TheoryConstants {
        lipschitz: 2.0,
        noise_level: 1.0,
        op_lower: 0.5,
        op_upper: 1.5,
        optimality_gap: 1.0,
        batch_tuning: 1.0,
    };
    let bound = 2.0 * constants.op_lower / (constants.lipschitz * constants.op_upper * constants.op_upper);

    // Normalization over 100 random admissible schedules.
    let mut rng = SeededRng::new(0xACCE_0007);
    let mut worst_norm_gap: f64 = 0.0;
    for _ in 0..100 {
        let horizon = 1 + rng.index(300) as u64;
        let values: Vec<f64> = (0..horizon).map(|_| rng.uniform(0.05, 0.95) * bound).collect();
        let pr = build_pr(&StepsizeSchedule::Explicit { values }, horizon, &constants).unwrap();
        let sum: f64 = pr.probabilities().iter().sum();
        worst_norm_gap = worst_norm_gap.max((sum - 1.0).abs());
    }

    // Exact uniformity at the canonical constant stepsize.
    let alpha = constants.op_lower / (constants.lipschitz * constants.op_upper * constants.op_upper);
    let uniform = build_pr(&StepsizeSchedule::Constant { alpha }, 64, &constants).unwrap();
    let probs = uniform.probabilities();
    let spread = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - probs.iter().copied().fold(f64::INFINITY, f64::min);

    // Sampling frequencies over 1e5 draws, four atoms.
    let four = build_pr(&StepsizeSchedule::Constant { alpha }, 4, &constants).unwrap();
    let mut draw_rng = SeededRng::new(0xACCE_0008);
    let draws = 100_000usize;
    let mut counts = [0u64; 4];
    for _ in 0..draws {
        counts[(sample_stopping_index(&four, &mut draw_rng) - 1) as usize] += 1;
    }
    let se = (0.25 * 0.75 / draws as f64).sqrt();
    let worst_freq_gap = counts
        .iter()
        .map(|&c| (c as f64 / draws as f64 - 0.25).abs())
        .fold(0.0f64, f64::max);

    let ok = worst_norm_gap <= 1e-12 && spread == 0.0 && worst_freq_gap <= 3.0 * se;
    check(
        "7 (stopping distribution)",
        ok,
        &format!(
            "normalization gap {worst_norm_gap:.2e} (<= 1e-12); uniform spread {spread:.1e} (= 0); \
             worst frequency deviation {worst_freq_gap:.5} (<= 3 SE = {:.5})",
            3.0 * se
        ),
    );
}

#[test]
fn acceptance_08_oracle_unbiasedness_and_gradients() {
    let quadratic = QuadraticProblem::generate(6, &[0.1, 1.0, 10.0], 0xACCE);
    let mut rng = SeededRng::new(0xACCE_0009);

    // Componentwise |sample mean - exact| <= 4 SE at 10 random points.
    let samples_per_point = 100_000usize;
    let mut unbiased = true;
    for _ in 0..10 {
        let x = Vector::from_fn(6, |_, _| rng.uniform(-3.0, 3.0));
        let exact = quadratic.exact_gradient(&x).unwrap();
        let mut mean = Vector::zeros(6);
        let mut m2 = Vector::zeros(6);
        for i in 0..samples_per_point {
            let xi = quadratic.draw_sample(&mut rng);
            let g = quadratic.stochastic_gradient(&x, &xi);
            let delta = &g - &mean;
            mean += &delta / (i + 1) as f64;
            for c in 0..6 {
                m2[c] += delta[c] * (g[c] - mean[c]);
            }
        }
        for c in 0..6 {
            let se = (m2[c] / (samples_per_point as f64 - 1.0)).sqrt() / (samples_per_point as f64).sqrt();
            if (mean[c] - exact[c]).abs() > 4.0 * se.max(1e-300) {
                unbiased = false;
            }
        }
    }

    // Finite differences against the analytic per-sample gradients.
    let xq = Vector::from_fn(6, |i, _| 0.5 * i as f64 - 1.0);
    let xiq = quadratic.draw_sample(&mut rng);
    let fd_quadratic = finite_difference_check(&quadratic, &xq, &xiq, 1e-5);

    let svm = SigmoidSvmProblem::generate(60, 0.01, 0.05, 10, 0xACCE);
    let xs = Vector::from_fn(60, |_, _| rng.uniform(-1.0, 1.0));
    let sample = svm.draw_sample(&mut rng);
    let fd_svm = finite_difference_check(&svm, &xs, &sample, 1e-5);

    let ok = unbiased && fd_quadratic <= 1e-6 && fd_svm <= 1e-6;
    check(
        "8 (oracle unbiasedness and finite differences)",
        ok,
        &format!(
            "componentwise 4-SE unbiasedness at 10 points: {unbiased}; finite-difference relative \
             error {fd_quadratic:.2e} (quadratic) and {fd_svm:.2e} (svm), both <= 1e-6"
        ),
    );
}

#[test]
fn acceptance_09_oracle_call_accounting() {
    let problem = QuadraticProblem::generate(8, &[0.1, 1.0], 0xACCE);
    let iterations = 1000u64;
    let batch = 5u64;
    let cycle = 5u64;
    let cases = [
        ("sgd", UpdaterChoice::Sgd, iterations * batch),
        ("sdbfgs", UpdaterChoice::Sdbfgs(DampedBfgsConfig::default()), 2 * iterations * batch),
        ("res", UpdaterChoice::Res(ResConfig::default()), 2 * iterations * batch),
        (
            "scbb",
            UpdaterChoice::Scbb(CbbConfig { cycle, ..CbbConfig::default() }),
            iterations * batch + (iterations / cycle) * batch,
        ),
    ];
    let mut detail = String::new();
    let mut ok = true;
    for (name, updater, expected) in cases {
        let mut cfg = RunConfig::new(updater, StepsizeSchedule::Harmonic { a: 100.0, b: 1000.0 }, iterations);
        cfg.batch_size = batch as usize;
        cfg.zeta = if matches!(cfg.updater, UpdaterChoice::Sgd | UpdaterChoice::Scbb(_)) { 0.0 } else { 1e-4 };
        cfg.seed = 0xACCE + expected;
        cfg.audit_every = None;
        let report = run_sqn(&problem, &cfg).unwrap();
        ok &= report.n_sfo == expected && report.iterations == iterations;
        detail.push_str(&format!("{name}: {} (expected {expected}); ", report.n_sfo));
    }
    check("9 (oracle-call accounting at T=1000)", ok, detail.trim_end_matches("; "));
}

#[test]
fn acceptance_10_experiment_determinism() {
    // Small but heterogeneous battery: dense updater, scalar updater, and a
    // randomized-stopping column, all repeated across a thread pool.
    let mut spec = svm_preset(40, 400, 500, 987, 4);
    spec.eval_size = 2000;
    let a = run_experiment(&spec).expect("first run");
    let b = run_experiment(&spec).expect("second run");

    let mut ok = a.records.len() == b.records.len();
    for (ra, rb) in a.records.iter().zip(&b.records) {
        ok &= ra.algo == rb.algo && ra.run == rb.run && ra.n_sfo == rb.n_sfo;
        ok &= ra.grad_norm.map(f64::to_bits) == rb.grad_norm.map(f64::to_bits);
        ok &= ra.err.map(f64::to_bits) == rb.err.map(f64::to_bits);
    }
    for (pa, pb) in a.reports.iter().zip(&b.reports) {
        ok &= pa.same_outcome(pb);
        let bits_a: Vec<u64> = pa.final_iterate.iter().map(|v| v.to_bits()).collect();
        let bits_b: Vec<u64> = pb.final_iterate.iter().map(|v| v.to_bits()).collect();
        ok &= bits_a == bits_b;
    }
    check(
        "10 (determinism under equal seeds)",
        ok,
        &format!(
            "{} records and {} reports bit-identical across two executions (wall time excluded)",
            a.records.len(),
            a.reports.len()
        ),
    );
}

#[test]
fn acceptance_11_cyclic_bb_range_invariant() {
    let problem = QuadraticProblem::generate(12, &[0.1, 1.0, 10.0], 0xACCE);
    let cbb = CbbConfig::default();
    let mut cfg = RunConfig::new(
        UpdaterChoice::Scbb(cbb),
        StepsizeSchedule::Harmonic { a: 100.0, b: 1000.0 },
        10_000,
    );
    cfg.batch_size = 5;
    cfg.seed = 0xACCE_000B;
    let report = run_sqn(&problem, &cfg).unwrap();
    let lo = report.lambda_min_seen.unwrap();
    let hi = report.lambda_max_seen.unwrap();
    let (floor, ceil) = (cbb.lambda_min.min(1.0), cbb.lambda_max.max(1.0));
    let ok = report.iterations == 10_000 && lo >= floor && hi <= ceil;
    check(
        "11 (cyclic-BB scalar range over 10^4 iterations)",
        ok,
        &format!("lambda stayed within [{lo:.3e}, {hi:.3e}] of the admissible [{floor:.1e}, {ceil:.1e}]"),
    );
}
