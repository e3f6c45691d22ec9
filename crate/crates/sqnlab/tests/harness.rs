//! Harness integration: experiment execution, aggregation, and file I/O.

use sqnlab::experiment::{run_experiment, ExperimentSpec};
use sqnlab::io::{emit_csv, emit_json, load_json, JsonReport, CSV_HEADER};
use sqnlab::presets::{svm_preset, table1_preset};

fn small_quadratic_spec() -> ExperimentSpec {
    let mut spec = table1_preset(12, &[0.1, 1.0], 314, 3);
    for algo in &mut spec.algorithms {
        algo.max_iterations = 400;
    }
    spec
}

#[test]
fn identical_master_seeds_reproduce_records() {
    let spec = small_quadratic_spec();
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a.records.len(), b.records.len());
    for (ra, rb) in a.records.iter().zip(&b.records) {
        assert_eq!(ra.algo, rb.algo);
        assert_eq!(ra.n_sfo, rb.n_sfo);
        assert_eq!(ra.grad_norm.map(f64::to_bits), rb.grad_norm.map(f64::to_bits));
    }
}

#[test]
fn permuting_algorithm_order_does_not_change_any_run() {
    let spec = small_quadratic_spec();
    let mut reversed = spec.clone();
    reversed.algorithms.reverse();

    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&reversed).unwrap();
    for record in &a.records {
        let twin = b
            .records
            .iter()
            .find(|r| r.algo == record.algo && r.run == record.run)
            .expect("same (algo, run) exists in both");
        assert_eq!(record.n_sfo, twin.n_sfo);
        assert_eq!(record.grad_norm.map(f64::to_bits), twin.grad_norm.map(f64::to_bits));
        assert_eq!(record.bb_fraction.map(f64::to_bits), twin.bb_fraction.map(f64::to_bits));
    }
}

#[test]
fn single_run_statistics_are_degenerate() {
    let mut spec = small_quadratic_spec();
    spec.n_run = 1;
    let out = run_experiment(&spec).unwrap();
    for stats in &out.aggregates.per_algorithm {
        assert_eq!(stats.runs, 1);
        let record = out.records.iter().find(|r| r.algo == stats.algo).unwrap();
        assert_eq!(stats.grad_norm_mean, record.grad_norm);
        assert_eq!(stats.grad_norm_var, record.grad_norm.map(|_| 0.0));
        assert_eq!(stats.nsfo_mean, record.n_sfo as f64);
    }
}

#[test]
fn divergent_runs_are_flagged_and_costed_at_the_cap() {
    // The aggressive-stepsize SGD column diverges on a stiff value set.
    let mut spec = table1_preset(12, &[0.1, 1.0, 10.0, 100.0], 920, 3);
    spec.algorithms.retain(|a| a.name == "sgd-b");
    let out = run_experiment(&spec).unwrap();
    assert_eq!(out.records.len(), 3);
    for record in &out.records {
        assert!(record.divergent);
        assert_eq!(record.n_sfo, 10_000 * 5);
        assert_eq!(record.grad_norm, None);
        assert_eq!(record.err, None);
    }
    let stats = out.algo_stats("sgd-b").unwrap();
    assert_eq!(stats.divergent_runs, 3);
    assert_eq!(stats.grad_norm_mean, None);
    assert_eq!(stats.nsfo_mean, 50_000.0);
}

#[test]
fn json_report_roundtrips_bit_exactly() {
    let mut spec = svm_preset(20, 120, 200, 55, 2);
    spec.eval_size = 500;
    let out = run_experiment(&spec).unwrap();
    let report = JsonReport::new(spec, out.records, out.aggregates);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    emit_json(&report, &path).unwrap();
    let loaded = load_json(&path).unwrap();
    assert_eq!(report, loaded);
    // Bit-exactness of the aggregate floats in particular.
    for (a, b) in report
        .aggregates
        .per_algorithm
        .iter()
        .zip(&loaded.aggregates.per_algorithm)
    {
        assert_eq!(a.nsfo_mean.to_bits(), b.nsfo_mean.to_bits());
        assert_eq!(a.grad_norm_sq_mean.map(f64::to_bits), b.grad_norm_sq_mean.map(f64::to_bits));
        assert_eq!(a.cpu_mean.to_bits(), b.cpu_mean.to_bits());
    }
}

#[test]
fn csv_header_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    emit_csv(&[], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.trim_end(),
        "experiment,algo,n,param_set,run,n_sfo,grad_norm,grad_norm_sq,err,bb_fraction,resets,cpu_seconds"
    );
    assert_eq!(text.trim_end(), CSV_HEADER);
}

mod cli {
    use std::process::Command;

    fn sqnlab() -> Command {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sqnlab"));
        cmd.env_remove("SQNLAB_SEED");
        cmd
    }

    #[test]
    fn bench_quadratic_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = sqnlab()
            .args(["bench", "quadratic", "--n", "10", "--set", "0.1,1", "--runs", "2"])
            .args(["--seed", "9", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join("records.csv").exists());
        assert!(dir.path().join("report.json").exists());
        assert!(dir.path().join("problem.toml").exists());
        let report = sqnlab::load_json(&dir.path().join("report.json")).unwrap();
        assert_eq!(report.records.len(), 2 * 5);
        assert_eq!(report.spec.master_seed, 9);
    }

    #[test]
    fn env_seed_overrides_flag() {
        let dir = tempfile::tempdir().unwrap();
        let out = sqnlab()
            .env("SQNLAB_SEED", "777")
            .args(["bench", "quadratic", "--n", "10", "--set", "0.1,1", "--runs", "1"])
            .args(["--seed", "9", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
        let report = sqnlab::load_json(&dir.path().join("report.json")).unwrap();
        assert_eq!(report.spec.master_seed, 777);
    }

    #[test]
    fn invalid_config_file_exits_2() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "name = \"x\"\nunknown_key = 1\n").unwrap();
        let out = sqnlab().args(["run", "--config"]).arg(&path).output().unwrap();
        assert_eq!(out.status.code(), Some(2));
    }

    #[test]
    fn duplicate_algorithm_names_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.toml");
        let config = r#"
name = "dup"
n_run = 1

[problem]
kind = "quadratic"
n = 4
values = [1.0]

[[algorithms]]
name = "same"
max_iterations = 5
stepsize = { type = "constant", alpha = 0.1 }
updater = { kind = "sgd" }

[[algorithms]]
name = "same"
max_iterations = 5
stepsize = { type = "constant", alpha = 0.1 }
updater = { kind = "sgd" }
"#;
        std::fs::write(&path, config).unwrap();
        let out = sqnlab().args(["run", "--config"]).arg(&path).output().unwrap();
        assert_eq!(out.status.code(), Some(2));
    }

    #[test]
    fn run_config_file_executes_custom_experiment() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("custom.toml");
        let out_dir = dir.path().join("results");
        let config = format!(
            r#"
name = "custom"
param_set = "demo"
n_run = 2
master_seed = 5
output_dir = "{}"

[problem]
kind = "quadratic"
n = 8
values = [0.1, 1.0]

[[algorithms]]
name = "scbb"
max_iterations = 300
batch_size = 5
rho = 0.01
stepsize = {{ type = "harmonic", a = 100.0, b = 1000.0 }}
updater = {{ kind = "scbb" }}
"#,
            out_dir.display()
        );
        std::fs::write(&path, config).unwrap();
        let out = sqnlab().args(["run", "--config"]).arg(&path).output().unwrap();
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out_dir.join("records.csv").exists());

        let bbfrac = sqnlab().args(["report", "bbfrac", "--in"]).arg(&out_dir).output().unwrap();
        assert!(bbfrac.status.success());
        let text = String::from_utf8_lossy(&bbfrac.stdout);
        assert!(text.contains("scbb"), "bbfrac output: {text}");
    }

    #[test]
    fn bbfrac_on_empty_directory_exits_2() {
        let dir = tempfile::tempdir().unwrap();
        let out = sqnlab().args(["report", "bbfrac", "--in"]).arg(dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(2));
    }
}
