//! Per-run record aggregation.

use serde::{Deserialize, Serialize};

use crate::experiment::{ExperimentSpec, RunRecord};

/// Streaming mean/variance accumulator (Welford).
#[derive(Debug, Clone, Default)]
pub struct RunningMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    /// Sample variance with `n - 1` denominator; a single observation
    /// reports zero.
    pub fn sample_variance(&self) -> Option<f64> {
        match self.count {
            0 => None,
            1 => Some(0.0),
            n => Some(self.m2 / (n - 1) as f64),
        }
    }
}

/// Summary of one algorithm's runs within an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoStats {
    pub algo: String,
    pub runs: u32,
    /// Runs flagged divergent; excluded from gradient and error statistics,
    /// reported at the iteration-cap oracle cost.
    pub divergent_runs: u32,
    pub grad_norm_mean: Option<f64>,
    pub grad_norm_var: Option<f64>,
    pub grad_norm_sq_mean: Option<f64>,
    pub grad_norm_sq_var: Option<f64>,
    pub nsfo_mean: f64,
    pub err_mean: Option<f64>,
    pub bb_fraction_mean: Option<f64>,
    pub resets_mean: f64,
    pub cpu_mean: f64,
}

/// Per-experiment aggregate over all algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub experiment: String,
    pub n: usize,
    pub param_set: String,
    pub n_run: u32,
    /// Sample variance uses the `n_run - 1` denominator.
    pub variance_denominator: String,
    pub per_algorithm: Vec<AlgoStats>,
}

/// Aggregates records algorithm by algorithm, preserving the spec's
/// algorithm order.
pub fn aggregate(spec: &ExperimentSpec, records: &[RunRecord]) -> AggregateStats {
    let per_algorithm = spec
        .algorithms
        .iter()
        .map(|algo| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.algo == algo.name).collect();
            let mut grad = RunningMoments::default();
            let mut grad_sq = RunningMoments::default();
            let mut nsfo = RunningMoments::default();
            let mut err = RunningMoments::default();
            let mut bb = RunningMoments::default();
            let mut resets = RunningMoments::default();
            let mut cpu = RunningMoments::default();
            let mut divergent = 0u32;
            for r in &rows {
                if r.divergent {
                    divergent += 1;
                }
                if let Some(v) = r.grad_norm {
                    grad.push(v);
                }
                if let Some(v) = r.grad_norm_sq {
                    grad_sq.push(v);
                }
                if let Some(v) = r.err {
                    err.push(v);
                }
                if let Some(v) = r.bb_fraction {
                    bb.push(v);
                }
                nsfo.push(r.n_sfo as f64);
                resets.push(r.resets as f64);
                cpu.push(r.cpu_seconds);
            }
            AlgoStats {
                algo: algo.name.clone(),
                runs: rows.len() as u32,
                divergent_runs: divergent,
                grad_norm_mean: grad.mean(),
                grad_norm_var: grad.sample_variance(),
                grad_norm_sq_mean: grad_sq.mean(),
                grad_norm_sq_var: grad_sq.sample_variance(),
                nsfo_mean: nsfo.mean().unwrap_or(0.0),
                err_mean: err.mean(),
                bb_fraction_mean: bb.mean(),
                resets_mean: resets.mean().unwrap_or(0.0),
                cpu_mean: cpu.mean().unwrap_or(0.0),
            }
        })
        .collect();

    AggregateStats {
        experiment: spec.name.clone(),
        n: spec.problem.dim(),
        param_set: spec.param_set.clone(),
        n_run: spec.n_run,
        variance_denominator: "n_run - 1".to_string(),
        per_algorithm,
    }
}
