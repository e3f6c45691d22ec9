//! Secant-step frequency reporting for cyclic-BB runs.

use serde::{Deserialize, Serialize};

use crate::experiment::RunRecord;

/// Accepted-secant percentage of one (n, parameter-cell) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbFractionCell {
    pub n: usize,
    pub param_set: String,
    pub algo: String,
    /// Mean of per-run percentages; `None` when no run passed a cycle
    /// boundary (undefined, not zero).
    pub mean_percent: Option<f64>,
    /// Runs contributing a defined percentage.
    pub runs_with_boundaries: u32,
    pub runs_total: u32,
}

/// Groups cyclic-BB records by (n, param_set, algo) and averages the per-run
/// accepted-secant percentages.
pub fn bb_fraction_report(records: &[RunRecord]) -> Vec<BbFractionCell> {
    let mut cells: Vec<BbFractionCell> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for r in records.iter().filter(|r| r.updater == "scbb") {
        let idx = cells
            .iter()
            .position(|c| c.n == r.n && c.param_set == r.param_set && c.algo == r.algo)
            .unwrap_or_else(|| {
                cells.push(BbFractionCell {
                    n: r.n,
                    param_set: r.param_set.clone(),
                    algo: r.algo.clone(),
                    mean_percent: None,
                    runs_with_boundaries: 0,
                    runs_total: 0,
                });
                sums.push(0.0);
                cells.len() - 1
            });
        cells[idx].runs_total += 1;
        if let Some(fraction) = r.bb_fraction {
            cells[idx].runs_with_boundaries += 1;
            sums[idx] += 100.0 * fraction;
        }
    }
    for (cell, sum) in cells.iter_mut().zip(sums) {
        if cell.runs_with_boundaries > 0 {
            cell.mean_percent = Some(sum / cell.runs_with_boundaries as f64);
        }
    }
    cells
}
