//! CSV and JSON result emission.
//!
//! The CSV carries one row per run with a fixed column set; the JSON report
//! mirrors the same records and adds the aggregate statistics, a config echo,
//! and the tool version, and round-trips bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{ExperimentSpec, RunRecord};
use crate::stats::AggregateStats;

/// The exact CSV header, stable across runs of one version.
pub const CSV_HEADER: &str =
    "experiment,algo,n,param_set,run,n_sfo,grad_norm,grad_norm_sq,err,bb_fraction,resets,cpu_seconds";

/// Full JSON output of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub tool_version: String,
    pub spec: ExperimentSpec,
    pub records: Vec<RunRecord>,
    pub aggregates: AggregateStats,
}

impl JsonReport {
    pub fn new(spec: ExperimentSpec, records: Vec<RunRecord>, aggregates: AggregateStats) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            spec,
            records,
            aggregates,
        }
    }
}

fn float_cell(value: Option<f64>) -> String {
    value.map(|v| format!("{v}")).unwrap_or_default()
}

/// Writes one row per record under the fixed header; optional statistics
/// render as empty cells.
pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| HarnessError::Runtime(format!("open {path:?}: {e}")))?;
    writer
        .write_record(CSV_HEADER.split(','))
        .map_err(|e| HarnessError::Runtime(format!("write header: {e}")))?;
    for r in records {
        writer
            .write_record([
                r.experiment.as_str(),
                r.algo.as_str(),
                &r.n.to_string(),
                r.param_set.as_str(),
                &r.run.to_string(),
                &r.n_sfo.to_string(),
                &float_cell(r.grad_norm),
                &float_cell(r.grad_norm_sq),
                &float_cell(r.err),
                &float_cell(r.bb_fraction),
                &r.resets.to_string(),
                &format!("{}", r.cpu_seconds),
            ])
            .map_err(|e| HarnessError::Runtime(format!("write record: {e}")))?;
    }
    writer.flush().map_err(|e| HarnessError::Runtime(format!("flush {path:?}: {e}")))?;
    Ok(())
}

pub fn emit_json(report: &JsonReport, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::Runtime(format!("create {path:?}: {e}")))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, report)
        .map_err(|e| HarnessError::Runtime(format!("serialize report: {e}")))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn load_json(path: &Path) -> Result<JsonReport> {
    let file = File::open(path).map_err(|e| HarnessError::Runtime(format!("open {path:?}: {e}")))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| HarnessError::Runtime(format!("parse {path:?}: {e}")))
}
