//! Problem-instance serialization.
//!
//! A [`ProblemSpec`] captures everything needed to regenerate a benchmark
//! problem bit-exactly within one build of this crate: dimension, the
//! diagonal value set or SVM shape parameters, and the generation seed. The
//! on-disk form is TOML; unknown keys are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{QuadraticProblem, SigmoidSvmProblem};

fn default_perturbation() -> f64 {
    0.1
}

fn default_sparsity() -> f64 {
    0.05
}

fn default_test_size() -> usize {
    75_000
}

fn default_lambda() -> f64 {
    0.01
}

/// Declarative description of a benchmark problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// Perturbed diagonal quadratic with diagonal entries from `values`.
    Quadratic {
        dim: usize,
        values: Vec<f64>,
        seed: u64,
        #[serde(default = "default_perturbation")]
        perturbation: f64,
    },
    /// Sparse sigmoid-loss SVM.
    SigmoidSvm {
        dim: usize,
        seed: u64,
        #[serde(default = "default_lambda")]
        lambda_reg: f64,
        #[serde(default = "default_sparsity")]
        sparsity: f64,
        #[serde(default = "default_test_size")]
        test_size: usize,
    },
}

/// A problem instance materialized from a [`ProblemSpec`].
#[derive(Debug, Clone)]
pub enum BuiltProblem {
    Quadratic(QuadraticProblem),
    SigmoidSvm(SigmoidSvmProblem),
}

impl ProblemSpec {
    /// Regenerates the problem instance this spec describes.
    pub fn build(&self) -> BuiltProblem {
        match self {
            ProblemSpec::Quadratic { dim, values, seed, perturbation } => {
                let mut p = QuadraticProblem::generate(*dim, values, *seed);
                if *perturbation != default_perturbation() {
                    p = QuadraticProblem::from_parts(p.diag().clone(), p.rhs().clone(), *perturbation);
                }
                BuiltProblem::Quadratic(p)
            }
            ProblemSpec::SigmoidSvm { dim, seed, lambda_reg, sparsity, test_size } => {
                BuiltProblem::SigmoidSvm(SigmoidSvmProblem::generate(
                    *dim, *lambda_reg, *sparsity, *test_size, *seed,
                ))
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("serialize problem spec: {e}")))?;
        fs::write(path, text).map_err(|e| Error::InvalidConfig(format!("write {path:?}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("read {path:?}: {e}")))?;
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("parse {path:?}: {e}")))
    }
}
