//! Nonconvex support vector machine with a sigmoid loss.
//!
//! The expected objective is
//! `f(x) = E[1 - tanh(v <x, u>)] + lambda ||x||^2`
//! over sparse nonnegative feature vectors `u` and labels
//! `v = sign(<x_sep, u>)` produced by a hidden separator `x_sep` drawn
//! uniformly from `[-1, 1]^n`. Each feature vector has `ceil(sparsity * n)`
//! nonzero components, uniform on `[0, 1]`, at positions chosen uniformly
//! without replacement. No closed-form gradient exists; reporting uses a
//! fixed-seed Monte-Carlo estimate shared across algorithms.

use crate::linalg::Vector;
use crate::oracle::{monte_carlo_gradient, StochasticProblem};
use crate::rng::SeededRng;

const SEPARATOR_STREAM: u64 = 10;
const TEST_SET_STREAM: u64 = 11;

/// One labeled observation: a sparse feature vector and its +-1 label.
#[derive(Debug, Clone)]
pub struct SvmSample {
    indices: Vec<u32>,
    values: Vec<f64>,
    label: f64,
}

impl SvmSample {
    pub fn label(&self) -> f64 {
        self.label
    }

    /// `<x, u>` against the sparse feature vector.
    pub fn dot(&self, x: &Vector) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| x[i as usize] * v)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct SigmoidSvmProblem {
    dim: usize,
    lambda_reg: f64,
    sparsity: f64,
    nonzeros: usize,
    separator: Vector,
    test_set: Vec<SvmSample>,
}

impl SigmoidSvmProblem {
    /// Generates a problem instance: hidden separator, then a fixed labeled
    /// test set of `test_size` pairs drawn the same way as training samples.
    pub fn generate(dim: usize, lambda_reg: f64, sparsity: f64, test_size: usize, seed: u64) -> Self {
        assert!(dim >= 2);
        assert!(lambda_reg > 0.0);
        assert!(sparsity > 0.0 && sparsity <= 1.0);
        let nonzeros = (sparsity * dim as f64).ceil() as usize;
        let mut sep_rng = SeededRng::with_stream(seed, SEPARATOR_STREAM);
        let separator = Vector::from_fn(dim, |_, _| sep_rng.uniform(-1.0, 1.0));
        let mut problem = Self {
            dim,
            lambda_reg,
            sparsity,
            nonzeros,
            separator,
            test_set: Vec::new(),
        };
        let mut test_rng = SeededRng::with_stream(seed, TEST_SET_STREAM);
        problem.test_set = (0..test_size).map(|_| problem.draw_sample(&mut test_rng)).collect();
        problem
    }

    pub fn lambda_reg(&self) -> f64 {
        self.lambda_reg
    }

    pub fn sparsity(&self) -> f64 {
        self.sparsity
    }

    pub fn nonzeros_per_sample(&self) -> usize {
        self.nonzeros
    }

    pub fn separator(&self) -> &Vector {
        &self.separator
    }

    pub fn test_size(&self) -> usize {
        self.test_set.len()
    }

    /// Fraction of the test set where `sign(<x, u>)` disagrees with the
    /// label. A zero inner product counts as a misclassification.
    pub fn misclassification_error(&self, x: &Vector) -> f64 {
        assert!(!self.test_set.is_empty(), "test set is empty");
        let wrong = self
            .test_set
            .iter()
            .filter(|s| s.label * s.dot(x) <= 0.0)
            .count();
        wrong as f64 / self.test_set.len() as f64
    }

    /// Sample-average gradient over a fixed evaluation set determined by
    /// `eval_seed`; the regularizer contribution `2 lambda x` enters each
    /// per-sample gradient exactly.
    pub fn estimated_gradient(&self, x: &Vector, eval_size: usize, eval_seed: u64) -> Vector {
        monte_carlo_gradient(self, x, eval_size, eval_seed)
    }
}

impl StochasticProblem for SigmoidSvmProblem {
    type Sample = SvmSample;

    fn dim(&self) -> usize {
        self.dim
    }

    fn draw_sample(&self, rng: &mut SeededRng) -> SvmSample {
        let indices: Vec<u32> = rng
            .distinct_indices(self.dim, self.nonzeros)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        let values: Vec<f64> = (0..self.nonzeros).map(|_| rng.uniform01()).collect();
        let margin: f64 = indices
            .iter()
            .zip(&values)
            .map(|(&i, &v)| self.separator[i as usize] * v)
            .sum();
        let label = if margin >= 0.0 { 1.0 } else { -1.0 };
        SvmSample { indices, values, label }
    }

    fn stochastic_gradient(&self, x: &Vector, sample: &SvmSample) -> Vector {
        let t = sample.label * sample.dot(x);
        let tanh_t = t.tanh();
        // d/dx [1 - tanh(v <x,u>)] = -v sech^2(v <x,u>) u
        let coef = -sample.label * (1.0 - tanh_t * tanh_t);
        let mut grad = x * (2.0 * self.lambda_reg);
        for (&i, &v) in sample.indices.iter().zip(&sample.values) {
            grad[i as usize] += coef * v;
        }
        grad
    }

    fn sample_loss(&self, x: &Vector, sample: &SvmSample) -> f64 {
        1.0 - (sample.label * sample.dot(x)).tanh() + self.lambda_reg * x.norm_squared()
    }
}
