//! Randomly perturbed diagonal quadratic benchmark.
//!
//! The sampled objective is `F(x, xi) = 0.5 x^T (A + A diag(xi)) x - b^T x`
//! with `A` diagonal, `xi` uniform on `[-w, w]^n`, diagonal entries of `A`
//! drawn uniformly from a finite value set, and `b` uniform on `[0, 1]^n`.
//! The perturbation has zero mean, so the expected gradient is `A x - b` and
//! the minimizer is `x* = A^{-1} b`. The spread of the value set controls the
//! condition number.

use crate::linalg::Vector;
use crate::oracle::StochasticProblem;
use crate::rng::SeededRng;

#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    diag: Vector,
    b: Vector,
    half_width: f64,
}

impl QuadraticProblem {
    /// Draws a fresh instance: diagonal entries uniformly from `values`,
    /// right-hand side uniform on `[0, 1]^n`.
    pub fn generate(dim: usize, values: &[f64], seed: u64) -> Self {
        assert!(!values.is_empty(), "value set must be non-empty");
        assert!(values.iter().all(|&v| v > 0.0), "value set must be positive");
        let mut rng = SeededRng::new(seed);
        let diag = Vector::from_fn(dim, |_, _| values[rng.index(values.len())]);
        let b = Vector::from_fn(dim, |_, _| rng.uniform01());
        Self { diag, b, half_width: 0.1 }
    }

    /// Builds an instance from explicit data; used by tests and presets.
    pub fn from_parts(diag: Vector, b: Vector, half_width: f64) -> Self {
        assert_eq!(diag.len(), b.len());
        assert!(diag.iter().all(|&d| d > 0.0), "diagonal must be positive");
        assert!(half_width >= 0.0);
        Self { diag, b, half_width }
    }

    pub fn diag(&self) -> &Vector {
        &self.diag
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }

    pub fn perturbation_half_width(&self) -> f64 {
        self.half_width
    }

    /// `A x - b`; the perturbation has zero mean.
    pub fn exact_gradient_at(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.dim(), |i, _| self.diag[i] * x[i] - self.b[i])
    }

    /// Exact per-sample gradient variance `E||G - grad f||^2` at `x`:
    /// `Var(xi_i) = w^2/3` per component, so the total is
    /// `(w^2/3) * ||A x||^2`.
    pub fn gradient_variance_at(&self, x: &Vector) -> f64 {
        let ax_sq: f64 = (0..self.dim()).map(|i| (self.diag[i] * x[i]).powi(2)).sum();
        self.half_width * self.half_width / 3.0 * ax_sq
    }
}

impl StochasticProblem for QuadraticProblem {
    type Sample = Vector;

    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn draw_sample(&self, rng: &mut SeededRng) -> Vector {
        let w = self.half_width;
        Vector::from_fn(self.dim(), |_, _| rng.uniform(-w, w))
    }

    fn stochastic_gradient(&self, x: &Vector, xi: &Vector) -> Vector {
        Vector::from_fn(self.dim(), |i, _| self.diag[i] * (1.0 + xi[i]) * x[i] - self.b[i])
    }

    fn sample_loss(&self, x: &Vector, xi: &Vector) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            acc += 0.5 * self.diag[i] * (1.0 + xi[i]) * x[i] * x[i] - self.b[i] * x[i];
        }
        acc
    }

    fn exact_gradient(&self, x: &Vector) -> Option<Vector> {
        Some(self.exact_gradient_at(x))
    }

    fn objective(&self, x: &Vector) -> Option<f64> {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            acc += 0.5 * self.diag[i] * x[i] * x[i] - self.b[i] * x[i];
        }
        Some(acc)
    }

    fn known_solution(&self) -> Option<Vector> {
        Some(Vector::from_fn(self.dim(), |i, _| self.b[i] / self.diag[i]))
    }
}

/// Noise-free diagonal quadratic: the degenerate sigma = 0 case used to test
/// solver behavior against classical deterministic gradient descent.
#[derive(Debug, Clone)]
pub struct DeterministicQuadratic {
    diag: Vector,
    b: Vector,
}

impl DeterministicQuadratic {
    pub fn new(diag: Vector, b: Vector) -> Self {
        assert_eq!(diag.len(), b.len());
        assert!(diag.iter().all(|&d| d > 0.0), "diagonal must be positive");
        Self { diag, b }
    }
}

impl StochasticProblem for DeterministicQuadratic {
    type Sample = ();

    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn draw_sample(&self, _rng: &mut SeededRng) -> () {}

    fn stochastic_gradient(&self, x: &Vector, _sample: &()) -> Vector {
        Vector::from_fn(self.dim(), |i, _| self.diag[i] * x[i] - self.b[i])
    }

    fn sample_loss(&self, x: &Vector, _sample: &()) -> f64 {
        (0..self.dim())
            .map(|i| 0.5 * self.diag[i] * x[i] * x[i] - self.b[i] * x[i])
            .sum()
    }

    fn exact_gradient(&self, x: &Vector) -> Option<Vector> {
        Some(self.stochastic_gradient(x, &()))
    }

    fn known_solution(&self) -> Option<Vector> {
        Some(Vector::from_fn(self.dim(), |i, _| self.b[i] / self.diag[i]))
    }
}
