//! The stochastic first-order oracle abstraction and benchmark problems.
//!
//! A [`StochasticProblem`] hands out unbiased noisy gradients `G(x, xi)` one
//! random draw at a time; the solvers only ever see mini-batch averages of
//! those. Every individual gradient evaluation is tallied by an
//! [`OracleCounter`] so runs can report their oracle-call budget exactly.

mod lipschitz;
mod quadratic;
mod spec;
mod svm;

pub use lipschitz::{estimate_lipschitz, LipschitzProbe};
pub use quadratic::{DeterministicQuadratic, QuadraticProblem};
pub use spec::{BuiltProblem, ProblemSpec};
pub use svm::{SigmoidSvmProblem, SvmSample};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::rng::SeededRng;

/// Stream index used by fixed-seed gradient-norm evaluation.
pub const EVAL_STREAM: u64 = 4;

/// A problem observable only through noisy gradient draws.
///
/// Implementations must be unbiased — the expectation of
/// `stochastic_gradient` over fresh samples equals the true gradient — with
/// bounded per-sample variance. Instances are immutable after construction
/// and safe to share across threads.
pub trait StochasticProblem {
    /// One realization of the oracle's randomness.
    type Sample;

    fn dim(&self) -> usize;

    /// Draws one sample from the oracle's distribution.
    fn draw_sample(&self, rng: &mut SeededRng) -> Self::Sample;

    /// The noisy gradient `G(x, xi)`.
    fn stochastic_gradient(&self, x: &Vector, sample: &Self::Sample) -> Vector;

    /// The sampled objective `F(x, xi)` whose gradient the oracle returns;
    /// used by finite-difference validation.
    fn sample_loss(&self, x: &Vector, sample: &Self::Sample) -> f64;

    /// Closed-form gradient of the expected objective, when one exists.
    fn exact_gradient(&self, _x: &Vector) -> Option<Vector> {
        None
    }

    /// Expected objective value, when evaluable.
    fn objective(&self, _x: &Vector) -> Option<f64> {
        None
    }

    /// A known stationary point, enabling distance-based termination rules.
    fn known_solution(&self) -> Option<Vector> {
        None
    }
}

/// Tally of individual oracle gradient evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleCounter {
    count: u64,
}

impl OracleCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `n` oracle calls.
    pub fn record(&mut self, n: usize) {
        self.count += n as u64;
    }

    pub fn total(&self) -> u64 {
        self.count
    }
}

/// A non-empty batch of i.i.d. samples drawn from one stream.
#[derive(Debug, Clone)]
pub struct SampleBatch<S> {
    samples: Vec<S>,
}

impl<S> SampleBatch<S> {
    /// Draws `size >= 1` samples from `rng`.
    pub fn draw<P>(problem: &P, rng: &mut SeededRng, size: usize) -> Self
    where
        P: StochasticProblem<Sample = S>,
    {
        assert!(size >= 1, "batch size must be at least 1");
        let samples = (0..size).map(|_| problem.draw_sample(rng)).collect();
        Self { samples }
    }

    /// Wraps existing samples; panics on an empty list.
    pub fn from_samples(samples: Vec<S>) -> Self {
        assert!(!samples.is_empty(), "sample batch must be non-empty");
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }
}

/// Mini-batch gradient `(1/m) * sum_i G(x, xi_i)`, advancing `counter` by the
/// batch length.
pub fn minibatch_gradient<P: StochasticProblem>(
    problem: &P,
    x: &Vector,
    batch: &SampleBatch<P::Sample>,
    counter: &mut OracleCounter,
) -> Result<Vector> {
    if x.len() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), got: x.len() });
    }
    let mut acc = Vector::zeros(problem.dim());
    for sample in batch.samples() {
        acc += problem.stochastic_gradient(x, sample);
    }
    counter.record(batch.len());
    Ok(acc / batch.len() as f64)
}

/// Re-evaluates the batch used at `x_k` at a new point: the gradient
/// difference constructions require the *same* sample set at both endpoints,
/// so this costs another `m` oracle calls on purpose.
pub fn gradient_same_batch<P: StochasticProblem>(
    problem: &P,
    x_next: &Vector,
    batch: &SampleBatch<P::Sample>,
    counter: &mut OracleCounter,
) -> Result<Vector> {
    minibatch_gradient(problem, x_next, batch, counter)
}

/// Averages `size` fresh single-sample gradients drawn from a dedicated
/// stream of `seed`. Repeated calls with equal `(x, size, seed)` return
/// identical output, which makes cross-algorithm gradient-norm comparisons
/// paired.
pub fn monte_carlo_gradient<P: StochasticProblem>(
    problem: &P,
    x: &Vector,
    size: usize,
    seed: u64,
) -> Vector {
    assert!(size >= 1, "evaluation size must be at least 1");
    let mut rng = SeededRng::with_stream(seed, EVAL_STREAM);
    let mut acc = Vector::zeros(problem.dim());
    for _ in 0..size {
        let sample = problem.draw_sample(&mut rng);
        acc += problem.stochastic_gradient(x, &sample);
    }
    acc / size as f64
}

/// Maximum relative error between the analytic per-sample gradient and a
/// central difference of the per-sample loss with step `h`. Relative means
/// against `max(1, |g_i|)` componentwise.
pub fn finite_difference_check<P: StochasticProblem>(
    problem: &P,
    x: &Vector,
    sample: &P::Sample,
    h: f64,
) -> f64 {
    assert!(h > 0.0, "finite-difference step must be positive");
    let grad = problem.stochastic_gradient(x, sample);
    let mut worst: f64 = 0.0;
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = problem.sample_loss(&probe, sample);
        probe[i] = x[i] - h;
        let down = problem.sample_loss(&probe, sample);
        probe[i] = x[i];
        let diff = (up - down) / (2.0 * h);
        let rel = (diff - grad[i]).abs() / grad[i].abs().max(1.0);
        worst = worst.max(rel);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn counter_accumulates_batch_lengths() {
        let mut counter = OracleCounter::new();
        counter.record(5);
        counter.record(3);
        assert_eq!(counter.total(), 8);
    }

    #[test]
    #[should_panic(expected = "non-empty")]
    fn empty_batch_rejected() {
        let _ = SampleBatch::<()>::from_samples(vec![]);
    }

    #[test]
    fn minibatch_of_identical_samples_is_single_gradient() {
        let p = QuadraticProblem::generate(4, &[0.1, 1.0], 9);
        let mut rng = SeededRng::new(5);
        let xi = p.draw_sample(&mut rng);
        let x = Vector::from_column_slice(&[1.0, -2.0, 0.5, 3.0]);
        let single = p.stochastic_gradient(&x, &xi);
        let batch = SampleBatch::from_samples(vec![xi.clone(), xi.clone(), xi]);
        let mut counter = OracleCounter::new();
        let avg = minibatch_gradient(&p, &x, &batch, &mut counter).unwrap();
        assert_abs_diff_eq!(avg, single, epsilon = 1e-14);
        assert_eq!(counter.total(), 3);
    }

    #[test]
    fn minibatch_zero_perturbation_reduces_to_exact() {
        let p = QuadraticProblem::from_parts(
            Vector::from_column_slice(&[1.0, 2.0]),
            Vector::from_column_slice(&[1.0, 1.0]),
            0.1,
        );
        let x = Vector::from_column_slice(&[1.0, 1.0]);
        let batch = SampleBatch::from_samples(vec![Vector::zeros(2)]);
        let mut counter = OracleCounter::new();
        let g = minibatch_gradient(&p, &x, &batch, &mut counter).unwrap();
        assert_abs_diff_eq!(g, Vector::from_column_slice(&[0.0, 1.0]), epsilon = 1e-15);
    }

    #[test]
    fn minibatch_dimension_mismatch() {
        let p = QuadraticProblem::generate(3, &[1.0], 1);
        let batch = SampleBatch::from_samples(vec![Vector::zeros(3)]);
        let mut counter = OracleCounter::new();
        let err = minibatch_gradient(&p, &Vector::zeros(2), &batch, &mut counter);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        assert_eq!(counter.total(), 0);
    }

    #[test]
    fn same_batch_at_same_point_matches() {
        let p = QuadraticProblem::generate(6, &[0.1, 1.0, 10.0], 17);
        let mut rng = SeededRng::new(2);
        let batch = SampleBatch::draw(&p, &mut rng, 5);
        let x = Vector::from_fn(6, |i, _| i as f64 - 2.0);
        let mut counter = OracleCounter::new();
        let g1 = minibatch_gradient(&p, &x, &batch, &mut counter).unwrap();
        let g2 = gradient_same_batch(&p, &x, &batch, &mut counter).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(counter.total(), 10);
    }

    #[test]
    fn same_batch_difference_has_closed_form() {
        // For the quadratic, averaging over a fixed batch gives
        // G(x) = (A + A diag(mean xi)) x - b, so the difference of the two
        // batch gradients is (A + A diag(mean xi)) (x' - x).
        let n = 5;
        let p = QuadraticProblem::generate(n, &[0.1, 1.0, 10.0], 33);
        let mut rng = SeededRng::new(8);
        let batch = SampleBatch::draw(&p, &mut rng, 7);
        let x = Vector::from_fn(n, |i, _| 0.3 * i as f64);
        let x_next = Vector::from_fn(n, |i, _| 0.3 * i as f64 + 0.1);
        let mut counter = OracleCounter::new();
        let g = minibatch_gradient(&p, &x, &batch, &mut counter).unwrap();
        let g_next = gradient_same_batch(&p, &x_next, &batch, &mut counter).unwrap();

        let mut mean_xi = Vector::zeros(n);
        for xi in batch.samples() {
            mean_xi += xi;
        }
        mean_xi /= batch.len() as f64;
        let step = &x_next - &x;
        let expected =
            Vector::from_fn(n, |i, _| p.diag()[i] * (1.0 + mean_xi[i]) * step[i]);
        assert_abs_diff_eq!(g_next - g, expected, epsilon = 1e-12);
    }

    #[test]
    fn monte_carlo_gradient_is_deterministic_per_seed() {
        let p = QuadraticProblem::generate(4, &[0.5, 2.0], 3);
        let x = Vector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        let a = monte_carlo_gradient(&p, &x, 500, 99);
        let b = monte_carlo_gradient(&p, &x, 500, 99);
        assert_eq!(a, b);
        let c = monte_carlo_gradient(&p, &x, 500, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn finite_difference_exact_for_linear_loss() {
        struct Linear {
            b: Vector,
        }
        impl StochasticProblem for Linear {
            type Sample = ();
            fn dim(&self) -> usize {
                self.b.len()
            }
            fn draw_sample(&self, _rng: &mut SeededRng) -> () {}
            fn stochastic_gradient(&self, _x: &Vector, _s: &()) -> Vector {
                self.b.clone()
            }
            fn sample_loss(&self, x: &Vector, _s: &()) -> f64 {
                self.b.dot(x)
            }
        }
        let p = Linear { b: Vector::from_column_slice(&[1.0, -2.0, 0.25]) };
        let x = Vector::from_column_slice(&[0.3, 0.7, -1.1]);
        for h in [1e-2, 1e-4, 1e-6] {
            assert!(finite_difference_check(&p, &x, &(), h) < 1e-9);
        }
    }
}
