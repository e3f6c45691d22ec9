//! Gradient-Lipschitz estimation for problems without a closed form.
//!
//! Constant-stepsize policies need a curvature scale. This probe estimates
//! the largest per-sample Hessian eigenvalue seen along the segment the early
//! iterates traverse: it walks geometric shrinkages of the starting point
//! toward the origin and, at each waypoint, runs a few power iterations per
//! sampled draw using central-difference Hessian-vector products of the
//! stochastic gradient. The maximum over waypoints and samples is returned.
//!
//! Oracle calls made here are setup cost and are not charged to any run's
//! oracle-call tally.

use crate::linalg::Vector;
use crate::oracle::StochasticProblem;
use crate::rng::SeededRng;

/// Probe configuration; defaults are sized for the benchmark problems.
#[derive(Debug, Clone)]
pub struct LipschitzProbe {
    /// Samples probed per waypoint.
    pub samples_per_point: usize,
    /// Number of geometric halvings of the starting point. The waypoint list
    /// is `x0, x0/2, ..., x0/2^levels`, ending near the origin.
    pub shrink_levels: u32,
    /// Power iterations per (waypoint, sample) pair.
    pub power_iterations: usize,
    /// Central-difference step for Hessian-vector products.
    pub fd_step: f64,
}

impl Default for LipschitzProbe {
    fn default() -> Self {
        Self { samples_per_point: 24, shrink_levels: 12, power_iterations: 4, fd_step: 1e-4 }
    }
}

/// Estimates the gradient Lipschitz constant of the sampled objective along
/// the shrinking segment from `x0` to the origin. Returns at least `floor`.
pub fn estimate_lipschitz<P: StochasticProblem>(
    problem: &P,
    x0: &Vector,
    rng: &mut SeededRng,
    probe: &LipschitzProbe,
    floor: f64,
) -> f64 {
    assert!(floor > 0.0, "Lipschitz floor must be positive");
    let n = problem.dim();
    let mut best = floor;
    for level in 0..=probe.shrink_levels {
        let point = x0 * 0.5f64.powi(level as i32);
        for _ in 0..probe.samples_per_point {
            let sample = problem.draw_sample(rng);
            let mut direction = Vector::from_fn(n, |_, _| rng.uniform(-1.0, 1.0));
            let norm = direction.norm();
            if norm == 0.0 {
                continue;
            }
            direction /= norm;
            for _ in 0..probe.power_iterations {
                let hv = hessian_vec(problem, &point, &sample, &direction, probe.fd_step);
                let hv_norm = hv.norm();
                if !hv_norm.is_finite() || hv_norm < 1e-12 {
                    break;
                }
                best = best.max(hv_norm);
                direction = hv / hv_norm;
            }
        }
    }
    best
}

fn hessian_vec<P: StochasticProblem>(
    problem: &P,
    x: &Vector,
    sample: &P::Sample,
    v: &Vector,
    h: f64,
) -> Vector {
    let plus = problem.stochastic_gradient(&(x + v * h), sample);
    let minus = problem.stochastic_gradient(&(x - v * h), sample);
    (plus - minus) / (2.0 * h)
}
