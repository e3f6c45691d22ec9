//! Curvature-approximation update strategies.
//!
//! Four ways to produce the next `B_{k+1}` from step data gathered on one
//! sample batch:
//!
//! * [`sdbfgs_update`] — damped BFGS with a spectral shift. The damping
//!   replaces the gradient difference by a convex combination
//!   `r = theta * y + (1 - theta) * B s` so the curvature pairing `s^T r`
//!   stays positive, and the added `delta * I` floors the spectrum at
//!   `delta` regardless of the incoming data. Safe for nonconvex problems.
//! * [`res_update`] — the shifted BFGS baseline. Keeps the raw gradient
//!   difference; positive definiteness is only guaranteed under strong
//!   convexity, so an indefinite outcome is detected and reported.
//! * [`scbb_update`] — cyclic Barzilai-Borwein scalar: `B = lambda^{-1} I`
//!   with `lambda` refreshed from a secant fit every `q`-th iteration and
//!   clamped to `[lambda_min, lambda_max]`; a nonpositive curvature pairing
//!   falls back to the gradient-descent scalar `lambda = 1`.
//! * [`identity_update`] — the fixed identity, which reduces the iterate
//!   update to plain SGD.
//!
//! All operations are pure: state in, new state out. The caller owns the
//! batch bookkeeping and supplies the gradient-difference vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CurvatureApprox, SpdMatrix, Vector};

/// Damped-BFGS parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DampedBfgsConfig {
    /// Spectral shift added on every update; also the guaranteed lower
    /// eigenvalue bound of the result.
    pub shift: f64,
    /// Steps with `||s|| <= skip_tol * max(1, ||x||)` skip the update.
    pub skip_tol: f64,
}

impl Default for DampedBfgsConfig {
    fn default() -> Self {
        Self { shift: 1e-3, skip_tol: 1e-14 }
    }
}

/// Shifted-BFGS baseline parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResConfig {
    /// Spectral shift added on every update.
    pub shift: f64,
    /// Constant safeguard used as `zeta_k` by runs of this baseline.
    pub safeguard: f64,
    /// Same skip rule as the damped update.
    pub skip_tol: f64,
}

impl Default for ResConfig {
    fn default() -> Self {
        Self { shift: 1e-3, safeguard: 1e-4, skip_tol: 1e-14 }
    }
}

/// Which secant quotient the cyclic-BB scalar refresh uses.
///
/// The long quotient is the classical BB stepsize and the default; the short
/// quotient is the more conservative alternative. On badly conditioned
/// quadratics the short step can stall the sweep across the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BbVariant {
    /// `s^T y / ||y||^2` — the smaller of the two quotients.
    ShortStep,
    /// `||s||^2 / s^T y`.
    LongStep,
}

/// Cyclic-BB parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CbbConfig {
    /// Cycle length: the scalar is refreshed at iterations divisible by `q`.
    pub cycle: u64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub variant: BbVariant,
}

impl Default for CbbConfig {
    fn default() -> Self {
        Self { cycle: 5, lambda_min: 1e-6, lambda_max: 1e8, variant: BbVariant::LongStep }
    }
}

impl CbbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cycle < 1 {
            return Err(Error::InvalidConfig("cyclic-BB cycle length must be >= 1".into()));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < self.lambda_max) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < lambda_min < lambda_max, got [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        Ok(())
    }
}

/// Mutable state of a cyclic-BB run.
///
/// `lambda` always stays within `[min(lambda_min, 1), max(lambda_max, 1)]`,
/// which is what makes the step operator uniformly bounded with no safeguard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbbState {
    pub lambda: f64,
    /// Iteration index of the *next* update call, starting at 1.
    pub step_index: u64,
    /// Cycle boundaries where the secant quotient was accepted.
    pub bb_steps: u64,
    /// Cycle boundaries that fell back to the gradient-descent scalar.
    pub fallback_steps: u64,
}

impl CbbState {
    /// Fresh state: `lambda = 1` reproduces an SGD-like first cycle.
    pub fn new() -> Self {
        Self { lambda: 1.0, step_index: 1, bb_steps: 0, fallback_steps: 0 }
    }

    /// Whether the *current* iteration is a cycle boundary, i.e. whether the
    /// next [`scbb_update`] call will consume a gradient difference.
    pub fn at_cycle_boundary(&self, config: &CbbConfig) -> bool {
        self.step_index % config.cycle == 0
    }

    /// Fraction of cycle boundaries that kept the secant quotient, if any
    /// boundary was passed.
    pub fn bb_fraction(&self) -> Option<f64> {
        let total = self.bb_steps + self.fallback_steps;
        (total > 0).then(|| self.bb_steps as f64 / total as f64)
    }
}

impl Default for CbbState {
    fn default() -> Self {
        Self::new()
    }
}

/// Damping coefficient of the damped BFGS update.
///
/// Returns 1 when the raw curvature pairing `s^T y` already clears
/// `0.2 s^T B s`, otherwise the convex-combination weight
/// `0.8 s^T B s / (s^T B s - s^T y)` that pins the damped pairing at exactly
/// `0.2 s^T B s`.
pub fn damping_coefficient(s: &Vector, y_hat: &Vector, b: &SpdMatrix) -> f64 {
    let sbs = b.quadratic_form(s);
    debug_assert!(sbs > 0.0, "s^T B s must be positive for a damping decision");
    let sy = s.dot(y_hat);
    if sy >= 0.2 * sbs {
        1.0
    } else {
        0.8 * sbs / (sbs - sy)
    }
}

fn step_too_small(s: &Vector, x: &Vector, skip_tol: f64) -> bool {
    s.norm() <= skip_tol * x.norm().max(1.0)
}

/// One damped-BFGS update:
///
/// ```text
/// r = theta * y + (1 - theta) * B s
/// B+ = B + r r^T / (s^T r) - B s s^T B / (s^T B s) + delta * I
/// ```
///
/// The result satisfies `B+ >= delta * I` and the modified secant identity
/// `B+ s = r + delta s` for every accepted step. `x` is the current iterate,
/// used only for the relative skip rule; [`Error::DegenerateStep`] tells the
/// caller to keep `B` unchanged.
pub fn sdbfgs_update(
    b: &SpdMatrix,
    s: &Vector,
    y_hat: &Vector,
    x: &Vector,
    config: &DampedBfgsConfig,
) -> Result<SpdMatrix> {
    if step_too_small(s, x, config.skip_tol) {
        return Err(Error::DegenerateStep);
    }
    let theta = damping_coefficient(s, y_hat, b);
    let bs = b.mul_vec(s);
    let r = y_hat * theta + &bs * (1.0 - theta);
    let sr = s.dot(&r);
    let sbs = s.dot(&bs);
    debug_assert!(sr > 0.0, "damped curvature pairing must be positive");

    let mut next = b.as_matrix().clone();
    // rank-two correction plus spectral shift
    next.ger(1.0 / sr, &r, &r, 1.0);
    next.ger(-1.0 / sbs, &bs, &bs, 1.0);
    for i in 0..next.nrows() {
        next[(i, i)] += config.shift;
    }
    Ok(SpdMatrix::resymmetrized(next))
}

/// One update of the shifted-BFGS baseline:
///
/// ```text
/// B+ = B + y y^T / (s^T y) - B s s^T B / (s^T B s) + delta * I
/// ```
///
/// The raw gradient difference keeps no sign guarantee, so the result is
/// factor-checked: an indefinite or zero-curvature outcome returns
/// [`Error::CurvatureBreakdown`] and the caller resets its curvature state.
pub fn res_update(
    b: &SpdMatrix,
    s: &Vector,
    y_hat: &Vector,
    x: &Vector,
    config: &ResConfig,
) -> Result<SpdMatrix> {
    if step_too_small(s, x, config.skip_tol) {
        return Err(Error::DegenerateStep);
    }
    let sy = s.dot(y_hat);
    if sy == 0.0 {
        return Err(Error::CurvatureBreakdown("zero curvature pairing s^T y".into()));
    }
    let bs = b.mul_vec(s);
    let sbs = s.dot(&bs);

    let mut next = b.as_matrix().clone();
    next.ger(1.0 / sy, y_hat, y_hat, 1.0);
    next.ger(-1.0 / sbs, &bs, &bs, 1.0);
    for i in 0..next.nrows() {
        next[(i, i)] += config.shift;
    }
    let next = SpdMatrix::resymmetrized(next);
    if next.as_matrix().clone().cholesky().is_none() {
        return Err(Error::CurvatureBreakdown("shifted BFGS update is indefinite".into()));
    }
    Ok(next)
}

/// Advances the cyclic-BB state by one iteration.
///
/// Off cycle boundaries the scalar carries over and `s`, `y` are ignored. At
/// a boundary with positive curvature pairing the secant quotient (clamped to
/// `[lambda_min, lambda_max]`) is installed; otherwise the state falls back
/// to `lambda = 1`. The step index always advances.
pub fn scbb_update(mut state: CbbState, s: &Vector, y: &Vector, config: &CbbConfig) -> CbbState {
    debug_assert!(state.step_index >= 1);
    if state.step_index % config.cycle == 0 {
        let sy = s.dot(y);
        if sy > 0.0 {
            let quotient = match config.variant {
                BbVariant::ShortStep => sy / y.norm_squared(),
                BbVariant::LongStep => s.norm_squared() / sy,
            };
            state.lambda = quotient.clamp(config.lambda_min, config.lambda_max);
            state.bb_steps += 1;
        } else {
            state.lambda = 1.0;
            state.fallback_steps += 1;
        }
    }
    state.step_index += 1;
    state
}

/// The identity curvature approximation: with a zero safeguard the iterate
/// update reduces exactly to `x - alpha G`.
pub fn identity_update() -> CurvatureApprox {
    CurvatureApprox::ScaledIdentity(1.0)
}
