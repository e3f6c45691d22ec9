//! Randomized stopping distribution and oracle-complexity formulas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::solvers::StepsizeSchedule;
use crate::updaters::CbbConfig;

/// Problem- and updater-level constants feeding the stopping distribution and
/// the batch-size/budget planning formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConstants {
    /// Gradient Lipschitz constant `L` of the expected objective.
    pub lipschitz: f64,
    /// Oracle noise level `sigma` (per-sample gradient standard deviation).
    pub noise_level: f64,
    /// Lower uniform eigenvalue bound `m` of the step operator
    /// `B_k^{-1} + zeta_k I`.
    pub op_lower: f64,
    /// Upper uniform eigenvalue bound `M` of the step operator.
    pub op_upper: f64,
    /// Optimality-gap estimate `f(x_1) - f_low`.
    pub optimality_gap: f64,
    /// Problem-independent positive constant of the batch-size rule.
    pub batch_tuning: f64,
}

impl TheoryConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lipschitz", self.lipschitz),
            ("noise_level", self.noise_level),
            ("op_lower", self.op_lower),
            ("op_upper", self.op_upper),
            ("optimality_gap", self.optimality_gap),
            ("batch_tuning", self.batch_tuning),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("theory constant {name} must be positive, got {v}")));
            }
        }
        if self.op_lower > self.op_upper {
            return Err(Error::InvalidConfig("need op_lower <= op_upper".into()));
        }
        Ok(())
    }

    /// Analytic step-operator bounds of a cyclic-BB run with safeguard
    /// `zeta`: the scalar stays in `[min(lambda_min,1), max(lambda_max,1)]`.
    pub fn scbb_operator_bounds(cbb: &CbbConfig, zeta: f64) -> (f64, f64) {
        (cbb.lambda_min.min(1.0) + zeta, cbb.lambda_max.max(1.0) + zeta)
    }

    /// Analytic step-operator bounds of a damped-BFGS run: the spectrum of
    /// `B_k` is floored at the shift, so `B_k^{-1} + zeta I` lies between
    /// `zeta` and `zeta + 1/shift`.
    pub fn sdbfgs_operator_bounds(shift: f64, zeta: f64) -> (f64, f64) {
        (zeta, zeta + 1.0 / shift)
    }

    /// Step-operator bounds of plain SGD (identity curvature).
    pub fn sgd_operator_bounds(zeta: f64) -> (f64, f64) {
        (1.0 + zeta, 1.0 + zeta)
    }
}

/// The stopping distribution `P_R` over iteration indices `{1, ..., N}` with
/// weights `w_k = m alpha_k - L M^2 alpha_k^2 / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedStopping {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

impl RandomizedStopping {
    pub fn horizon(&self) -> u64 {
        self.weights.len() as u64
    }

    /// Normalized probability masses, summing to one within 1e-12.
    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }
}

/// Builds the stopping distribution for `horizon` iterations.
///
/// Admissibility requires every stepsize to satisfy
/// `alpha_k <= 2m / (L M^2)` (nonnegative weight), with strict inequality —
/// a strictly positive weight — somewhere. Violations are refused rather
/// than projected, so misconfigured stepsizes surface immediately.
pub fn build_pr(
    stepsize: &StepsizeSchedule,
    horizon: u64,
    constants: &TheoryConstants,
) -> Result<RandomizedStopping> {
    constants.validate()?;
    if horizon < 1 {
        return Err(Error::InvalidConfig("stopping horizon must be at least 1".into()));
    }
    let m = constants.op_lower;
    let lm2 = constants.lipschitz * constants.op_upper * constants.op_upper;
    let mut weights = Vec::with_capacity(horizon as usize);
    let mut cumulative = Vec::with_capacity(horizon as usize);
    let mut total = 0.0;
    for k in 1..=horizon {
        let alpha = stepsize.alpha(k);
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidStepsize(format!("alpha_{k} = {alpha} is not positive")));
        }
        let w = m * alpha - 0.5 * lm2 * alpha * alpha;
        if w < 0.0 {
            return Err(Error::InvalidStepsize(format!(
                "alpha_{k} = {alpha} exceeds the admissible bound 2m/(LM^2) = {}",
                2.0 * m / lm2
            )));
        }
        total += w;
        weights.push(w);
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(Error::InvalidStepsize(
            "all stopping weights vanish; at least one stepsize must be strictly inside the bound".into(),
        ));
    }
    Ok(RandomizedStopping { weights, cumulative, total })
}

/// Draws a stopping index in `1..=N` distributed per the weights.
pub fn sample_stopping_index(stopping: &RandomizedStopping, rng: &mut SeededRng) -> u64 {
    let u = rng.uniform01() * stopping.total;
    match stopping.cumulative.iter().position(|&c| u < c) {
        Some(idx) => idx as u64 + 1,
        None => stopping.horizon(),
    }
}

/// The constant batch size matched to a total oracle budget:
/// `ceil(min{budget, max{1, (sigma/L) sqrt(budget / d)}})` with `d` the
/// problem-independent tuning constant.
pub fn complexity_batch_size(budget: u64, constants: &TheoryConstants) -> u64 {
    assert!(budget >= 1);
    let suggested = constants.noise_level / constants.lipschitz
        * (budget as f64 / constants.batch_tuning).sqrt();
    (budget as f64).min(suggested.max(1.0)).ceil() as u64
}

/// Oracle budget sufficient for an expected squared gradient norm below
/// `epsilon`:
///
/// ```text
/// budget = ceil(max{ C1^2/eps^2 + 4 C2/eps, sigma^2 / (L^2 d) })
/// C1 = 4 sigma M^2 Df / (m^2 sqrt(d)) + sigma L sqrt(d)
/// C2 = 4 L M^2 Df / m^2
/// ```
pub fn sfo_budget(epsilon: f64, constants: &TheoryConstants) -> u64 {
    assert!(epsilon > 0.0);
    let m2 = constants.op_lower * constants.op_lower;
    let msq = constants.op_upper * constants.op_upper;
    let sqrt_d = constants.batch_tuning.sqrt();
    let c1 = 4.0 * constants.noise_level * msq * constants.optimality_gap / (m2 * sqrt_d)
        + constants.noise_level * constants.lipschitz * sqrt_d;
    let c2 = 4.0 * constants.lipschitz * msq * constants.optimality_gap / m2;
    let gradient_term = c1 * c1 / (epsilon * epsilon) + 4.0 * c2 / epsilon;
    let noise_term = constants.noise_level * constants.noise_level
        / (constants.lipschitz * constants.lipschitz * constants.batch_tuning);
    gradient_term.max(noise_term).ceil() as u64
}
