//! Driver loops and run configuration.
//!
//! Both drivers iterate
//! `x_{k+1} = x_k - alpha_k (B_k^{-1} + zeta_k I) G_k`
//! with the configured curvature updater refreshing `B_k` each iteration:
//!
//! * [`run_sqn`] runs until a relative-distance termination rule fires (when
//!   the problem exposes a known stationary point) or the iteration cap is
//!   reached. Stepsizes should be square-summable but not summable for the
//!   asymptotic guarantees to apply; a harmonic `a/(b+k)` schedule does it.
//! * [`run_rsqn`] draws the number of iterations `R` from the randomized
//!   stopping distribution over `{1, ..., N}` and returns the iterate `x_R`;
//!   constant stepsizes are fine here.
//!
//! Per-iteration oracle cost depends on the updater: the BFGS-family updates
//! re-evaluate the batch at the new point every iteration (`2 m` calls per
//! iteration), the cyclic-BB update only at cycle boundaries
//! (`m (1 + 1/q)` amortized), and SGD spends exactly `m`.

mod stopping;

pub use stopping::{
    build_pr, complexity_batch_size, sample_stopping_index, sfo_budget, RandomizedStopping,
    TheoryConstants,
};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_inverse_plus_shift, dense_inverse_plus_shift, min_eigenvalue, CurvatureApprox, SpdMatrix,
    Vector,
};
use crate::oracle::{
    gradient_same_batch, minibatch_gradient, monte_carlo_gradient, OracleCounter, SampleBatch,
    StochasticProblem,
};
use crate::rng::{streams, SeededRng};
use crate::updaters::{
    res_update, scbb_update, sdbfgs_update, CbbConfig, CbbState, DampedBfgsConfig, ResConfig,
};

/// Stepsize sequence `alpha_k`, indexed from `k = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepsizeSchedule {
    /// `alpha_k = a / (b + k)`: diverging sum, converging sum of squares.
    Harmonic { a: f64, b: f64 },
    /// Constant stepsize, the usual choice under randomized stopping.
    Constant { alpha: f64 },
    /// Arbitrary positive finite-horizon sequence.
    Explicit { values: Vec<f64> },
}

impl StepsizeSchedule {
    /// Stepsize for iteration `k >= 1`.
    pub fn alpha(&self, k: u64) -> f64 {
        debug_assert!(k >= 1);
        match self {
            StepsizeSchedule::Harmonic { a, b } => a / (b + k as f64),
            StepsizeSchedule::Constant { alpha } => *alpha,
            StepsizeSchedule::Explicit { values } => values[(k - 1) as usize],
        }
    }

    fn validate(&self, horizon: u64) -> Result<()> {
        match self {
            StepsizeSchedule::Harmonic { a, b } => {
                if !(*a > 0.0 && *b >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "harmonic schedule needs a > 0 and b >= 0, got a={a}, b={b}"
                    )));
                }
            }
            StepsizeSchedule::Constant { alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidConfig(format!("stepsize must be positive, got {alpha}")));
                }
            }
            StepsizeSchedule::Explicit { values } => {
                if (values.len() as u64) < horizon {
                    return Err(Error::InvalidConfig(format!(
                        "explicit schedule has {} entries but the horizon is {horizon}",
                        values.len()
                    )));
                }
                if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                    return Err(Error::InvalidConfig("explicit schedule entries must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Curvature update strategy driven by the iteration loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpdaterChoice {
    /// Fixed identity: plain mini-batch SGD.
    Sgd,
    /// Stochastic damped BFGS.
    Sdbfgs(DampedBfgsConfig),
    /// Shifted-BFGS baseline.
    Res(ResConfig),
    /// Stochastic cyclic BB scalar.
    Scbb(CbbConfig),
}

impl UpdaterChoice {
    pub fn name(&self) -> &'static str {
        match self {
            UpdaterChoice::Sgd => "sgd",
            UpdaterChoice::Sdbfgs(_) => "sdbfgs",
            UpdaterChoice::Res(_) => "res",
            UpdaterChoice::Scbb(_) => "scbb",
        }
    }

    /// Oracle calls consumed by `iterations` loop passes with batch size `m`.
    pub fn sfo_cost(&self, iterations: u64, batch_size: u64) -> u64 {
        match self {
            UpdaterChoice::Sgd => iterations * batch_size,
            UpdaterChoice::Sdbfgs(_) | UpdaterChoice::Res(_) => 2 * iterations * batch_size,
            UpdaterChoice::Scbb(cfg) => iterations * batch_size + (iterations / cfg.cycle) * batch_size,
        }
    }

    /// Largest iteration count whose [`sfo_cost`](Self::sfo_cost) fits within
    /// `budget` oracle calls.
    pub fn iterations_for_budget(&self, budget: u64, batch_size: u64) -> u64 {
        let mut lo = 0u64;
        let mut hi = budget / batch_size.max(1) + 1;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.sfo_cost(mid, batch_size) <= budget {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }
}

/// How the starting iterate is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPoint {
    Zeros,
    Given { values: Vec<f64> },
    /// `scale * U[lo, hi]^n`, drawn from the run's init stream.
    ScaledUniform { lo: f64, hi: f64, scale: f64 },
}

/// Starting curvature approximation for the dense updaters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCurvature {
    Identity,
    ScaledIdentity { value: f64 },
}

/// How the report's final gradient norm is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GradientEval {
    /// Use the problem's closed-form gradient when available.
    Exact,
    /// Fixed-seed sample average; the same `(size, seed)` across algorithms
    /// makes comparisons paired.
    MonteCarlo { size: usize, seed: u64 },
}

/// Full configuration of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub updater: UpdaterChoice,
    pub stepsize: StepsizeSchedule,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    /// Safeguard `zeta`; must be strictly positive for the dense updaters.
    #[serde(default)]
    pub zeta: f64,
    pub max_iterations: u64,
    /// Relative-distance termination tolerance; needs a problem with a known
    /// stationary point.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::initial_point")]
    pub initial_point: InitialPoint,
    #[serde(default = "defaults::initial_curvature")]
    pub initial_curvature: InitialCurvature,
    #[serde(default = "defaults::gradient_eval")]
    pub gradient_eval: GradientEval,
    /// A run is flagged divergent when the iterate norm passes this bound or
    /// any entry stops being finite.
    #[serde(default = "defaults::divergence_threshold")]
    pub divergence_threshold: f64,
    #[serde(default)]
    pub record_trace: bool,
    /// Dense-updater spectrum audit period (iterations); `None` disables.
    #[serde(default = "defaults::audit_every")]
    pub audit_every: Option<u64>,
}

mod defaults {
    use super::{GradientEval, InitialCurvature, InitialPoint};

    pub fn batch_size() -> usize {
        1
    }

    pub fn initial_point() -> InitialPoint {
        InitialPoint::Zeros
    }

    pub fn initial_curvature() -> InitialCurvature {
        InitialCurvature::Identity
    }

    pub fn gradient_eval() -> GradientEval {
        GradientEval::Exact
    }

    pub fn divergence_threshold() -> f64 {
        1e10
    }

    pub fn audit_every() -> Option<u64> {
        Some(100)
    }
}

impl RunConfig {
    /// Minimal config; remaining fields take their defaults.
    pub fn new(updater: UpdaterChoice, stepsize: StepsizeSchedule, max_iterations: u64) -> Self {
        Self {
            updater,
            stepsize,
            batch_size: defaults::batch_size(),
            zeta: 0.0,
            max_iterations,
            rho: None,
            seed: 0,
            initial_point: defaults::initial_point(),
            initial_curvature: defaults::initial_curvature(),
            gradient_eval: defaults::gradient_eval(),
            divergence_threshold: defaults::divergence_threshold(),
            record_trace: false,
            audit_every: defaults::audit_every(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("need at least one iteration".into()));
        }
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(Error::InvalidConfig(format!("safeguard must be nonnegative, got {}", self.zeta)));
        }
        match &self.updater {
            UpdaterChoice::Sdbfgs(cfg) => {
                if self.zeta <= 0.0 {
                    return Err(Error::InvalidConfig(
                        "the damped-BFGS updater needs a strictly positive safeguard".into(),
                    ));
                }
                if !(cfg.shift > 0.0) {
                    return Err(Error::InvalidConfig("damped-BFGS shift must be positive".into()));
                }
            }
            UpdaterChoice::Res(cfg) => {
                if self.zeta <= 0.0 {
                    return Err(Error::InvalidConfig(
                        "the shifted-BFGS baseline needs a strictly positive safeguard".into(),
                    ));
                }
                if !(cfg.shift > 0.0) {
                    return Err(Error::InvalidConfig("shifted-BFGS shift must be positive".into()));
                }
            }
            UpdaterChoice::Scbb(cfg) => cfg.validate()?,
            UpdaterChoice::Sgd => {}
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0) {
                return Err(Error::InvalidConfig(format!("termination tolerance must be positive, got {rho}")));
            }
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::InvalidConfig("divergence threshold must be positive".into()));
        }
        self.stepsize.validate(self.max_iterations)
    }
}

/// Downsampled per-iteration statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: u64,
    pub iterate_norm: f64,
    pub minibatch_grad_norm: f64,
}

/// Everything a run reports back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub iterations: u64,
    /// Oracle gradient evaluations consumed by the iteration loop (the final
    /// gradient-norm evaluation is reporting-side and not included).
    pub n_sfo: u64,
    pub final_iterate: Vec<f64>,
    /// Norm of the exact or estimated gradient at the final iterate; absent
    /// for divergent runs and for problems with no evaluator configured.
    pub grad_norm: Option<f64>,
    pub grad_norm_sq: Option<f64>,
    /// Fraction of cycle boundaries that kept a secant quotient (cyclic-BB
    /// runs with at least one boundary only).
    pub bb_fraction: Option<f64>,
    pub bb_steps: u64,
    pub fallback_steps: u64,
    /// Dense-curvature resets after factorization failures or breakdowns.
    pub curvature_resets: u64,
    pub divergent: bool,
    /// Smallest/largest cyclic-BB scalar observed across all iterations.
    pub lambda_min_seen: Option<f64>,
    pub lambda_max_seen: Option<f64>,
    /// Smallest dense-curvature eigenvalue seen at audited iterations.
    pub audited_min_eigenvalue: Option<f64>,
    /// Drawn stopping index for randomized runs.
    pub stopping_index: Option<u64>,
    pub wall_seconds: f64,
    pub trace: Vec<TraceEntry>,
}

impl RunReport {
    /// Field-exact equality excluding wall-clock time.
    pub fn same_outcome(&self, other: &RunReport) -> bool {
        self.iterations == other.iterations
            && self.n_sfo == other.n_sfo
            && self.final_iterate == other.final_iterate
            && self.grad_norm == other.grad_norm
            && self.grad_norm_sq == other.grad_norm_sq
            && self.bb_fraction == other.bb_fraction
            && self.bb_steps == other.bb_steps
            && self.fallback_steps == other.fallback_steps
            && self.curvature_resets == other.curvature_resets
            && self.divergent == other.divergent
            && self.lambda_min_seen == other.lambda_min_seen
            && self.lambda_max_seen == other.lambda_max_seen
            && self.audited_min_eigenvalue == other.audited_min_eigenvalue
            && self.stopping_index == other.stopping_index
            && self.trace == other.trace
    }
}

/// One iterate update: `x - alpha * (B^{-1} + zeta I) g`.
pub fn sqn_step(
    x: &Vector,
    b: &CurvatureApprox,
    zeta: f64,
    alpha: f64,
    g: &Vector,
) -> Result<Vector> {
    debug_assert!(alpha > 0.0);
    let direction = apply_inverse_plus_shift(b, zeta, g)?;
    Ok(x - direction * alpha)
}

enum CurvatureState {
    /// SGD: the identity, never updated.
    Fixed(CurvatureApprox),
    Dense(SpdMatrix),
    Cyclic(CbbState),
}

/// Runs the plain driver for up to `max_iterations`, or until the
/// relative-distance rule fires when `rho` is set.
pub fn run_sqn<P: StochasticProblem>(problem: &P, config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    run_loop(problem, config, config.max_iterations, None)
}

/// Runs the randomized-stopping driver: builds the stopping distribution over
/// `{1, ..., max_iterations}`, draws `R` from the run's stopping stream, and
/// executes exactly `R` iterations.
pub fn run_rsqn<P: StochasticProblem>(
    problem: &P,
    config: &RunConfig,
    constants: &TheoryConstants,
) -> Result<RunReport> {
    config.validate()?;
    let stopping = build_pr(&config.stepsize, config.max_iterations, constants)?;
    let mut stop_rng = SeededRng::with_stream(config.seed, streams::STOPPING);
    let r = sample_stopping_index(&stopping, &mut stop_rng);
    run_loop(problem, config, r, Some(r))
}

fn initial_iterate<P: StochasticProblem>(problem: &P, config: &RunConfig) -> Result<Vector> {
    let n = problem.dim();
    match &config.initial_point {
        InitialPoint::Zeros => Ok(Vector::zeros(n)),
        InitialPoint::Given { values } => {
            if values.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: values.len() });
            }
            Ok(Vector::from_column_slice(values))
        }
        InitialPoint::ScaledUniform { lo, hi, scale } => {
            let mut rng = SeededRng::with_stream(config.seed, streams::INIT);
            Ok(Vector::from_fn(n, |_, _| scale * rng.uniform(*lo, *hi)))
        }
    }
}

fn initial_curvature(n: usize, config: &RunConfig) -> CurvatureState {
    match &config.updater {
        UpdaterChoice::Sgd => CurvatureState::Fixed(CurvatureApprox::ScaledIdentity(1.0)),
        UpdaterChoice::Scbb(_) => CurvatureState::Cyclic(CbbState::new()),
        UpdaterChoice::Sdbfgs(_) | UpdaterChoice::Res(_) => {
            let b = match config.initial_curvature {
                InitialCurvature::Identity => SpdMatrix::identity(n),
                InitialCurvature::ScaledIdentity { value } => SpdMatrix::scaled_identity(n, value),
            };
            CurvatureState::Dense(b)
        }
    }
}

fn run_loop<P: StochasticProblem>(
    problem: &P,
    config: &RunConfig,
    iterations_budget: u64,
    stopping_index: Option<u64>,
) -> Result<RunReport> {
    let start = Instant::now();
    let n = problem.dim();
    let solution = problem.known_solution();
    if config.rho.is_some() && solution.is_none() {
        return Err(Error::InvalidConfig(
            "distance-based termination needs a problem with a known stationary point".into(),
        ));
    }
    let solution_scale = solution.as_ref().map(|s| s.norm().max(1.0));

    let mut oracle_rng = SeededRng::with_stream(config.seed, streams::ORACLE);
    let mut x = initial_iterate(problem, config)?;
    let mut curvature = initial_curvature(n, config);
    let mut counter = OracleCounter::new();
    let mut resets = 0u64;
    let mut divergent = false;
    let mut iterations_done = 0u64;
    let mut lambda_seen: Option<(f64, f64)> = None;
    let mut audited_min_eig: Option<f64> = None;
    let mut trace = Vec::new();
    let trace_stride = iterations_budget.div_ceil(1000).max(1);

    for k in 1..=iterations_budget {
        let batch = SampleBatch::draw(problem, &mut oracle_rng, config.batch_size);
        let grad = minibatch_gradient(problem, &x, &batch, &mut counter)?;
        let alpha = config.stepsize.alpha(k);
        let zeta = config.zeta;

        if let CurvatureState::Cyclic(state) = &curvature {
            let (lo, hi) = lambda_seen.unwrap_or((state.lambda, state.lambda));
            lambda_seen = Some((lo.min(state.lambda), hi.max(state.lambda)));
        }

        let direction = match &mut curvature {
            CurvatureState::Fixed(approx) => apply_inverse_plus_shift(approx, zeta, &grad)?,
            CurvatureState::Cyclic(state) => {
                apply_inverse_plus_shift(&CurvatureApprox::ScaledIdentity(state.lambda), zeta, &grad)?
            }
            CurvatureState::Dense(b) => match dense_inverse_plus_shift(b, zeta, &grad) {
                Ok(d) => d,
                Err(Error::FactorizationFailed) => {
                    // Numerically indefinite curvature: fall back to the
                    // shifted identity and retry the solve.
                    let shift = match &config.updater {
                        UpdaterChoice::Sdbfgs(c) => c.shift,
                        UpdaterChoice::Res(c) => c.shift,
                        _ => unreachable!("dense curvature only for BFGS-family updaters"),
                    };
                    *b = SpdMatrix::scaled_identity(n, shift);
                    resets += 1;
                    dense_inverse_plus_shift(b, zeta, &grad)?
                }
                Err(other) => return Err(other),
            },
        };
        let x_next = &x - direction * alpha;
        iterations_done = k;

        if config.record_trace && k % trace_stride == 0 {
            trace.push(TraceEntry {
                iteration: k,
                iterate_norm: x_next.norm(),
                minibatch_grad_norm: grad.norm(),
            });
        }

        if !x_next.iter().all(|v| v.is_finite()) || x_next.norm() > config.divergence_threshold {
            divergent = true;
            x = x_next;
            break;
        }

        match (&mut curvature, &config.updater) {
            (CurvatureState::Fixed(_), UpdaterChoice::Sgd) => {}
            (CurvatureState::Dense(b), UpdaterChoice::Sdbfgs(cfg)) => {
                let grad_next = gradient_same_batch(problem, &x_next, &batch, &mut counter)?;
                let s = &x_next - &x;
                let y_hat = grad_next - &grad - &s * cfg.shift;
                match sdbfgs_update(b, &s, &y_hat, &x, cfg) {
                    Ok(updated) => *b = updated,
                    Err(Error::DegenerateStep) => {}
                    Err(other) => return Err(other),
                }
            }
            (CurvatureState::Dense(b), UpdaterChoice::Res(cfg)) => {
                let grad_next = gradient_same_batch(problem, &x_next, &batch, &mut counter)?;
                let s = &x_next - &x;
                let y_hat = grad_next - &grad - &s * cfg.shift;
                match res_update(b, &s, &y_hat, &x, cfg) {
                    Ok(updated) => *b = updated,
                    Err(Error::DegenerateStep) => {}
                    Err(Error::CurvatureBreakdown(_)) => {
                        *b = SpdMatrix::scaled_identity(n, cfg.shift);
                        resets += 1;
                    }
                    Err(other) => return Err(other),
                }
            }
            (CurvatureState::Cyclic(state), UpdaterChoice::Scbb(cfg)) => {
                if state.at_cycle_boundary(cfg) {
                    let grad_next = gradient_same_batch(problem, &x_next, &batch, &mut counter)?;
                    let s = &x_next - &x;
                    let y = grad_next - &grad;
                    *state = scbb_update(*state, &s, &y, cfg);
                } else {
                    let zero = Vector::zeros(n);
                    *state = scbb_update(*state, &zero, &zero, cfg);
                }
                let (lo, hi) = lambda_seen.unwrap_or((state.lambda, state.lambda));
                lambda_seen = Some((lo.min(state.lambda), hi.max(state.lambda)));
            }
            _ => unreachable!("curvature state always matches the updater"),
        }

        if let (CurvatureState::Dense(b), Some(period)) = (&curvature, config.audit_every) {
            if k % period == 0 {
                let eig = min_eigenvalue(b);
                audited_min_eig = Some(audited_min_eig.map_or(eig, |m: f64| m.min(eig)));
            }
        }

        if let (Some(rho), Some(star)) = (config.rho, solution.as_ref()) {
            if (&x_next - star).norm() / solution_scale.unwrap() <= rho {
                x = x_next;
                break;
            }
        }
        x = x_next;
    }

    let grad_final = if divergent {
        None
    } else {
        match config.gradient_eval {
            GradientEval::Exact => problem.exact_gradient(&x),
            GradientEval::MonteCarlo { size, seed } => Some(monte_carlo_gradient(problem, &x, size, seed)),
        }
    };
    let grad_norm = grad_final.as_ref().map(|g| g.norm());

    let (bb_steps, fallback_steps, bb_fraction) = match &curvature {
        CurvatureState::Cyclic(state) => (state.bb_steps, state.fallback_steps, state.bb_fraction()),
        _ => (0, 0, None),
    };

    Ok(RunReport {
        iterations: iterations_done,
        n_sfo: counter.total(),
        final_iterate: x.iter().copied().collect(),
        grad_norm,
        grad_norm_sq: grad_norm.map(|v| v * v),
        bb_fraction,
        bb_steps,
        fallback_steps,
        curvature_resets: resets,
        divergent,
        lambda_min_seen: lambda_seen.map(|(lo, _)| lo),
        lambda_max_seen: lambda_seen.map(|(_, hi)| hi),
        audited_min_eigenvalue: audited_min_eig,
        stopping_index,
        wall_seconds: start.elapsed().as_secs_f64(),
        trace,
    })
}
