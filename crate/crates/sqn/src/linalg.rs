//! Dense linear-algebra primitives shared by the updaters and solvers.
//!
//! Curvature approximations are either a dense symmetric matrix factorized
//! fresh at every solve (the spectral shift added by the BFGS-style updates
//! defeats rank-two inverse maintenance, and the problem sizes here keep
//! O(n^3) affordable) or a scaled identity that is inverted in closed form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense column vector of iterates, gradients, and update directions.
pub type Vector = DVector<f64>;

/// Dense symmetric matrix intended to stay positive definite.
///
/// The type guarantees symmetry: every constructor and update re-symmetrizes
/// the storage as `(B + B^T)/2` to suppress floating-point drift. Positive
/// definiteness is established where it matters, at factorization time —
/// the shifted-BFGS baseline can legitimately produce indefinite matrices on
/// nonconvex problems, and those are reported, not hidden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdMatrix {
    data: DMatrix<f64>,
}

impl SpdMatrix {
    /// Identity of dimension `n`.
    pub fn identity(n: usize) -> Self {
        Self { data: DMatrix::identity(n, n) }
    }

    /// `c * I` with `c > 0`.
    pub fn scaled_identity(n: usize, c: f64) -> Self {
        assert!(c > 0.0 && c.is_finite(), "scale must be positive, got {c}");
        Self { data: DMatrix::identity(n, n) * c }
    }

    /// Diagonal matrix from strictly positive entries.
    pub fn from_diagonal(diag: &Vector) -> Self {
        assert!(diag.iter().all(|&d| d > 0.0), "diagonal entries must be positive");
        Self { data: DMatrix::from_diagonal(diag) }
    }

    /// Wraps a square matrix after checking symmetry to relative 1e-12 and
    /// re-symmetrizing exactly.
    pub fn from_symmetric(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let scale = m.amax().max(1.0);
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidConfig(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(Self::resymmetrized(m))
    }

    /// `(M + M^T)/2` without a symmetry check; used by the updaters whose
    /// algebra is symmetric up to rounding.
    pub(crate) fn resymmetrized(m: DMatrix<f64>) -> Self {
        let mut data = m;
        for i in 0..data.nrows() {
            for j in (i + 1)..data.ncols() {
                let avg = 0.5 * (data[(i, j)] + data[(j, i)]);
                data[(i, j)] = avg;
                data[(j, i)] = avg;
            }
        }
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// `B * v`.
    pub fn mul_vec(&self, v: &Vector) -> Vector {
        &self.data * v
    }

    /// `s^T B s`.
    pub fn quadratic_form(&self, s: &Vector) -> f64 {
        s.dot(&self.mul_vec(s))
    }

    /// Largest absolute entry; used for relative tolerances.
    pub fn max_abs(&self) -> f64 {
        self.data.amax()
    }
}

/// The Hessian approximation `B_k` used by the iterate update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CurvatureApprox {
    /// Dense symmetric positive definite matrix (BFGS family).
    Dense(SpdMatrix),
    /// `B = lambda^{-1} I` for a positive scalar `lambda` (cyclic-BB family,
    /// and `lambda = 1` is the SGD degenerate case).
    ScaledIdentity(f64),
}

impl CurvatureApprox {
    pub fn dim_matches(&self, n: usize) -> bool {
        match self {
            CurvatureApprox::Dense(b) => b.dim() == n,
            CurvatureApprox::ScaledIdentity(_) => true,
        }
    }
}

/// Solves `B d = g` for symmetric positive definite `B` by Cholesky
/// factorization, with one step of iterative refinement so the residual
/// satisfies `||B d - g|| <= 1e-10 * max(1, ||g||)` across the conditioning
/// this crate produces.
///
/// Fails with [`Error::FactorizationFailed`] when `B` is numerically
/// indefinite, which callers treat as a signal to reset their curvature
/// state.
pub fn spd_solve(b: &SpdMatrix, g: &Vector) -> Result<Vector> {
    if b.dim() != g.len() {
        return Err(Error::DimensionMismatch { expected: b.dim(), got: g.len() });
    }
    let chol = b.data.clone().cholesky().ok_or(Error::FactorizationFailed)?;
    let mut d = chol.solve(g);
    let residual = g - b.mul_vec(&d);
    d += chol.solve(&residual);
    Ok(d)
}

/// Smallest eigenvalue of a symmetric matrix, to absolute tolerance 1e-9.
pub fn min_eigenvalue(b: &SpdMatrix) -> f64 {
    b.data
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Applies the step operator `(B^{-1} + zeta I)` to `g`.
///
/// The dense branch factors and solves; the scaled-identity branch reduces to
/// the closed form `(lambda + zeta) * g` since `B^{-1} = lambda I`.
pub fn apply_inverse_plus_shift(b: &CurvatureApprox, zeta: f64, g: &Vector) -> Result<Vector> {
    debug_assert!(zeta >= 0.0, "safeguard must be nonnegative");
    match b {
        CurvatureApprox::Dense(mat) => dense_inverse_plus_shift(mat, zeta, g),
        CurvatureApprox::ScaledIdentity(lambda) => {
            debug_assert!(*lambda > 0.0, "scaled identity needs a positive scale");
            Ok(g * (lambda + zeta))
        }
    }
}

/// Dense arm of [`apply_inverse_plus_shift`], callable on a borrowed matrix.
pub fn dense_inverse_plus_shift(b: &SpdMatrix, zeta: f64, g: &Vector) -> Result<Vector> {
    let mut d = spd_solve(b, g)?;
    if zeta != 0.0 {
        d.axpy(zeta, g, 1.0);
    }
    Ok(d)
}
