//! Interference whitening: turns the jammed link into an equivalent clean one.
//!
//! With `K = I + H_bj·Q_j·H_bjᴴ` the interference-plus-noise covariance at Bob
//! and `C·Cᴴ = K⁻¹`, the equivalent channel `H̃ = Cᴴ·H_ba` sees unit white
//! noise and gives Bob exactly the same rate as the original channel.

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// Equivalent channel seen by Bob after whitening.
#[derive(Debug, Clone)]
pub struct WhitenedChannel {
    /// Lower-triangular factor with `c·cᴴ = K⁻¹`, `n_b × n_b`.
    pub c: ComplexMatrix,
    /// `cᴴ·H_ba`, `n_b × n_a`.
    pub h_tilde: ComplexMatrix,
    /// Singular values of `h_tilde`, descending, length `min(n_b, n_a)`.
    pub sigma: Vec<f64>,
    /// All `n_a` right singular vectors of `h_tilde`; column `k < sigma.len()`
    /// pairs with `sigma[k]`, the rest span its null space.
    pub right_vectors: ComplexMatrix,
    /// Number of singular values above the rank tolerance.
    pub c_rank: usize,
}

impl WhitenedChannel {
    pub fn n_a(&self) -> usize {
        self.h_tilde.ncols()
    }

    /// Squared singular values of the `c_rank` usable eigenmodes.
    pub fn usable_gains(&self) -> Vec<f64> {
        self.sigma[..self.c_rank].iter().map(|s| s * s).collect()
    }
}

/// `K = I + h_bj·q_j·h_bjᴴ`.
pub fn interference_covariance(h_bj: &ComplexMatrix, q_j: &ComplexMatrix) -> Result<ComplexMatrix> {
    linalg::ensure_square(q_j, "jammer covariance")?;
    if h_bj.ncols() != q_j.nrows() {
        return Err(invalid(format!(
            "jammer channel has {} columns but covariance is {}x{}",
            h_bj.ncols(),
            q_j.nrows(),
            q_j.ncols()
        )));
    }
    let k = linalg::identity(h_bj.nrows()) + h_bj * q_j * h_bj.adjoint();
    Ok(linalg::hermitian_part(&k))
}

/// Singular values above `max(n_a, n_b) · σ_max · 1e-12` count toward the rank.
pub fn numerical_rank(sigma: &[f64], rows: usize, cols: usize) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    let tol = rows.max(cols) as f64 * smax * 1e-12;
    sigma.iter().filter(|&&s| s > tol).count()
}

/// Whitens `h_ba` against the interference covariance `k`.
///
/// `C` is the lower Cholesky factor of `K⁻¹`, where `K⁻¹` is assembled from the
/// inverse of `K`'s own Cholesky factor.
pub fn whiten(h_ba: &ComplexMatrix, k: &ComplexMatrix) -> Result<WhitenedChannel> {
    linalg::ensure_square(k, "interference covariance")?;
    if k.nrows() != h_ba.nrows() {
        return Err(invalid(format!(
            "interference covariance is {}x{} but channel has {} rows",
            k.nrows(),
            k.ncols(),
            h_ba.nrows()
        )));
    }
    let l = linalg::cholesky_lower(k)
        .ok_or_else(|| Error::Numerical("interference covariance is not positive definite".into()))?;
    let l_inv = linalg::invert_lower_triangular(&l);
    let k_inv = linalg::hermitian_part(&(l_inv.adjoint() * &l_inv));
    let c = linalg::cholesky_lower(&k_inv)
        .ok_or_else(|| Error::Numerical("inverse interference covariance lost definiteness".into()))?;
    let h_tilde = c.adjoint() * h_ba;
    let svd = linalg::full_svd(&h_tilde)?;
    let c_rank = numerical_rank(&svd.values, h_tilde.nrows(), h_tilde.ncols());
    Ok(WhitenedChannel {
        c,
        h_tilde,
        sigma: svd.values,
        right_vectors: svd.right,
        c_rank,
    })
}

/// Convenience composition used by the trial runner.
pub fn whiten_with_jammer(
    h_ba: &ComplexMatrix,
    h_bj: &ComplexMatrix,
    q_j: &ComplexMatrix,
) -> Result<WhitenedChannel> {
    whiten(h_ba, &interference_covariance(h_bj, q_j)?)
}
