//! Small dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra` dynamic matrices of `Complex64`. The Hermitian
//! positive-definite routines (Cholesky, log-determinant, triangular inverse)
//! are written out here; SVD and eigendecompositions come from `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative pivot threshold below which a Cholesky factorization is rejected.
const CHOLESKY_PIVOT_TOL: f64 = 1e-14;

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Square matrix with the given real values on its diagonal.
pub fn real_diagonal(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    let mut m = zeros(n, n);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = Complex64::new(v, 0.0);
    }
    m
}

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn ensure_square(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(invalid(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Lower-triangular `L` with `L·Lᴴ = A` for Hermitian positive-definite `A`.
///
/// Only the lower triangle of `a` is read. Returns `None` when a pivot is not
/// safely positive.
pub fn cholesky_lower(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let scale = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0_f64, f64::max);
    let floor = CHOLESKY_PIVOT_TOL * scale.max(f64::MIN_POSITIVE);
    let mut l = zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > floor) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Inverse of a nonsingular lower-triangular matrix by forward substitution.
pub fn invert_lower_triangular(l: &ComplexMatrix) -> ComplexMatrix {
    let n = l.nrows();
    let mut inv = zeros(n, n);
    for col in 0..n {
        inv[(col, col)] = l[(col, col)].inv();
        for i in (col + 1)..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in col..i {
                s += l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = -s / l[(i, i)];
        }
    }
    inv
}

/// `ln det A` for Hermitian positive-definite `A`, via Cholesky.
pub fn log_det_hpd(a: &ComplexMatrix) -> Option<f64> {
    let l = cholesky_lower(a)?;
    Some(2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>())
}

/// `ln det A` for a Hermitian positive-definite `n × n` matrix stored
/// column-major in `a`, factorized in place. Only the lower triangle is read.
///
/// Allocation-free variant of [`log_det_hpd`] for hot loops.
pub fn log_det_hpd_in_place(a: &mut [Complex64], n: usize) -> Option<f64> {
    debug_assert_eq!(a.len(), n * n);
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[k * n + j].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        log_det += 2.0 * ljj.ln();
        a[j * n + j] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[j * n + i];
            for k in 0..j {
                s -= a[k * n + i] * a[k * n + j].conj();
            }
            a[j * n + i] = s / ljj;
        }
    }
    Some(log_det)
}

/// `ln det(I + M)` for Hermitian positive-semidefinite `M`.
///
/// Uses Cholesky of `I + M`; falls back to the eigenvalues of the Hermitian
/// part of `M` when the factorization is rejected.
pub fn log_det_i_plus(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut a = hermitian_part(m);
    for i in 0..n {
        a[(i, i)] += Complex64::new(1.0, 0.0);
    }
    match log_det_hpd(&a) {
        Some(v) => v,
        None => hermitian_eigenvalues(&hermitian_part(m))
            .iter()
            .map(|&lambda| lambda.max(0.0).ln_1p())
            .sum(),
    }
}

/// Eigenvalues of a Hermitian matrix (unordered).
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    a.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// Frobenius norm.
pub fn fro_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular value decomposition with descending singular values and a full
/// set of `cols` right singular vectors.
///
/// `values` has length `min(rows, cols)`; column `k` of `right` pairs with
/// `values[k]`, and the trailing `cols - min(rows, cols)` columns of `right`
/// span the null space.
pub struct FullSvd {
    pub values: Vec<f64>,
    pub right: ComplexMatrix,
}

pub fn full_svd(a: &ComplexMatrix) -> Result<FullSvd> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(invalid("svd of an empty matrix"));
    }
    // Zero rows leave AᴴA unchanged and make the decomposition return all
    // `cols` right singular vectors.
    let padded = if rows < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded
        .try_svd(false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("svd did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("svd returned no right vectors".into()))?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));

    let mut right = zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..cols {
            right[(r, dst)] = v_t[(src, r)].conj();
        }
    }
    let values = order
        .iter()
        .take(rows.min(cols))
        .map(|&i| sv[i].max(0.0))
        .collect();
    Ok(FullSvd { values, right })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, m: usize, seed: u64) -> ComplexMatrix {
        // Fixed pseudo-random fill, independent of the crate's channel RNG.
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(n, m, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn cholesky_reconstructs() {
        let b = sample(4, 4, 3);
        let a = &b * b.adjoint() + identity(4);
        let l = cholesky_lower(&a).unwrap();
        assert!(fro_norm(&(&l * l.adjoint() - &a)) < 1e-12);
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_eq!(l[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = real_diagonal(&[1.0, -1.0]);
        assert!(cholesky_lower(&a).is_none());
        assert!(cholesky_lower(&zeros(2, 2)).is_none());
    }

    #[test]
    fn triangular_inverse() {
        let b = sample(5, 5, 9);
        let l = cholesky_lower(&(&b * b.adjoint() + identity(5))).unwrap();
        let inv = invert_lower_triangular(&l);
        assert!(fro_norm(&(&l * &inv - identity(5))) < 1e-12);
    }

    #[test]
    fn log_det_matches_eigenvalues() {
        for seed in 0..20 {
            let b = sample(4, 4, seed);
            let m = &b * b.adjoint();
            let oracle: f64 = hermitian_eigenvalues(&m).iter().map(|l| (1.0 + l).ln()).sum();
            assert!((log_det_i_plus(&m) - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn in_place_log_det_matches() {
        let b = sample(4, 4, 17);
        let a = &b * b.adjoint() + identity(4);
        let mut buf: Vec<Complex64> = a.iter().copied().collect();
        let v = log_det_hpd_in_place(&mut buf, 4).unwrap();
        assert!((v - log_det_hpd(&a).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn svd_is_sorted_and_complete() {
        let a = sample(4, 6, 5);
        let svd = full_svd(&a).unwrap();
        assert_eq!(svd.values.len(), 4);
        assert!(svd.values.windows(2).all(|w| w[0] >= w[1]));
        assert!(fro_norm(&(svd.right.adjoint() * &svd.right - identity(6))) < 1e-12);
        let av = &a * &svd.right;
        for k in 0..6 {
            let col_norm = av.column(k).norm();
            let expected = svd.values.get(k).copied().unwrap_or(0.0);
            assert!((col_norm - expected).abs() < 1e-12);
        }
    }
}
