//! Small dense helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symmetry tolerance used when validating inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let m = rows[0].len();
    let mut out = DMatrix::zeros(n, m);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: row.len(),
            });
        }
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite entry at ({i}, {j})"
                )));
            }
            out[(i, j)] = *v;
        }
    }
    Ok(out)
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn require_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// `‖M − Mᵀ‖_F`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).norm()
}

/// Errors unless `‖M − Mᵀ‖_F ≤ tol · max(‖M‖_F, 1)`.
pub fn require_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    let a = asymmetry(m);
    if a > tol * m.norm().max(1.0) {
        return Err(Error::NonSymmetric(a));
    }
    Ok(())
}

/// Projects onto symmetric matrices after checking the drift is within
/// `tol · ‖P‖_F`.
pub fn symmetrize_checked(p: DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let a = asymmetry(&p);
    let scale = p.norm();
    if a > tol * scale && a > f64::MIN_POSITIVE {
        return Err(Error::NonSymmetric(a));
    }
    Ok(symmetrize(p))
}

pub fn symmetrize(p: DMatrix<f64>) -> DMatrix<f64> {
    (&p + p.transpose()) * 0.5
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Column-major vectorization.
pub fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_sym_eigenvalue(p: &DMatrix<f64>) -> f64 {
    symmetrize(p.clone())
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::EigenSolverFailure);
    }
    let schur = a
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(Error::EigenSolverFailure)?;
    let eigs = schur.complex_eigenvalues();
    let mut out: Vec<Complex64> = eigs.iter().map(|z| Complex64::new(z.re, z.im)).collect();
    out.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(out)
}

pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// One-norm condition number estimate `‖A‖₁‖A⁻¹‖₁`.
pub fn cond1(a: &DMatrix<f64>, inv: &DMatrix<f64>) -> f64 {
    one_norm(a) * one_norm(inv)
}

pub fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `Xᵀ P X`.
pub fn congruence(x: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    x.transpose() * p * x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_of_product_matches_kronecker_identity() {
        // vec(X P Y) = (Yᵀ ⊗ X) vec(P)
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 0.5]);
        let p = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.0]);
        let y = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, -3.0]);
        let lhs = vectorize(&(&x * &p * &y));
        let rhs = kron(&y.transpose(), &x) * vectorize(&p);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_companion() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let e = eigenvalues(&a).unwrap();
        assert!((e[0].re + 2.0).abs() < 1e-12);
        assert!((e[1].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetrize_rejects_large_drift() {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(symmetrize_checked(p, 1e-9).is_err());
    }
}
