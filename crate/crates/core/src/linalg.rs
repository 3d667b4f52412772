//! Complex Hermitian linear algebra on small dense matrices.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// Square complex matrix equal to its adjoint up to `herm_tol`, stored
/// exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    /// Checks `‖M − M†‖_F ≤ herm_tol · max(1, ‖M‖_F)` and stores `(M + M†)/2`.
    pub fn new(m: ComplexMatrix, herm_tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Schema("operator has non-finite entries".into()));
        }
        let deviation = frobenius(&(&m - m.adjoint()));
        let allowed = herm_tol * frobenius(&m).max(1.0);
        if deviation > allowed {
            return Err(Error::NotHermitian { deviation, allowed });
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(M + M†)/2`. Panics if `m` is not square.
    pub fn hermitian_part(m: &ComplexMatrix) -> Self {
        assert!(m.is_square(), "hermitian_part of a non-square matrix");
        Self((m + m.adjoint()).scale(0.5))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self(ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j {
                c(diag[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        }))
    }

    pub fn identity(d: usize) -> Self {
        Self(identity(d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(ComplexMatrix::zeros(d, d))
    }

    /// Projector `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &ComplexVector) -> Self {
        Self::hermitian_part(&(v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace_real(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `K M K†` for any (possibly rectangular) `K`.
    pub fn congruence(&self, k: &ComplexMatrix) -> Self {
        Self::hermitian_part(&(k * &self.0 * k.adjoint()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(self).values
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self, psd_tol: f64) -> bool {
        self.dim() == 0 || self.lambda_min() >= -psd_tol
    }

    /// Real part of `tr(A B)` for Hermitian `A`, `B`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        frobenius(&(&self.0 - &other.0))
    }
}

impl Deref for HermitianOperator {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        HermitianOperator::hermitian_part(&(scaled * self.vectors.adjoint()))
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.apply(|l| l)
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Eigenvalues strictly above `rank_tol · max(λ_max, 0)`.
    pub fn support(&self, rank_tol: f64) -> Vec<usize> {
        let cut = rank_tol * self.lambda_max().max(0.0);
        (0..self.dim()).filter(|&i| self.values[i] > cut).collect()
    }
}

pub fn eig_hermitian(m: &HermitianOperator) -> SpectralDecomposition {
    let d = m.dim();
    if d == 0 {
        return SpectralDecomposition {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(m.matrix().clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    SpectralDecomposition { values, vectors }
}

pub fn sqrt_psd(m: &HermitianOperator, psd_tol: f64) -> Result<HermitianOperator> {
    let eig = eig_hermitian(m);
    if let Some(&min) = eig.values.first() {
        if min < -psd_tol {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(eig.apply(|l| l.max(0.0).sqrt()))
}

/// Pseudo-inverse square root on the support of `m`, with its rank.
pub fn pinv_sqrt(m: &HermitianOperator, rank_tol: f64) -> Result<(HermitianOperator, usize)> {
    pinv_power(m, -0.5, rank_tol)
}

pub fn pinv(m: &HermitianOperator, rank_tol: f64) -> Result<(HermitianOperator, usize)> {
    pinv_power(m, -1.0, rank_tol)
}

fn pinv_power(m: &HermitianOperator, p: f64, rank_tol: f64) -> Result<(HermitianOperator, usize)> {
    let eig = eig_hermitian(m);
    if eig.lambda_max() <= 0.0 {
        return Err(Error::ZeroOperator);
    }
    let cut = rank_tol * eig.lambda_max();
    let rank = eig.values.iter().filter(|&&l| l > cut).count();
    Ok((eig.apply(|l| if l > cut { l.powf(p) } else { 0.0 }), rank))
}

/// Isometry `Π` (`r × d`, rows orthonormal) onto the support of `m`, rows
/// ordered by ascending eigenvalue.
pub fn range_projector(m: &HermitianOperator, rank_tol: f64) -> Result<(ComplexMatrix, usize)> {
    let eig = eig_hermitian(m);
    if eig.lambda_max() <= 0.0 {
        return Err(Error::ZeroOperator);
    }
    let keep = eig.support(rank_tol);
    Ok((rows_from_columns(&eig.vectors, &keep), keep.len()))
}

/// Isometry onto the orthogonal complement of the row space of `pi`.
pub fn complement_isometry(pi: &ComplexMatrix) -> ComplexMatrix {
    let d = pi.ncols();
    let proj = HermitianOperator::hermitian_part(&(identity(d) - pi.adjoint() * pi));
    let eig = eig_hermitian(&proj);
    let keep: Vec<usize> = (0..d).filter(|&i| eig.values[i] > 0.5).collect();
    rows_from_columns(&eig.vectors, &keep)
}

fn rows_from_columns(vectors: &ComplexMatrix, cols: &[usize]) -> ComplexMatrix {
    let d = vectors.nrows();
    ComplexMatrix::from_fn(cols.len(), d, |r, i| vectors[(i, cols[r])].conj())
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `tr_A` on `H_A ⊗ H_B` with A as the slow index.
pub fn partial_trace_a(rho: &ComplexMatrix, da: usize, db: usize) -> Result<HermitianOperator> {
    if rho.nrows() != da * db || rho.ncols() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {}x{}",
            rho.nrows(),
            rho.ncols(),
            da * db,
            da * db
        )));
    }
    let out = ComplexMatrix::from_fn(db, db, |i, j| {
        (0..da).map(|p| rho[(p * db + i, p * db + j)]).sum()
    });
    Ok(HermitianOperator::hermitian_part(&out))
}

/// `tr_B` on `H_A ⊗ H_B` with A as the slow index.
pub fn partial_trace_b(rho: &ComplexMatrix, da: usize, db: usize) -> Result<HermitianOperator> {
    if rho.nrows() != da * db || rho.ncols() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {}x{}",
            rho.nrows(),
            rho.ncols(),
            da * db,
            da * db
        )));
    }
    let out = ComplexMatrix::from_fn(da, da, |p, q| {
        (0..db).map(|i| rho[(p * db + i, q * db + i)]).sum()
    });
    Ok(HermitianOperator::hermitian_part(&out))
}

/// `‖U†U − 1‖_F`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    frobenius(&(u.adjoint() * u - identity(u.ncols())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> HermitianOperator {
        let m = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.5, 0.5),
                c(0.0, -1.0),
                c(0.5, -0.5),
                c(1.0, 0.0),
                c(0.25, 0.0),
                c(0.0, 1.0),
                c(0.25, 0.0),
                c(3.0, 0.0),
            ],
        );
        HermitianOperator::new(m, 1e-10).unwrap()
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(HermitianOperator::new(m, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigen_reconstruction_and_order() {
        let h = sample();
        let e = eig_hermitian(&h);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(e.reconstruct().distance(&h) < 1e-12);
        assert!(unitarity_defect(&e.vectors) < 1e-12);
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = HermitianOperator::new(
            ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
            1e-12,
        )
        .unwrap();
        let e = eig_hermitian(&y);
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_of_psd_squares_back() {
        let h = sample();
        let shift = h.add(&HermitianOperator::identity(3).scale(2.0));
        let s = sqrt_psd(&shift, 1e-9).unwrap();
        let back = HermitianOperator::hermitian_part(&(s.matrix() * s.matrix()));
        assert!(back.distance(&shift) < 1e-12);
        assert!(matches!(sqrt_psd(&h.scale(-1.0), 1e-9), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn pinv_sqrt_on_rank_deficient() {
        let m = HermitianOperator::from_real_diagonal(&[4.0, 0.0, 1.0]);
        let (p, r) = pinv_sqrt(&m, 1e-8).unwrap();
        assert_eq!(r, 2);
        let want = HermitianOperator::from_real_diagonal(&[0.5, 0.0, 1.0]);
        assert!(p.distance(&want) < 1e-14);
        assert!(matches!(pinv_sqrt(&HermitianOperator::zeros(2), 1e-8), Err(Error::ZeroOperator)));
    }

    #[test]
    fn range_and_complement_are_orthogonal() {
        let m = HermitianOperator::from_real_diagonal(&[1.0, 0.0, 2.0, 0.0]);
        let (pi, r) = range_projector(&m, 1e-8).unwrap();
        assert_eq!(r, 2);
        let q = complement_isometry(&pi);
        assert_eq!(q.nrows(), 2);
        assert!(frobenius(&(&pi * q.adjoint())) < 1e-14);
        let sum = pi.adjoint() * &pi + q.adjoint() * &q;
        assert!(frobenius(&(sum - identity(4))) < 1e-13);
    }

    #[test]
    fn partial_traces_of_product() {
        let a = HermitianOperator::from_real_diagonal(&[0.25, 0.75]);
        let b = sample();
        let ab = kron(a.matrix(), b.matrix());
        assert!(partial_trace_a(&ab, 2, 3).unwrap().distance(&b) < 1e-13);
        let tb = b.trace_real();
        assert!(partial_trace_b(&ab, 2, 3).unwrap().distance(&a.scale(tb)) < 1e-13);
        assert!(partial_trace_a(&ab, 3, 3).is_err());
    }

    #[test]
    fn inner_product_is_trace_of_product() {
        let h = sample();
        let direct: f64 = (h.matrix() * h.matrix()).trace().re;
        assert!((h.inner(&h) - direct).abs() < 1e-12);
    }
}
