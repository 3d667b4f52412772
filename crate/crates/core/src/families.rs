//! Standard measurement families and seeded random generators.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::assemblage::{Assemblage, MeasurementAssemblage};
use crate::error::Result;
use crate::linalg::{c, identity, pinv_sqrt, ComplexMatrix, ComplexVector, HermitianOperator};
use crate::tol::Tolerances;

/// Discrete Fourier matrix, columns `|f_j⟩ = d^{-1/2} Σ_k ω^{jk} |k⟩`.
pub fn fourier_matrix(d: usize) -> ComplexMatrix {
    let s = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |k, j| {
        let phase = 2.0 * PI * (j * k) as f64 / d as f64;
        c(s * phase.cos(), s * phase.sin())
    })
}

/// Computational basis (input 1) and Fourier basis (input 2).
pub fn computational_and_fourier(d: usize) -> MeasurementAssemblage {
    MeasurementAssemblage::from_bases(&[identity(d), fourier_matrix(d)])
        .expect("bases share one dimension")
}

/// Qubit Pauli X (input 1) and Z (input 2), outcome 1 is the `+1` eigenvector.
pub fn pauli_xz() -> MeasurementAssemblage {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = ComplexMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
    MeasurementAssemblage::from_bases(&[x, identity(2)]).expect("qubit bases")
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexVector {
    let v = ginibre(d, 1, rng).column(0).into_owned();
    let n = v.norm();
    v.unscale(n)
}

/// Induced-measure mixed state of the given rank.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> HermitianOperator {
    let g = ginibre(d, rank.max(1), rng);
    let w = HermitianOperator::hermitian_part(&(&g * g.adjoint()));
    let t = w.trace_real();
    w.scale(1.0 / t)
}

/// Full-rank `k`-outcome POVM `E_a = S^{-1/2} G_a S^{-1/2}`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Vec<HermitianOperator> {
    let raw: Vec<HermitianOperator> = (0..k)
        .map(|_| {
            let g = ginibre(d, d, rng);
            HermitianOperator::hermitian_part(&(&g * g.adjoint()))
        })
        .collect();
    let mut s = HermitianOperator::zeros(d);
    for g in &raw {
        s = s.add(g);
    }
    let (root, _) = pinv_sqrt(&s, 1e-14).expect("Wishart sum is positive definite");
    raw.iter().map(|g| g.congruence(root.matrix())).collect()
}

pub fn random_measurements<R: Rng + ?Sized>(
    d: usize,
    inputs: usize,
    outcomes: usize,
    rng: &mut R,
) -> MeasurementAssemblage {
    let ops = (0..inputs).map(|_| random_povm(d, outcomes, rng)).collect();
    MeasurementAssemblage::new(ops).expect("uniform shape")
}

/// Projective measurements in `inputs` Haar-random bases.
pub fn random_projective<R: Rng + ?Sized>(d: usize, inputs: usize, rng: &mut R) -> MeasurementAssemblage {
    let bases: Vec<ComplexMatrix> = (0..inputs).map(|_| random_unitary(d, rng)).collect();
    MeasurementAssemblage::from_bases(&bases).expect("uniform shape")
}

/// Assemblage of a random bipartite state of rank `rank` on `d ⊗ d` under
/// the given measurements.
pub fn random_assemblage<R: Rng + ?Sized>(
    meas: &MeasurementAssemblage,
    rank: usize,
    rng: &mut R,
) -> Result<Assemblage> {
    let d = meas.dim();
    let rho = random_density(d * d, rank, rng);
    Assemblage::from_state_and_measurements(&rho, meas, &Tolerances::default())
}
