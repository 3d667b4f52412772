//! Steering-equivalent observables and SEO equivalence testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use crate::assemblage::{Assemblage, MeasurementAssemblage, OperatorFamily};
use crate::error::Result;
use crate::io::matrix_to_json;
use crate::linalg::{
    c, complement_isometry, eig_hermitian, frobenius, pinv_sqrt, range_projector, unitarity_defect,
    ComplexMatrix, HermitianOperator,
};
use crate::tol::Tolerances;

/// `B_{a|x} = ρ̃^{-1/2} σ̃_{a|x} ρ̃^{-1/2}` on the support `K` of `ρ_B`.
#[derive(Debug, Clone)]
pub struct Seo {
    /// Observables on `K`, of dimension `rank`.
    pub observables: MeasurementAssemblage,
    /// Isometry `Π` (`rank × d`) from `H_B` onto `K`.
    pub projector: ComplexMatrix,
    /// Reduced state `ρ_B` on `H_B`.
    pub reduced: HermitianOperator,
}

impl Seo {
    pub fn rank(&self) -> usize {
        self.projector.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.projector.ncols()
    }

    /// `Π† B_{a|x} Π`, i.e. `B ⊕ 0` on `H_B`.
    pub fn embedded(&self) -> OperatorFamily {
        let lift = self.projector.adjoint();
        self.observables.family().congruence(&lift)
    }
}

pub fn compute_seo(asm: &Assemblage, tol: &Tolerances) -> Result<Seo> {
    let reduced = asm.reduced_state(tol.ns)?;
    let (pi, _) = range_projector(&reduced, tol.rank)?;
    let rho_k = reduced.congruence(&pi);
    let (inv_sqrt, _) = pinv_sqrt(&rho_k, tol.rank)?;
    let map = inv_sqrt.matrix() * &pi;
    let observables = MeasurementAssemblage::from_family(asm.family().congruence(&map));
    Ok(Seo {
        observables,
        projector: pi,
        reduced,
    })
}

/// `B / rank` on `K`: the member of the class with maximally mixed reduced
/// state.
pub fn canonical_representative(seo: &Seo) -> Assemblage {
    Assemblage::canonical(&seo.observables)
}

/// Canonical representative lifted back to `H_B` as `Π† (B / rank) Π`.
pub fn canonical_embedded(seo: &Seo) -> Assemblage {
    Assemblage::from_family(seo.embedded().scale(1.0 / seo.rank() as f64))
}

/// Unitary invariants of an SEO: the sorted spectrum of each `B_{a|x}`,
/// then `tr B_i`, `tr B_i B_j` (`i ≤ j`) and the real and imaginary parts of
/// `tr B_i B_j B_k` (`i ≤ j ≤ k`), with `i` running input-major.
pub fn class_fingerprint(seo: &Seo) -> Vec<f64> {
    let ops: Vec<&HermitianOperator> = seo.observables.iter().collect();
    let n = ops.len();
    let mut out = Vec::new();
    for op in &ops {
        out.extend(op.eigenvalues());
    }
    for op in &ops {
        out.push(op.trace_real());
    }
    for i in 0..n {
        for j in i..n {
            out.push(ops[i].inner(ops[j]));
        }
    }
    for i in 0..n {
        for j in i..n {
            let ij = ops[i].matrix() * ops[j].matrix();
            for op in &ops[j..] {
                let t = (&ij * op.matrix()).trace();
                out.push(t.re);
                out.push(t.im);
            }
        }
    }
    out
}

fn fingerprint_mismatch(f1: &[f64], f2: &[f64], scale: f64) -> Option<f64> {
    if f1.len() != f2.len() {
        return Some(f64::INFINITY);
    }
    let worst = f1
        .iter()
        .zip(f2)
        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
        .fold(0.0, f64::max);
    (worst > scale).then_some(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NotEquivalentReason {
    ScenarioMismatch,
    DimensionMismatch { left: usize, right: usize },
    RankMismatch { left: usize, right: usize },
    FingerprintMismatch { deviation: f64 },
    SpectrumMismatch { deviation: f64 },
    ResidualTooLarge { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Equivalent,
    NotEquivalent(NotEquivalentReason),
    Undetermined,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Equivalent => "equivalent",
            Verdict::NotEquivalent(_) => "not_equivalent",
            Verdict::Undetermined => "undetermined",
        }
    }
}

/// Outcome of [`seo_equivalent`]. For `Equivalent`, `unitary` maps the SEO
/// of the second assemblage onto that of the first:
/// `B¹ ⊕ 0 = U (B² ⊕ 0) U†`.
#[derive(Debug, Clone)]
pub struct EquivalenceCertificate {
    pub verdict: Verdict,
    pub unitary: Option<ComplexMatrix>,
    pub residual: f64,
    pub seed: u64,
    pub attempts: usize,
}

impl EquivalenceCertificate {
    pub fn is_equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }

    pub fn to_json_value(&self) -> Value {
        let reason = match &self.verdict {
            Verdict::NotEquivalent(r) => serde_json::to_value(r).expect("reason serializes"),
            _ => Value::Null,
        };
        json!({
            "verdict": self.verdict.name(),
            "reason": reason,
            "residual": self.residual,
            "seed": self.seed,
            "attempts": self.attempts,
            "unitary": self.unitary.as_ref().map(matrix_to_json),
        })
    }
}

/// `max ‖B¹ ⊕ 0 − U (B² ⊕ 0) U†‖_F`, recomputed from the assemblages.
pub fn equivalence_residual(
    first: &Assemblage,
    second: &Assemblage,
    u: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<f64> {
    let e1 = compute_seo(first, tol)?.embedded();
    let e2 = compute_seo(second, tol)?.embedded();
    if e1.scenario() != e2.scenario() || u.nrows() != e1.dim() || u.ncols() != e2.dim() {
        return Ok(f64::INFINITY);
    }
    Ok(e1.max_distance(&e2.congruence(u)))
}

/// Decides whether two assemblages share an SEO up to a unitary.
///
/// Alignment diagonalizes a seeded random combination `Σ c_{a,x} B_{a|x}`
/// in both frames, refines degenerate eigenspaces with further random
/// combinations, fixes eigenvector phases from the off-diagonal structure
/// of the observables and checks the resulting unitary.
pub fn seo_equivalent(
    first: &Assemblage,
    second: &Assemblage,
    seed: u64,
    tol: &Tolerances,
) -> Result<EquivalenceCertificate> {
    let mut cert = EquivalenceCertificate {
        verdict: Verdict::Undetermined,
        unitary: None,
        residual: f64::INFINITY,
        seed,
        attempts: 0,
    };
    let s1 = first.scenario();
    let s2 = second.scenario();
    if (s1.inputs, s1.outcomes) != (s2.inputs, s2.outcomes) {
        cert.verdict = Verdict::NotEquivalent(NotEquivalentReason::ScenarioMismatch);
        return Ok(cert);
    }
    if s1.dim != s2.dim {
        cert.verdict = Verdict::NotEquivalent(NotEquivalentReason::DimensionMismatch {
            left: s1.dim,
            right: s2.dim,
        });
        return Ok(cert);
    }
    let seo1 = compute_seo(first, tol)?;
    let seo2 = compute_seo(second, tol)?;
    if seo1.rank() != seo2.rank() {
        cert.verdict = Verdict::NotEquivalent(NotEquivalentReason::RankMismatch {
            left: seo1.rank(),
            right: seo2.rank(),
        });
        return Ok(cert);
    }
    let r = seo1.rank();
    let fp_scale = 10.0 * tol.equiv * r as f64;
    if let Some(deviation) =
        fingerprint_mismatch(&class_fingerprint(&seo1), &class_fingerprint(&seo2), fp_scale)
    {
        cert.verdict = Verdict::NotEquivalent(NotEquivalentReason::FingerprintMismatch { deviation });
        return Ok(cert);
    }

    let b1: Vec<&HermitianOperator> = seo1.observables.iter().collect();
    let b2: Vec<&HermitianOperator> = seo2.observables.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=tol.retry_max.max(1) {
        cert.attempts = attempt;
        match align(&b1, &b2, &mut rng, tol) {
            Alignment::Mismatch(deviation) => {
                cert.verdict = Verdict::NotEquivalent(NotEquivalentReason::SpectrumMismatch { deviation });
                return Ok(cert);
            }
            Alignment::Found { unitary: uk, residual, determined } => {
                if residual <= tol.equiv {
                    let u = lift_unitary(&seo1.projector, &uk, &seo2.projector);
                    let full = seo1.embedded().max_distance(&seo2.embedded().congruence(&u));
                    if full <= tol.equiv && unitarity_defect(&u) <= tol.spec * (r as f64).max(1.0) {
                        cert.verdict = Verdict::Equivalent;
                        cert.residual = full;
                        cert.unitary = Some(u);
                        return Ok(cert);
                    }
                }
                cert.residual = cert.residual.min(residual);
                if determined {
                    cert.verdict =
                        Verdict::NotEquivalent(NotEquivalentReason::ResidualTooLarge { residual });
                    return Ok(cert);
                }
            }
        }
    }
    Ok(cert)
}

enum Alignment {
    Mismatch(f64),
    /// `determined` is set when the unitary is unique up to a global phase,
    /// so a large residual rules out equivalence.
    Found {
        unitary: ComplexMatrix,
        residual: f64,
        determined: bool,
    },
}

const REFINEMENT_ROUNDS: usize = 3;

fn random_combination(ops: &[&HermitianOperator], coeffs: &[f64]) -> HermitianOperator {
    let mut h = HermitianOperator::zeros(ops[0].dim());
    for (op, &w) in ops.iter().zip(coeffs) {
        h = h.add(&op.scale(w));
    }
    h
}

/// Splits ascending eigenvalues into runs separated by gaps above `gap`.
fn clusters(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(run) if v - values[run[run.len() - 1]] <= gap => run.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

fn columns(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

fn align<R: Rng>(
    b1: &[&HermitianOperator],
    b2: &[&HermitianOperator],
    rng: &mut R,
    tol: &Tolerances,
) -> Alignment {
    let r = b1[0].dim();
    // Each entry pairs matching subspaces of the two frames.
    let mut blocks: Vec<(ComplexMatrix, ComplexMatrix)> =
        vec![(ComplexMatrix::identity(r, r), ComplexMatrix::identity(r, r))];
    let mut degenerate = false;
    for round in 0..=REFINEMENT_ROUNDS {
        let coeffs: Vec<f64> = (0..b1.len()).map(|_| rng.sample(StandardNormal)).collect();
        let weight: f64 = coeffs.iter().map(|w| w.abs()).sum();
        let h1 = random_combination(b1, &coeffs);
        let h2 = random_combination(b2, &coeffs);
        let scale = h1.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let gap = 1e-6 * scale;
        let mismatch_tol = 10.0 * tol.equiv * weight.max(1.0);
        let mut next = Vec::new();
        degenerate = false;
        for (s1, s2) in &blocks {
            if s1.ncols() == 1 && round > 0 {
                next.push((s1.clone(), s2.clone()));
                continue;
            }
            let m1 = h1.congruence(&s1.adjoint());
            let m2 = h2.congruence(&s2.adjoint());
            let e1 = eig_hermitian(&m1);
            let e2 = eig_hermitian(&m2);
            let deviation = e1
                .values
                .iter()
                .zip(&e2.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if deviation > mismatch_tol {
                return Alignment::Mismatch(deviation);
            }
            let v1 = s1 * &e1.vectors;
            let v2 = s2 * &e2.vectors;
            for run in clusters(&e1.values, gap) {
                degenerate |= run.len() > 1;
                next.push((columns(&v1, &run), columns(&v2, &run)));
            }
        }
        blocks = next;
        if !degenerate {
            break;
        }
    }
    let idx: Vec<usize> = (0..r).collect();
    let mut v1 = ComplexMatrix::zeros(r, r);
    let mut v2 = ComplexMatrix::zeros(r, r);
    let mut col = 0;
    for (s1, s2) in &blocks {
        for j in 0..s1.ncols() {
            v1.set_column(col, &s1.column(j));
            v2.set_column(col, &s2.column(j));
            col += 1;
        }
    }
    let _ = idx;
    let hat1: Vec<ComplexMatrix> = b1.iter().map(|b| v1.adjoint() * b.matrix() * &v1).collect();
    let hat2: Vec<ComplexMatrix> = b2.iter().map(|b| v2.adjoint() * b.matrix() * &v2).collect();
    let (phases, connected) = fit_phases(&hat1, &hat2);
    let mut v1d = v1.clone();
    for j in 0..r {
        for i in 0..r {
            v1d[(i, j)] *= phases[j];
        }
    }
    let unitary = v1d * v2.adjoint();
    let residual = b1
        .iter()
        .zip(b2)
        .map(|(p, q)| frobenius(&(p.matrix() - &unitary * q.matrix() * unitary.adjoint())))
        .fold(0.0, f64::max);
    Alignment::Found {
        unitary,
        residual,
        determined: connected && !degenerate,
    }
}

/// Diagonal phases `d` with `hat1 ≈ D hat2 D†`, grown along the strongest
/// couplings. Returns whether every index was reached through a coupling.
fn fit_phases(hat1: &[ComplexMatrix], hat2: &[ComplexMatrix]) -> (Vec<num_complex::Complex64>, bool) {
    let r = hat1[0].nrows();
    let one = c(1.0, 0.0);
    let mut phases = vec![one; r];
    let mut fixed = vec![false; r];
    fixed[0] = true;
    let mut connected = true;
    for _ in 1..r {
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for (n, h2) in hat2.iter().enumerate() {
            for j in (0..r).filter(|&j| fixed[j]) {
                for k in (0..r).filter(|&k| !fixed[k]) {
                    let w = h2[(j, k)].norm();
                    if best.is_none_or(|(bw, ..)| w > bw) {
                        best = Some((w, n, j, k));
                    }
                }
            }
        }
        let (w, n, j, k) = best.expect("an unfixed index remains");
        if w < 1e-9 {
            connected = false;
            let k = (0..r).find(|&k| !fixed[k]).expect("an unfixed index remains");
            fixed[k] = true;
            continue;
        }
        // hat1_jk = d_j conj(d_k) hat2_jk
        let ratio = hat1[n][(j, k)] / (phases[j] * hat2[n][(j, k)]);
        let dk = ratio.conj();
        let norm = dk.norm();
        phases[k] = if norm > 0.0 { dk / norm } else { one };
        fixed[k] = true;
    }
    (phases, connected)
}

/// `U = Π₁† U_K Π₂ + Q₁† Q₂`, completing `U_K` with an isometry between the
/// orthogonal complements.
fn lift_unitary(pi1: &ComplexMatrix, uk: &ComplexMatrix, pi2: &ComplexMatrix) -> ComplexMatrix {
    let q1 = complement_isometry(pi1);
    let q2 = complement_isometry(pi2);
    pi1.adjoint() * uk * pi2 + q1.adjoint() * q2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemblage::SchmidtVector;
    use crate::families::{computational_and_fourier, pauli_xz, random_unitary};

    #[test]
    fn seo_of_pure_schmidt_assemblage_is_the_measurement() {
        let meas = computational_and_fourier(3);
        let mu = SchmidtVector::complete(&[0.6, 0.5]).unwrap();
        let asm = Assemblage::from_pure_schmidt(&mu, &meas).unwrap();
        let seo = compute_seo(&asm, &Tolerances::default()).unwrap();
        assert_eq!(seo.rank(), 3);
        assert!(seo.embedded().max_distance(meas.family()) < 1e-12);
    }

    #[test]
    fn unitary_images_are_equivalent() {
        let tol = Tolerances::default();
        let asm = Assemblage::canonical(&pauli_xz());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_unitary(2, &mut rng);
        let other = asm.congruence(&v);
        let cert = seo_equivalent(&other, &asm, 11, &tol).unwrap();
        assert!(cert.is_equivalent(), "{:?}", cert.verdict);
        let u = cert.unitary.unwrap();
        assert!(equivalence_residual(&other, &asm, &u, &tol).unwrap() <= tol.equiv);
    }

    #[test]
    fn fingerprint_separates_ranks() {
        let tol = Tolerances::default();
        let three = compute_seo(&Assemblage::canonical(&computational_and_fourier(3)), &tol).unwrap();
        let mu = SchmidtVector::new(vec![0.8, 0.6, 0.0], 1e-12).unwrap().allowing_rank_deficiency();
        let two = compute_seo(
            &Assemblage::from_pure_schmidt(&mu, &computational_and_fourier(3)).unwrap(),
            &tol,
        )
        .unwrap();
        assert_eq!(two.rank(), 2);
        assert_ne!(class_fingerprint(&three).len(), class_fingerprint(&two).len());
    }

    #[test]
    fn degenerate_single_measurement_is_resolved() {
        // One input, two rank-2 projectors on C^4: every random combination is
        // degenerate and alignment falls back to verification.
        let tol = Tolerances::default();
        let p = HermitianOperator::from_real_diagonal(&[0.125, 0.125, 0.0, 0.0]);
        let q = HermitianOperator::from_real_diagonal(&[0.0, 0.0, 0.375, 0.375]);
        let asm = Assemblage::new(vec![vec![p, q]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random_unitary(4, &mut rng);
        let cert = seo_equivalent(&asm.congruence(&v), &asm, 1, &tol).unwrap();
        assert!(cert.is_equivalent(), "{:?}", cert.verdict);
    }
}
