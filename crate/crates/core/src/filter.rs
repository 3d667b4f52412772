//! One-sided local filters between SEO-equivalent assemblages, and the
//! filters that move an assemblage to the top or bottom of its class.

use serde_json::{json, Value};

use crate::assemblage::{Assemblage, MeasurementAssemblage, SchmidtVector};
use crate::error::{Error, Result};
use crate::io::matrix_to_json;
use crate::linalg::{
    complement_isometry, frobenius, identity, pinv_sqrt, range_projector, sqrt_psd, ComplexMatrix,
    HermitianOperator,
};
use crate::robustness::{incompatibility_robustness, steering_robustness, Witness};
use crate::seo::compute_seo;
use crate::tol::Tolerances;

/// How a filter was obtained.
#[derive(Debug, Clone)]
pub enum Construction {
    /// From an SEO-equivalence unitary.
    Equivalence { unitary: ComplexMatrix },
    /// Towards the most steerable member of the class.
    Distillation { eta: HermitianOperator, delta: f64 },
    /// Towards a weakly steerable member of the class.
    Dilution { schmidt: Vec<f64> },
    /// Supplied by the caller.
    Custom,
}

/// Kraus operator `K` of a one-sided filter together with its success
/// probability on the source assemblage.
#[derive(Debug, Clone)]
pub struct Filter {
    pub kraus: ComplexMatrix,
    pub p_succ: f64,
    pub construction: Construction,
    /// Seed of the equivalence test that produced the unitary, if any.
    pub seed: Option<u64>,
}

impl Filter {
    pub fn to_json_value(&self) -> Value {
        let construction = match &self.construction {
            Construction::Equivalence { unitary } => json!({
                "kind": "equivalence",
                "unitary": matrix_to_json(unitary),
            }),
            Construction::Distillation { eta, delta } => json!({
                "kind": "distillation",
                "eta": matrix_to_json(eta.matrix()),
                "delta": delta,
            }),
            Construction::Dilution { schmidt } => json!({
                "kind": "dilution",
                "schmidt": schmidt,
            }),
            Construction::Custom => json!({ "kind": "custom" }),
        };
        json!({
            "kraus": matrix_to_json(&self.kraus),
            "p_succ": self.p_succ,
            "construction": construction,
            "seed": self.seed,
        })
    }
}

/// `σ'_{a|x} = K σ_{a|x} K† / p` with `p = tr(K ρ_B K†)`.
pub fn apply_filter(asm: &Assemblage, k: &ComplexMatrix, tol: &Tolerances) -> Result<(Assemblage, f64)> {
    if k.ncols() != asm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "filter acts on dimension {}, assemblage has {}",
            k.ncols(),
            asm.dim()
        )));
    }
    let kk = HermitianOperator::hermitian_part(&(k.adjoint() * k));
    let lambda_max = kk.lambda_max();
    if lambda_max > 1.0 + tol.psd {
        return Err(Error::NotContractive { lambda_max });
    }
    let rho = asm.reduced_state(tol.ns)?;
    let p_succ = rho.inner(&kk);
    if p_succ <= tol.p_floor {
        return Err(Error::FilterAnnihilates { p_succ });
    }
    let out = asm.congruence(k).scale(1.0 / p_succ);
    Ok((out, p_succ))
}

/// Single-Kraus filter from `source` to `target` given a unitary with
/// `B_target ⊕ 0 = U (B_source ⊕ 0) U†`:
/// `K = α ρ_t^{1/2} U ρ_s^{-1/2} + W`, `α² = 1 / λ_max(K̃†K̃)`.
///
/// `W` is `1 − Π_s` when both supports coincide, and otherwise an isometry
/// from the complement of the source support onto the complement of the
/// target support.
pub fn synthesize_filter(
    target: &Assemblage,
    source: &Assemblage,
    u: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Filter> {
    let seo_t = compute_seo(target, tol)?;
    let seo_s = compute_seo(source, tol)?;
    let e_t = seo_t.embedded();
    let e_s = seo_s.embedded();
    if e_t.scenario() != e_s.scenario() || u.nrows() != e_t.dim() || u.ncols() != e_s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target {:?}, source {:?}, unitary {}x{}",
            e_t.scenario(),
            e_s.scenario(),
            u.nrows(),
            u.ncols()
        )));
    }
    let residual = e_t.max_distance(&e_s.congruence(u));
    if residual > tol.equiv {
        return Err(Error::NotEquivalent { residual });
    }
    let rho_t = &seo_t.reduced;
    let rho_s = &seo_s.reduced;
    let root_t = sqrt_psd(rho_t, tol.psd)?;
    let (inv_root_s, _) = pinv_sqrt(rho_s, tol.rank)?;
    let k_tilde = root_t.matrix() * u * inv_root_s.matrix();
    let gram = HermitianOperator::hermitian_part(&(k_tilde.adjoint() * &k_tilde));
    let alpha2 = 1.0 / gram.lambda_max();
    let p_t = seo_t.projector.adjoint() * &seo_t.projector;
    let p_s = seo_s.projector.adjoint() * &seo_s.projector;
    let completion = if frobenius(&(&p_t - &p_s)) <= tol.spec {
        identity(p_s.nrows()) - &p_s
    } else {
        complement_isometry(&seo_t.projector).adjoint() * complement_isometry(&seo_s.projector)
    };
    let kraus = k_tilde.scale(alpha2.sqrt()) + completion;
    Ok(Filter {
        kraus,
        p_succ: alpha2,
        construction: Construction::Equivalence { unitary: u.clone() },
        seed: None,
    })
}

/// `[λ_min(ρ_s) / λ_max(ρ_t), λ_max(ρ_s) / λ_min(ρ_t)]` with `λ_min` the
/// smallest nonzero eigenvalue.
pub fn p_succ_bounds(rho_target: &HermitianOperator, rho_source: &HermitianOperator, rank_tol: f64) -> (f64, f64) {
    let nonzero_min = |h: &HermitianOperator| {
        let vals = h.eigenvalues();
        let max = vals.last().copied().unwrap_or(0.0);
        vals.into_iter()
            .find(|&l| l > rank_tol * max)
            .unwrap_or(max)
    };
    let lo = nonzero_min(rho_source) / rho_target.lambda_max();
    let hi = rho_source.lambda_max() / nonzero_min(rho_target);
    (lo, hi)
}

/// Regularization `(1 − δ) η + δ (1 − Π_η) / (d − r)`.
pub fn regularize_state(eta: &HermitianOperator, delta: f64, rank_tol: f64) -> Result<HermitianOperator> {
    let (pi, r) = range_projector(eta, rank_tol)?;
    let d = eta.dim();
    if r == d {
        return Ok(eta.clone());
    }
    let complement = HermitianOperator::hermitian_part(&(identity(d) - pi.adjoint() * &pi));
    Ok(eta.scale(1.0 - delta).add(&complement.scale(delta / (d - r) as f64)))
}

const MAX_SHRINK_ROUNDS: usize = 6;
const DELTA_CAP: f64 = 1e-3;

/// Candidate states `η` for `η^{1/2} B η^{1/2}`: the maximally mixed state
/// first, then the regularized optimum of the incompatibility program with
/// shrinking `δ`.
struct EtaSearch {
    ir: f64,
    eta: HermitianOperator,
    delta: f64,
    certified_sr: f64,
    output: Assemblage,
    guarantee_met: bool,
}

fn search_eta(b: &MeasurementAssemblage, eps: f64, tol: &Tolerances) -> Result<EtaSearch> {
    let ir_report = incompatibility_robustness(b, tol)?;
    let ir = ir_report.value;
    let r = b.dim();
    let build = |eta: &HermitianOperator| -> Result<Assemblage> {
        let root = sqrt_psd(eta, tol.psd)?;
        Ok(Assemblage::from_family(b.family().congruence(root.matrix())))
    };
    let mixed = HermitianOperator::identity(r).scale(1.0 / r as f64);
    let canonical = build(&mixed)?;
    let sr = steering_robustness(&canonical, tol)?.value;
    if sr >= ir - eps {
        return Ok(EtaSearch {
            ir,
            eta: mixed,
            delta: 0.0,
            certified_sr: sr,
            output: canonical,
            guarantee_met: true,
        });
    }
    let Witness::Incompatibility { eta: eta_opt, .. } = ir_report.witness else {
        unreachable!("incompatibility program returns an incompatibility witness");
    };
    let s = b.scenario();
    let mut delta = (eps / (4.0 * (s.inputs * s.outcomes * r) as f64)).min(DELTA_CAP);
    let mut best: Option<EtaSearch> = None;
    for _ in 0..=MAX_SHRINK_ROUNDS {
        let eta = regularize_state(&eta_opt, delta, tol.rank)?;
        let output = build(&eta)?;
        let certified_sr = steering_robustness(&output, tol)?.value;
        let guarantee_met = certified_sr >= ir - eps;
        let candidate = EtaSearch {
            ir,
            eta,
            delta,
            certified_sr,
            output,
            guarantee_met,
        };
        if guarantee_met {
            return Ok(candidate);
        }
        if best.as_ref().is_none_or(|b| candidate.certified_sr > b.certified_sr) {
            best = Some(candidate);
        }
        delta /= 10.0;
    }
    Ok(best.expect("at least one round ran"))
}

#[derive(Debug, Clone)]
pub struct Distillation {
    pub filter: Filter,
    pub output: Assemblage,
    /// `IR(B)`, the supremum of the class.
    pub ir: f64,
    pub certified_sr: f64,
    pub guarantee_met: bool,
}

/// Filter to a member of the class with `SR ≥ IR(B) − ε`.
pub fn distill_to_sup(asm: &Assemblage, eps: f64, tol: &Tolerances) -> Result<Distillation> {
    let seo = compute_seo(asm, tol)?;
    let found = search_eta(&seo.observables, eps, tol)?;
    let lift = seo.projector.adjoint();
    let output = found.output.congruence(&lift);
    let mut filter = synthesize_filter(&output, asm, &identity(asm.dim()), tol)?;
    filter.construction = Construction::Distillation {
        eta: found.eta,
        delta: found.delta,
    };
    Ok(Distillation {
        filter,
        output,
        ir: found.ir,
        certified_sr: found.certified_sr,
        guarantee_met: found.guarantee_met,
    })
}

/// `ER_r(ψ) = μ₁ μ₂ d_A d_B` for descending Schmidt coefficients.
pub fn er_random_pure(mu: &[f64], da: usize, db: usize) -> f64 {
    let mut sorted = mu.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    match sorted.as_slice() {
        [m1, m2, ..] => m1 * m2 * (da * db) as f64,
        _ => 0.0,
    }
}

#[derive(Debug, Clone)]
pub struct Dilution {
    pub filter: Filter,
    pub output: Assemblage,
    pub schmidt: SchmidtVector,
    /// `ER_r` of the Schmidt state, an upper bound on `SR(output)`.
    pub er_bound: f64,
}

/// Filter to the member generated by `μ₁ = sqrt(1 − (r−1)ε')`,
/// `μ_{i>1} = sqrt(ε')`, `ε' = ε² / (2 r⁴)`.
pub fn dilute_to_inf(asm: &Assemblage, eps: f64, tol: &Tolerances) -> Result<Dilution> {
    let seo = compute_seo(asm, tol)?;
    let r = seo.rank();
    let eps_prime = eps * eps / (2.0 * ((r * r) as f64).powi(2));
    let mut coeffs = vec![eps_prime.sqrt(); r];
    coeffs[0] = (1.0 - (r - 1) as f64 * eps_prime).sqrt();
    let schmidt = SchmidtVector::new(coeffs, tol.ns)?;
    let on_support = Assemblage::from_pure_schmidt(&schmidt, &seo.observables)?;
    let output = on_support.congruence(&seo.projector.adjoint());
    let mut filter = synthesize_filter(&output, asm, &identity(asm.dim()), tol)?;
    filter.construction = Construction::Dilution {
        schmidt: schmidt.coefficients().to_vec(),
    };
    Ok(Dilution {
        filter,
        er_bound: er_random_pure(schmidt.coefficients(), r, r),
        output,
        schmidt,
    })
}

#[derive(Debug, Clone)]
pub struct OptimalState {
    /// `d (1 ⊗ η^{1/2}) |ψ⟩⟨ψ| (1 ⊗ η^{1/2})` with `|ψ⟩` maximally entangled.
    pub rho_ab: HermitianOperator,
    pub assemblage: Assemblage,
    pub eta: HermitianOperator,
    pub delta: f64,
    /// `IR(A)`.
    pub ir: f64,
    pub certified_sr: f64,
    pub guarantee_met: bool,
}

/// Bipartite state whose assemblage under `meas` has `SR ≥ IR(A) − ε`.
///
/// The generated assemblage is `η^{1/2} A^T η^{1/2}`, so `η` is searched
/// with the incompatibility program of `A^T`.
pub fn optimal_state(meas: &MeasurementAssemblage, eps: f64, tol: &Tolerances) -> Result<OptimalState> {
    let d = meas.dim();
    let found = search_eta(&meas.transpose(), eps, tol)?;
    let root = sqrt_psd(&found.eta, tol.psd)?;
    let mut phi = crate::linalg::ComplexVector::zeros(d * d);
    for i in 0..d {
        phi[i * d + i] = crate::linalg::c(1.0, 0.0);
    }
    let lift = crate::linalg::kron(&identity(d), root.matrix());
    let rho_ab = HermitianOperator::outer(&(lift * phi));
    let assemblage = Assemblage::from_state_and_measurements(&rho_ab, meas, tol)?;
    Ok(OptimalState {
        rho_ab,
        assemblage,
        eta: found.eta,
        delta: found.delta,
        ir: found.ir,
        certified_sr: found.certified_sr,
        guarantee_met: found.guarantee_met,
    })
}
