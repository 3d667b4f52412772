use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steerkit_core::families::{computational_and_fourier, pauli_xz, random_assemblage, random_measurements, random_unitary};
use steerkit_core::filter::{
    apply_filter, dilute_to_inf, distill_to_sup, er_random_pure, optimal_state, p_succ_bounds, synthesize_filter,
};
use steerkit_core::fixtures::ququart_pair;
use steerkit_core::linalg::{c, identity, ComplexMatrix};
use steerkit_core::robustness::steering_robustness;
use steerkit_core::seo::{compute_seo, seo_equivalent};
use steerkit_core::{Assemblage, HermitianOperator, SchmidtVector, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn random_invertible(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let u = random_unitary(d, rng);
    let v = random_unitary(d, rng);
    let s: Vec<num_complex::Complex64> = (0..d).map(|_| c(rng.random_range(0.3..1.0), 0.0)).collect();
    u * ComplexMatrix::from_diagonal(&s.into()) * v
}


fn random_member(asm: &Assemblage, rng: &mut ChaCha8Rng) -> Assemblage {
    let out = asm.congruence(&random_invertible(asm.dim(), rng));
    let p = out.reduced_state(1e-8).unwrap().trace_real();
    out.scale(1.0 / p)
}

fn check_round_trip(seed: u64) -> Result<(), TestCaseError> {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2 + (seed % 2) as usize;
    let meas = random_measurements(d, 2, 2, &mut rng);
    let a = random_assemblage(&meas, d * d, &mut rng).unwrap();
    let b = random_member(&a, &mut rng);
    let cert = seo_equivalent(&a, &b, seed, &t).unwrap();
    prop_assert!(cert.is_equivalent(), "{:?}", cert.verdict);
    let u = cert.unitary.unwrap();
    let forward = synthesize_filter(&a, &b, &u, &t).unwrap();
    let (out, p) = apply_filter(&b, &forward.kraus, &t).unwrap();
    prop_assert!(out.max_distance(&a) <= 1e-7);
    prop_assert!((p - forward.p_succ).abs() <= 1e-9);
    let (lo, hi) = p_succ_bounds(&a.reduced_state(t.ns).unwrap(), &b.reduced_state(t.ns).unwrap(), t.rank);
    prop_assert!(lo - 1e-9 <= p && p <= hi + 1e-9, "{lo} {p} {hi}");
    let backward = synthesize_filter(&b, &a, &u.adjoint(), &t).unwrap();
    let (back, q) = apply_filter(&a, &backward.kraus, &t).unwrap();
    prop_assert!(back.max_distance(&b) <= 1e-7);
    let (lo, hi) = p_succ_bounds(&b.reduced_state(t.ns).unwrap(), &a.reduced_state(t.ns).unwrap(), t.rank);
    prop_assert!(lo - 1e-9 <= q && q <= hi + 1e-9);
    Ok(())
}

#[test]
fn round_trip_on_fixed_seeds() {
    for seed in 0..10 {
        check_round_trip(seed).unwrap();
    }
}

#[test]
fn filter_between_different_supports_is_contractive() {
    let t = tol();
    let xz = pauli_xz();
    let padded = |mu: Vec<f64>| {
        let lifted = steerkit_core::MeasurementAssemblage::from_family(xz.family().map(|e| {
            let mut m = ComplexMatrix::zeros(3, 3);
            m.view_mut((0, 0), (2, 2)).copy_from(e.matrix());
            m[(2, 2)] = c(0.5, 0.0);
            HermitianOperator::hermitian_part(&m)
        }));
        Assemblage::from_pure_schmidt(&SchmidtVector::new(mu, t.ns).unwrap().allowing_rank_deficiency(), &lifted).unwrap()
    };
    let source = padded(vec![0.6, 0.8, 0.0]);
    let target = Assemblage::canonical(&xz);
    let tgt3 = target.congruence(&{
        let mut iso = ComplexMatrix::zeros(3, 2);
        iso[(1, 0)] = c(1.0, 0.0);
        iso[(2, 1)] = c(1.0, 0.0);
        iso
    });
    let cert = seo_equivalent(&tgt3, &source, 1, &t).unwrap();
    assert!(cert.is_equivalent(), "{:?}", cert.verdict);
    let f = synthesize_filter(&tgt3, &source, &cert.unitary.unwrap(), &t).unwrap();
    let (out, _) = apply_filter(&source, &f.kraus, &t).unwrap();
    assert!(out.max_distance(&tgt3) < 1e-7);
}

#[test]
fn qutrit_distillation_reaches_the_supremum() {
    let t = tol();
    let at = computational_and_fourier(3).transpose();
    for prefix in [[0.5, 0.6], [0.3, 0.3], [0.7, 0.2]] {
        let mu = SchmidtVector::complete(&prefix).unwrap();
        let asm = Assemblage::from_pure_schmidt(&mu, &at).unwrap();
        let res = distill_to_sup(&asm, 1e-3, &t).unwrap();
        assert!(res.guarantee_met);
        let sr = steering_robustness(&res.output, &t).unwrap().value;
        assert!(sr >= 0.2679 - 1e-3 - 1e-4, "{sr}");
        let min_sq = mu.coefficients().iter().map(|m| m * m).fold(f64::INFINITY, f64::min);
        assert!((res.filter.p_succ - 3.0 * min_sq).abs() < 1e-8, "{} vs {}", res.filter.p_succ, 3.0 * min_sq);
        let (out, _) = apply_filter(&asm, &res.filter.kraus, &t).unwrap();
        assert!(out.max_distance(&res.output) < 1e-7);
    }
}

#[test]
fn qubit_distillation_hits_canonical_xz() {
    let t = tol();
    let m1: f64 = 0.5;
    let mu = SchmidtVector::complete(&[m1]).unwrap();
    let asm = Assemblage::from_pure_schmidt(&mu, &pauli_xz()).unwrap();
    let res = distill_to_sup(&asm, 1e-3, &t).unwrap();
    assert!(res.output.max_distance(&Assemblage::canonical(&pauli_xz())) < 1e-7);
    assert!((res.filter.p_succ - 2.0 * m1 * m1).abs() < 1e-9);
}

#[test]
fn dilution_goes_below_epsilon_and_stays_in_class() {
    let t = tol();
    let asm = Assemblage::canonical(&computational_and_fourier(3));
    let res = dilute_to_inf(&asm, 0.05, &t).unwrap();
    let sr = steering_robustness(&res.output, &t).unwrap().value;
    assert!(sr <= 0.05, "{sr}");
    assert!(sr <= res.er_bound + 1e-6);
    assert!(seo_equivalent(&asm, &res.output, 0, &t).unwrap().is_equivalent());
    let (out, p) = apply_filter(&asm, &res.filter.kraus, &t).unwrap();
    assert!(out.max_distance(&res.output) < 1e-7);
    assert!(p > 0.0);
}

#[test]
fn optimal_state_separates_from_maximal_entanglement() {
    let t = tol();
    let (a, _) = ququart_pair(&t).unwrap();
    let res = optimal_state(&a, 1e-3, &t).unwrap();
    assert!((res.rho_ab.trace_real() - 1.0).abs() < 1e-9);
    assert!(res.rho_ab.is_psd(t.psd));
    let sr = steering_robustness(&res.assemblage, &t).unwrap().value;
    assert!(sr >= 0.1481 - 1e-3 - 1e-3, "{sr}");
    assert!(sr > 0.0740 + 0.05);
    assert!(res.guarantee_met);
}

#[test]
fn er_bound_for_dilution_coefficients() {
    let e: f64 = 0.05;
    let r = 3usize;
    let ep = e * e / (2.0 * (r as f64).powi(4));
    let mu = [(1.0 - 2.0 * ep).sqrt(), ep.sqrt(), ep.sqrt()];
    assert!(er_random_pure(&mu, r, r) <= e);
}

#[test]
fn identity_filter_on_identical_assemblages() {
    let t = tol();
    let asm = Assemblage::canonical(&pauli_xz());
    let f = synthesize_filter(&asm, &asm, &identity(2), &t).unwrap();
    assert!((f.p_succ - 1.0).abs() < 1e-12);
    assert!((&f.kraus - identity(2)).norm() < 1e-12);
    let json = f.to_json_value();
    assert_eq!(json["construction"]["kind"], "equivalence");
}

#[test]
fn non_equivalent_unitary_is_refused() {
    let t = tol();
    let asm = Assemblage::canonical(&pauli_xz());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_unitary(2, &mut rng);
    assert!(synthesize_filter(&asm, &asm, &u, &t).is_err());
}

#[test]
fn tomographic_perturbation_changes_class() {
    let t = tol();
    let asm = Assemblage::canonical(&computational_and_fourier(3));
    let seo = compute_seo(&asm, &t).unwrap();
    let bumped = steerkit_core::MeasurementAssemblage::from_family(seo.observables.family().map(|e| e.clone()));
    let mut rows = bumped.rows().to_vec();
    let shift = HermitianOperator::from_real_diagonal(&[1e-3, -1e-3, 0.0]);
    rows[1][0] = rows[1][0].add(&shift);
    rows[1][1] = rows[1][1].sub(&shift);
    let other = Assemblage::canonical(&steerkit_core::MeasurementAssemblage::new(rows).unwrap());
    assert!(!seo_equivalent(&asm, &other, 0, &t).unwrap().is_equivalent());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn forward_backward_round_trip(seed in 100u64..100_000) {
        check_round_trip(seed)?;
    }
}
