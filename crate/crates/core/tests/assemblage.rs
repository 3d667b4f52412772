use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use steerkit_core::assemblage::Violation;
use steerkit_core::families::{computational_and_fourier, pauli_xz, random_measurements, random_unitary};
use steerkit_core::linalg::{kron, partial_trace_a};
use steerkit_core::{Assemblage, Error, HermitianOperator, MeasurementAssemblage, SchmidtVector, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn canonical_assemblages_validate() {
    for meas in [pauli_xz(), computational_and_fourier(3)] {
        assert!(meas.validate(&tol()).passed());
        let asm = Assemblage::canonical(&meas);
        assert!(asm.validate(&tol()).passed());
        let rho = asm.reduced_state(tol().ns).unwrap();
        let d = meas.dim() as f64;
        assert!(rho.distance(&HermitianOperator::identity(meas.dim()).scale(1.0 / d)) < 1e-12);
    }
}

#[test]
fn signalling_family_is_reported_with_one_based_indices() {
    let p0 = HermitianOperator::from_real_diagonal(&[0.5, 0.0]);
    let p1 = HermitianOperator::from_real_diagonal(&[0.0, 0.5]);
    let asm = Assemblage::new(vec![vec![p0.clone(), p1.clone()], vec![p0.scale(2.0), HermitianOperator::zeros(2)]]).unwrap();
    let report = asm.validate(&tol());
    assert!(!report.passed());
    assert!(report.violations.iter().any(|v| matches!(v, Violation::NoSignaling { input: 2, reference: 1, .. })));
    assert!(matches!(asm.reduced_state(tol().ns), Err(Error::NoSignalingViolation { .. })));
    let json = serde_json::to_value(&report.violations[0]).unwrap();
    assert_eq!(json["kind"], "no_signaling");
}

#[test]
fn negative_operators_and_bad_traces_are_reported() {
    let neg = HermitianOperator::from_real_diagonal(&[0.7, -0.2]);
    let rest = HermitianOperator::from_real_diagonal(&[-0.2, 0.7]);
    let asm = Assemblage::new(vec![vec![neg, rest]]).unwrap();
    let report = asm.validate(&tol());
    assert!(report.violations.iter().any(|v| matches!(v, Violation::NotPsd { input: 1, outcome: 1, .. })));
    let heavy = Assemblage::new(vec![vec![HermitianOperator::identity(2), HermitianOperator::zeros(2)]]).unwrap();
    assert!(heavy.validate(&tol()).violations.iter().any(|v| matches!(v, Violation::Trace { .. })));
    assert!(Assemblage::checked(heavy.rows().to_vec(), &tol()).is_err());
}

#[test]
fn incomplete_povm_is_rejected() {
    let e = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
    let meas = MeasurementAssemblage::new(vec![vec![e.clone(), e]]).unwrap();
    assert!(meas.validate(&tol()).violations.iter().any(|v| matches!(v, Violation::Completeness { input: 1, .. })));
}

#[test]
fn shape_errors() {
    let a = HermitianOperator::identity(2);
    let b = HermitianOperator::identity(3);
    assert!(matches!(Assemblage::new(vec![vec![a.clone(), b]]), Err(Error::DimensionMismatch(_))));
    assert!(matches!(Assemblage::new(vec![vec![a.clone()], vec![a.clone(), a]]), Err(Error::DimensionMismatch(_))));
    assert!(Assemblage::new(vec![]).is_err());
}

#[test]
fn schmidt_vectors() {
    let mu = SchmidtVector::complete(&[0.6]).unwrap();
    assert!((mu.coefficients()[1] - 0.8).abs() < 1e-15);
    assert!(SchmidtVector::complete(&[0.9, 0.9]).is_err());
    assert!(SchmidtVector::new(vec![1.0, 0.0], tol().ns).is_ok());
    let zero = SchmidtVector::new(vec![1.0, 0.0], tol().ns).unwrap();
    assert!(matches!(
        Assemblage::from_pure_schmidt(&zero, &pauli_xz()),
        Err(Error::RankDeficientSchmidt(_))
    ));
    let allowed = zero.allowing_rank_deficiency();
    let asm = Assemblage::from_pure_schmidt(&allowed, &pauli_xz()).unwrap();
    assert!(asm.validate(&tol()).passed());
}

#[test]
fn lhs_model_validates() {
    let states = vec![
        HermitianOperator::from_real_diagonal(&[1.0, 0.0]),
        HermitianOperator::from_real_diagonal(&[0.0, 1.0]),
    ];
    let responses = vec![
        vec![vec![1.0, 0.0], vec![0.5, 0.5]],
        vec![vec![0.0, 1.0], vec![0.5, 0.5]],
    ];
    let asm = Assemblage::lhs_from_model(&[0.3, 0.7], &responses, &states, &tol()).unwrap();
    assert!(asm.validate(&tol()).passed());
    assert!((asm.sigma(0, 0).trace_real() - 0.3).abs() < 1e-15);
    assert!(Assemblage::lhs_from_model(&[0.5, 0.6], &responses, &states, &tol()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pure_state_route_matches_schmidt_route(seed in 0u64..10_000, m1 in 0.2f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let meas = random_measurements(2, 2, 2, &mut rng);
        let mu = SchmidtVector::complete(&[m1]).unwrap();
        let direct = Assemblage::from_pure_schmidt(&mu, &meas).unwrap();
        let via_state = Assemblage::from_state_and_measurements(&mu.density(), &meas.transpose(), &tol()).unwrap();
        prop_assert!(direct.max_distance(&via_state) < 1e-12);
        prop_assert!(direct.validate(&tol()).passed());
        let rho = direct.reduced_state(tol().ns).unwrap();
        prop_assert!(rho.distance(&mu.reduced()) < 1e-12);
    }

    #[test]
    fn unitary_and_transpose_preserve_validity(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let meas = random_measurements(3, 2, 3, &mut rng);
        let asm = Assemblage::canonical(&meas);
        let u = random_unitary(3, &mut rng);
        prop_assert!(asm.congruence(&u).validate(&tol()).passed());
        prop_assert!(asm.transpose().validate(&tol()).passed());
        prop_assert!(meas.transpose().validate(&tol()).passed());
    }

    #[test]
    fn reduced_state_of_product_is_marginal(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = steerkit_core::families::random_density(2, 2, &mut rng);
        let b = steerkit_core::families::random_density(2, 1, &mut rng);
        let rho = HermitianOperator::hermitian_part(&kron(a.matrix(), b.matrix()));
        let asm = Assemblage::from_state_and_measurements(&rho, &pauli_xz(), &tol()).unwrap();
        let marginal = partial_trace_a(rho.matrix(), 2, 2).unwrap();
        prop_assert!(asm.reduced_state(tol().ns).unwrap().distance(&marginal) < 1e-12);
        prop_assert!(marginal.distance(&b) < 1e-12);
    }
}
