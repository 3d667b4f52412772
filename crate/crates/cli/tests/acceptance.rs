//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steerkit::commands::{self, Settings};
use steerkit_core::families::{
    computational_and_fourier, pauli_xz, random_assemblage, random_measurements, random_unitary,
};
use steerkit_core::filter::{apply_filter, distill_to_sup, optimal_state, p_succ_bounds, synthesize_filter};
use steerkit_core::fixtures::ququart_pair;
use steerkit_core::linalg::{c, ComplexMatrix};
use steerkit_core::robustness::{
    incompatibility_problem, incompatibility_robustness, steering_problem, steering_robustness,
};
use steerkit_core::rate::simulate_rate;
use steerkit_core::seo::{compute_seo, seo_equivalent};
use steerkit_core::{Assemblage, SchmidtVector, Tolerances};
use steerkit_sdp::export_sdpa;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = fn(&Path) -> Outcome;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn ququart_reproduction(_: &Path) -> Outcome {
    let t = tol();
    let (a, _) = ququart_pair(&t).unwrap();
    let start = Instant::now();
    let ir = incompatibility_robustness(&a, &t).unwrap().value;
    let ir_time = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let sr = steering_robustness(&Assemblage::canonical(&a.transpose()), &t).unwrap().value;
    let sr_time = start.elapsed().as_secs_f64();
    let pass = (ir - 0.1481).abs() <= 1e-3 && (sr - 0.0740).abs() <= 1e-3 && ir_time < 10.0 && sr_time < 10.0;
    outcome(
        pass,
        format!("IR = {ir:.6} ({ir_time:.2} s), SR(A^T/4) = {sr:.6} ({sr_time:.2} s); targets 0.1481, 0.0740 +- 1e-3"),
    )
}

fn qutrit_supremum(_: &Path) -> Outcome {
    let t = tol();
    let a = computational_and_fourier(3);
    let ir = incompatibility_robustness(&a, &t).unwrap().value;
    let sr = steering_robustness(&Assemblage::canonical(&a.transpose()), &t).unwrap().value;
    let pass = (ir - 0.2679).abs() <= 1e-4 && (sr - 0.2679).abs() <= 1e-4;
    outcome(pass, format!("IR = {ir:.6}, SR(A^T/3) = {sr:.6}; target 0.2679 +- 1e-4"))
}

/// Uniform point of the open triangle `μ₁² + μ₂² < 1`, away from its edges.
fn triangle_point(rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let m1: f64 = rng.random_range(0.05..1.0);
        let m2: f64 = rng.random_range(0.05..1.0);
        if m1 * m1 + m2 * m2 < 1.0 - 0.0025 {
            return (m1, m2);
        }
    }
}

fn distillation(dir: &Path) -> Outcome {
    let eps = 1e-3;
    let settings = Settings { eps, ..Settings::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_sr = f64::INFINITY;
    let mut worst_p = 0.0f64;
    for i in 0..50 {
        let (m1, m2) = triangle_point(&mut rng);
        let input = dir.join(format!("qutrit_{i}.json"));
        let fixture = commands::fixture(commands::FixtureName::QutritMember, &[m1, m2], &settings).unwrap();
        std::fs::write(&input, fixture.result.to_string()).unwrap();
        let report = commands::distill(&input, &settings).unwrap();
        let sr = report.result["sr_output"].as_f64().unwrap();
        let p = report.result["p_succ"].as_f64().unwrap();
        let expected = 3.0 * [m1 * m1, m2 * m2, 1.0 - m1 * m1 - m2 * m2].into_iter().fold(f64::INFINITY, f64::min);
        worst_sr = worst_sr.min(sr);
        worst_p = worst_p.max((p - expected).abs());
    }
    let pass = worst_sr >= 0.2679 - eps - 1e-4 && worst_p <= 1e-8;
    outcome(pass, format!("min SR(output) = {worst_sr:.6} (>= {:.4}), max |p_succ - 3 min mu^2| = {worst_p:.2e} (<= 1e-8)", 0.2679 - eps - 1e-4))
}

fn ordering_chain(_: &Path) -> Outcome {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let d = rng.random_range(2..=4);
        let m = rng.random_range(2..=3);
        let k = rng.random_range(2..=3);
        let rank = rng.random_range(1..=d * d);
        let meas = random_measurements(d, m, k, &mut rng);
        let asm = random_assemblage(&meas, rank, &mut rng).unwrap();
        let sr = steering_robustness(&asm, &t).unwrap().value;
        let ir_b = incompatibility_robustness(&compute_seo(&asm, &t).unwrap().observables, &t).unwrap().value;
        let ir_a = incompatibility_robustness(&meas, &t).unwrap().value;
        worst = worst.max(sr - ir_b).max(ir_b - ir_a);
    }
    outcome(worst <= 1e-6, format!("max violation of SR <= IR(B) <= IR(A) over 100 cases: {worst:.2e} (<= 1e-6)"))
}

fn random_invertible(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let u = random_unitary(d, rng);
    let v = random_unitary(d, rng);
    let s: Vec<_> = (0..d).map(|_| c(rng.random_range(0.3..1.0), 0.0)).collect();
    u * ComplexMatrix::from_diagonal(&s.into()) * v
}

fn filter_round_trip(_: &Path) -> Outcome {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut equivalent = 0;
    let mut worst_residual = 0.0f64;
    let mut bounds_ok = true;
    for i in 0..50u64 {
        let d = rng.random_range(2..=3);
        let meas = random_measurements(d, rng.random_range(2..=3), 2, &mut rng);
        let a = random_assemblage(&meas, d * d, &mut rng).unwrap();
        let filtered = a.congruence(&random_invertible(d, &mut rng));
        let b = filtered.scale(1.0 / filtered.reduced_state(t.ns).unwrap().trace_real());
        let cert = seo_equivalent(&a, &b, i, &t).unwrap();
        let Some(u) = cert.unitary.filter(|_| cert.verdict.name() == "equivalent") else {
            continue;
        };
        equivalent += 1;
        let rho_a = a.reduced_state(t.ns).unwrap();
        let rho_b = b.reduced_state(t.ns).unwrap();
        for (target, source, w, rt, rs) in [(&a, &b, u.clone(), &rho_a, &rho_b), (&b, &a, u.adjoint(), &rho_b, &rho_a)] {
            let f = synthesize_filter(target, source, &w, &t).unwrap();
            let (out, p) = apply_filter(source, &f.kraus, &t).unwrap();
            worst_residual = worst_residual.max(out.max_distance(target));
            let (lo, hi) = p_succ_bounds(rt, rs, t.rank);
            bounds_ok &= lo - 1e-9 <= p && p <= hi + 1e-9;
        }
    }
    let pass = equivalent == 50 && worst_residual <= 1e-7 && bounds_ok;
    outcome(
        pass,
        format!("{equivalent}/50 equivalent, max reconstruction residual {worst_residual:.2e} (<= 1e-7), p_succ within bounds: {bounds_ok}"),
    )
}

fn optimal_state_separation(_: &Path) -> Outcome {
    let t = tol();
    let eps = 1e-3;
    let (a, _) = ququart_pair(&t).unwrap();
    let s = optimal_state(&a, eps, &t).unwrap();
    let sr = steering_robustness(&s.assemblage, &t).unwrap().value;
    let pass = sr >= 0.1481 - eps - 1e-3 && sr > 0.0740 + 0.05;
    outcome(pass, format!("SR = {sr:.6} (>= {:.4} and > 0.1240)", 0.1481 - eps - 1e-3))
}

fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_steerkit"))
}

fn run_cli(args: &[&str]) -> (i32, serde_json::Value) {
    let out = Command::new(binary()).args(args).output().unwrap();
    let json = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap_or(-1), json)
}

fn dilution(dir: &Path) -> Outcome {
    let input = dir.join("qutrit_canonical.json");
    let result = dir.join("dilute.json");
    let (code, _) = run_cli(&["fixture", "qutrit-canonical", "--out", input.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, _) = run_cli(&["dilute", input.to_str().unwrap(), "--eps", "0.05", "--out", result.to_str().unwrap()]);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    let sr = doc["sr_output"].as_f64().unwrap();
    let verdict = doc["equivalence"]["verdict"].as_str().unwrap().to_string();
    let output = dir.join("dilute.assemblage.json");
    let (back, _) = run_cli(&["classify", output.to_str().unwrap(), input.to_str().unwrap()]);
    let pass = code == 0 && sr <= 0.05 && verdict == "equivalent" && back == 0;
    outcome(pass, format!("SR(output) = {sr:.6} (<= 0.05), certificate {verdict}, reverse classify exit {back}"))
}

fn qubit_pipeline(dir: &Path) -> Outcome {
    let t = tol();
    let canonical = Assemblage::canonical(&pauli_xz());
    let mut worst_residual = 0.0f64;
    let mut worst_p = 0.0f64;
    let mut files = Vec::new();
    let mut internal = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..10 {
        let m1: f64 = rng.random_range(0.05..0.7);
        let mu = SchmidtVector::complete(&[m1]).unwrap();
        let asm = Assemblage::from_pure_schmidt(&mu, &pauli_xz()).unwrap();
        let d = distill_to_sup(&asm, 1e-3, &t).unwrap();
        worst_residual = worst_residual.max(d.output.max_distance(&canonical));
        worst_p = worst_p.max((d.filter.p_succ - 2.0 * m1 * m1).abs());
        let path = dir.join(format!("qubit_{i}.dat-s"));
        std::fs::write(&path, export_sdpa(&steering_problem(&d.output, t.strategy_cap).unwrap())).unwrap();
        files.push(path);
        internal.push(steering_robustness(&d.output, &t).unwrap().diagnostics.primal_objective);
    }
    let refs: Vec<&Path> = files.iter().map(|p| p.as_path()).collect();
    let external = common::external_objectives(&refs);
    let worst_ext = external.iter().zip(&internal).map(|(e, i)| (e - i).abs()).fold(0.0, f64::max);
    let pass = worst_residual <= 1e-7 && worst_p <= 1e-9 && worst_ext <= 1e-5;
    outcome(
        pass,
        format!("max residual to canonical X/Z {worst_residual:.2e} (<= 1e-7), max |p_succ - 2 mu1^2| {worst_p:.2e} (<= 1e-9), max |SR - external| {worst_ext:.2e} (<= 1e-5)"),
    )
}

fn rate_simulation(_: &Path) -> Outcome {
    let n = 100_000u64;
    let mut lines = Vec::new();
    let mut pass = true;
    for p in [0.1, 0.5, 0.9] {
        let bound = 5.0 * (p * (1.0 - p) / n as f64).sqrt();
        let hits = (0..20u64)
            .filter(|&seed| (simulate_rate(p, n, 1, seed).unwrap().mean - p).abs() <= bound)
            .count();
        pass &= hits >= 19;
        lines.push(format!("p={p}: {hits}/20"));
    }
    outcome(pass, format!("{} within 5 sigma (>= 19/20)", lines.join(", ")))
}

fn solver_cross_validation(dir: &Path) -> Outcome {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut files = Vec::new();
    let mut internal = Vec::new();
    for i in 0..20 {
        let d = rng.random_range(2..=3);
        let meas = random_measurements(d, rng.random_range(2..=3), rng.random_range(2..=3), &mut rng);
        let (problem, report) = if i % 2 == 0 {
            let asm = random_assemblage(&meas, rng.random_range(1..=d * d), &mut rng).unwrap();
            (steering_problem(&asm, t.strategy_cap).unwrap(), steering_robustness(&asm, &t).unwrap())
        } else {
            (incompatibility_problem(&meas, t.strategy_cap).unwrap(), incompatibility_robustness(&meas, &t).unwrap())
        };
        let path = dir.join(format!("cross_{i}.dat-s"));
        std::fs::write(&path, export_sdpa(&problem)).unwrap();
        files.push(path);
        internal.push(report.diagnostics.primal_objective);
    }
    let refs: Vec<&Path> = files.iter().map(|p| p.as_path()).collect();
    let external = common::external_objectives(&refs);
    let worst = external.iter().zip(&internal).map(|(e, i)| (e - i).abs()).fold(0.0, f64::max);
    outcome(worst <= 1e-5, format!("20 files, max |internal - external| = {worst:.2e} (<= 1e-5)"))
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("ququart pair reproduction", ququart_reproduction),
        ("qutrit class supremum", qutrit_supremum),
        ("qutrit distillation", distillation),
        ("ordering chain", ordering_chain),
        ("filter round trip", filter_round_trip),
        ("optimal state separation", optimal_state_separation),
        ("dilution", dilution),
        ("qubit pipeline", qubit_pipeline),
        ("rate simulation", rate_simulation),
        ("solver cross-validation", solver_cross_validation),
    ];
    // STEERKIT_ACCEPTANCE_DIR keeps the generated files for inspection.
    let temp = tempfile::tempdir().unwrap();
    let dir = std::env::var_os("STEERKIT_ACCEPTANCE_DIR").map(PathBuf::from).unwrap_or_else(|| temp.path().to_path_buf());
    std::fs::create_dir_all(&dir).unwrap();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check(&dir);
        if !o.pass {
            failures += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
