//! One function per subcommand. Each returns a [`Report`]; writing files and
//! manifests is left to [`crate::emit`].

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use steerkit_core::families::{computational_and_fourier, pauli_xz};
use steerkit_core::filter::{dilute_to_inf, distill_to_sup, optimal_state};
use steerkit_core::fixtures::{ququart_pair, ququart_pair_printed, repair_povm};
use steerkit_core::io::matrix_to_json;
use steerkit_core::rate::simulate_rate;
use steerkit_core::robustness::{
    incompatibility_problem, incompatibility_robustness, steering_problem, steering_robustness, RobustnessReport,
    Witness,
};
use steerkit_core::seo::{canonical_representative, class_fingerprint, compute_seo, seo_equivalent, Verdict};
use steerkit_core::{
    Assemblage, Error, HermitianOperator, MeasurementAssemblage, OperatorFamily, SchmidtVector, Tolerances,
};
use steerkit_sdp::export_sdpa;

use crate::CliError;

#[derive(Debug, Clone)]
pub struct Settings {
    pub out: Option<PathBuf>,
    pub eps: f64,
    pub seed: u64,
    pub tol: Tolerances,
    pub grid: usize,
    pub repair_povm: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            out: None,
            eps: 1e-3,
            seed: 0,
            tol: Tolerances::default(),
            grid: 11,
            repair_povm: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Undetermined,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Undetermined => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub outcome: Outcome,
    pub result: Value,
    /// Extra JSON documents, written next to the result as `<stem>.<tag>.json`.
    pub artifacts: Vec<(&'static str, Value)>,
    /// Text files written verbatim.
    pub files: Vec<(PathBuf, String)>,
    pub inputs: Vec<(PathBuf, Vec<u8>)>,
    pub corrections: Vec<Value>,
    pub summary: String,
}

impl Report {
    fn new(command: &'static str, result: Value) -> Self {
        Self {
            command,
            outcome: Outcome::Pass,
            result,
            artifacts: Vec::new(),
            files: Vec::new(),
            inputs: Vec::new(),
            corrections: Vec::new(),
            summary: String::new(),
        }
    }
}

pub enum Input {
    Assemblage(Assemblage),
    Measurements(MeasurementAssemblage),
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, err: Error) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        source: err,
    }
}

/// Reads an assemblage (`sigma`) or measurement (`povm`) document.
pub fn load(path: &Path, settings: &Settings, report: &mut Report) -> Result<Input, CliError> {
    let bytes = read(path)?;
    let text = String::from_utf8_lossy(&bytes).into_owned();
    report.inputs.push((path.to_path_buf(), bytes));
    let probe: Value = serde_json::from_str(&text).map_err(|e| parse_error(path, e.into()))?;
    if probe.get("sigma").is_some() {
        let asm = Assemblage::from_json_str(&text, &settings.tol).map_err(|e| parse_error(path, e))?;
        return Ok(Input::Assemblage(asm));
    }
    if probe.get("povm").is_some() {
        let mut meas = MeasurementAssemblage::from_json_str(&text, &settings.tol).map_err(|e| parse_error(path, e))?;
        if settings.repair_povm && !meas.validate(&settings.tol).passed() {
            let (fixed, repair) = repair_povm(&meas, &settings.tol)?;
            report.corrections.push(json!({
                "input": path.display().to_string(),
                "povm_repair": repair,
            }));
            meas = fixed;
        }
        return Ok(Input::Measurements(meas));
    }
    Err(parse_error(
        path,
        Error::Schema("expected a `sigma` (assemblage) or `povm` (measurements) field".into()),
    ))
}

fn load_assemblage(path: &Path, settings: &Settings, report: &mut Report) -> Result<Assemblage, CliError> {
    match load(path, settings, report)? {
        Input::Assemblage(a) => Ok(a),
        Input::Measurements(_) => Err(CliError::Usage(format!(
            "{}: expected an assemblage (`sigma`), found measurements",
            path.display()
        ))),
    }
}

fn load_measurements(path: &Path, settings: &Settings, report: &mut Report) -> Result<MeasurementAssemblage, CliError> {
    match load(path, settings, report)? {
        Input::Measurements(m) => Ok(m),
        Input::Assemblage(_) => Err(CliError::Usage(format!(
            "{}: expected measurements (`povm`), found an assemblage",
            path.display()
        ))),
    }
}

pub fn family_value(f: &OperatorFamily) -> Value {
    f.rows()
        .iter()
        .map(|row| row.iter().map(|op| matrix_to_json(op.matrix())).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .into()
}

fn operator_value(op: &HermitianOperator) -> Value {
    json!(matrix_to_json(op.matrix()))
}

pub fn validate(path: &Path, settings: &Settings) -> Result<Report, CliError> {
    let mut report = Report::new("validate", Value::Null);
    let (kind, scenario, validation) = match load(path, settings, &mut report)? {
        Input::Assemblage(a) => ("assemblage", a.scenario(), a.validate(&settings.tol)),
        Input::Measurements(m) => ("measurements", m.scenario(), m.validate(&settings.tol)),
    };
    report.outcome = if validation.passed() { Outcome::Pass } else { Outcome::Fail };
    report.summary = format!("{kind}: {} violation(s)", validation.violations.len());
    report.result = json!({
        "kind": kind,
        "dim": scenario.dim,
        "inputs": scenario.inputs,
        "outcomes": scenario.outcomes,
        "passed": validation.passed(),
        "violations": validation.violations,
    });
    Ok(report)
}

pub fn seo(path: &Path, settings: &Settings) -> Result<Report, CliError> {
    let mut report = Report::new("seo", Value::Null);
    let asm = load_assemblage(path, settings, &mut report)?;
    let seo = compute_seo(&asm, &settings.tol)?;
    report.summary = format!("rank {} of {}", seo.rank(), seo.ambient_dim());
    report.result = json!({
        "rank": seo.rank(),
        "ambient_dim": seo.ambient_dim(),
        "observables": seo.observables.to_json_value(),
        "embedded": MeasurementAssemblage::from_family(seo.embedded()).to_json_value(),
        "projector": matrix_to_json(&seo.projector),
        "reduced_state": operator_value(&seo.reduced),
        "canonical_representative": canonical_representative(&seo).to_json_value(),
        "fingerprint": class_fingerprint(&seo),
    });
    Ok(report)
}

pub fn classify(first: &Path, second: &Path, settings: &Settings) -> Result<Report, CliError> {
    let mut report = Report::new("classify", Value::Null);
    let a = load_assemblage(first, settings, &mut report)?;
    let b = load_assemblage(second, settings, &mut report)?;
    let cert = seo_equivalent(&a, &b, settings.seed, &settings.tol)?;
    report.outcome = match cert.verdict {
        Verdict::Equivalent => Outcome::Pass,
        Verdict::NotEquivalent(_) => Outcome::Fail,
        Verdict::Undetermined => Outcome::Undetermined,
    };
    report.summary = format!("{} (residual {:.3e})", cert.verdict.name(), cert.residual);
    report.result = cert.to_json_value();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Sr,
    Ir,
}

fn witness_value(w: &Witness) -> Value {
    match w {
        Witness::Steering { f } => json!({ "kind": "steering", "f": family_value(f) }),
        Witness::Incompatibility { omega, eta } => json!({
            "kind": "incompatibility",
            "omega": family_value(omega),
            "eta": operator_value(eta),
        }),
    }
}

fn robustness_value(r: &RobustnessReport) -> Value {
    json!({
        "value": r.value,
        "bound": r.bound,
        "gap": r.gap(),
        "diagnostics": r.diagnostics,
    })
}

pub fn robustness(path: &Path, kind: Kind, export: Option<&Path>, settings: &Settings) -> Result<Report, CliError> {
    let mut report = Report::new("robustness", Value::Null);
    let input = load(path, settings, &mut report)?;
    let (label, r, problem, source) = match (kind, input) {
        (Kind::Sr, Input::Assemblage(a)) => {
            let problem = export.map(|_| steering_problem(&a, settings.tol.strategy_cap)).transpose()?;
            ("SR", steering_robustness(&a, &settings.tol)?, problem, "assemblage")
        }
        (Kind::Sr, Input::Measurements(_)) => {
            return Err(CliError::Usage("steering robustness needs an assemblage (`sigma`)".into()))
        }
        (Kind::Ir, Input::Measurements(m)) => {
            let problem = export.map(|_| incompatibility_problem(&m, settings.tol.strategy_cap)).transpose()?;
            ("IR", incompatibility_robustness(&m, &settings.tol)?, problem, "measurements")
        }
        (Kind::Ir, Input::Assemblage(a)) => {
            let b = compute_seo(&a, &settings.tol)?.observables;
            let problem = export.map(|_| incompatibility_problem(&b, settings.tol.strategy_cap)).transpose()?;
            ("IR", incompatibility_robustness(&b, &settings.tol)?, problem, "steering_equivalent_observables")
        }
    };
    if let (Some(path), Some(problem)) = (export, problem) {
        report.files.push((path.to_path_buf(), export_sdpa(&problem)));
    }
    report.summary = format!("{label} = {:.6} (gap {:.2e})", r.value, r.gap());
    let mut result = robustness_value(&r);
    result["kind"] = json!(label.to_lowercase());
    result["of"] = json!(source);
    report.result = result;
    report.artifacts.push(("witness", witness_value(&r.witness)));
    Ok(report)
}

pub fn distill(path: &Path, settings: &Settings) -> Result<Report, CliError> {
    let mut report = Report::new("distill", Value::Null);
    let asm = load_assemblage(path, settings, &mut report)?;
    let d = distill_to_sup(&asm, settings.eps, &settings.tol)?;
    let sr_in = steering_robustness(&asm, &settings.tol)?.value;
    let sr_out = steering_robustness(&d.output, &settings.tol)?.value;
    report.outcome = if d.guarantee_met { Outcome::Pass } else { Outcome::Fail };
    report.summary = format!(
        "SR {sr_in:.6} -> {sr_out:.6}, IR(B) = {:.6}, p_succ = {:.6}",
        d.ir, d.filter.p_succ
    );
    report.result = json!({
        "eps": settings.eps,
        "ir": d.ir,
        "certified_sr": d.certified_sr,
        "guarantee_met": d.guarantee_met,
        "p_succ": d.filter.p_succ,
        "sr_input": sr_in,
        "sr_output": sr_out,
    });
    report.artifacts.push(("filter", d.filter.to_json_value()));
    report.artifacts.push(("assemblage", d.output.to_json_value()));
    Ok(report)
}

pub fn dilute(path: &Path, settings: &Settings) -> Result<Report, CliError> {
    let mut report = Report::new("dilute", Value::Null);
    let asm = load_assemblage(path, settings, &mut report)?;
    let d = dilute_to_inf(&asm, settings.eps, &settings.tol)?;
    let sr_out = steering_robustness(&d.output, &settings.tol)?.value;
    let cert = seo_equivalent(&asm, &d.output, settings.seed, &settings.tol)?;
    report.outcome = match (sr_out <= settings.eps, &cert.verdict) {
        (true, Verdict::Equivalent) => Outcome::Pass,
        (_, Verdict::Undetermined) => Outcome::Undetermined,
        _ => Outcome::Fail,
    };
    report.summary = format!(
        "SR(output) = {sr_out:.6} (eps {}), p_succ = {:.6}, {}",
        settings.eps,
        d.filter.p_succ,
        cert.verdict.name()
    );
    report.result = json!({
        "eps": settings.eps,
        "schmidt": d.schmidt.coefficients(),
        "er_bound": d.er_bound,
        "p_succ": d.filter.p_succ,
        "sr_output": sr_out,
        "equivalence": cert.to_json_value(),
    });
    report.artifacts.push(("filter", d.filter.to_json_value()));
    report.artifacts.push(("assemblage", d.output.to_json_value()));
    Ok(report)
}

pub fn optimal(path: &Path, settings: &Settings) -> Result<Report, CliError> {
    let mut report = Report::new("optimal-state", Value::Null);
    let meas = load_measurements(path, settings, &mut report)?;
    let s = optimal_state(&meas, settings.eps, &settings.tol)?;
    let sr = steering_robustness(&s.assemblage, &settings.tol)?.value;
    let sr_max_ent = steering_robustness(&Assemblage::canonical(&meas.transpose()), &settings.tol)?.value;
    report.outcome = if s.guarantee_met { Outcome::Pass } else { Outcome::Fail };
    report.summary = format!("SR = {sr:.6} vs {sr_max_ent:.6} for the maximally entangled state, IR = {:.6}", s.ir);
    report.result = json!({
        "eps": settings.eps,
        "ir": s.ir,
        "certified_sr": s.certified_sr,
        "guarantee_met": s.guarantee_met,
        "sr": sr,
        "sr_maximally_entangled": sr_max_ent,
        "eta": operator_value(&s.eta),
        "delta": s.delta,
    });
    report.artifacts.push((
        "state",
        json!({
            "dim_a": meas.dim(),
            "dim_b": meas.dim(),
            "rho_ab": operator_value(&s.rho_ab),
        }),
    ));
    report.artifacts.push(("assemblage", s.assemblage.to_json_value()));
    Ok(report)
}

pub fn rate(p: f64, n: u64, batches: u64, settings: &Settings) -> Result<Report, CliError> {
    let est = simulate_rate(p, n, batches, settings.seed)?;
    let mut report = Report::new("rate", Value::Null);
    report.summary = format!("mean {:.6} over {} x {n} trials (p = {p})", est.mean, batches);
    report.result = json!({
        "estimate": est,
        "binomial_sigma": est.binomial_sigma(),
    });
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub mu1: f64,
    pub mu2: f64,
    pub sr: Option<f64>,
    pub p_succ: Option<f64>,
}

fn qutrit_member(mu1: f64, mu2: f64) -> Result<Assemblage, Error> {
    let mu = SchmidtVector::complete(&[mu1, mu2])?.allowing_rank_deficiency();
    Assemblage::from_pure_schmidt(&mu, &computational_and_fourier(3).transpose())
}

fn grid_point(mu1: f64, mu2: f64, settings: &Settings) -> Result<GridPoint, Error> {
    if mu1 * mu1 + mu2 * mu2 >= 1.0 {
        return Ok(GridPoint { mu1, mu2, sr: None, p_succ: None });
    }
    let asm = qutrit_member(mu1, mu2)?;
    let sr = steering_robustness(&asm, &settings.tol)?.value;
    let smallest = [mu1 * mu1, mu2 * mu2, 1.0 - mu1 * mu1 - mu2 * mu2]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let p_succ = if smallest <= settings.tol.p_floor {
        0.0
    } else {
        distill_to_sup(&asm, settings.eps, &settings.tol)?.filter.p_succ
    };
    Ok(GridPoint { mu1, mu2, sr: Some(sr), p_succ: Some(p_succ) })
}

/// Sweeps `μ₁, μ₂ ∈ {0, 1/(n−1), …, 1}` over the qutrit class.
pub fn figure2_points(settings: &Settings) -> Result<Vec<GridPoint>, CliError> {
    if settings.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let n = settings.grid;
    let coords: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64))
        .collect();
    let points = coords
        .par_iter()
        .map(|&(m1, m2)| grid_point(m1, m2, settings))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(points)
}

fn csv(points: &[GridPoint], column: &str, pick: impl Fn(&GridPoint) -> Option<f64>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mu1", "mu2", "valid", column]).expect("in-memory write");
    for p in points {
        let (valid, value) = match pick(p) {
            Some(v) => ("1", v.to_string()),
            None => ("0", String::new()),
        };
        w.write_record([p.mu1.to_string(), p.mu2.to_string(), valid.into(), value])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn figure2(settings: &Settings) -> Result<Report, CliError> {
    let points = figure2_points(settings)?;
    let valid = points.iter().filter(|p| p.sr.is_some()).count();
    let max_sr = points.iter().filter_map(|p| p.sr).fold(0.0f64, f64::max);
    let mut report = Report::new(
        "figure2",
        json!({
            "grid": settings.grid,
            "points": points.len(),
            "valid_points": valid,
            "max_sr_initial": max_sr,
            "files": ["figure2_sr.csv", "figure2_psucc.csv"],
        }),
    );
    report.summary = format!("{valid} valid points, max SR_initial {max_sr:.6}");
    let dir = settings.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    report.files.push((dir.join("figure2_sr.csv"), csv(&points, "sr_initial", |p| p.sr)));
    report.files.push((dir.join("figure2_psucc.csv"), csv(&points, "p_succ", |p| p.p_succ)));
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureName {
    QuquartPair,
    QuquartPairPrinted,
    QuquartAssemblage,
    QutritMub,
    QutritCanonical,
    QutritMember,
    QubitXz,
    QubitCanonical,
    QubitMember,
    Lhs,
    Signalling,
}

fn lhs_fixture(tol: &Tolerances) -> Result<Assemblage, Error> {
    let states = [
        HermitianOperator::from_real_diagonal(&[0.8, 0.2]),
        HermitianOperator::from_real_diagonal(&[0.3, 0.7]),
    ];
    let responses = vec![
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![vec![0.0, 1.0], vec![0.5, 0.5]],
    ];
    Assemblage::lhs_from_model(&[0.4, 0.6], &responses, &states, tol)
}

fn signalling_fixture() -> Result<Assemblage, Error> {
    let p0 = HermitianOperator::from_real_diagonal(&[0.5, 0.0]);
    let p1 = HermitianOperator::from_real_diagonal(&[0.0, 0.5]);
    let both = HermitianOperator::from_real_diagonal(&[0.6, 0.0]);
    let rest = HermitianOperator::from_real_diagonal(&[0.0, 0.4]);
    Assemblage::new(vec![vec![p0, p1], vec![both, rest]])
}

pub fn fixture(name: FixtureName, mu: &[f64], settings: &Settings) -> Result<Report, CliError> {
    let tol = &settings.tol;
    let mut corrections = Vec::new();
    let need = |k: usize| -> Result<(), CliError> {
        if mu.len() == k {
            Ok(())
        } else {
            Err(CliError::Usage(format!("this fixture needs --mu with {k} value(s)")))
        }
    };
    let doc = match name {
        FixtureName::QuquartPair => {
            let (m, repair) = ququart_pair(tol)?;
            corrections.push(json!({ "povm_repair": repair }));
            m.to_json_value()
        }
        FixtureName::QuquartPairPrinted => ququart_pair_printed(tol)?.to_json_value(),
        FixtureName::QuquartAssemblage => {
            let (m, repair) = ququart_pair(tol)?;
            corrections.push(json!({ "povm_repair": repair }));
            Assemblage::canonical(&m.transpose()).to_json_value()
        }
        FixtureName::QutritMub => computational_and_fourier(3).to_json_value(),
        FixtureName::QutritCanonical => Assemblage::canonical(&computational_and_fourier(3).transpose()).to_json_value(),
        FixtureName::QutritMember => {
            need(2)?;
            let mu = SchmidtVector::complete(mu)?;
            Assemblage::from_pure_schmidt(&mu, &computational_and_fourier(3).transpose())?.to_json_value()
        }
        FixtureName::QubitXz => pauli_xz().to_json_value(),
        FixtureName::QubitCanonical => Assemblage::canonical(&pauli_xz()).to_json_value(),
        FixtureName::QubitMember => {
            need(1)?;
            let mu = SchmidtVector::complete(mu)?;
            Assemblage::from_pure_schmidt(&mu, &pauli_xz())?.to_json_value()
        }
        FixtureName::Lhs => lhs_fixture(tol)?.to_json_value(),
        FixtureName::Signalling => signalling_fixture()?.to_json_value(),
    };
    let mut report = Report::new("fixture", doc);
    report.corrections = corrections;
    report.summary = format!("fixture {name:?}");
    Ok(report)
}
