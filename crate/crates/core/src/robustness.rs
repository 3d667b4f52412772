//! Steering and incompatibility robustness as dual SDPs.
//!
//! Steering robustness (witness form):
//!
//! ```text
//! 1 + SR(σ) = max  Σ tr F_{a|x} σ_{a|x}
//!             s.t. 1 ⪰ Σ_{a,x} D(a|x,λ) F_{a|x}  for every λ,   F_{a|x} ⪰ 0
//! ```
//!
//! Incompatibility robustness:
//!
//! ```text
//! 1 + IR(B) = max  Σ tr ω_{a|x} B_{a|x}
//!             s.t. η ⪰ Σ_{a,x} D(a|x,λ) ω_{a|x}  for every λ,   ω_{a|x} ⪰ 0,   tr η = 1
//! ```
//!
//! Complex Hermitian variables are expanded in a real basis of `d²`
//! parameters and every matrix inequality is imposed on the real embedding
//! `A + iB ↦ [[A, −B], [B, A]]`. Both programs are written as SDPA primals
//! `min c·x`, so the optimum is `−(1 + robustness)`.

use serde::Serialize;
use steerkit_sdp::{solve, BlockKind, SdpProblem, SdpSolution, Settings, Status};

use crate::assemblage::{Assemblage, MeasurementAssemblage, OperatorFamily, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{c, pinv_sqrt, sqrt_psd, ComplexMatrix, HermitianOperator};
use crate::seo::compute_seo;
use crate::tol::Tolerances;

/// Deterministic response functions `D(a|x,λ) = δ_{a,λ_x}`, enumerated in
/// lexicographic order of `(λ_1, …, λ_m)` with input 1 most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeterministicStrategies {
    inputs: usize,
    outcomes: usize,
    count: usize,
}

pub fn enumerate_deterministic(scenario: Scenario, cap: usize) -> Result<DeterministicStrategies> {
    let count = scenario.strategy_count();
    if count > cap as u128 {
        return Err(Error::TooManyStrategies { count, cap });
    }
    Ok(DeterministicStrategies {
        inputs: scenario.inputs,
        outcomes: scenario.outcomes,
        count: count as usize,
    })
}

impl DeterministicStrategies {
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Outcome `λ_x` assigned to input `x` by strategy `lambda`.
    pub fn outcome(&self, lambda: usize, x: usize) -> usize {
        let shift = self.inputs - 1 - x;
        (lambda / self.outcomes.pow(shift as u32)) % self.outcomes
    }

    pub fn assignment(&self, lambda: usize) -> Vec<usize> {
        (0..self.inputs).map(|x| self.outcome(lambda, x)).collect()
    }

    /// `Σ_x X_{λ_x|x}` for a family indexed `[x][a]`.
    pub fn aggregate(&self, lambda: usize, family: &OperatorFamily) -> HermitianOperator {
        let mut s = HermitianOperator::zeros(family.dim());
        for x in 0..self.inputs {
            s = s.add(family.op(x, self.outcome(lambda, x)));
        }
        s
    }
}

/// Real basis of `d × d` Hermitian matrices: `e_ii`, `e_ij + e_ji` and
/// `i(e_ij − e_ji)` for `i < j`.
#[derive(Debug, Clone, Copy)]
enum Element {
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

struct HermitianBasis {
    d: usize,
    elems: Vec<Element>,
}

impl HermitianBasis {
    fn new(d: usize) -> Self {
        let mut elems: Vec<Element> = (0..d).map(Element::Diag).collect();
        for i in 0..d {
            for j in i + 1..d {
                elems.push(Element::Re(i, j));
                elems.push(Element::Im(i, j));
            }
        }
        Self { d, elems }
    }

    fn len(&self) -> usize {
        self.elems.len()
    }

    /// `tr(E_k H)`.
    fn trace_with(&self, k: usize, h: &HermitianOperator) -> f64 {
        match self.elems[k] {
            Element::Diag(i) => h[(i, i)].re,
            Element::Re(i, j) => 2.0 * h[(i, j)].re,
            Element::Im(i, j) => 2.0 * h[(i, j)].im,
        }
    }

    fn assemble(&self, coords: &[f64]) -> HermitianOperator {
        let mut m = ComplexMatrix::zeros(self.d, self.d);
        for (e, &v) in self.elems.iter().zip(coords) {
            match *e {
                Element::Diag(i) => m[(i, i)] += c(v, 0.0),
                Element::Re(i, j) => {
                    m[(i, j)] += c(v, 0.0);
                    m[(j, i)] += c(v, 0.0);
                }
                Element::Im(i, j) => {
                    m[(i, j)] += c(0.0, v);
                    m[(j, i)] += c(0.0, -v);
                }
            }
        }
        HermitianOperator::hermitian_part(&m)
    }

    /// Upper-triangle entries of the real embedding of `E_k`.
    fn embedding(&self, k: usize) -> Vec<(usize, usize, f64)> {
        let d = self.d;
        match self.elems[k] {
            Element::Diag(i) => vec![(i, i, 1.0), (d + i, d + i, 1.0)],
            Element::Re(i, j) => vec![(i, j, 1.0), (d + i, d + j, 1.0)],
            Element::Im(i, j) => vec![(i, d + j, -1.0), (j, d + i, 1.0)],
        }
    }
}

fn add_embedded(
    p: &mut SdpProblem,
    matno: usize,
    block: usize,
    entries: &[(usize, usize, f64)],
    scale: f64,
) {
    for &(i, j, v) in entries {
        p.add_entry(matno, block, i, j, scale * v)
            .expect("embedding stays inside its block");
    }
}

fn family_blocks(p: &mut SdpProblem, s: Scenario, symbol: &str) {
    for x in 0..s.inputs {
        for a in 0..s.outcomes {
            p.set_block_note(x * s.outcomes + a, format!("{symbol}_{{{}|{}}} >= 0", a + 1, x + 1));
        }
    }
}

fn strategy_note(strategies: &DeterministicStrategies, lambda: usize, lhs: &str, symbol: &str) -> String {
    let terms: Vec<String> = strategies
        .assignment(lambda)
        .iter()
        .enumerate()
        .map(|(x, a)| format!("{symbol}_{{{}|{}}}", a + 1, x + 1))
        .collect();
    format!("{lhs} - ({}) >= 0", terms.join(" + "))
}

/// SDPA form of the steering-robustness witness program.
pub fn steering_problem(asm: &Assemblage, cap: usize) -> Result<SdpProblem> {
    let s = asm.scenario();
    let strategies = enumerate_deterministic(s, cap)?;
    let basis = HermitianBasis::new(s.dim);
    let n = basis.len();
    let nops = s.operator_count();
    let blocks = vec![BlockKind::Dense(2 * s.dim); nops + strategies.len()];
    let mut p = SdpProblem::new(nops * n, blocks)
        .expect("nonempty blocks")
        .with_label(format!(
            "steering robustness: d={} m={} k={}; optimum = -(1 + SR)",
            s.dim, s.inputs, s.outcomes
        ));
    family_blocks(&mut p, s, "F");
    for l in 0..strategies.len() {
        p.set_block_note(nops + l, strategy_note(&strategies, l, "1", "F"));
    }
    for x in 0..s.inputs {
        for a in 0..s.outcomes {
            let op = x * s.outcomes + a;
            for k in 0..n {
                let var = op * n + k;
                p.set_objective(var, -basis.trace_with(k, asm.sigma(a, x)))
                    .expect("finite coefficient");
                let emb = basis.embedding(k);
                add_embedded(&mut p, var + 1, op, &emb, 1.0);
                for l in 0..strategies.len() {
                    if strategies.outcome(l, x) == a {
                        add_embedded(&mut p, var + 1, nops + l, &emb, -1.0);
                    }
                }
            }
        }
    }
    for l in 0..strategies.len() {
        for i in 0..2 * s.dim {
            p.add_entry(0, nops + l, i, i, -1.0).expect("diagonal entry");
        }
    }
    Ok(p)
}

/// SDPA form of the incompatibility-robustness program. `η` is
/// parametrized with its last diagonal entry eliminated by `tr η = 1`.
pub fn incompatibility_problem(meas: &MeasurementAssemblage, cap: usize) -> Result<SdpProblem> {
    let s = meas.scenario();
    let strategies = enumerate_deterministic(s, cap)?;
    let basis = HermitianBasis::new(s.dim);
    let n = basis.len();
    let nops = s.operator_count();
    let neta = n - 1;
    let last = s.dim - 1;
    let blocks = vec![BlockKind::Dense(2 * s.dim); nops + strategies.len()];
    let mut p = SdpProblem::new(nops * n + neta, blocks)
        .expect("nonempty blocks")
        .with_label(format!(
            "incompatibility robustness: d={} m={} k={}; optimum = -(1 + IR)",
            s.dim, s.inputs, s.outcomes
        ));
    family_blocks(&mut p, s, "w");
    for l in 0..strategies.len() {
        p.set_block_note(nops + l, strategy_note(&strategies, l, "eta", "w"));
    }
    for x in 0..s.inputs {
        for a in 0..s.outcomes {
            let op = x * s.outcomes + a;
            for k in 0..n {
                let var = op * n + k;
                p.set_objective(var, -basis.trace_with(k, meas.effect(a, x)))
                    .expect("finite coefficient");
                let emb = basis.embedding(k);
                add_embedded(&mut p, var + 1, op, &emb, 1.0);
                for l in 0..strategies.len() {
                    if strategies.outcome(l, x) == a {
                        add_embedded(&mut p, var + 1, nops + l, &emb, -1.0);
                    }
                }
            }
        }
    }
    let last_emb = basis.embedding(last);
    let eta_vars: Vec<usize> = (0..n).filter(|&k| k != last).collect();
    for (j, &k) in eta_vars.iter().enumerate() {
        let var = nops * n + j;
        let emb = basis.embedding(k);
        let is_diag = matches!(basis.elems[k], Element::Diag(_));
        for l in 0..strategies.len() {
            add_embedded(&mut p, var + 1, nops + l, &emb, 1.0);
            if is_diag {
                add_embedded(&mut p, var + 1, nops + l, &last_emb, -1.0);
            }
        }
    }
    for l in 0..strategies.len() {
        add_embedded(&mut p, 0, nops + l, &last_emb, -1.0);
    }
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveDiagnostics {
    pub status: String,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

impl SolveDiagnostics {
    fn from_solution(sol: &SdpSolution) -> Self {
        Self {
            status: format!("{:?}", sol.status),
            iterations: sol.iterations,
            primal_objective: sol.primal_objective,
            dual_objective: sol.dual_objective,
            relative_gap: sol.relative_gap,
            primal_infeasibility: sol.primal_cone_violation,
            dual_infeasibility: sol.dual_equality_residual.max(sol.dual_cone_violation),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Witness {
    Steering { f: OperatorFamily },
    Incompatibility { omega: OperatorFamily, eta: HermitianOperator },
}

#[derive(Debug, Clone)]
pub struct RobustnessReport {
    /// Robustness attained by the witness, clamped at zero.
    pub value: f64,
    /// Robustness bound from the dual side of the solve.
    pub bound: f64,
    pub witness: Witness,
    pub diagnostics: SolveDiagnostics,
}

impl RobustnessReport {
    pub fn gap(&self) -> f64 {
        (self.bound - self.value).abs()
    }
}

fn run(problem: &SdpProblem, tol: &Tolerances) -> Result<SdpSolution> {
    let settings = Settings {
        tol: tol.solver,
        ..Settings::default()
    };
    let sol = solve(problem, &settings);
    if sol.status != Status::Optimal {
        return Err(Error::SolverFailure {
            label: problem.label().to_string(),
            detail: format!(
                "status {:?} after {} iterations, relative gap {:.3e}",
                sol.status, sol.iterations, sol.relative_gap
            ),
        });
    }
    Ok(sol)
}

fn family_from_coords(s: Scenario, basis: &HermitianBasis, x: &[f64]) -> OperatorFamily {
    let n = basis.len();
    let ops = (0..s.inputs)
        .map(|xi| {
            (0..s.outcomes)
                .map(|a| {
                    let op = xi * s.outcomes + a;
                    basis.assemble(&x[op * n..(op + 1) * n])
                })
                .collect()
        })
        .collect();
    OperatorFamily::new(ops).expect("uniform shape")
}

pub fn steering_robustness(asm: &Assemblage, tol: &Tolerances) -> Result<RobustnessReport> {
    let problem = steering_problem(asm, tol.strategy_cap)?;
    let sol = run(&problem, tol)?;
    let basis = HermitianBasis::new(asm.dim());
    let f = family_from_coords(asm.scenario(), &basis, &sol.x);
    let attained: f64 = asm.iter().zip(f.iter()).map(|(s, w)| s.inner(w)).sum();
    Ok(RobustnessReport {
        value: (attained - 1.0).max(0.0),
        bound: (-sol.dual_objective - 1.0).max(0.0),
        witness: Witness::Steering { f },
        diagnostics: SolveDiagnostics::from_solution(&sol),
    })
}

pub fn incompatibility_robustness(meas: &MeasurementAssemblage, tol: &Tolerances) -> Result<RobustnessReport> {
    let problem = incompatibility_problem(meas, tol.strategy_cap)?;
    let sol = run(&problem, tol)?;
    let s = meas.scenario();
    let basis = HermitianBasis::new(s.dim);
    let n = basis.len();
    let nops = s.operator_count();
    let omega = family_from_coords(s, &basis, &sol.x);
    let mut coords = vec![0.0; n];
    let last = s.dim - 1;
    let mut j = nops * n;
    for (k, slot) in coords.iter_mut().enumerate() {
        if k != last {
            *slot = sol.x[j];
            j += 1;
        }
    }
    let others: f64 = coords[..last].iter().sum();
    coords[last] = 1.0 - others;
    let eta = basis.assemble(&coords);
    let attained: f64 = meas.iter().zip(omega.iter()).map(|(b, w)| b.inner(w)).sum();
    Ok(RobustnessReport {
        value: (attained - 1.0).max(0.0),
        bound: (-sol.dual_objective - 1.0).max(0.0),
        witness: Witness::Incompatibility { omega, eta },
        diagnostics: SolveDiagnostics::from_solution(&sol),
    })
}

/// `sup_{σ ∈ [σ]} SR(σ) = IR(B)` for the SEO `B` of `asm`.
pub fn class_supremum(asm: &Assemblage, tol: &Tolerances) -> Result<RobustnessReport> {
    let seo = compute_seo(asm, tol)?;
    incompatibility_robustness(&seo.observables, tol)
}

pub fn is_lhs(asm: &Assemblage, tol: &Tolerances) -> Result<bool> {
    Ok(steering_robustness(asm, tol)?.value <= tol.membership)
}

pub fn is_jointly_measurable(meas: &MeasurementAssemblage, tol: &Tolerances) -> Result<bool> {
    Ok(incompatibility_robustness(meas, tol)?.value <= tol.membership)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessDirection {
    /// `F = η^{-1/2} ω η^{-1/2}` (pseudo-inverse on the support of `η`).
    ToSteering,
    /// `ω = η^{1/2} F η^{1/2}`.
    ToIncompatibility,
}

/// Slack allowed on witness constraints coming out of an interior-point
/// solve.
const WITNESS_SLACK: f64 = 1e-6;

/// Maps a feasible witness of one program to a feasible witness of the
/// other through `η`.
pub fn witness_transform(
    witness: &OperatorFamily,
    eta: &HermitianOperator,
    direction: WitnessDirection,
    tol: &Tolerances,
) -> Result<OperatorFamily> {
    if eta.dim() != witness.dim() {
        return Err(Error::DimensionMismatch(format!(
            "η has dimension {}, witness {}",
            eta.dim(),
            witness.dim()
        )));
    }
    let trace = eta.trace_real();
    if (trace - 1.0).abs() > tol.ns || !eta.is_psd(tol.psd) {
        return Err(Error::InfeasibleWitness(format!("η is not a state (trace {trace})")));
    }
    for op in witness.iter() {
        let min = op.lambda_min();
        if min < -WITNESS_SLACK {
            return Err(Error::InfeasibleWitness(format!("witness operator has eigenvalue {min:.3e}")));
        }
    }
    let strategies = enumerate_deterministic(witness.scenario(), tol.strategy_cap)?;
    let bound = match direction {
        WitnessDirection::ToSteering => eta.clone(),
        WitnessDirection::ToIncompatibility => HermitianOperator::identity(eta.dim()),
    };
    for l in 0..strategies.len() {
        let min = bound.sub(&strategies.aggregate(l, witness)).lambda_min();
        if min < -WITNESS_SLACK {
            return Err(Error::InfeasibleWitness(format!(
                "strategy {} constraint violated by {:.3e}",
                l + 1,
                -min
            )));
        }
    }
    let map = match direction {
        WitnessDirection::ToSteering => pinv_sqrt(eta, tol.rank)?.0,
        WitnessDirection::ToIncompatibility => sqrt_psd(eta, tol.psd)?,
    };
    Ok(witness.congruence(map.matrix()))
}
