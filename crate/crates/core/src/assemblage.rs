//! Steering scenarios, assemblages and measurement families.
//!
//! Operators are stored as `ops[x][a]` with 0-based indices; reports and
//! file formats use 1-based labels.

use std::ops::Deref;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    c, identity, kron, partial_trace_a, ComplexMatrix, ComplexVector, HermitianOperator,
};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Scenario {
    pub inputs: usize,
    pub outcomes: usize,
    pub dim: usize,
}

impl Scenario {
    /// Number of deterministic strategies `k^m`, saturating.
    pub fn strategy_count(&self) -> u128 {
        (self.outcomes as u128).saturating_pow(self.inputs as u32)
    }

    pub fn operator_count(&self) -> usize {
        self.inputs * self.outcomes
    }
}

/// Rectangular table of Hermitian operators `ops[x][a]` of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFamily {
    scenario: Scenario,
    ops: Vec<Vec<HermitianOperator>>,
}

impl OperatorFamily {
    pub fn new(ops: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        let inputs = ops.len();
        if inputs == 0 {
            return Err(Error::DimensionMismatch("no inputs".into()));
        }
        let outcomes = ops[0].len();
        if outcomes == 0 {
            return Err(Error::DimensionMismatch("no outcomes".into()));
        }
        let dim = ops[0][0].dim();
        if dim == 0 {
            return Err(Error::DimensionMismatch("zero-dimensional operators".into()));
        }
        for (x, row) in ops.iter().enumerate() {
            if row.len() != outcomes {
                return Err(Error::DimensionMismatch(format!(
                    "input {} has {} outcomes, input 1 has {outcomes}",
                    x + 1,
                    row.len()
                )));
            }
            for (a, op) in row.iter().enumerate() {
                if op.dim() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "operator (a={}, x={}) has dimension {}, expected {dim}",
                        a + 1,
                        x + 1,
                        op.dim()
                    )));
                }
            }
        }
        Ok(Self {
            scenario: Scenario { inputs, outcomes, dim },
            ops,
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn dim(&self) -> usize {
        self.scenario.dim
    }

    pub fn op(&self, x: usize, a: usize) -> &HermitianOperator {
        &self.ops[x][a]
    }

    pub fn rows(&self) -> &[Vec<HermitianOperator>] {
        &self.ops
    }

    /// Operators in input-major order.
    pub fn iter(&self) -> impl Iterator<Item = &HermitianOperator> {
        self.ops.iter().flatten()
    }

    pub fn input_sum(&self, x: usize) -> HermitianOperator {
        let mut s = HermitianOperator::zeros(self.dim());
        for op in &self.ops[x] {
            s = s.add(op);
        }
        s
    }

    pub fn map(&self, f: impl Fn(&HermitianOperator) -> HermitianOperator) -> Self {
        let ops: Vec<Vec<_>> = self.ops.iter().map(|row| row.iter().map(&f).collect()).collect();
        Self::new(ops).expect("mapping preserves the table shape")
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|op| op.scale(s))
    }

    pub fn transpose(&self) -> Self {
        self.map(|op| op.transpose())
    }

    /// `K X K†` applied to every operator.
    pub fn congruence(&self, k: &ComplexMatrix) -> Self {
        self.map(|op| op.congruence(k))
    }

    /// Largest per-operator Frobenius distance, infinite on shape mismatch.
    pub fn max_distance(&self, other: &Self) -> f64 {
        if self.scenario != other.scenario {
            return f64::INFINITY;
        }
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

/// One entry of a [`ValidationReport`]. Inputs and outcomes are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotPsd { input: usize, outcome: usize, min_eigenvalue: f64 },
    NoSignaling { input: usize, reference: usize, deviation: f64 },
    Trace { trace: f64 },
    Completeness { input: usize, deviation: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn into_error(self) -> Result<()> {
        match self.violations.into_iter().next() {
            None => Ok(()),
            Some(Violation::NotPsd { min_eigenvalue, .. }) => Err(Error::NotPsd { min_eigenvalue }),
            Some(Violation::NoSignaling { input, reference, deviation }) => {
                Err(Error::NoSignalingViolation { x1: reference, x2: input, deviation })
            }
            Some(Violation::Trace { trace }) => {
                Err(Error::NotAState(format!("reduced state has trace {trace}")))
            }
            Some(Violation::Completeness { input, deviation }) => Err(Error::InvalidDistribution(
                format!("effects of input {input} miss the identity by {deviation:.3e}"),
            )),
        }
    }
}

fn psd_violations(family: &OperatorFamily, tol: &Tolerances, out: &mut Vec<Violation>) {
    for (x, row) in family.rows().iter().enumerate() {
        for (a, op) in row.iter().enumerate() {
            let min = op.lambda_min();
            if min < -tol.psd {
                out.push(Violation::NotPsd {
                    input: x + 1,
                    outcome: a + 1,
                    min_eigenvalue: min,
                });
            }
        }
    }
}

/// Assemblage `σ_{a|x}` on Bob's space.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage(OperatorFamily);

impl Deref for Assemblage {
    type Target = OperatorFamily;

    fn deref(&self) -> &OperatorFamily {
        &self.0
    }
}

impl Assemblage {
    /// Shape-checked construction; call [`Assemblage::validate`] for the
    /// physical constraints.
    pub fn new(ops: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        OperatorFamily::new(ops).map(Self)
    }

    /// Construction that also rejects invalid assemblages.
    pub fn checked(ops: Vec<Vec<HermitianOperator>>, tol: &Tolerances) -> Result<Self> {
        let asm = Self::new(ops)?;
        asm.validate(tol).into_error()?;
        Ok(asm)
    }

    pub fn from_family(family: OperatorFamily) -> Self {
        Self(family)
    }

    pub fn family(&self) -> &OperatorFamily {
        &self.0
    }

    pub fn sigma(&self, a: usize, x: usize) -> &HermitianOperator {
        self.0.op(x, a)
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut violations = Vec::new();
        psd_violations(&self.0, tol, &mut violations);
        let reference = self.input_sum(0);
        for x in 1..self.scenario().inputs {
            let deviation = self.input_sum(x).distance(&reference);
            if deviation > tol.ns {
                violations.push(Violation::NoSignaling {
                    input: x + 1,
                    reference: 1,
                    deviation,
                });
            }
        }
        let trace = reference.trace_real();
        if (trace - 1.0).abs() > tol.ns {
            violations.push(Violation::Trace { trace });
        }
        ValidationReport { violations }
    }

    /// `ρ_B = Σ_a σ_{a|x}`, averaged over inputs after checking no-signaling.
    pub fn reduced_state(&self, ns_tol: f64) -> Result<HermitianOperator> {
        let reference = self.input_sum(0);
        let mut acc = reference.clone();
        for x in 1..self.scenario().inputs {
            let s = self.input_sum(x);
            let deviation = s.distance(&reference);
            if deviation > ns_tol {
                return Err(Error::NoSignalingViolation { x1: 1, x2: x + 1, deviation });
            }
            acc = acc.add(&s);
        }
        Ok(acc.scale(1.0 / self.scenario().inputs as f64))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn congruence(&self, k: &ComplexMatrix) -> Self {
        Self(self.0.congruence(k))
    }

    /// `σ_{a|x} = tr_A[(A_{a|x} ⊗ 1) ρ_AB]`.
    pub fn from_state_and_measurements(
        rho_ab: &HermitianOperator,
        meas: &MeasurementAssemblage,
        tol: &Tolerances,
    ) -> Result<Self> {
        let da = meas.dim();
        let total = rho_ab.dim();
        if !total.is_multiple_of(da) {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {total} is not a multiple of Alice's dimension {da}"
            )));
        }
        let db = total / da;
        let trace = rho_ab.trace_real();
        if (trace - 1.0).abs() > tol.ns {
            return Err(Error::NotAState(format!("trace is {trace}")));
        }
        let min = rho_ab.lambda_min();
        if min < -tol.psd {
            return Err(Error::NotAState(format!("smallest eigenvalue is {min:.3e}")));
        }
        let id_b = identity(db);
        let ops = meas
            .rows()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| partial_trace_a(&(kron(e.matrix(), &id_b) * rho_ab.matrix()), da, db))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }

    /// `σ_{a|x} = τ^{1/2} B_{a|x} τ^{1/2}` with `τ^{1/2} = diag(μ)`.
    pub fn from_pure_schmidt(mu: &SchmidtVector, b: &MeasurementAssemblage) -> Result<Self> {
        if mu.len() != b.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} Schmidt coefficients for {}-dimensional operators",
                mu.len(),
                b.dim()
            )));
        }
        if !mu.allows_rank_deficiency() {
            if let Some(i) = mu.coefficients().iter().position(|&m| m == 0.0) {
                return Err(Error::RankDeficientSchmidt(i));
            }
        }
        let root = mu.sqrt_reduced().into_matrix();
        Ok(Self(b.family().congruence(&root)))
    }

    /// `σ_{a|x} = Σ_λ p(λ) D(a|x,λ) ρ_λ` with `responses[λ][x][a]`.
    pub fn lhs_from_model(
        p: &[f64],
        responses: &[Vec<Vec<f64>>],
        states: &[HermitianOperator],
        tol: &Tolerances,
    ) -> Result<Self> {
        if p.is_empty() || p.len() != responses.len() || p.len() != states.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights, {} response functions, {} states",
                p.len(),
                responses.len(),
                states.len()
            )));
        }
        check_distribution(p, tol.ns, "hidden-variable weights")?;
        let d = states[0].dim();
        let inputs = responses[0].len();
        let outcomes = responses[0].first().map_or(0, Vec::len);
        if inputs == 0 || outcomes == 0 {
            return Err(Error::DimensionMismatch("empty response function".into()));
        }
        for (l, (resp, state)) in responses.iter().zip(states).enumerate() {
            if state.dim() != d {
                return Err(Error::DimensionMismatch(format!("state {} has dimension {}", l + 1, state.dim())));
            }
            let trace = state.trace_real();
            if (trace - 1.0).abs() > tol.ns || !state.is_psd(tol.psd) {
                return Err(Error::InvalidDistribution(format!("hidden state {} is not a state", l + 1)));
            }
            if resp.len() != inputs {
                return Err(Error::DimensionMismatch(format!("response {} has {} inputs", l + 1, resp.len())));
            }
            for (x, dist) in resp.iter().enumerate() {
                if dist.len() != outcomes {
                    return Err(Error::DimensionMismatch(format!(
                        "response {} input {} has {} outcomes",
                        l + 1,
                        x + 1,
                        dist.len()
                    )));
                }
                check_distribution(dist, tol.ns, "response function")?;
            }
        }
        let ops = (0..inputs)
            .map(|x| {
                (0..outcomes)
                    .map(|a| {
                        let mut s = HermitianOperator::zeros(d);
                        for l in 0..p.len() {
                            s = s.add(&states[l].scale(p[l] * responses[l][x][a]));
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        Self::new(ops)
    }

    /// `A / d`, the canonical member of the class of `A`.
    pub fn canonical(meas: &MeasurementAssemblage) -> Self {
        Self(meas.family().scale(1.0 / meas.dim() as f64))
    }
}

fn check_distribution(p: &[f64], ns_tol: f64, what: &str) -> Result<()> {
    if p.iter().any(|&v| !v.is_finite() || v < -ns_tol) {
        return Err(Error::InvalidDistribution(format!("{what} has a negative entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > ns_tol {
        return Err(Error::InvalidDistribution(format!("{what} sums to {s}")));
    }
    Ok(())
}

/// Measurement assemblage `A_{a|x}`: a POVM per input.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementAssemblage(OperatorFamily);

impl Deref for MeasurementAssemblage {
    type Target = OperatorFamily;

    fn deref(&self) -> &OperatorFamily {
        &self.0
    }
}

impl MeasurementAssemblage {
    pub fn new(ops: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        OperatorFamily::new(ops).map(Self)
    }

    pub fn checked(ops: Vec<Vec<HermitianOperator>>, tol: &Tolerances) -> Result<Self> {
        let m = Self::new(ops)?;
        m.validate(tol).into_error()?;
        Ok(m)
    }

    pub fn from_family(family: OperatorFamily) -> Self {
        Self(family)
    }

    pub fn family(&self) -> &OperatorFamily {
        &self.0
    }

    pub fn effect(&self, a: usize, x: usize) -> &HermitianOperator {
        self.0.op(x, a)
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut violations = Vec::new();
        psd_violations(&self.0, tol, &mut violations);
        let id = HermitianOperator::identity(self.dim());
        for x in 0..self.scenario().inputs {
            let deviation = self.input_sum(x).distance(&id);
            if deviation > tol.ns {
                violations.push(Violation::Completeness { input: x + 1, deviation });
            }
        }
        ValidationReport { violations }
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn congruence(&self, k: &ComplexMatrix) -> Self {
        Self(self.0.congruence(k))
    }

    /// Projective measurements onto the columns of each basis.
    pub fn from_bases(bases: &[ComplexMatrix]) -> Result<Self> {
        let ops = bases
            .iter()
            .map(|u| {
                (0..u.ncols())
                    .map(|j| HermitianOperator::outer(&u.column(j).into_owned()))
                    .collect()
            })
            .collect();
        Self::new(ops)
    }
}

/// Nonnegative Schmidt coefficients `μ_i` with `Σ μ_i² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtVector {
    coeffs: Vec<f64>,
    rank_deficient_ok: bool,
}

impl SchmidtVector {
    /// Accepts `|Σ μ² − 1| ≤ ns_tol` and rescales to unit norm.
    pub fn new(coeffs: Vec<f64>, ns_tol: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidDistribution("empty Schmidt vector".into()));
        }
        if coeffs.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::InvalidDistribution("Schmidt coefficients must be finite and nonnegative".into()));
        }
        let norm2: f64 = coeffs.iter().map(|m| m * m).sum();
        if (norm2 - 1.0).abs() > ns_tol {
            return Err(Error::InvalidDistribution(format!("Σ μ² = {norm2}")));
        }
        let n = norm2.sqrt();
        Ok(Self {
            coeffs: coeffs.into_iter().map(|m| m / n).collect(),
            rank_deficient_ok: false,
        })
    }

    /// Appends the last coefficient `sqrt(1 − Σ μ²)` to a leading prefix.
    pub fn complete(prefix: &[f64]) -> Result<Self> {
        let s: f64 = prefix.iter().map(|m| m * m).sum();
        if s.is_nan() || s > 1.0 {
            return Err(Error::InvalidDistribution(format!("Σ μ² = {s} exceeds 1")));
        }
        let mut coeffs = prefix.to_vec();
        coeffs.push((1.0 - s).max(0.0).sqrt());
        Self::new(coeffs, f64::INFINITY)
    }

    pub fn allowing_rank_deficiency(mut self) -> Self {
        self.rank_deficient_ok = true;
        self
    }

    pub fn allows_rank_deficiency(&self) -> bool {
        self.rank_deficient_ok
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `|ψ⟩ = Σ μ_i |i⟩|i⟩` with A as the slow index.
    pub fn state_vector(&self) -> ComplexVector {
        let d = self.len();
        let mut v = ComplexVector::zeros(d * d);
        for (i, &m) in self.coeffs.iter().enumerate() {
            v[i * d + i] = c(m, 0.0);
        }
        v
    }

    pub fn density(&self) -> HermitianOperator {
        HermitianOperator::outer(&self.state_vector())
    }

    /// `τ = diag(μ²)`.
    pub fn reduced(&self) -> HermitianOperator {
        let sq: Vec<f64> = self.coeffs.iter().map(|m| m * m).collect();
        HermitianOperator::from_real_diagonal(&sq)
    }

    pub fn sqrt_reduced(&self) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&self.coeffs)
    }
}
