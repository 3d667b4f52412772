use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian: ‖M − M†‖ = {deviation:.3e} exceeds {allowed:.3e}")]
    NotHermitian { deviation: f64, allowed: f64 },
    #[error("operator is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("operator has no support above the rank tolerance")]
    ZeroOperator,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a state: {0}")]
    NotAState(String),
    #[error("Schmidt vector has a zero coefficient at index {0}; opt into rank deficiency explicitly")]
    RankDeficientSchmidt(usize),
    #[error("no-signaling violated between inputs {x1} and {x2}: ‖Δ‖ = {deviation:.3e}")]
    NoSignalingViolation { x1: usize, x2: usize, deviation: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("assemblages are not SEO-equivalent under the given unitary: residual {residual:.3e}")]
    NotEquivalent { residual: f64 },
    #[error("filter is not a contraction: λ_max(K†K) = {lambda_max:.6}")]
    NotContractive { lambda_max: f64 },
    #[error("filter annihilates the assemblage: success probability {p_succ:.3e}")]
    FilterAnnihilates { p_succ: f64 },
    #[error("{count} deterministic strategies exceed the cap of {cap}")]
    TooManyStrategies { count: u128, cap: usize },
    #[error("SDP solver failed on {label}: {detail}")]
    SolverFailure { label: String, detail: String },
    #[error("witness is infeasible: {0}")]
    InfeasibleWitness(String),
    #[error("malformed input: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
