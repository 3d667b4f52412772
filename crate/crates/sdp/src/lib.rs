//! Dense semidefinite programming for small block-diagonal problems.
//!
//! Problems are stated in SDPA standard form ([`SdpProblem`]), solved by a
//! deterministic primal-dual interior-point method ([`solve`]) and exchanged
//! with other solvers through the SDPA sparse text format
//! ([`export_sdpa`], [`import_sdpa`]).

mod problem;
mod sdpa;
mod solver;

pub use problem::{BlockKind, ProblemError, SdpProblem, SparseBlockMatrix};
pub use sdpa::{export_sdpa, import_sdpa, SdpaError};
pub use solver::{solve, SdpSolution, Settings, Status};
