//! Steering assemblages, steering-equivalent observables, local filters and
//! steering / incompatibility robustness.

pub mod assemblage;
pub mod error;
pub mod families;
pub mod filter;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod rate;
pub mod robustness;
pub mod seo;
pub mod tol;

pub use assemblage::{
    Assemblage, MeasurementAssemblage, OperatorFamily, Scenario, SchmidtVector, ValidationReport,
    Violation,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianOperator};
pub use tol::Tolerances;
