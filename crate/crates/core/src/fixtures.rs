//! Embedded reference data.

use serde::Deserialize;

use crate::assemblage::MeasurementAssemblage;
use crate::error::Result;
use crate::io::{matrix_from_json, MatrixJson};
use crate::linalg::{eig_hermitian, pinv_sqrt, HermitianOperator};
use crate::tol::Tolerances;

const QUQUART_PAIR: &str = include_str!("../fixtures/ququart_pair.json");

/// Changes made by [`repair_povm`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PovmRepair {
    /// Most negative eigenvalue found among the input effects (0 if none).
    pub most_negative_eigenvalue: f64,
    /// Largest Frobenius change of any single effect.
    pub max_change: f64,
}

/// Clips negative eigenvalues of every effect and restores completeness
/// with `S_x^{-1/2} (·) S_x^{-1/2}`, `S_x = Σ_a E'_{a|x}`.
pub fn repair_povm(meas: &MeasurementAssemblage, tol: &Tolerances) -> Result<(MeasurementAssemblage, PovmRepair)> {
    let most_negative = meas
        .iter()
        .map(|e| e.lambda_min())
        .fold(0.0f64, f64::min);
    let clipped = meas.family().map(|e| eig_hermitian(e).apply(|l| l.max(0.0)));
    let mut rows = Vec::with_capacity(clipped.scenario().inputs);
    for x in 0..clipped.scenario().inputs {
        let (root, _) = pinv_sqrt(&clipped.input_sum(x), tol.rank)?;
        rows.push(clipped.rows()[x].iter().map(|e| e.congruence(root.matrix())).collect());
    }
    let repaired = MeasurementAssemblage::new(rows)?;
    let max_change = repaired.max_distance(meas);
    Ok((
        repaired,
        PovmRepair {
            most_negative_eigenvalue: most_negative,
            max_change,
        },
    ))
}

#[derive(Deserialize)]
struct EtaDoc {
    eta: MatrixJson,
}

/// Four-dimensional two-setting, two-outcome measurements printed to four
/// decimals. The printed effects have eigenvalues down to about −6e-5.
pub fn ququart_pair_printed(tol: &Tolerances) -> Result<MeasurementAssemblage> {
    MeasurementAssemblage::from_json_str(QUQUART_PAIR, tol)
}

/// [`ququart_pair_printed`] after [`repair_povm`].
pub fn ququart_pair(tol: &Tolerances) -> Result<(MeasurementAssemblage, PovmRepair)> {
    repair_povm(&ququart_pair_printed(tol)?, tol)
}

/// Printed optimal `η` of the incompatibility program for the pair.
pub fn ququart_pair_eta(tol: &Tolerances) -> Result<HermitianOperator> {
    let doc: EtaDoc = serde_json::from_str(QUQUART_PAIR)?;
    HermitianOperator::new(matrix_from_json(&doc.eta, "eta")?, tol.herm)
}
