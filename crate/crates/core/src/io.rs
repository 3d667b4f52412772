//! JSON representation of operator families and matrices.
//!
//! ```json
//! {"dim": 2, "inputs": 2, "outcomes": 2,
//!  "sigma": [[ [[[re, im], ...], ...], ... ], ...]}
//! ```
//!
//! `sigma[x][a][row][col]` holds `[re, im]`; measurement files use `povm`
//! instead of `sigma`. Unknown top-level fields are ignored.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::assemblage::{Assemblage, MeasurementAssemblage, OperatorFamily};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, HermitianOperator};
use crate::tol::Tolerances;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson, path: &str) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Schema(format!(
                "{path}[{i}]: expected {ncols} columns, found {}",
                row.len()
            )));
        }
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

#[derive(Serialize, Deserialize)]
struct AssemblageDoc {
    dim: usize,
    inputs: usize,
    outcomes: usize,
    sigma: Vec<Vec<MatrixJson>>,
}

#[derive(Serialize, Deserialize)]
struct MeasurementDoc {
    dim: usize,
    inputs: usize,
    outcomes: usize,
    povm: Vec<Vec<MatrixJson>>,
}

fn family_json(f: &OperatorFamily) -> Vec<Vec<MatrixJson>> {
    f.rows()
        .iter()
        .map(|row| row.iter().map(|op| matrix_to_json(op.matrix())).collect())
        .collect()
}

fn family_from_json(
    field: &str,
    dim: usize,
    inputs: usize,
    outcomes: usize,
    data: &[Vec<MatrixJson>],
    tol: &Tolerances,
) -> Result<OperatorFamily> {
    if data.len() != inputs {
        return Err(Error::Schema(format!(
            "{field}: expected {inputs} inputs, found {}",
            data.len()
        )));
    }
    let mut ops = Vec::with_capacity(inputs);
    for (x, row) in data.iter().enumerate() {
        if row.len() != outcomes {
            return Err(Error::Schema(format!(
                "{field}[{x}]: expected {outcomes} outcomes, found {}",
                row.len()
            )));
        }
        let mut out = Vec::with_capacity(outcomes);
        for (a, m) in row.iter().enumerate() {
            let path = format!("{field}[{x}][{a}]");
            if m.len() != dim {
                return Err(Error::Schema(format!("{path}: expected {dim} rows, found {}", m.len())));
            }
            let mat = matrix_from_json(m, &path)?;
            if mat.ncols() != dim {
                return Err(Error::Schema(format!("{path}: expected {dim} columns, found {}", mat.ncols())));
            }
            let op = HermitianOperator::new(mat, tol.herm)
                .map_err(|e| Error::Schema(format!("{path}: {e}")))?;
            out.push(op);
        }
        ops.push(out);
    }
    OperatorFamily::new(ops)
}

impl Assemblage {
    pub fn to_json_value(&self) -> Value {
        let s = self.scenario();
        serde_json::to_value(AssemblageDoc {
            dim: s.dim,
            inputs: s.inputs,
            outcomes: s.outcomes,
            sigma: family_json(self.family()),
        })
        .expect("assemblage serializes")
    }

    /// Parses and shape-checks; physical validity is left to
    /// [`Assemblage::validate`].
    pub fn from_json_str(text: &str, tol: &Tolerances) -> Result<Self> {
        let doc: AssemblageDoc = serde_json::from_str(text)?;
        family_from_json("sigma", doc.dim, doc.inputs, doc.outcomes, &doc.sigma, tol).map(Self::from_family)
    }
}

impl MeasurementAssemblage {
    pub fn to_json_value(&self) -> Value {
        let s = self.scenario();
        serde_json::to_value(MeasurementDoc {
            dim: s.dim,
            inputs: s.inputs,
            outcomes: s.outcomes,
            povm: family_json(self.family()),
        })
        .expect("measurements serialize")
    }

    pub fn from_json_str(text: &str, tol: &Tolerances) -> Result<Self> {
        let doc: MeasurementDoc = serde_json::from_str(text)?;
        family_from_json("povm", doc.dim, doc.inputs, doc.outcomes, &doc.povm, tol).map(Self::from_family)
    }
}
