//! Block-diagonal SDP in SDPA standard form.
//!
//! Primal:  minimize   Σᵢ cᵢ xᵢ
//!          subject to X = Σᵢ Fᵢ xᵢ − F₀ ⪰ 0
//!
//! Dual:    maximize   F₀ • Y
//!          subject to Fᵢ • Y = cᵢ  (i = 1..m),  Y ⪰ 0
//!
//! Every matrix shares the same block structure. Entries are stored on the
//! upper triangle (`row <= col`) with 0-based indices.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("block structure is empty")]
    NoBlocks,
    #[error("block {0} has zero dimension")]
    EmptyBlock(usize),
    #[error("matrix index {index} out of range (problem has {count} constraint matrices)")]
    MatrixOutOfRange { index: usize, count: usize },
    #[error("block index {index} out of range ({count} blocks)")]
    BlockOutOfRange { index: usize, count: usize },
    #[error("entry ({row}, {col}) outside block {block} of dimension {dim}")]
    EntryOutOfRange {
        block: usize,
        row: usize,
        col: usize,
        dim: usize,
    },
    #[error("off-diagonal entry ({row}, {col}) in diagonal block {block}")]
    OffDiagonalInDiagonalBlock { block: usize, row: usize, col: usize },
    #[error("non-finite value {0}")]
    NonFinite(f64),
}

/// Shape of one diagonal block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Dense symmetric `n × n` block.
    Dense(usize),
    /// Diagonal `n × n` block (an LP cone of size `n`).
    Diagonal(usize),
}

impl BlockKind {
    pub fn dim(self) -> usize {
        match self {
            BlockKind::Dense(n) | BlockKind::Diagonal(n) => n,
        }
    }

    /// SDPA convention: diagonal blocks carry a negative size.
    pub fn sdpa_size(self) -> i64 {
        match self {
            BlockKind::Dense(n) => n as i64,
            BlockKind::Diagonal(n) => -(n as i64),
        }
    }
}

/// Sparse symmetric block-diagonal matrix keyed by `(block, row, col)` with
/// `row <= col`.
pub type SparseBlockMatrix = BTreeMap<(usize, usize, usize), f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    label: String,
    blocks: Vec<BlockKind>,
    block_notes: Vec<String>,
    objective: Vec<f64>,
    /// `matrices[0]` is F₀, `matrices[i]` is Fᵢ.
    matrices: Vec<SparseBlockMatrix>,
}

impl SdpProblem {
    pub fn new(num_vars: usize, blocks: Vec<BlockKind>) -> Result<Self, ProblemError> {
        if blocks.is_empty() {
            return Err(ProblemError::NoBlocks);
        }
        if let Some(i) = blocks.iter().position(|b| b.dim() == 0) {
            return Err(ProblemError::EmptyBlock(i));
        }
        Ok(Self {
            label: String::new(),
            block_notes: vec![String::new(); blocks.len()],
            blocks,
            objective: vec![0.0; num_vars],
            matrices: vec![SparseBlockMatrix::new(); num_vars + 1],
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    /// Free-text description of a block, written into SDPA header comments.
    pub fn set_block_note(&mut self, block: usize, note: impl Into<String>) {
        if let Some(slot) = self.block_notes.get_mut(block) {
            *slot = note.into();
        }
    }

    pub fn block_notes(&self) -> &[String] {
        &self.block_notes
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn blocks(&self) -> &[BlockKind] {
        &self.blocks
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    /// `i` is 0-based over the variables, i.e. it sets `c_{i+1}` in SDPA
    /// numbering.
    pub fn set_objective(&mut self, i: usize, value: f64) -> Result<(), ProblemError> {
        if !value.is_finite() {
            return Err(ProblemError::NonFinite(value));
        }
        let n = self.objective.len();
        let slot = self
            .objective
            .get_mut(i)
            .ok_or(ProblemError::MatrixOutOfRange { index: i + 1, count: n + 1 })?;
        *slot = value;
        Ok(())
    }

    /// Matrix `0` is F₀. Returns the sparse upper-triangular entries.
    pub fn matrix(&self, index: usize) -> &SparseBlockMatrix {
        &self.matrices[index]
    }

    /// Adds `value` to entry `(row, col)` (and implicitly its mirror) of
    /// matrix `index`. Zero results are pruned.
    pub fn add_entry(
        &mut self,
        index: usize,
        block: usize,
        row: usize,
        col: usize,
        value: f64,
    ) -> Result<(), ProblemError> {
        if !value.is_finite() {
            return Err(ProblemError::NonFinite(value));
        }
        if index >= self.matrices.len() {
            return Err(ProblemError::MatrixOutOfRange {
                index,
                count: self.matrices.len(),
            });
        }
        let kind = *self.blocks.get(block).ok_or(ProblemError::BlockOutOfRange {
            index: block,
            count: self.blocks.len(),
        })?;
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        if col >= kind.dim() {
            return Err(ProblemError::EntryOutOfRange {
                block,
                row,
                col,
                dim: kind.dim(),
            });
        }
        if matches!(kind, BlockKind::Diagonal(_)) && row != col {
            return Err(ProblemError::OffDiagonalInDiagonalBlock { block, row, col });
        }
        if value == 0.0 {
            return Ok(());
        }
        let key = (block, row, col);
        let entry = self.matrices[index].entry(key).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.matrices[index].remove(&key);
        }
        Ok(())
    }

    /// Objective `c·x` of an SDPA primal point.
    pub fn primal_objective(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}
