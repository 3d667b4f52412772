//! Primal-dual path-following interior-point method.
//!
//! Internally the SDPA pair is rewritten as
//!
//! ```text
//! (P)  min  C • X   s.t.  Aₖ • X = bₖ,  X ⪰ 0
//! (D)  max  bᵀy     s.t.  Σ yₖ Aₖ + S = C,  S ⪰ 0
//! ```
//!
//! with `C = −F₀`, `Aₖ = −Fₖ`, `b = −c`, so that the SDPA primal vector is
//! `x = y`, the SDPA slack is `S` and the SDPA dual matrix is `X`.
//!
//! Search directions use HKM scaling (`ΔX = R − X ΔS S⁻¹`, symmetrized) with a
//! Mehrotra predictor-corrector and a dense Cholesky-factored Schur
//! complement `Mₖₗ = tr(Aₖ X Aₗ S⁻¹)`. Diagonal blocks are expanded into
//! `1 × 1` dense blocks. The method is free of randomness: identical input
//! and settings give identical output.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::problem::{BlockKind, SdpProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Iteration stops once gap and residuals fall below this.
    pub target_tol: f64,
    /// Acceptance threshold: a terminated run is `Optimal` when its relative
    /// gap and residuals are below this value.
    pub tol: f64,
    /// Relative pivot below which a constraint matrix is treated as linearly
    /// dependent on earlier ones and removed.
    pub presolve_pivot: f64,
    /// Iterate norm beyond which the problem is declared infeasible.
    pub divergence_bound: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            max_iter: 200,
            step_fraction: 0.98,
            target_tol: 1e-10,
            tol: 1e-7,
            presolve_pivot: 1e-10,
            divergence_bound: 1e10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    MaxIter,
    Infeasible,
    NumericalTrouble,
}

/// Solution in SDPA terms.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: Status,
    /// Primal vector `x` (length m). Variables removed by presolve are zero.
    pub x: Vec<f64>,
    /// `Σ Fᵢ xᵢ − F₀`, one dense matrix per block (diagonal blocks as diagonal matrices).
    pub slack: Vec<DMatrix<f64>>,
    /// Dual matrix `Y`, one per block.
    pub dual: Vec<DMatrix<f64>>,
    /// `c · x`
    pub primal_objective: f64,
    /// `F₀ • Y`
    pub dual_objective: f64,
    /// `|primal_objective − dual_objective|`
    pub gap: f64,
    pub relative_gap: f64,
    /// Magnitude of the most negative eigenvalue of `slack` (0 when PSD).
    pub primal_cone_violation: f64,
    /// `maxᵢ |Fᵢ • Y − cᵢ|`
    pub dual_equality_residual: f64,
    /// Magnitude of the most negative eigenvalue of `Y` (0 when PSD).
    pub dual_cone_violation: f64,
    pub iterations: usize,
    /// 0-based indices of variables dropped as linearly dependent.
    pub removed_vars: Vec<usize>,
}

type Sparse = Vec<(usize, usize, f64)>;

/// One variable's restriction to one internal block.
struct Term {
    block: usize,
    sparse: Sparse,
    dense: DMatrix<f64>,
}

struct Layout {
    sizes: Vec<usize>,
    /// For each original block, its first internal block.
    offsets: Vec<usize>,
    kinds: Vec<BlockKind>,
}

impl Layout {
    fn new(problem: &SdpProblem) -> Self {
        let mut sizes = Vec::new();
        let mut offsets = Vec::new();
        for kind in problem.blocks() {
            offsets.push(sizes.len());
            match *kind {
                BlockKind::Dense(n) => sizes.push(n),
                BlockKind::Diagonal(n) => sizes.extend(std::iter::repeat_n(1, n)),
            }
        }
        Self {
            sizes,
            offsets,
            kinds: problem.blocks().to_vec(),
        }
    }

    fn map(&self, block: usize, row: usize, col: usize) -> (usize, usize, usize) {
        match self.kinds[block] {
            BlockKind::Dense(_) => (self.offsets[block], row, col),
            BlockKind::Diagonal(_) => (self.offsets[block] + row, 0, 0),
        }
    }

    fn zeros(&self) -> Vec<DMatrix<f64>> {
        self.sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect()
    }
}

/// `tr(A G)` for symmetric sparse `A` given on its upper triangle.
fn sparse_trace(a: &Sparse, g: &DMatrix<f64>) -> f64 {
    a.iter()
        .map(|&(i, j, v)| {
            if i == j {
                v * g[(i, i)]
            } else {
                v * (g[(j, i)] + g[(i, j)])
            }
        })
        .sum()
}

fn frob_inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob_norm(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Largest `α` with `X + α ΔX ⪰ 0` (infinite when ΔX keeps X in the cone).
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let chol = Cholesky::new(x.clone())?;
    let l = chol.l();
    let w = l.solve_lower_triangular(dx)?;
    let mut w2 = l.solve_lower_triangular(&w.transpose())?;
    symmetrize(&mut w2);
    let lmin = SymmetricEigen::new(w2).eigenvalues.min();
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let mut s = m.clone();
    symmetrize(&mut s);
    SymmetricEigen::new(s).eigenvalues.min()
}

enum Presolve {
    Kept(Vec<usize>, Vec<usize>),
    Inconsistent,
}

/// Greedy pivoted Cholesky on the Gram matrix of F₁..Fₘ in index order.
fn presolve(problem: &SdpProblem, layout: &Layout, pivot_tol: f64) -> Presolve {
    let m = problem.num_vars();
    let mut by_entry: std::collections::BTreeMap<(usize, usize, usize), Vec<(usize, f64)>> =
        Default::default();
    for k in 0..m {
        for (&(b, i, j), &v) in problem.matrix(k + 1) {
            let key = layout.map(b, i, j);
            let w: f64 = if key.1 == key.2 { 1.0 } else { 2.0 };
            by_entry.entry(key).or_default().push((k, v * w.sqrt()));
        }
    }
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for list in by_entry.values() {
        for &(k, u) in list {
            for &(l, v) in list {
                gram[(k, l)] += u * v;
            }
        }
    }
    let c = problem.objective();
    let mut kept: Vec<usize> = Vec::new();
    let mut removed = Vec::new();
    // Rows of the lower Cholesky factor restricted to kept indices.
    let mut lrows: Vec<Vec<f64>> = Vec::new();
    for k in 0..m {
        let mut z = vec![0.0; kept.len()];
        for (r, row) in lrows.iter().enumerate() {
            let s: f64 = (0..r).map(|t| row[t] * z[t]).sum();
            z[r] = (gram[(kept[r], k)] - s) / row[r];
        }
        let pivot = gram[(k, k)] - z.iter().map(|v| v * v).sum::<f64>();
        if gram[(k, k)] > 0.0 && pivot > pivot_tol * gram[(k, k)] {
            let mut row = z;
            row.push(pivot.sqrt());
            lrows.push(row);
            kept.push(k);
        } else {
            // Coefficients of Fₖ in the kept basis: Lᵀ α = z.
            let n = kept.len();
            let mut alpha = vec![0.0; n];
            for r in (0..n).rev() {
                let s: f64 = ((r + 1)..n).map(|t| lrows[t][r] * alpha[t]).sum();
                alpha[r] = (z[r] - s) / lrows[r][r];
            }
            let predicted: f64 = kept.iter().zip(&alpha).map(|(&j, a)| a * c[j]).sum();
            if (c[k] - predicted).abs() > 1e-8 * (1.0 + c[k].abs()) {
                return Presolve::Inconsistent;
            }
            removed.push(k);
        }
    }
    Presolve::Kept(kept, removed)
}

pub fn solve(problem: &SdpProblem, settings: &Settings) -> SdpSolution {
    let layout = Layout::new(problem);
    let nb = layout.sizes.len();
    let n_total: usize = layout.sizes.iter().sum();

    let (kept, removed) = match presolve(problem, &layout, settings.presolve_pivot) {
        Presolve::Kept(k, r) => (k, r),
        Presolve::Inconsistent => {
            return finish(problem, &layout, Status::Infeasible, &[], &[], layout.zeros(), 0);
        }
    };
    let m = kept.len();

    // C = −F₀, Aₖ = −Fₖ, b = −c
    let mut cmat = layout.zeros();
    for (&(b, i, j), &v) in problem.matrix(0) {
        let (ib, i, j) = layout.map(b, i, j);
        cmat[ib][(i, j)] -= v;
        if i != j {
            cmat[ib][(j, i)] -= v;
        }
    }
    let bvec = DVector::from_iterator(m, kept.iter().map(|&k| -problem.objective()[k]));
    let mut terms: Vec<Vec<Term>> = Vec::with_capacity(m);
    let mut touching: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nb];
    for (kk, &k) in kept.iter().enumerate() {
        let mut per_block: std::collections::BTreeMap<usize, Sparse> = Default::default();
        for (&(b, i, j), &v) in problem.matrix(k + 1) {
            let (ib, i, j) = layout.map(b, i, j);
            per_block.entry(ib).or_default().push((i, j, -v));
        }
        let mut list = Vec::new();
        for (ib, sparse) in per_block {
            let n = layout.sizes[ib];
            let mut dense = DMatrix::zeros(n, n);
            for &(i, j, v) in &sparse {
                dense[(i, j)] += v;
                if i != j {
                    dense[(j, i)] += v;
                }
            }
            touching[ib].push((kk, list.len()));
            list.push(Term { block: ib, sparse, dense });
        }
        terms.push(list);
    }

    // Per-block starting point.
    let mut x = Vec::with_capacity(nb);
    let mut s = Vec::with_capacity(nb);
    for ib in 0..nb {
        let n = layout.sizes[ib] as f64;
        let mut xi: f64 = 10f64.max(n.sqrt());
        let mut eta: f64 = 10f64.max(n.sqrt()).max(cmat[ib].norm());
        for &(kk, t) in &touching[ib] {
            let an = terms[kk][t].dense.norm();
            xi = xi.max(n.sqrt() * (1.0 + bvec[kk].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        x.push(DMatrix::identity(layout.sizes[ib], layout.sizes[ib]) * xi);
        s.push(DMatrix::identity(layout.sizes[ib], layout.sizes[ib]) * eta);
    }
    let mut y = DVector::<f64>::zeros(m);

    let b_norm = bvec.norm();
    let c_norm = frob_norm(&cmat);
    let mut status = Status::MaxIter;
    let mut iterations = 0;

    for iter in 0..settings.max_iter {
        iterations = iter;
        let mut sinv = Vec::with_capacity(nb);
        let mut ok = true;
        for sb in &s {
            match Cholesky::new(sb.clone()) {
                Some(ch) => sinv.push(ch.inverse()),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            status = Status::NumericalTrouble;
            break;
        }

        let rp = DVector::from_iterator(
            m,
            (0..m).map(|kk| {
                bvec[kk]
                    - terms[kk]
                        .iter()
                        .map(|t| sparse_trace(&t.sparse, &x[t.block]))
                        .sum::<f64>()
            }),
        );
        let mut rd: Vec<DMatrix<f64>> = cmat.iter().zip(&s).map(|(c, s)| c - s).collect();
        for (kk, list) in terms.iter().enumerate() {
            for t in list {
                rd[t.block] -= &t.dense * y[kk];
            }
        }
        let pobj = frob_inner(&cmat, &x);
        let dobj = bvec.dot(&y);
        let mu = frob_inner(&x, &s) / n_total as f64;
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = frob_norm(&rd) / (1.0 + c_norm);
        if rel_gap.max(pinf).max(dinf) <= settings.target_tol {
            status = Status::Optimal;
            break;
        }
        if frob_norm(&x) > settings.divergence_bound || frob_norm(&s) > settings.divergence_bound {
            status = Status::Infeasible;
            break;
        }

        // Schur complement.
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for ib in 0..nb {
            for &(l, tl) in &touching[ib] {
                let g = &x[ib] * &terms[l][tl].dense * &sinv[ib];
                for &(k, tk) in &touching[ib] {
                    schur[(k, l)] += sparse_trace(&terms[k][tk].sparse, &g);
                }
            }
        }
        symmetrize(&mut schur);
        let chol = if m == 0 {
            None
        } else {
            match Cholesky::new(schur) {
                Some(c) => Some(c),
                None => {
                    status = Status::NumericalTrouble;
                    break;
                }
            }
        };

        // X Rd S⁻¹ is shared by predictor and corrector.
        let x_rd_sinv: Vec<DMatrix<f64>> =
            (0..nb).map(|ib| &x[ib] * &rd[ib] * &sinv[ib]).collect();
        let direction = |rc: &[DMatrix<f64>]| -> (Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>) {
            let h: Vec<DMatrix<f64>> = (0..nb).map(|ib| &rc[ib] - &x_rd_sinv[ib]).collect();
            let rhs = DVector::from_iterator(
                m,
                (0..m).map(|kk| {
                    rp[kk]
                        - terms[kk]
                            .iter()
                            .map(|t| sparse_trace(&t.sparse, &h[t.block]))
                            .sum::<f64>()
                }),
            );
            let dy = match &chol {
                Some(c) => c.solve(&rhs),
                None => DVector::zeros(0),
            };
            let mut ds = rd.clone();
            for (kk, list) in terms.iter().enumerate() {
                for t in list {
                    ds[t.block] -= &t.dense * dy[kk];
                }
            }
            let dx: Vec<DMatrix<f64>> = (0..nb)
                .map(|ib| {
                    let mut d = &rc[ib] - &x[ib] * &ds[ib] * &sinv[ib];
                    symmetrize(&mut d);
                    d
                })
                .collect();
            (dx, dy, ds)
        };
        let steps = |dx: &[DMatrix<f64>], ds: &[DMatrix<f64>]| -> Option<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for ib in 0..nb {
                ap = ap.min(max_step(&x[ib], &dx[ib])?);
                ad = ad.min(max_step(&s[ib], &ds[ib])?);
            }
            Some((ap, ad))
        };

        // Predictor.
        let rc_aff: Vec<DMatrix<f64>> = x.iter().map(|xb| -xb).collect();
        let (dx_a, _, ds_a) = direction(&rc_aff);
        let Some((ap, ad)) = steps(&dx_a, &ds_a) else {
            status = Status::NumericalTrouble;
            break;
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut mu_aff = 0.0;
        for ib in 0..nb {
            let xa = &x[ib] + &dx_a[ib] * ap;
            let sa = &s[ib] + &ds_a[ib] * ad;
            mu_aff += xa.dot(&sa);
        }
        mu_aff /= n_total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let rc: Vec<DMatrix<f64>> = (0..nb)
            .map(|ib| {
                &sinv[ib] * (sigma * mu) - &x[ib] - &dx_a[ib] * &ds_a[ib] * &sinv[ib]
            })
            .collect();
        let (dx, dy, ds) = direction(&rc);
        let Some((ap, ad)) = steps(&dx, &ds) else {
            status = Status::NumericalTrouble;
            break;
        };
        let ap = (settings.step_fraction * ap).min(1.0);
        let ad = (settings.step_fraction * ad).min(1.0);
        for ib in 0..nb {
            x[ib] += &dx[ib] * ap;
            s[ib] += &ds[ib] * ad;
            symmetrize(&mut x[ib]);
            symmetrize(&mut s[ib]);
        }
        y += dy * ad;
        iterations = iter + 1;
    }

    let mut xfull = vec![0.0; problem.num_vars()];
    for (kk, &k) in kept.iter().enumerate() {
        xfull[k] = y[kk];
    }
    let sol = finish(problem, &layout, status, &xfull, &removed, x, iterations);
    classify(sol, settings)
}

/// Upgrades a stalled run whose final point meets the acceptance tolerance.
fn classify(mut sol: SdpSolution, settings: &Settings) -> SdpSolution {
    let scale = 1.0 + sol.primal_objective.abs() + sol.dual_objective.abs();
    let within = sol.relative_gap <= settings.tol
        && sol.primal_cone_violation <= settings.tol * scale
        && sol.dual_equality_residual <= settings.tol * scale
        && sol.dual_cone_violation <= settings.tol * scale;
    match sol.status {
        Status::Optimal if !within => sol.status = Status::NumericalTrouble,
        Status::MaxIter | Status::NumericalTrouble if within => sol.status = Status::Optimal,
        _ => {}
    }
    sol
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &SdpProblem,
    layout: &Layout,
    status: Status,
    xvec: &[f64],
    removed: &[usize],
    internal_y: Vec<DMatrix<f64>>,
    iterations: usize,
) -> SdpSolution {
    let m = problem.num_vars();
    let x: Vec<f64> = if xvec.len() == m { xvec.to_vec() } else { vec![0.0; m] };
    let mut slack: Vec<DMatrix<f64>> = problem
        .blocks()
        .iter()
        .map(|b| DMatrix::zeros(b.dim(), b.dim()))
        .collect();
    let add = |target: &mut Vec<DMatrix<f64>>, index: usize, scale: f64| {
        for (&(b, i, j), &v) in problem.matrix(index) {
            target[b][(i, j)] += scale * v;
            if i != j {
                target[b][(j, i)] += scale * v;
            }
        }
    };
    add(&mut slack, 0, -1.0);
    for (k, &xk) in x.iter().enumerate() {
        if xk != 0.0 {
            add(&mut slack, k + 1, xk);
        }
    }
    // Fold internal blocks back into the original block structure.
    let mut dual: Vec<DMatrix<f64>> = problem
        .blocks()
        .iter()
        .map(|b| DMatrix::zeros(b.dim(), b.dim()))
        .collect();
    if internal_y.len() == layout.sizes.len() {
        for (b, kind) in problem.blocks().iter().enumerate() {
            match *kind {
                BlockKind::Dense(_) => dual[b] = internal_y[layout.offsets[b]].clone(),
                BlockKind::Diagonal(n) => {
                    for i in 0..n {
                        dual[b][(i, i)] = internal_y[layout.offsets[b] + i][(0, 0)];
                    }
                }
            }
        }
    }
    let primal_objective = problem.primal_objective(&x);
    let inner = |index: usize| -> f64 {
        problem
            .matrix(index)
            .iter()
            .map(|(&(b, i, j), &v)| {
                if i == j {
                    v * dual[b][(i, i)]
                } else {
                    v * (dual[b][(i, j)] + dual[b][(j, i)])
                }
            })
            .sum()
    };
    let dual_objective = inner(0);
    let dual_equality_residual = (0..m)
        .map(|k| (inner(k + 1) - problem.objective()[k]).abs())
        .fold(0.0, f64::max);
    let primal_cone_violation = slack
        .iter()
        .map(|b| (-min_eigenvalue(b)).max(0.0))
        .fold(0.0, f64::max);
    let dual_cone_violation = dual
        .iter()
        .map(|b| (-min_eigenvalue(b)).max(0.0))
        .fold(0.0, f64::max);
    let gap = (primal_objective - dual_objective).abs();
    SdpSolution {
        status,
        x,
        slack,
        dual,
        primal_objective,
        dual_objective,
        gap,
        relative_gap: gap / (1.0 + primal_objective.abs() + dual_objective.abs()),
        primal_cone_violation,
        dual_equality_residual,
        dual_cone_violation,
        iterations,
        removed_vars: removed.to_vec(),
    }
}
