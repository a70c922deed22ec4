//! Normal-equations machinery: assembly of `A·diag(x/s)·Aᵀ`, a sparse
//! Cholesky factorization with minimum-degree ordering, row-dependency
//! removal and the degenerate-column safeguard.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Iterate, StandardFormLP};
use crate::sparse::CscMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("{0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// Pivot positions (in the original, unpermuted numbering) that fell
    /// below the pivot tolerance.
    #[error("matrix is not positive definite (pivots {0:?})")]
    NotPositiveDefinite(Vec<usize>),
    #[error("dependent rows {0:?} have an inconsistent right-hand side")]
    InconsistentRows(Vec<usize>),
    #[error("every column would be dropped")]
    AllColumnsDropped,
}

/// Symmetric matrix stored by its lower triangle in compressed columns.
/// Row indices within a column are increasing, so a stored diagonal entry
/// comes first.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparseMatrix {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymSparseMatrix {
    /// Build from a full dense symmetric matrix; only the lower triangle is read.
    pub fn from_dense(m: &[Vec<f64>]) -> Self {
        let n = m.len();
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for j in 0..n {
            for (i, row) in m.iter().enumerate().skip(j) {
                if row[j] != 0.0 || i == j {
                    row_idx.push(i);
                    values.push(row[j]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        SymSparseMatrix {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn nnz_lower(&self) -> usize {
        self.values.len()
    }

    fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.col(j).find(|&(r, _)| r == i).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.get(j, j)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for j in 0..self.n {
            for (i, v) in self.col(j) {
                out[i][j] = v;
                out[j][i] = v;
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            for (i, v) in self.col(j) {
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut sum = 0.0;
        for j in 0..self.n {
            for (i, v) in self.col(j) {
                sum += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        sum.sqrt()
    }

    /// Adjacency lists of the off-diagonal pattern.
    fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.n];
        for j in 0..self.n {
            for (i, _) in self.col(j) {
                if i != j {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        adj
    }
}

/// `A·diag(x/s)·Aᵀ`.
///
/// The pattern is the structural pattern of `A Aᵀ`; entries are kept even if
/// their numerical value happens to cancel.
pub fn assemble_normal(
    a: &CscMatrix,
    x: &[f64],
    s: &[f64],
) -> Result<SymSparseMatrix, LinalgError> {
    let n = a.ncols();
    if x.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if s.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: s.len(),
        });
    }
    if let Some(i) = (0..n).find(|&i| !(x[i] > 0.0 && s[i] > 0.0)) {
        return Err(LinalgError::Domain(format!(
            "x[{i}] = {}, s[{i}] = {} must both be positive",
            x[i], s[i]
        )));
    }
    let d: Vec<f64> = x.iter().zip(s).map(|(xi, si)| xi / si).collect();
    let m = a.nrows();
    let at = a.transpose();

    let mut col_ptr = vec![0];
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    let mut work = vec![0.0; m];
    let mut mark = vec![usize::MAX; m];
    let mut pattern = Vec::new();
    for i in 0..m {
        pattern.clear();
        for (j, aij) in at.col(i) {
            let w = d[j] * aij;
            for (r, arj) in a.col(j) {
                if r < i {
                    continue;
                }
                if mark[r] != i {
                    mark[r] = i;
                    work[r] = 0.0;
                    pattern.push(r);
                }
                work[r] += w * arj;
            }
        }
        pattern.sort_unstable();
        for &r in &pattern {
            row_idx.push(r);
            values.push(work[r]);
        }
        col_ptr.push(row_idx.len());
    }
    Ok(SymSparseMatrix {
        n: m,
        col_ptr,
        row_idx,
        values,
    })
}

/// Matrices up to this order are factored densely.
pub const DENSE_THRESHOLD: usize = 200;

/// Pivots at or below this fraction of the largest diagonal entry are
/// treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Under [`PivotPolicy::Skip`], a pivot is kept unless it falls to this
/// fraction of its own diagonal entry before elimination.
pub const SKIP_TOLERANCE: f64 = 1e-14;

/// Value placed on the diagonal of `L` for a skipped pivot; the matching
/// solution component is driven to (numerically) zero.
const SKIPPED_PIVOT: f64 = 1e64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotPolicy {
    /// Report pivots below tolerance as [`LinalgError::NotPositiveDefinite`].
    #[default]
    Strict,
    /// Accept pivots that are small only relative to the largest diagonal
    /// entry; replace those lost to cancellation (below [`SKIP_TOLERANCE`]
    /// of their own diagonal) by a huge pivot and record them in the factor.
    Skip,
}

/// Greedy minimum-degree ordering on the graph of the matrix pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn minimum_degree_order(m: &SymSparseMatrix) -> Vec<usize> {
    let n = m.order();
    let mut adj = m.adjacency();
    let mut eliminated = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    // degree buckets keyed by (degree, node) keep the choice deterministic
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
    while let Some((_, v)) = queue.pop_first() {
        eliminated[v] = true;
        perm.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
        }
        for (k, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[k + 1..] {
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
        for &u in &nbrs {
            debug_assert!(!eliminated[u]);
            queue.insert((adj[u].len(), u));
        }
    }
    perm
}

/// Ordering and elimination tree for a fixed sparsity pattern, reusable
/// across numerical factorizations of matrices with the same (or a
/// smaller) pattern.
#[derive(Debug, Clone)]
pub struct SymbolicCholesky {
    n: usize,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    parent: Vec<usize>,
    l_col_ptr: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl SymbolicCholesky {
    pub fn analyze(m: &SymSparseMatrix) -> Self {
        let n = m.order();
        let perm = minimum_degree_order(m);
        let mut pinv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        let upper = permuted_upper(m, &pinv);
        let parent = etree(&upper);

        let mut counts = vec![1usize; n];
        let mut stack = vec![0; n];
        let mut flag = vec![NONE; n];
        for k in 0..n {
            let top = ereach(&upper, k, &parent, &mut stack, &mut flag);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut l_col_ptr = vec![0; n + 1];
        for j in 0..n {
            l_col_ptr[j + 1] = l_col_ptr[j] + counts[j];
        }
        SymbolicCholesky {
            n,
            perm,
            pinv,
            parent,
            l_col_ptr,
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn nnz_l(&self) -> usize {
        self.l_col_ptr[self.n]
    }
}

/// Column-compressed upper triangle of `P M Pᵀ` (column `k` holds rows `≤ k`).
struct Upper {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

fn permuted_upper(m: &SymSparseMatrix, pinv: &[usize]) -> Upper {
    let n = m.order();
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(m.nnz_lower());
    for j in 0..n {
        for (i, v) in m.col(j) {
            let (a, b) = (pinv[i], pinv[j]);
            entries.push((a.max(b), a.min(b), v));
        }
    }
    entries.sort_by_key(|e| (e.0, e.1));
    let mut col_ptr = vec![0; n + 1];
    for e in &entries {
        col_ptr[e.0 + 1] += 1;
    }
    for k in 0..n {
        col_ptr[k + 1] += col_ptr[k];
    }
    Upper {
        col_ptr,
        row_idx: entries.iter().map(|e| e.1).collect(),
        values: entries.iter().map(|e| e.2).collect(),
    }
}

fn etree(u: &Upper) -> Vec<usize> {
    let n = u.col_ptr.len() - 1;
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &i0 in &u.row_idx[u.col_ptr[k]..u.col_ptr[k + 1]] {
            let mut i = i0;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L`, written to `stack[top..]` in
/// topological order.
fn ereach(u: &Upper, k: usize, parent: &[usize], stack: &mut [usize], flag: &mut [usize]) -> usize {
    let n = parent.len();
    let mut top = n;
    flag[k] = k;
    for &i0 in &u.row_idx[u.col_ptr[k]..u.col_ptr[k + 1]] {
        let mut i = i0;
        if i > k {
            continue;
        }
        let mut len = 0;
        while flag[i] != k {
            stack[len] = i;
            len += 1;
            flag[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

#[derive(Debug, Clone)]
enum FactorData {
    Sparse {
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    },
    /// Row-major lower triangle.
    Dense(Vec<f64>),
}

/// `P M Pᵀ = L Lᵀ`, together with `M` itself for one step of iterative
/// refinement.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    perm: Vec<usize>,
    data: FactorData,
    skipped: Vec<usize>,
    matrix: SymSparseMatrix,
}

impl CholeskyFactor {
    pub fn order(&self) -> usize {
        self.n
    }

    /// `perm[new] = old`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Skipped pivots, in original numbering.
    pub fn skipped_pivots(&self) -> &[usize] {
        &self.skipped
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.data, FactorData::Dense(_))
    }

    /// Diagonal of `L`, in permuted order.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.l_dense()[k][k]).collect()
    }

    /// `L` as a dense row-major matrix (permuted numbering).
    pub fn l_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut out = vec![vec![0.0; n]; n];
        match &self.data {
            FactorData::Sparse {
                col_ptr,
                row_idx,
                values,
            } => {
                for j in 0..n {
                    for p in col_ptr[j]..col_ptr[j + 1] {
                        out[row_idx[p]][j] = values[p];
                    }
                }
            }
            FactorData::Dense(l) => {
                for i in 0..n {
                    out[i][..=i].copy_from_slice(&l[i * n..i * n + i + 1]);
                }
            }
        }
        out
    }

    /// Solve `L Lᵀ z = y` in place (permuted numbering).
    fn solve_permuted(&self, y: &mut [f64]) {
        let n = self.n;
        match &self.data {
            FactorData::Sparse {
                col_ptr,
                row_idx,
                values,
            } => {
                for j in 0..n {
                    let p0 = col_ptr[j];
                    y[j] /= values[p0];
                    let yj = y[j];
                    for p in p0 + 1..col_ptr[j + 1] {
                        y[row_idx[p]] -= values[p] * yj;
                    }
                }
                for j in (0..n).rev() {
                    let p0 = col_ptr[j];
                    let mut v = y[j];
                    for p in p0 + 1..col_ptr[j + 1] {
                        v -= values[p] * y[row_idx[p]];
                    }
                    y[j] = v / values[p0];
                }
            }
            FactorData::Dense(l) => {
                for i in 0..n {
                    let row = &l[i * n..i * n + i];
                    let v: f64 = row.iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
                    y[i] = (y[i] - v) / l[i * n + i];
                }
                for i in (0..n).rev() {
                    let mut v = y[i];
                    for k in i + 1..n {
                        v -= l[k * n + i] * y[k];
                    }
                    y[i] = v / l[i * n + i];
                }
            }
        }
    }

    fn solve_once(&self, rhs: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.perm.iter().map(|&old| rhs[old]).collect();
        self.solve_permuted(&mut y);
        let mut u = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            u[old] = y[new];
        }
        u
    }
}

fn pivot_threshold(m: &SymSparseMatrix) -> f64 {
    PIVOT_TOLERANCE * m.diagonal().iter().fold(0.0f64, |a, &d| a.max(d))
}

fn pivot_accepted(d: f64, diag: f64, tol: f64, policy: PivotPolicy) -> bool {
    match policy {
        PivotPolicy::Strict => d > tol,
        PivotPolicy::Skip => d > 0.0 && d > SKIP_TOLERANCE * diag,
    }
}

/// Factor `M`, choosing the dense kernel for small orders.
pub fn factorize(m: &SymSparseMatrix, policy: PivotPolicy) -> Result<CholeskyFactor, LinalgError> {
    if m.order() <= DENSE_THRESHOLD {
        factorize_dense(m, policy)
    } else {
        factorize_sparse(&SymbolicCholesky::analyze(m), m, policy)
    }
}

/// Dense Cholesky in the natural ordering.
pub fn factorize_dense(
    m: &SymSparseMatrix,
    policy: PivotPolicy,
) -> Result<CholeskyFactor, LinalgError> {
    let n = m.order();
    let tol = pivot_threshold(m);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        for (i, v) in m.col(j) {
            l[i * n + j] = v;
        }
    }
    let mut failed = Vec::new();
    for k in 0..n {
        let row_k = &l[k * n..k * n + k];
        let diag = l[k * n + k];
        let d = diag - row_k.iter().map(|v| v * v).sum::<f64>();
        let lkk = if pivot_accepted(d, diag, tol, policy) {
            d.sqrt()
        } else {
            failed.push(k);
            SKIPPED_PIVOT
        };
        l[k * n + k] = lkk;
        for i in k + 1..n {
            let dotp: f64 = (0..k).map(|p| l[i * n + p] * l[k * n + p]).sum();
            l[i * n + k] = (l[i * n + k] - dotp) / lkk;
        }
    }
    if !failed.is_empty() && policy == PivotPolicy::Strict {
        return Err(LinalgError::NotPositiveDefinite(failed));
    }
    Ok(CholeskyFactor {
        n,
        perm: (0..n).collect(),
        data: FactorData::Dense(l),
        skipped: failed,
        matrix: m.clone(),
    })
}

/// Up-looking sparse Cholesky using a precomputed symbolic analysis.
pub fn factorize_sparse(
    sym: &SymbolicCholesky,
    m: &SymSparseMatrix,
    policy: PivotPolicy,
) -> Result<CholeskyFactor, LinalgError> {
    let n = sym.n;
    if m.order() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: m.order(),
        });
    }
    let tol = pivot_threshold(m);
    let upper = permuted_upper(m, &sym.pinv);
    let nnz = sym.nnz_l();
    let mut li = vec![0; nnz];
    let mut lx = vec![0.0; nnz];
    let mut next: Vec<usize> = sym.l_col_ptr[..n].to_vec();
    let mut x = vec![0.0; n];
    let mut stack = vec![0; n];
    let mut flag = vec![NONE; n];
    let mut failed = Vec::new();

    for k in 0..n {
        let top = ereach(&upper, k, &sym.parent, &mut stack, &mut flag);
        for p in upper.col_ptr[k]..upper.col_ptr[k + 1] {
            x[upper.row_idx[p]] = upper.values[p];
        }
        let diag = x[k];
        let mut d = diag;
        x[k] = 0.0;
        for &i in &stack[top..] {
            let lki = x[i] / lx[sym.l_col_ptr[i]];
            x[i] = 0.0;
            for p in sym.l_col_ptr[i] + 1..next[i] {
                x[li[p]] -= lx[p] * lki;
            }
            d -= lki * lki;
            let p = next[i];
            next[i] += 1;
            li[p] = k;
            lx[p] = lki;
        }
        let lkk = if pivot_accepted(d, diag, tol, policy) {
            d.sqrt()
        } else {
            failed.push(sym.perm[k]);
            SKIPPED_PIVOT
        };
        let p = next[k];
        next[k] += 1;
        li[p] = k;
        lx[p] = lkk;
    }
    failed.sort_unstable();
    if !failed.is_empty() && policy == PivotPolicy::Strict {
        return Err(LinalgError::NotPositiveDefinite(failed));
    }
    Ok(CholeskyFactor {
        n,
        perm: sym.perm.clone(),
        data: FactorData::Sparse {
            col_ptr: sym.l_col_ptr.clone(),
            row_idx: li,
            values: lx,
        },
        skipped: failed,
        matrix: m.clone(),
    })
}

/// Solve `M u = rhs` with one step of iterative refinement.
pub fn solve_with(f: &CholeskyFactor, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if rhs.len() != f.n {
        return Err(LinalgError::DimensionMismatch {
            expected: f.n,
            found: rhs.len(),
        });
    }
    let mut u = f.solve_once(rhs);
    let mu = f.matrix.mul_vec(&u);
    let r: Vec<f64> = rhs.iter().zip(&mu).map(|(a, b)| a - b).collect();
    let du = f.solve_once(&r);
    for (ui, di) in u.iter_mut().zip(&du) {
        *ui += di;
    }
    Ok(u)
}

/// Markowitz threshold for the elimination phase of [`remove_dependent_rows`].
pub const MARKOWITZ_THRESHOLD: f64 = 0.1;

/// Indices of rows of `A` that are linearly dependent on the others.
///
/// Rows holding a column singleton are set aside repeatedly; the remaining
/// rows go through Gaussian elimination with Markowitz pivot selection and
/// threshold pivoting. Ties in Markowitz cost go to the entry that is
/// largest relative to its row, then to the lowest row index.
pub fn dependent_rows(a: &CscMatrix, b: &[f64]) -> Result<Vec<usize>, LinalgError> {
    let m = a.nrows();
    if b.len() != m {
        return Err(LinalgError::DimensionMismatch {
            expected: m,
            found: b.len(),
        });
    }
    let at = a.transpose();
    let mut active = vec![true; m];
    let mut col_count: Vec<usize> = (0..a.ncols()).map(|j| a.col_nnz(j)).collect();
    let mut singles: Vec<usize> = (0..a.ncols()).filter(|&j| col_count[j] == 1).collect();
    while let Some(j) = singles.pop() {
        if col_count[j] != 1 {
            continue;
        }
        let Some((row, _)) = a.col(j).find(|&(i, _)| active[i]) else {
            continue;
        };
        active[row] = false;
        for (k, _) in at.col(row) {
            col_count[k] -= 1;
            if col_count[k] == 1 {
                singles.push(k);
            }
        }
    }

    let remaining: Vec<usize> = (0..m).filter(|&i| active[i]).collect();
    if remaining.is_empty() {
        return Ok(Vec::new());
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let drop_tol = 1e-11 * scale;
    let mut rows: Vec<Vec<(usize, f64)>> = remaining.iter().map(|&i| at.col(i).collect()).collect();
    let mut rhs: Vec<f64> = remaining.iter().map(|&i| b[i]).collect();
    let mut pending: Vec<bool> = vec![true; remaining.len()];

    loop {
        let mut col_counts = std::collections::HashMap::<usize, usize>::new();
        for (r, row) in rows.iter().enumerate() {
            if pending[r] {
                for &(c, _) in row {
                    *col_counts.entry(c).or_default() += 1;
                }
            }
        }
        let mut best: Option<(usize, f64, usize, usize)> = None;
        for (r, row) in rows.iter().enumerate() {
            if !pending[r] || row.is_empty() {
                continue;
            }
            let row_max = row.iter().fold(0.0f64, |m, e| m.max(e.1.abs()));
            for &(c, v) in row {
                let rel = v.abs() / row_max;
                if rel < MARKOWITZ_THRESHOLD {
                    continue;
                }
                let cost = (row.len() - 1) * (col_counts[&c] - 1);
                let better = match best {
                    None => true,
                    Some((bc, brel, br, _)) => {
                        cost < bc || (cost == bc && (rel > brel || (rel == brel && r < br)))
                    }
                };
                if better {
                    best = Some((cost, rel, r, c));
                }
            }
        }
        let Some((_, _, pr, pc)) = best else { break };
        pending[pr] = false;
        let pivot_row = rows[pr].clone();
        let pivot = pivot_row.iter().find(|e| e.0 == pc).expect("pivot entry").1;
        let pivot_rhs = rhs[pr];
        for r in 0..rows.len() {
            if !pending[r] {
                continue;
            }
            let Some(&(_, v)) = rows[r].iter().find(|e| e.0 == pc) else {
                continue;
            };
            let factor = v / pivot;
            let mut merged: std::collections::BTreeMap<usize, f64> =
                rows[r].iter().copied().collect();
            for &(c, pv) in &pivot_row {
                *merged.entry(c).or_default() -= factor * pv;
            }
            merged.remove(&pc);
            rows[r] = merged
                .into_iter()
                .filter(|e| e.1.abs() > drop_tol)
                .collect();
            rhs[r] -= factor * pivot_rhs;
        }
    }

    let b_scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut dependent = Vec::new();
    let mut inconsistent = Vec::new();
    for (r, &orig) in remaining.iter().enumerate() {
        if pending[r] {
            dependent.push(orig);
            if rhs[r].abs() > 1e-8 * b_scale {
                inconsistent.push(orig);
            }
        }
    }
    if !inconsistent.is_empty() {
        return Err(LinalgError::InconsistentRows(inconsistent));
    }
    Ok(dependent)
}

/// Drop dependent rows: returns the reduced matrix and right-hand side and
/// the removed row indices.
pub fn remove_dependent_rows(
    a: &CscMatrix,
    b: &[f64],
) -> Result<(CscMatrix, Vec<f64>, Vec<usize>), LinalgError> {
    let removed = dependent_rows(a, b)?;
    if removed.is_empty() {
        return Ok((a.clone(), b.to_vec(), removed));
    }
    let keep = complement(a.nrows(), &removed);
    let b2 = keep.iter().map(|&i| b[i]).collect();
    Ok((a.select_rows(&keep), b2, removed))
}

pub(crate) fn complement(n: usize, removed: &[usize]) -> Vec<usize> {
    let mut gone = vec![false; n];
    for &i in removed {
        gone[i] = true;
    }
    (0..n).filter(|&i| !gone[i]).collect()
}

/// Result of [`drop_small_columns`].
#[derive(Debug, Clone)]
pub struct DroppedColumns {
    pub lp: StandardFormLP,
    pub iterate: Iterate,
    /// Indices (into the input LP) of removed columns.
    pub columns: Vec<usize>,
    /// Indices (into the input LP) of rows removed to restore full rank.
    pub rows: Vec<usize>,
}

/// Remove every column with `x_i ≤ eps_x`, then rows that became empty or
/// dependent.
pub fn drop_small_columns(
    lp: &StandardFormLP,
    it: &Iterate,
    eps_x: f64,
) -> Result<DroppedColumns, LinalgError> {
    let n = lp.n();
    let columns: Vec<usize> = (0..n).filter(|&i| it.x[i] <= eps_x).collect();
    if columns.len() == n {
        return Err(LinalgError::AllColumnsDropped);
    }
    let keep_cols = complement(n, &columns);
    let all_rows: Vec<usize> = (0..lp.m()).collect();
    let narrowed = lp.restrict(&all_rows, &keep_cols);
    let rows = dependent_rows(narrowed.a(), narrowed.b())?;
    let keep_rows = complement(lp.m(), &rows);
    let reduced = narrowed.restrict(&keep_rows, &(0..keep_cols.len()).collect::<Vec<_>>());
    let iterate = Iterate {
        x: keep_cols.iter().map(|&j| it.x[j]).collect(),
        lambda: keep_rows.iter().map(|&i| it.lambda[i]).collect(),
        s: keep_cols.iter().map(|&j| it.s[j]).collect(),
        k: it.k,
    };
    Ok(DroppedColumns {
        lp: reduced,
        iterate,
        columns,
        rows,
    })
}
