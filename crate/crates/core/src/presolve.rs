//! Problem reductions applied before the interior-point iteration, and
//! their inversion on the primal solution.
//!
//! Rules are applied in sweeps, cheap rules first (1, 3, 5, 7, 9, then 2, 4,
//! 6, 8, 10 when enabled), until a sweep changes nothing. Substitution rules
//! (6 and 9) are skipped where they would increase the number of nonzeros.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::StandardFormLP;
use crate::sparse::CscMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PresolveRule {
    EmptyRow = 1,
    DuplicateRows = 2,
    EmptyColumn = 3,
    DuplicateColumns = 4,
    RowSingleton = 5,
    FreeVariable = 6,
    FixedVarSingleRow = 7,
    FixedVarMultiRow = 8,
    SignImpliedPositive = 9,
    TwoRowSingleton = 10,
}

impl PresolveRule {
    pub const ALL: [PresolveRule; 10] = [
        PresolveRule::EmptyRow,
        PresolveRule::DuplicateRows,
        PresolveRule::EmptyColumn,
        PresolveRule::DuplicateColumns,
        PresolveRule::RowSingleton,
        PresolveRule::FreeVariable,
        PresolveRule::FixedVarSingleRow,
        PresolveRule::FixedVarMultiRow,
        PresolveRule::SignImpliedPositive,
        PresolveRule::TwoRowSingleton,
    ];

    /// Sweep order: cheap rules first.
    const SWEEP: [PresolveRule; 10] = [
        PresolveRule::EmptyRow,
        PresolveRule::EmptyColumn,
        PresolveRule::RowSingleton,
        PresolveRule::FixedVarSingleRow,
        PresolveRule::SignImpliedPositive,
        PresolveRule::DuplicateRows,
        PresolveRule::DuplicateColumns,
        PresolveRule::FreeVariable,
        PresolveRule::FixedVarMultiRow,
        PresolveRule::TwoRowSingleton,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.number() == n)
    }
}

/// A set of enabled rules. The default is `{1, 3, 5, 7, 9}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet(BTreeSet<PresolveRule>);

impl Default for RuleSet {
    fn default() -> Self {
        [1, 3, 5, 7, 9]
            .into_iter()
            .filter_map(PresolveRule::from_number)
            .collect()
    }
}

impl FromIterator<PresolveRule> for RuleSet {
    fn from_iter<I: IntoIterator<Item = PresolveRule>>(iter: I) -> Self {
        RuleSet(iter.into_iter().collect())
    }
}

impl RuleSet {
    pub fn none() -> Self {
        RuleSet(BTreeSet::new())
    }

    pub fn all() -> Self {
        PresolveRule::ALL.into_iter().collect()
    }

    pub fn contains(&self, r: PresolveRule) -> bool {
        self.0.contains(&r)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = PresolveRule> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        let parts: Vec<String> = self.0.iter().map(|r| r.number().to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for RuleSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "none" | "" => return Ok(RuleSet::none()),
            "all" => return Ok(RuleSet::all()),
            _ => {}
        }
        s.split(',')
            .map(|tok| {
                let n: u8 = tok
                    .trim()
                    .parse()
                    .map_err(|_| format!("invalid presolve rule '{tok}'"))?;
                PresolveRule::from_number(n)
                    .ok_or_else(|| format!("presolve rule {n} does not exist (1-10)"))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresolveError {
    #[error("rule {} proves the problem infeasible: {detail}", rule.number())]
    Infeasible { rule: PresolveRule, detail: String },
    #[error("rule {} proves the problem unbounded: {detail}", rule.number())]
    Unbounded { rule: PresolveRule, detail: String },
    #[error("reduced solution has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

/// One recorded reduction. Row and column indices refer to the original LP.
#[derive(Debug, Clone, PartialEq)]
pub enum Reduction {
    EmptyRow {
        row: usize,
    },
    DuplicateRow {
        row: usize,
        of: usize,
        factor: f64,
    },
    EmptyColumn {
        col: usize,
    },
    /// `x_kept` carries the sum; `x_removed` is restored as zero.
    MergedColumns {
        kept: usize,
        removed: usize,
    },
    /// Variable fixed at `value` (rules 5 and 10); `row` was removed with it.
    FixedValue {
        col: usize,
        value: f64,
        row: usize,
        rule: PresolveRule,
    },
    /// Variables forced to zero by sign patterns (rules 7 and 8); `row` was removed.
    ZeroColumns {
        cols: Vec<usize>,
        row: usize,
        rule: PresolveRule,
    },
    /// `x_col = (rhs − Σ coeffs·x) / pivot`, eliminated together with `row`.
    Substitution {
        col: usize,
        row: usize,
        pivot: f64,
        rhs: f64,
        coeffs: Vec<(usize, f64)>,
    },
    /// `x_pos − x_neg = (rhs − Σ coeffs·x) / pivot`; the difference is split
    /// into its positive and negative parts.
    FreeVariable {
        pos: usize,
        neg: usize,
        row: usize,
        pivot: f64,
        rhs: f64,
        coeffs: Vec<(usize, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostsolveStack {
    m_original: usize,
    n_original: usize,
    kept_rows: Vec<usize>,
    kept_cols: Vec<usize>,
    records: Vec<Reduction>,
}

impl PostsolveStack {
    pub fn new(
        m_original: usize,
        n_original: usize,
        kept_rows: Vec<usize>,
        kept_cols: Vec<usize>,
        records: Vec<Reduction>,
    ) -> Self {
        PostsolveStack {
            m_original,
            n_original,
            kept_rows,
            kept_cols,
            records,
        }
    }

    /// The stack of a problem left untouched.
    pub fn identity(m: usize, n: usize) -> Self {
        Self::new(m, n, (0..m).collect(), (0..n).collect(), Vec::new())
    }

    pub fn records(&self) -> &[Reduction] {
        &self.records
    }

    pub fn kept_rows(&self) -> &[usize] {
        &self.kept_rows
    }

    pub fn kept_cols(&self) -> &[usize] {
        &self.kept_cols
    }

    pub fn original_dims(&self) -> (usize, usize) {
        (self.m_original, self.n_original)
    }
}

/// Rebuild a full-length primal vector from a solution of the reduced LP.
pub fn postsolve(stack: &PostsolveStack, x_reduced: &[f64]) -> Result<Vec<f64>, PresolveError> {
    if x_reduced.len() != stack.kept_cols.len() {
        return Err(PresolveError::LengthMismatch {
            expected: stack.kept_cols.len(),
            found: x_reduced.len(),
        });
    }
    let mut x = vec![0.0; stack.n_original];
    for (&j, &v) in stack.kept_cols.iter().zip(x_reduced) {
        x[j] = v;
    }
    let eval = |x: &[f64], pivot: f64, rhs: f64, coeffs: &[(usize, f64)]| {
        (rhs - coeffs.iter().map(|&(k, a)| a * x[k]).sum::<f64>()) / pivot
    };
    for rec in stack.records.iter().rev() {
        match rec {
            Reduction::FixedValue { col, value, .. } => x[*col] = *value,
            Reduction::Substitution {
                col,
                pivot,
                rhs,
                coeffs,
                ..
            } => {
                x[*col] = eval(&x, *pivot, *rhs, coeffs).max(0.0);
            }
            Reduction::FreeVariable {
                pos,
                neg,
                pivot,
                rhs,
                coeffs,
                ..
            } => {
                let y = eval(&x, *pivot, *rhs, coeffs);
                x[*pos] = y.max(0.0);
                x[*neg] = (-y).max(0.0);
            }
            Reduction::EmptyRow { .. }
            | Reduction::DuplicateRow { .. }
            | Reduction::EmptyColumn { .. }
            | Reduction::MergedColumns { .. }
            | Reduction::ZeroColumns { .. } => {}
        }
    }
    Ok(x)
}

struct Work {
    rows: Vec<BTreeMap<usize, f64>>,
    cols: Vec<BTreeSet<usize>>,
    b: Vec<f64>,
    c: Vec<f64>,
    f_obj: f64,
    row_alive: Vec<bool>,
    col_alive: Vec<bool>,
    records: Vec<Reduction>,
    zero_a: f64,
    tol_b: f64,
    tol_c: f64,
}

impl Work {
    fn new(lp: &StandardFormLP) -> Self {
        let (m, n) = (lp.m(), lp.n());
        let mut rows = vec![BTreeMap::new(); m];
        let mut cols = vec![BTreeSet::new(); n];
        for (i, j, v) in lp.a().triplets() {
            rows[i].insert(j, v);
            cols[j].insert(i);
        }
        let inf = |v: &[f64]| v.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        Work {
            rows,
            cols,
            b: lp.b().to_vec(),
            c: lp.c().to_vec(),
            f_obj: lp.f_obj(),
            row_alive: vec![true; m],
            col_alive: vec![true; n],
            records: Vec::new(),
            zero_a: 1e-12 * lp.a().max_abs().max(1.0),
            tol_b: 1e-9 * inf(lp.b()),
            tol_c: 1e-12 * inf(lp.c()),
        }
    }

    fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        if v.abs() <= self.zero_a {
            self.rows[i].remove(&j);
            self.cols[j].remove(&i);
        } else {
            self.rows[i].insert(j, v);
            self.cols[j].insert(i);
        }
    }

    fn remove_row(&mut self, i: usize) {
        for &j in self.rows[i].keys() {
            self.cols[j].remove(&i);
        }
        self.rows[i].clear();
        self.row_alive[i] = false;
    }

    fn remove_col(&mut self, j: usize) {
        for &i in &self.cols[j] {
            self.rows[i].remove(&j);
        }
        self.cols[j].clear();
        self.col_alive[j] = false;
    }

    /// Fix `x_j = value`, moving its contribution into `b` and `f_obj`.
    fn fix_column(&mut self, j: usize, value: f64) {
        if value != 0.0 {
            for &i in &self.cols[j] {
                self.b[i] -= self.rows[i][&j] * value;
            }
            self.f_obj += self.c[j] * value;
        }
        self.remove_col(j);
    }

    /// New nonzeros created by eliminating column `col` through row `pivot_row`,
    /// ignoring columns in `skip`.
    fn fill_in(&self, pivot_row: usize, col: usize, skip: &[usize]) -> usize {
        let mut fill = 0;
        for &beta in &self.cols[col] {
            if beta == pivot_row {
                continue;
            }
            fill += self.rows[pivot_row]
                .keys()
                .filter(|k| !skip.contains(k) && !self.rows[beta].contains_key(k))
                .count();
        }
        fill
    }

    /// Substitute `x_col` (or `x_col − x_other`) through row `alpha` into all
    /// other rows and the objective, then drop the row and the columns.
    fn substitute(
        &mut self,
        alpha: usize,
        col: usize,
        other: Option<usize>,
    ) -> (f64, f64, Vec<(usize, f64)>) {
        let pivot = self.rows[alpha][&col];
        let rhs = self.b[alpha];
        let coeffs: Vec<(usize, f64)> = self.rows[alpha]
            .iter()
            .filter(|(&k, _)| k != col && Some(k) != other)
            .map(|(&k, &v)| (k, v))
            .collect();
        let targets: Vec<usize> = self.cols[col]
            .iter()
            .copied()
            .filter(|&r| r != alpha)
            .collect();
        for beta in targets {
            let f = self.rows[beta][&col] / pivot;
            self.b[beta] -= f * rhs;
            for &(k, a) in &coeffs {
                let cur = self.rows[beta].get(&k).copied().unwrap_or(0.0);
                self.set(beta, k, cur - f * a);
            }
        }
        let cf = self.c[col] / pivot;
        self.f_obj += cf * rhs;
        for &(k, a) in &coeffs {
            self.c[k] -= cf * a;
        }
        self.remove_row(alpha);
        self.remove_col(col);
        if let Some(o) = other {
            self.remove_col(o);
        }
        (pivot, rhs, coeffs)
    }

    fn alive_rows(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&i| self.row_alive[i])
            .collect()
    }

    fn alive_cols(&self) -> Vec<usize> {
        (0..self.cols.len())
            .filter(|&j| self.col_alive[j])
            .collect()
    }

    fn apply(&mut self, rule: PresolveRule) -> Result<bool, PresolveError> {
        match rule {
            PresolveRule::EmptyRow => self.empty_rows(),
            PresolveRule::EmptyColumn => self.empty_columns(),
            PresolveRule::RowSingleton => self.row_singletons(),
            PresolveRule::FixedVarSingleRow => self.sign_fixed_rows(),
            PresolveRule::SignImpliedPositive => self.sign_implied(),
            PresolveRule::DuplicateRows => self.duplicate_rows(),
            PresolveRule::DuplicateColumns => self.duplicate_columns(),
            PresolveRule::FreeVariable => self.free_variables(),
            PresolveRule::FixedVarMultiRow => self.two_row_fixed(),
            PresolveRule::TwoRowSingleton => self.two_row_singletons(),
        }
    }

    fn empty_rows(&mut self) -> Result<bool, PresolveError> {
        let mut changed = false;
        for i in self.alive_rows() {
            if !self.rows[i].is_empty() {
                continue;
            }
            if self.b[i].abs() > self.tol_b {
                return Err(PresolveError::Infeasible {
                    rule: PresolveRule::EmptyRow,
                    detail: format!("row {i} is empty but b = {}", self.b[i]),
                });
            }
            self.remove_row(i);
            self.records.push(Reduction::EmptyRow { row: i });
            changed = true;
        }
        Ok(changed)
    }

    fn empty_columns(&mut self) -> Result<bool, PresolveError> {
        let mut changed = false;
        for j in self.alive_cols() {
            if !self.cols[j].is_empty() {
                continue;
            }
            if self.c[j] < -self.tol_c {
                return Err(PresolveError::Unbounded {
                    rule: PresolveRule::EmptyColumn,
                    detail: format!("column {j} is empty with cost {}", self.c[j]),
                });
            }
            self.remove_col(j);
            self.records.push(Reduction::EmptyColumn { col: j });
            changed = true;
        }
        Ok(changed)
    }

    fn row_singletons(&mut self) -> Result<bool, PresolveError> {
        let mut changed = false;
        for i in self.alive_rows() {
            if !self.row_alive[i] || self.rows[i].len() != 1 {
                continue;
            }
            let (&k, &a) = self.rows[i].iter().next().expect("singleton");
            let value = self.b[i] / a;
            if value < -self.tol_b / a.abs() {
                return Err(PresolveError::Infeasible {
                    rule: PresolveRule::RowSingleton,
                    detail: format!("row {i} forces x[{k}] = {value}"),
                });
            }
            let value = value.max(0.0);
            self.remove_row(i);
            self.fix_column(k, value);
            self.records.push(Reduction::FixedValue {
                col: k,
                value,
                row: i,
                rule: PresolveRule::RowSingleton,
            });
            changed = true;
        }
        Ok(changed)
    }

    fn sign_fixed_rows(&mut self) -> Result<bool, PresolveError> {
        let mut changed = false;
        for i in self.alive_rows() {
            if !self.row_alive[i] || self.rows[i].is_empty() {
                continue;
            }
            let nonneg = self.rows[i].values().all(|&v| v >= 0.0);
            let nonpos = self.rows[i].values().all(|&v| v <= 0.0);
            let b = self.b[i];
            if (nonneg && b < -self.tol_b) || (nonpos && b > self.tol_b) {
                return Err(PresolveError::Infeasible {
                    rule: PresolveRule::FixedVarSingleRow,
                    detail: format!(
                        "row {i} has one-signed coefficients and b = {b} of the opposite sign"
                    ),
                });
            }
            if (nonneg || nonpos) && b.abs() <= self.tol_b {
                let cols: Vec<usize> = self.rows[i].keys().copied().collect();
                self.remove_row(i);
                for &j in &cols {
                    self.fix_column(j, 0.0);
                }
                self.records.push(Reduction::ZeroColumns {
                    cols,
                    row: i,
                    rule: PresolveRule::FixedVarSingleRow,
                });
                changed = true;
            }
        }
        Ok(changed)
    }

    fn sign_implied(&mut self) -> Result<bool, PresolveError> {
        let mut changed = false;
        for alpha in self.alive_rows() {
            if !self.row_alive[alpha] || self.rows[alpha].len() < 2 {
                continue;
            }
            let b = self.b[alpha];
            if b != 0.0 && b.abs() <= self.tol_b {
                continue;
            }
            // the entry whose sign matches b, or with b = 0 the one whose sign differs from all others
            let lone = |positive: bool| {
                let mut it = self.rows[alpha]
                    .iter()
                    .filter(move |(_, &v)| (v > 0.0) == positive);
                match (it.next(), it.next()) {
                    (Some((&col, _)), None) => Some(col),
                    _ => None,
                }
            };
            let pick = if b == 0.0 {
                lone(true).or_else(|| lone(false))
            } else {
                lone(b > 0.0)
            };
            let Some(col) = pick else { continue };
            let removed = self.rows[alpha].len() + self.cols[col].len() - 1;
            if self.fill_in(alpha, col, &[col]) > removed {
                continue;
            }
            let before = self.nnz();
            let (pivot, rhs, coeffs) = self.substitute(alpha, col, None);
            debug_assert!(self.nnz() <= before);
            self.records.push(Reduction::Substitution {
                col,
                row: alpha,
                pivot,
                rhs,
                coeffs,
            });
            changed = true;
        }
        Ok(changed)
    }

    fn proportional(&self, i: usize, j: usize) -> Option<f64> {
        let (ri, rj) = (&self.rows[i], &self.rows[j]);
        if ri.len() != rj.len() || ri.is_empty() {
            return None;
        }
        let (&k0, &v0) = rj.iter().next()?;
        let factor = ri.get(&k0)? / v0;
        let ok = ri.iter().zip(rj.iter()).all(|((ki, vi), (kj, vj))| {
            ki == kj && (vi - factor * vj).abs() <= 1e-12 * vi.abs().max(vj.abs() * factor.abs())
        });
        ok.then_some(factor)
    }

    fn duplicate_rows(&mut self) -> Result<bool, PresolveError> {
        let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for i in self.alive_rows() {
            if !self.rows[i].is_empty() {
                groups
                    .entry(self.rows[i].keys().copied().collect())
                    .or_default()
                    .push(i);
            }
        }
        let mut groups: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() > 1).collect();
        groups.sort();
        let mut changed = false;
        for group in groups {
            for (p, &j) in group.iter().enumerate() {
                if !self.row_alive[j] {
                    continue;
                }
                for &i in &group[p + 1..] {
                    if !self.row_alive[i] {
                        continue;
                    }
                    let Some(factor) = self.proportional(i, j) else {
                        continue;
                    };
                    if (self.b[i] - factor * self.b[j]).abs() > self.tol_b {
                        return Err(PresolveError::Infeasible {
                            rule: PresolveRule::DuplicateRows,
                            detail: format!(
                                "row {i} = {factor} × row {j} but the right-hand sides disagree"
                            ),
                        });
                    }
                    self.remove_row(i);
                    self.records.push(Reduction::DuplicateRow {
                        row: i,
                        of: j,
                        factor,
                    });
                    changed = true;
                }
            }
        }
        Ok(changed)
    }

    fn column_key(&self, j: usize, negate: bool) -> Vec<(usize, u64)> {
        let sign = if negate { -1.0 } else { 1.0 };
        self.cols[j]
            .iter()
            .map(|&i| (i, (sign * self.rows[i][&j]).to_bits()))
            .collect()
    }

    fn duplicate_columns(&mut self) -> Result<bool, PresolveError> {
        let mut seen: HashMap<(Vec<(usize, u64)>, u64), usize> = HashMap::new();
        let mut changed = false;
        for j in self.alive_cols() {
            if self.cols[j].is_empty() {
                continue;
            }
            let key = (self.column_key(j, false), self.c[j].to_bits());
            match seen.get(&key) {
                Some(&kept) if self.col_alive[kept] => {
                    self.remove_col(j);
                    self.records
                        .push(Reduction::MergedColumns { kept, removed: j });
                    changed = true;
                }
                _ => {
                    seen.insert(key, j);
                }
            }
        }
        Ok(changed)
    }

    fn free_variables(&mut self) -> Result<bool, PresolveError> {
        let mut seen: HashMap<(Vec<(usize, u64)>, u64), usize> = HashMap::new();
        let mut pairs = Vec::new();
        for j in self.alive_cols() {
            if self.cols[j].is_empty() {
                continue;
            }
            let neg_key = (self.column_key(j, true), (-self.c[j]).to_bits());
            if let Some(&i) = seen.get(&neg_key) {
                pairs.push((i, j));
                seen.remove(&neg_key);
            } else {
                seen.insert((self.column_key(j, false), self.c[j].to_bits()), j);
            }
        }
        let mut changed = false;
        for (pos, neg) in pairs {
            if !self.col_alive[pos] || !self.col_alive[neg] || self.cols[pos].is_empty() {
                continue;
            }
            // pivot row: fewest nonzeros, then largest pivot
            let alpha = *self.cols[pos]
                .iter()
                .min_by(|&&r1, &&r2| {
                    let k1 = (self.rows[r1].len(), -self.rows[r1][&pos].abs());
                    let k2 = (self.rows[r2].len(), -self.rows[r2][&pos].abs());
                    k1.partial_cmp(&k2).expect("finite")
                })
                .expect("nonempty column");
            let removed = self.rows[alpha].len() + 2 * self.cols[pos].len() - 2;
            if self.fill_in(alpha, pos, &[pos, neg]) > removed {
                continue;
            }
            let (pivot, rhs, coeffs) = self.substitute(alpha, pos, Some(neg));
            self.records.push(Reduction::FreeVariable {
                pos,
                neg,
                row: alpha,
                pivot,
                rhs,
                coeffs,
            });
            changed = true;
        }
        Ok(changed)
    }

    /// `A_i − sign·A_j` as a sparse map without zeros.
    fn row_difference(&self, i: usize, j: usize, sign: f64) -> BTreeMap<usize, f64> {
        let mut d = self.rows[i].clone();
        for (&k, &v) in &self.rows[j] {
            *d.entry(k).or_insert(0.0) -= sign * v;
        }
        d.retain(|_, v| v.abs() > self.zero_a);
        d
    }

    fn two_row_fixed(&mut self) -> Result<bool, PresolveError> {
        let mut changed = false;
        let rows = self.alive_rows();
        for (p, &i) in rows.iter().enumerate() {
            for &j in &rows[p + 1..] {
                if !self.row_alive[i]
                    || !self.row_alive[j]
                    || self.rows[i].is_empty()
                    || self.rows[j].is_empty()
                {
                    continue;
                }
                for sign in [1.0, -1.0] {
                    if (self.b[i] - sign * self.b[j]).abs() > self.tol_b {
                        continue;
                    }
                    let d = self.row_difference(i, j, sign);
                    if d.is_empty() {
                        continue;
                    }
                    let one_signed = d.values().all(|&v| v > 0.0) || d.values().all(|&v| v < 0.0);
                    if !one_signed {
                        continue;
                    }
                    let drop = if self.rows[i].len() >= self.rows[j].len() {
                        i
                    } else {
                        j
                    };
                    let cols: Vec<usize> = d.keys().copied().collect();
                    for &k in &cols {
                        self.fix_column(k, 0.0);
                    }
                    self.remove_row(drop);
                    self.records.push(Reduction::ZeroColumns {
                        cols,
                        row: drop,
                        rule: PresolveRule::FixedVarMultiRow,
                    });
                    changed = true;
                    break;
                }
            }
        }
        Ok(changed)
    }

    fn two_row_singletons(&mut self) -> Result<bool, PresolveError> {
        let mut changed = false;
        let rows = self.alive_rows();
        for (p, &i) in rows.iter().enumerate() {
            for &j in &rows[p + 1..] {
                if !self.row_alive[i] || !self.row_alive[j] {
                    continue;
                }
                let (li, lj) = (self.rows[i].len(), self.rows[j].len());
                if li == 0 || lj == 0 || li.abs_diff(lj) > 1 {
                    continue;
                }
                let d = self.row_difference(i, j, 1.0);
                if d.len() != 1 {
                    continue;
                }
                let (&k, &dk) = d.iter().next().expect("singleton");
                let value = (self.b[i] - self.b[j]) / dk;
                if value < -self.tol_b / dk.abs() {
                    return Err(PresolveError::Infeasible {
                        rule: PresolveRule::TwoRowSingleton,
                        detail: format!("rows {i} and {j} force x[{k}] = {value}"),
                    });
                }
                let value = value.max(0.0);
                self.fix_column(k, value);
                self.remove_row(j);
                self.records.push(Reduction::FixedValue {
                    col: k,
                    value,
                    row: j,
                    rule: PresolveRule::TwoRowSingleton,
                });
                changed = true;
            }
        }
        Ok(changed)
    }

    fn finish(self, lp: &StandardFormLP) -> (StandardFormLP, PostsolveStack) {
        let kept_rows = self.alive_rows();
        let kept_cols = self.alive_cols();
        let mut row_map = vec![usize::MAX; self.rows.len()];
        for (new, &old) in kept_rows.iter().enumerate() {
            row_map[old] = new;
        }
        let mut col_map = vec![usize::MAX; self.cols.len()];
        for (new, &old) in kept_cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut triplets = Vec::with_capacity(self.nnz());
        for &i in &kept_rows {
            for (&j, &v) in &self.rows[i] {
                triplets.push((row_map[i], col_map[j], v));
            }
        }
        let a = CscMatrix::from_triplets(kept_rows.len(), kept_cols.len(), &triplets)
            .expect("indices in range");
        let b = kept_rows.iter().map(|&i| self.b[i]).collect();
        let c = kept_cols.iter().map(|&j| self.c[j]).collect();
        let mut reduced =
            StandardFormLP::new(a, b, c, self.f_obj).expect("presolve keeps data finite");
        if let (Some(rn), Some(cn)) = (lp.row_names(), lp.col_names()) {
            let rn = kept_rows.iter().map(|&i| rn[i].clone()).collect();
            let cn = kept_cols.iter().map(|&j| cn[j].clone()).collect();
            reduced = reduced.with_names(rn, cn).expect("name counts match");
        }
        let stack = PostsolveStack::new(lp.m(), lp.n(), kept_rows, kept_cols, self.records);
        (reduced, stack)
    }
}

/// Apply the enabled rules to a fixpoint.
pub fn presolve(
    lp: &StandardFormLP,
    rules: &RuleSet,
) -> Result<(StandardFormLP, PostsolveStack), PresolveError> {
    let mut work = Work::new(lp);
    loop {
        let mut changed = false;
        for rule in PresolveRule::SWEEP {
            if rules.contains(rule) {
                changed |= work.apply(rule)?;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(work.finish(lp))
}
