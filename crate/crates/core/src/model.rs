//! Problem, iterate and direction types for `min cᵀx  s.t.  Ax = b, x ≥ 0`.

use thiserror::Error;

use crate::sparse::CscMatrix;
use crate::vecops::dot;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), ModelError> {
    if expected == found {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

/// A linear program in standard form together with a constant objective
/// offset accumulated by presolve: the objective is `f_obj + cᵀx`.
///
/// Presolve may reduce a problem to zero rows and columns; every other
/// constructor path produces `m ≥ 1`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLP {
    a: CscMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    f_obj: f64,
    row_names: Option<Vec<String>>,
    col_names: Option<Vec<String>>,
}

impl StandardFormLP {
    pub fn new(a: CscMatrix, b: Vec<f64>, c: Vec<f64>, f_obj: f64) -> Result<Self, ModelError> {
        check_len("b", a.nrows(), b.len())?;
        check_len("c", a.ncols(), c.len())?;
        if !f_obj.is_finite() {
            return Err(ModelError::NonFinite("objective offset"));
        }
        if b.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("vector entry"));
        }
        Ok(StandardFormLP {
            a,
            b,
            c,
            f_obj,
            row_names: None,
            col_names: None,
        })
    }

    /// Convenience constructor from dense rows; used heavily by tests.
    pub fn from_dense(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<Self, ModelError> {
        let a = if a.is_empty() {
            CscMatrix::zeros(0, c.len())
        } else {
            CscMatrix::from_dense(a)?
        };
        Self::new(a, b.to_vec(), c.to_vec(), 0.0)
    }

    pub fn with_names(mut self, rows: Vec<String>, cols: Vec<String>) -> Result<Self, ModelError> {
        check_len("row names", self.m(), rows.len())?;
        check_len("column names", self.n(), cols.len())?;
        self.row_names = Some(rows);
        self.col_names = Some(cols);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn a(&self) -> &CscMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn f_obj(&self) -> f64 {
        self.f_obj
    }

    pub fn row_names(&self) -> Option<&[String]> {
        self.row_names.as_deref()
    }

    pub fn col_names(&self) -> Option<&[String]> {
        self.col_names.as_deref()
    }

    /// Restrict to the given rows and columns (both in increasing order).
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> StandardFormLP {
        let a = self.a.select_columns(cols).select_rows(rows);
        StandardFormLP {
            a,
            b: rows.iter().map(|&i| self.b[i]).collect(),
            c: cols.iter().map(|&j| self.c[j]).collect(),
            f_obj: self.f_obj,
            row_names: self
                .row_names
                .as_ref()
                .map(|r| rows.iter().map(|&i| r[i].clone()).collect()),
            col_names: self
                .col_names
                .as_ref()
                .map(|c| cols.iter().map(|&j| c[j].clone()).collect()),
        }
    }
}

/// A primal-dual point `(x, λ, s)` after `k` iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
    pub k: usize,
}

impl Iterate {
    pub fn new(x: Vec<f64>, lambda: Vec<f64>, s: Vec<f64>) -> Self {
        Iterate { x, lambda, s, k: 0 }
    }

    /// Strict positivity of `x` and `s`.
    pub fn is_interior(&self) -> bool {
        self.x.iter().chain(self.s.iter()).all(|&v| v > 0.0)
    }

    pub fn check_dims(&self, lp: &StandardFormLP) -> Result<(), ModelError> {
        check_len("x", lp.n(), self.x.len())?;
        check_len("lambda", lp.m(), self.lambda.len())?;
        check_len("s", lp.n(), self.s.len())
    }
}

/// Primal residual `r_b = Ax − b` and dual residual `r_c = Aᵀλ + s − c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub r_b: Vec<f64>,
    pub r_c: Vec<f64>,
}

impl Residuals {
    pub fn norm_b(&self) -> f64 {
        crate::vecops::norm2(&self.r_b)
    }

    pub fn norm_c(&self) -> f64 {
        crate::vecops::norm2(&self.r_c)
    }

    /// `‖(r_b, r_c)‖`
    pub fn norm(&self) -> f64 {
        self.norm_b().hypot(self.norm_c())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionOrder {
    First,
    Second,
}

/// Derivative of the infeasible central path at the current iterate:
/// `(ẋ, λ̇, ṡ)` for [`DirectionOrder::First`], `(ẍ, λ̈, s̈)` for `Second`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub dx: Vec<f64>,
    pub dlambda: Vec<f64>,
    pub ds: Vec<f64>,
    pub order: DirectionOrder,
}

pub fn residuals(lp: &StandardFormLP, it: &Iterate) -> Result<Residuals, ModelError> {
    it.check_dims(lp)?;
    let mut r_b = lp.a().mul_vec(&it.x);
    for (r, b) in r_b.iter_mut().zip(lp.b()) {
        *r -= b;
    }
    let mut r_c = lp.a().tr_mul_vec(&it.lambda);
    for ((r, s), c) in r_c.iter_mut().zip(&it.s).zip(lp.c()) {
        *r += s - c;
    }
    Ok(Residuals { r_b, r_c })
}

/// `μ = xᵀs / n`; zero for an empty iterate.
pub fn duality_measure(it: &Iterate) -> f64 {
    let n = it.x.len();
    if n == 0 {
        return 0.0;
    }
    dot(&it.x, &it.s) / n as f64
}

pub fn objective_value(lp: &StandardFormLP, x: &[f64]) -> f64 {
    lp.f_obj() + dot(lp.c(), x)
}
