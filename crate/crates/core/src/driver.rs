//! Main interior-point loop: presolve, starting point, per-iteration solves,
//! method-specific step, degenerate-column handling and postsolve.

use std::sync::Arc;

use log::{debug, warn};
use thiserror::Error;

use crate::ipm_kernel::{
    affine_direction, affine_mu, centering_sigma, check_termination, corrector_direction,
    initial_point, ratio_step, step_scale, DepRows, KernelError, SolverConfig, TerminationStatus,
};
use crate::model::{
    duality_measure, objective_value, residuals, Direction, Iterate, Residuals, StandardFormLP,
};
use crate::normal_eq::{
    assemble_normal, complement, dependent_rows, drop_small_columns, factorize,
    remove_dependent_rows, CholeskyFactor, LinalgError, PivotPolicy,
};
use crate::presolve::{postsolve, presolve, PostsolveStack, PresolveError};
use crate::strategy::{SearchStrategy, StrategyRegistry};
use crate::vecops::{min, norm2};

/// `1 − e^{−(k+2)}` rounds to 1 from `k ≈ 35`; steps stay this far inside.
pub const MAX_STEP_SCALE: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DriverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown method '{0}'")]
    UnknownMethod(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CholeskyStatus {
    Ok,
    /// The strict factorization failed and the relaxed one replaced this
    /// many pivots by a huge value.
    SkippedPivots(usize),
    /// Columns removed by the degenerate-solution safeguard this iteration.
    ColumnsDropped(usize),
}

/// Values at the start of iteration `k` and the step taken from there.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub mu: f64,
    pub norm_r_b: f64,
    pub norm_r_c: f64,
    pub sigma: f64,
    pub alpha_x: f64,
    pub alpha_s: f64,
    pub beta: f64,
    pub cholesky_status: CholeskyStatus,
}

/// Dimensions before (`m0`, `n0`) and after (`m1`, `n1`) preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemDims {
    pub m0: usize,
    pub n0: usize,
    pub m1: usize,
    pub n1: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub method: String,
    pub status: TerminationStatus,
    pub x_full: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub infeasibility: f64,
    pub log: Vec<IterationRecord>,
    pub dims: ProblemDims,
}

/// Everything a method needs before its first iteration. Shared by both
/// methods in comparison mode.
#[derive(Debug, Clone)]
pub struct Prepared {
    original: StandardFormLP,
    stack: PostsolveStack,
    lp: StandardFormLP,
    start: Iterate,
}

impl Prepared {
    pub fn original(&self) -> &StandardFormLP {
        &self.original
    }

    /// The problem handed to the interior-point loop.
    pub fn reduced(&self) -> &StandardFormLP {
        &self.lp
    }

    pub fn start(&self) -> &Iterate {
        &self.start
    }

    pub fn stack(&self) -> &PostsolveStack {
        &self.stack
    }

    pub fn dims(&self) -> ProblemDims {
        ProblemDims {
            m0: self.original.m(),
            n0: self.original.n(),
            m1: self.lp.m(),
            n1: self.lp.n(),
        }
    }
}

/// A preparation that already decided the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Settled {
    pub status: TerminationStatus,
    pub dims: ProblemDims,
}

/// State exposed to an observer once per iteration, before the update.
#[derive(Debug)]
pub struct IterationEvent<'a> {
    pub lp: &'a StandardFormLP,
    pub iterate: &'a Iterate,
    pub residuals: &'a Residuals,
    pub dir1: &'a Direction,
    pub dir2: &'a Direction,
    pub sigma: f64,
    pub alpha_x: f64,
    pub alpha_s: f64,
    /// Column of the presolved problem for each current column.
    pub col_map: &'a [usize],
}

pub fn prepare(lp: &StandardFormLP, cfg: &SolverConfig) -> Result<Prepared, Settled> {
    let unsolved = |status, m1, n1| Settled {
        status,
        dims: ProblemDims {
            m0: lp.m(),
            n0: lp.n(),
            m1,
            n1,
        },
    };
    let (reduced, stack) = presolve(lp, &cfg.presolve).map_err(|e| {
        debug!("presolve: {e}");
        match e {
            PresolveError::Unbounded { .. } => unsolved(TerminationStatus::UnboundedDetected, 0, 0),
            _ => unsolved(TerminationStatus::InfeasibleDetected, 0, 0),
        }
    })?;
    let dep_failure = |e: LinalgError, m, n| match e {
        LinalgError::InconsistentRows(_) => unsolved(TerminationStatus::InfeasibleDetected, m, n),
        _ => unsolved(TerminationStatus::NumericalFailure, m, n),
    };
    let (m1, n1) = (reduced.m(), reduced.n());
    let mut work = reduced;
    if cfg.dep_rows == DepRows::Always {
        work = without_dependent_rows(&work).map_err(|e| dep_failure(e, m1, n1))?;
    }
    let start = match initial_point(&work) {
        Ok(it) => it,
        Err(LinalgError::NotPositiveDefinite(_)) if cfg.dep_rows == DepRows::Auto => {
            work = without_dependent_rows(&work).map_err(|e| dep_failure(e, m1, n1))?;
            initial_point(&work).map_err(|e| dep_failure(e, work.m(), work.n()))?
        }
        Err(e) => return Err(dep_failure(e, m1, n1)),
    };
    Ok(Prepared {
        original: lp.clone(),
        stack,
        lp: work,
        start,
    })
}

fn without_dependent_rows(lp: &StandardFormLP) -> Result<StandardFormLP, LinalgError> {
    let (a, b, removed) = remove_dependent_rows(lp.a(), lp.b())?;
    if removed.is_empty() {
        return Ok(lp.clone());
    }
    debug!("removed dependent rows {removed:?}");
    let keep: Vec<usize> = (0..lp.m()).filter(|i| !removed.contains(i)).collect();
    let cols: Vec<usize> = (0..lp.n()).collect();
    let out = lp.restrict(&keep, &cols);
    debug_assert_eq!(out.a(), &a);
    debug_assert_eq!(out.b(), &b[..]);
    Ok(out)
}

/// Factor the normal matrix; the flag reports that the strict factorization
/// failed and the skip policy was used instead.
fn factor_normal(lp: &StandardFormLP, it: &Iterate) -> Result<(CholeskyFactor, bool), LinalgError> {
    let m = assemble_normal(lp.a(), &it.x, &it.s)?;
    match factorize(&m, PivotPolicy::Strict) {
        Ok(f) => Ok((f, false)),
        Err(LinalgError::NotPositiveDefinite(_)) => Ok((factorize(&m, PivotPolicy::Skip)?, true)),
        Err(e) => Err(e),
    }
}

struct Working {
    lp: StandardFormLP,
    it: Iterate,
    col_map: Vec<usize>,
    row_map: Vec<usize>,
}

impl Working {
    /// Remove columns with `x ≤ eps_x`; returns how many went.
    fn drop_columns(&mut self, eps_x: f64) -> Result<usize, LinalgError> {
        let d = drop_small_columns(&self.lp, &self.it, eps_x)?;
        if d.columns.is_empty() && d.rows.is_empty() {
            return Ok(0);
        }
        debug!("dropping columns {:?} and rows {:?}", d.columns, d.rows);
        let keep: Vec<usize> = (0..self.lp.n())
            .filter(|j| !d.columns.contains(j))
            .collect();
        self.col_map = keep.iter().map(|&j| self.col_map[j]).collect();
        let kept_rows = complement(self.row_map.len(), &d.rows);
        self.row_map = kept_rows.iter().map(|&i| self.row_map[i]).collect();
        self.lp = d.lp;
        self.it = d.iterate;
        Ok(d.columns.len())
    }

    /// Bring back dropped columns of `base` whose reduced cost `c_j − A_jᵀλ`
    /// is below `-threshold`. Returns how many came back. Skipped once rows
    /// have been removed, since their multipliers are then unknown.
    fn reinstate(&mut self, base: &StandardFormLP, threshold: f64) -> Result<usize, LinalgError> {
        let n = base.n();
        if self.col_map.len() == n || self.row_map.len() != base.m() {
            return Ok(0);
        }
        let mut lambda = vec![0.0; base.m()];
        for (&i, &l) in self.row_map.iter().zip(&self.it.lambda) {
            lambda[i] = l;
        }
        let aty = base.a().tr_mul_vec(&lambda);
        let mut slot = vec![None; n];
        for (k, &j) in self.col_map.iter().enumerate() {
            slot[j] = Some(k);
        }
        let back: Vec<usize> = (0..n)
            .filter(|&j| slot[j].is_none() && base.c()[j] - aty[j] < -threshold)
            .collect();
        if back.is_empty() {
            return Ok(0);
        }
        debug!("reinstating columns {back:?}");
        let cols: Vec<usize> = (0..n)
            .filter(|&j| slot[j].is_some() || back.contains(&j))
            .collect();
        let all_rows: Vec<usize> = (0..base.m()).collect();
        let widened = base.restrict(&all_rows, &cols);
        let rows = complement(base.m(), &dependent_rows(widened.a(), widened.b())?);
        let lp = widened.restrict(&rows, &(0..cols.len()).collect::<Vec<_>>());

        let mu = duality_measure(&self.it).max(f64::MIN_POSITIVE);
        let x_new = mu.sqrt();
        let (mut x, mut s) = (
            Vec::with_capacity(cols.len()),
            Vec::with_capacity(cols.len()),
        );
        for &j in &cols {
            match slot[j] {
                Some(k) => {
                    x.push(self.it.x[k]);
                    s.push(self.it.s[k]);
                }
                None => {
                    x.push(x_new);
                    s.push((mu / x_new).max(aty[j] - base.c()[j]));
                }
            }
        }
        self.it = Iterate {
            x,
            lambda: rows.iter().map(|&i| lambda[i]).collect(),
            s,
            k: self.it.k,
        };
        self.lp = lp;
        self.col_map = cols;
        self.row_map = rows;
        Ok(back.len())
    }
}

/// Run one method from a prepared start.
pub fn run_method(
    prepared: &Prepared,
    strategy: &dyn SearchStrategy,
    cfg: &SolverConfig,
    mut observer: Option<&mut dyn FnMut(&IterationEvent<'_>)>,
) -> SolveResult {
    let mut w = Working {
        lp: prepared.lp.clone(),
        it: prepared.start.clone(),
        col_map: (0..prepared.lp.n()).collect(),
        row_map: (0..prepared.lp.m()).collect(),
    };
    let reinstate_threshold = cfg.tol * norm2(prepared.lp.c()).max(1.0);
    let mut reinstated_at = None;
    let mut log = Vec::new();
    let mut prev_res: Option<Residuals> = None;
    let mut last_alpha = (1.0, 1.0);
    let mut last_mu = f64::INFINITY;
    let (status, infeasibility) = loop {
        let res = match residuals(&w.lp, &w.it) {
            Ok(r) => r,
            Err(_) => break (TerminationStatus::NumericalFailure, f64::NAN),
        };
        if let Some(status) = check_termination(
            &w.lp,
            &w.it,
            &res,
            prev_res.as_ref(),
            last_alpha.0,
            last_alpha.1,
            cfg,
        ) {
            if status == TerminationStatus::Optimal && reinstated_at != Some(w.it.k) {
                match w.reinstate(&prepared.lp, reinstate_threshold) {
                    Ok(0) => {}
                    Ok(count) => {
                        warn!(
                            "{}: {count} dropped columns priced out at iteration {}",
                            strategy.name(),
                            w.it.k
                        );
                        reinstated_at = Some(w.it.k);
                        prev_res = None;
                        continue;
                    }
                    Err(e) => {
                        warn!(
                            "{}: reinstating dropped columns failed: {e}",
                            strategy.name()
                        );
                        break (TerminationStatus::NumericalFailure, res.norm());
                    }
                }
            }
            break (status, res.norm());
        }
        let mu = duality_measure(&w.it);
        if mu > last_mu {
            warn!(
                "{}: duality measure rose from {last_mu:e} to {mu:e} at iteration {}",
                strategy.name(),
                w.it.k
            );
        }
        last_mu = mu;

        let mut cholesky_status = CholeskyStatus::Ok;
        let factored = match factor_normal(&w.lp, &w.it) {
            Ok((f, false)) => Ok(f),
            Ok((f, true)) => {
                // rank loss: try the degenerate-column safeguard before living with skipped pivots
                match w.drop_columns(cfg.eps_x) {
                    Ok(dropped) if dropped > 0 => {
                        cholesky_status = CholeskyStatus::ColumnsDropped(dropped);
                        factor_normal(&w.lp, &w.it).map(|(f, _)| f)
                    }
                    _ => {
                        cholesky_status = CholeskyStatus::SkippedPivots(f.skipped_pivots().len());
                        Ok(f)
                    }
                }
            }
            Err(e) => Err(e),
        };
        let Ok(factor) = factored else {
            break (TerminationStatus::NumericalFailure, res.norm());
        };
        // the problem may have shrunk above
        let res = if matches!(cholesky_status, CholeskyStatus::ColumnsDropped(_)) {
            match residuals(&w.lp, &w.it) {
                Ok(r) => r,
                Err(_) => break (TerminationStatus::NumericalFailure, f64::NAN),
            }
        } else {
            res
        };
        let mu = duality_measure(&w.it);

        let step = (|| -> Result<_, KernelError> {
            let d1 = affine_direction(&w.lp, &w.it, &res, &factor)?;
            let ax_aff = ratio_step(&w.it.x, &d1.dx);
            let as_aff = ratio_step(&w.it.s, &d1.ds);
            let sigma = centering_sigma(mu, affine_mu(&w.it, &d1, ax_aff, as_aff), cfg);
            let d2 = corrector_direction(&w.lp, &w.it, &d1, sigma, mu, &factor)?;
            let (ax, as_) = strategy.step_lengths(&w.it, &d1, &d2)?;
            Ok((d1, d2, sigma, ax, as_))
        })();
        let Ok((d1, d2, sigma, ax, as_)) = step else {
            break (TerminationStatus::NumericalFailure, res.norm());
        };
        let beta = step_scale(w.it.k).min(MAX_STEP_SCALE);
        let (ax, as_) = (beta * ax, beta * as_);
        if let Some(obs) = observer.as_mut() {
            obs(&IterationEvent {
                lp: &w.lp,
                iterate: &w.it,
                residuals: &res,
                dir1: &d1,
                dir2: &d2,
                sigma,
                alpha_x: ax,
                alpha_s: as_,
                col_map: &w.col_map,
            });
        }
        let mut next = match strategy.update(&w.it, &d1, &d2, ax, as_) {
            Ok(next) => next,
            Err(e) => {
                warn!("{}: {e}", strategy.name());
                break (TerminationStatus::NumericalFailure, res.norm());
            }
        };
        next.k = w.it.k + 1;
        log.push(IterationRecord {
            k: w.it.k,
            mu,
            norm_r_b: res.norm_b(),
            norm_r_c: res.norm_c(),
            sigma,
            alpha_x: ax,
            alpha_s: as_,
            beta,
            cholesky_status,
        });
        w.it = next;
        last_alpha = (ax, as_);
        prev_res = Some(res);

        if cfg.eps_x > 0.0 && w.lp.n() > 0 && min(&w.it.x) <= cfg.eps_x {
            match w.drop_columns(cfg.eps_x) {
                Ok(dropped) if dropped > 0 => {
                    if let Some(rec) = log.last_mut() {
                        rec.cholesky_status = CholeskyStatus::ColumnsDropped(dropped);
                    }
                    prev_res = None;
                }
                Ok(_) => {}
                Err(e) => debug!("column drop skipped: {e}"),
            }
        }
    };

    let mut x_presolved = vec![0.0; prepared.lp.n()];
    for (&j, &v) in w.col_map.iter().zip(&w.it.x) {
        x_presolved[j] = v;
    }
    let x_full = postsolve(&prepared.stack, &x_presolved)
        .expect("postsolve stack matches the presolved problem");
    SolveResult {
        method: strategy.name().to_string(),
        status,
        objective: objective_value(&prepared.original, &x_full),
        x_full,
        iterations: log.len(),
        infeasibility,
        log,
        dims: prepared.dims(),
    }
}

fn settled_result(lp: &StandardFormLP, method: &str, s: Settled) -> SolveResult {
    let x_full = vec![0.0; lp.n()];
    SolveResult {
        method: method.to_string(),
        status: s.status,
        objective: objective_value(lp, &x_full),
        x_full,
        iterations: 0,
        infeasibility: f64::NAN,
        log: Vec::new(),
        dims: s.dims,
    }
}

fn lookup(
    registry: &StrategyRegistry,
    cfg: &SolverConfig,
) -> Result<Arc<dyn SearchStrategy>, DriverError> {
    cfg.validate().map_err(DriverError::InvalidConfig)?;
    registry
        .get(&cfg.method)
        .ok_or_else(|| DriverError::UnknownMethod(cfg.method.clone()))
}

/// Solve with the method named in `cfg.method`, looked up in `registry`.
pub fn solve_with_registry(
    lp: &StandardFormLP,
    cfg: &SolverConfig,
    registry: &StrategyRegistry,
) -> Result<SolveResult, DriverError> {
    let strategy = lookup(registry, cfg)?;
    Ok(match prepare(lp, cfg) {
        Ok(p) => run_method(&p, strategy.as_ref(), cfg, None),
        Err(s) => settled_result(lp, strategy.name(), s),
    })
}

pub fn solve(lp: &StandardFormLP, cfg: &SolverConfig) -> Result<SolveResult, DriverError> {
    solve_with_registry(lp, cfg, &StrategyRegistry::with_defaults())
}

/// Both default methods from one shared presolve and starting point, run
/// concurrently. Returns `(arc, mehrotra)`.
pub fn compare(
    lp: &StandardFormLP,
    cfg: &SolverConfig,
) -> Result<(SolveResult, SolveResult), DriverError> {
    let registry = StrategyRegistry::with_defaults();
    let arc = lookup(&registry, &cfg.clone().with_method("arc"))?;
    let meh = lookup(&registry, &cfg.clone().with_method("mehrotra"))?;
    let prepared = match prepare(lp, cfg) {
        Ok(p) => p,
        Err(s) => {
            return Ok((
                settled_result(lp, "arc", s.clone()),
                settled_result(lp, "mehrotra", s),
            ))
        }
    };
    Ok(std::thread::scope(|scope| {
        let h = scope.spawn(|| run_method(&prepared, meh.as_ref(), cfg, None));
        let a = run_method(&prepared, arc.as_ref(), cfg, None);
        (a, h.join().expect("mehrotra solve panicked"))
    }))
}

/// Point on the feasible central path of `min x₁ s.t. x₁ + x₂ = 5, x ≥ 0`
/// with duality measure `mu`: `(x, λ, s)`.
pub fn central_path_reference(mu: f64) -> Result<([f64; 2], f64, [f64; 2]), KernelError> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(KernelError::Domain(format!(
            "central path needs mu > 0, got {mu}"
        )));
    }
    let t = 5.0 - 2.0 * mu;
    let root = (t * t + 20.0 * mu).sqrt();
    // (t − √(t² + 20μ))/10, rationalized when the subtraction would cancel
    let lambda = if t > 0.0 {
        -2.0 * mu / (t + root)
    } else {
        (t - root) / 10.0
    };
    let s = [1.0 - lambda, -lambda];
    Ok(([mu / s[0], mu / s[1]], lambda, s))
}
