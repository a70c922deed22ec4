//! Method-agnostic interior-point machinery: starting point, derivative
//! solves, ratio test, centering, step scaling and termination.

use std::fmt;

use thiserror::Error;

use crate::model::{
    duality_measure, Direction, DirectionOrder, Iterate, Residuals, StandardFormLP,
};
use crate::normal_eq::{
    assemble_normal, factorize, solve_with, CholeskyFactor, LinalgError, PivotPolicy,
};
use crate::presolve::RuleSet;
use crate::vecops::{dot, norm_inf};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("{0}")]
    Domain(String),
    #[error("update left {vector}[{index}] = {value:e}, which is not positive")]
    LostPositivity {
        vector: &'static str,
        index: usize,
        value: f64,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// When to run dependent-row removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DepRows {
    /// Only when a factorization or degenerate-column drop needs it.
    #[default]
    Auto,
    /// Once before the starting point, and whenever columns are dropped.
    Always,
    Never,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub eps_x: f64,
    pub sigma_max: f64,
    pub min_step: f64,
    pub presolve: RuleSet,
    /// Name of a registered search strategy.
    pub method: String,
    pub dep_rows: DepRows,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 200,
            eps_x: 1e-6,
            sigma_max: 0.5,
            min_step: 1e-8,
            presolve: RuleSet::default(),
            method: "arc".to_string(),
            dep_rows: DepRows::Auto,
        }
    }
}

impl SolverConfig {
    pub fn with_method(mut self, name: &str) -> Self {
        self.method = name.to_string();
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol > 0.0) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.sigma_max > 0.0 && self.sigma_max <= 0.5) {
            return Err(format!(
                "sigma_max must lie in (0, 0.5], got {}",
                self.sigma_max
            ));
        }
        if !(self.eps_x >= 0.0) {
            return Err(format!("eps_x must be nonnegative, got {}", self.eps_x));
        }
        if !(self.min_step >= 0.0) {
            return Err(format!(
                "min_step must be nonnegative, got {}",
                self.min_step
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationStatus {
    Optimal,
    StepTooSmall,
    ResidualBlowup,
    IterationLimit,
    InfeasibleDetected,
    UnboundedDetected,
    /// A factorization or update failed beyond what degenerate handling repairs.
    NumericalFailure,
}

impl TerminationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationStatus::Optimal => "optimal",
            TerminationStatus::StepTooSmall => "step-too-small",
            TerminationStatus::ResidualBlowup => "residual-blowup",
            TerminationStatus::IterationLimit => "iteration-limit",
            TerminationStatus::InfeasibleDetected => "infeasible",
            TerminationStatus::UnboundedDetected => "unbounded",
            TerminationStatus::NumericalFailure => "numerical-failure",
        }
    }
}

impl fmt::Display for TerminationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Starting point: the least-squares heuristic candidate or the uniform
/// candidate `ρe`, whichever has the smaller duality measure.
pub fn initial_point(lp: &StandardFormLP) -> Result<Iterate, LinalgError> {
    let n = lp.n();
    let ones = vec![1.0; n];
    let aat = assemble_normal(lp.a(), &ones, &ones)?;
    let factor = factorize(&aat, PivotPolicy::Strict)?;

    let candidate_a = least_squares_start(lp, &factor)?;
    let rho = norm_inf(lp.b()).max(norm_inf(lp.c())).max(1.0).sqrt();
    let candidate_b = Iterate::new(vec![rho; n], vec![0.0; lp.m()], vec![rho; n]);

    Ok(match candidate_a {
        Some(a) if duality_measure(&a) <= duality_measure(&candidate_b) => a,
        _ => candidate_b,
    })
}

fn least_squares_start(
    lp: &StandardFormLP,
    aat: &CholeskyFactor,
) -> Result<Option<Iterate>, LinalgError> {
    let a = lp.a();
    let y = solve_with(aat, lp.b())?;
    let x_t = a.tr_mul_vec(&y);
    let lambda = solve_with(aat, &a.mul_vec(lp.c()))?;
    let at_l = a.tr_mul_vec(&lambda);
    let s_t: Vec<f64> = lp.c().iter().zip(&at_l).map(|(c, v)| c - v).collect();

    let shift = |v: &[f64]| {
        let d = (-1.5 * crate::vecops::min(v)).max(0.0);
        v.iter().map(|vi| vi + d).collect::<Vec<f64>>()
    };
    let x_h = shift(&x_t);
    let s_h = shift(&s_t);
    let xs = dot(&x_h, &s_h);
    let dx = 0.5 * xs / s_h.iter().sum::<f64>();
    let ds = 0.5 * xs / x_h.iter().sum::<f64>();
    let x: Vec<f64> = x_h.iter().map(|v| v + dx).collect();
    let s: Vec<f64> = s_h.iter().map(|v| v + ds).collect();
    let it = Iterate::new(x, lambda, s);
    let usable = it.is_interior() && it.lambda.iter().all(|v| v.is_finite());
    Ok(usable.then_some(it))
}

/// First derivative of the infeasible central path:
/// `Aẋ = r_b`, `Aᵀλ̇ + ṡ = r_c`, `Sẋ + Xṡ = x∘s`.
pub fn affine_direction(
    lp: &StandardFormLP,
    it: &Iterate,
    res: &Residuals,
    factor: &CholeskyFactor,
) -> Result<Direction, LinalgError> {
    let d: Vec<f64> = it.x.iter().zip(&it.s).map(|(x, s)| x / s).collect();
    let d_rc: Vec<f64> = d.iter().zip(&res.r_c).map(|(d, r)| d * r).collect();
    let mut rhs = lp.a().mul_vec(&d_rc);
    for (r, b) in rhs.iter_mut().zip(lp.b()) {
        *r -= b;
    }
    let dlambda = solve_with(factor, &rhs)?;
    let at_dl = lp.a().tr_mul_vec(&dlambda);
    let ds: Vec<f64> = res.r_c.iter().zip(&at_dl).map(|(r, v)| r - v).collect();
    let dx: Vec<f64> =
        it.x.iter()
            .zip(&d)
            .zip(&ds)
            .map(|((x, d), s)| x - d * s)
            .collect();
    Ok(Direction {
        dx,
        dlambda,
        ds,
        order: DirectionOrder::First,
    })
}

/// Second derivative with centering:
/// `Aẍ = 0`, `Aᵀλ̈ + s̈ = 0`, `Sẍ + Xs̈ = σμe − 2ẋ∘ṡ`.
pub fn corrector_direction(
    lp: &StandardFormLP,
    it: &Iterate,
    dir1: &Direction,
    sigma: f64,
    mu: f64,
    factor: &CholeskyFactor,
) -> Result<Direction, LinalgError> {
    let w: Vec<f64> = dir1
        .dx
        .iter()
        .zip(&dir1.ds)
        .map(|(a, b)| sigma * mu - 2.0 * a * b)
        .collect();
    let w_s: Vec<f64> = w.iter().zip(&it.s).map(|(w, s)| w / s).collect();
    let rhs: Vec<f64> = lp.a().mul_vec(&w_s).into_iter().map(|v| -v).collect();
    let dlambda = solve_with(factor, &rhs)?;
    let ds: Vec<f64> = lp
        .a()
        .tr_mul_vec(&dlambda)
        .into_iter()
        .map(|v| -v)
        .collect();
    let dx: Vec<f64> = w
        .iter()
        .zip(&it.x)
        .zip(&ds)
        .zip(&it.s)
        .map(|(((w, x), ds), s)| (w - x * ds) / s)
        .collect();
    Ok(Direction {
        dx,
        dlambda,
        ds,
        order: DirectionOrder::Second,
    })
}

/// Largest `α ∈ [0, 1]` with `v − α·dv ≥ 0`.
pub fn ratio_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, &d)| d > 0.0)
        .fold(1.0f64, |a, (&vi, &di)| a.min(vi / di))
}

/// `(x − α_x ẋ)ᵀ(s − α_s ṡ) / n`.
pub fn affine_mu(it: &Iterate, dir1: &Direction, alpha_x: f64, alpha_s: f64) -> f64 {
    let n = it.x.len();
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = (0..n)
        .map(|i| (it.x[i] - alpha_x * dir1.dx[i]) * (it.s[i] - alpha_s * dir1.ds[i]))
        .sum();
    sum / n as f64
}

pub const SIGMA_MIN: f64 = 1e-8;

/// `(μᵃ/μ)³` clamped to `[SIGMA_MIN, sigma_max]`.
pub fn centering_sigma(mu: f64, mu_aff: f64, cfg: &SolverConfig) -> f64 {
    let ratio = mu_aff / mu;
    let sigma = ratio * ratio * ratio;
    if sigma.is_nan() {
        return cfg.sigma_max;
    }
    sigma.clamp(SIGMA_MIN, cfg.sigma_max)
}

/// `β = 1 − e^{−(k+2)}`.
pub fn step_scale(k: usize) -> f64 {
    -(-(k as f64 + 2.0)).exp_m1()
}

/// Relative primal and dual infeasibility plus relative gap.
pub fn termination_measure(lp: &StandardFormLP, it: &Iterate, res: &Residuals) -> f64 {
    let mu = duality_measure(it);
    let scale_b = crate::vecops::norm2(lp.b()).max(1.0);
    let scale_c = crate::vecops::norm2(lp.c()).max(1.0);
    let scale_gap = dot(lp.c(), &it.x)
        .abs()
        .max(dot(lp.b(), &it.lambda).abs())
        .max(1.0);
    res.norm_b() / scale_b + res.norm_c() / scale_c + mu / scale_gap
}

/// `None` means continue.
pub fn check_termination(
    lp: &StandardFormLP,
    it: &Iterate,
    res: &Residuals,
    prev_res: Option<&Residuals>,
    alpha_x: f64,
    alpha_s: f64,
    cfg: &SolverConfig,
) -> Option<TerminationStatus> {
    if termination_measure(lp, it, res) < cfg.tol {
        return Some(TerminationStatus::Optimal);
    }
    if alpha_x < cfg.min_step && alpha_s < cfg.min_step {
        return Some(TerminationStatus::StepTooSmall);
    }
    if let Some(prev) = prev_res {
        if 10.0 * prev.norm_b() < res.norm_b() || 10.0 * prev.norm_c() < res.norm_c() {
            return Some(TerminationStatus::ResidualBlowup);
        }
    }
    if it.k >= cfg.max_iter {
        return Some(TerminationStatus::IterationLimit);
    }
    None
}

/// `v − a·dv + b·ddv` for each of `x`, `λ`, `s`; the shared update kernel of
/// both search methods. `(a_x, b_x)` weights the primal part and `(a_s, b_s)`
/// the dual part.
pub(crate) fn combine(
    it: &Iterate,
    dir1: &Direction,
    dir2: &Direction,
    (a_x, b_x): (f64, f64),
    (a_s, b_s): (f64, f64),
) -> Result<Iterate, KernelError> {
    let step = |v: &[f64], dv: &[f64], ddv: &[f64], a: f64, b: f64| -> Vec<f64> {
        v.iter()
            .zip(dv)
            .zip(ddv)
            .map(|((v, d), dd)| v - a * d + b * dd)
            .collect()
    };
    let x = step(&it.x, &dir1.dx, &dir2.dx, a_x, b_x);
    let lambda = step(&it.lambda, &dir1.dlambda, &dir2.dlambda, a_s, b_s);
    let s = step(&it.s, &dir1.ds, &dir2.ds, a_s, b_s);
    for (vector, v) in [("x", &x), ("s", &s)] {
        if let Some((index, &value)) = v.iter().enumerate().find(|(_, &val)| !(val > 0.0)) {
            return Err(KernelError::LostPositivity {
                vector,
                index,
                value,
            });
        }
    }
    Ok(Iterate {
        x,
        lambda,
        s,
        k: it.k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::residuals;

    fn two_var() -> StandardFormLP {
        StandardFormLP::from_dense(&[vec![1.0, 1.0]], &[5.0], &[1.0, 0.0]).unwrap()
    }

    fn factor_at(lp: &StandardFormLP, it: &Iterate) -> CholeskyFactor {
        factorize(
            &assemble_normal(lp.a(), &it.x, &it.s).unwrap(),
            PivotPolicy::Strict,
        )
        .unwrap()
    }

    #[test]
    fn initial_point_two_variable_problem() {
        let it = initial_point(&two_var()).unwrap();
        assert_eq!(it.x, vec![3.75, 3.75]);
        assert_eq!(it.s, vec![1.625, 0.625]);
        assert_eq!(it.lambda, vec![0.5]);
        assert_eq!(duality_measure(&it), 4.21875);
    }

    #[test]
    fn initial_point_zero_data_uses_uniform_start() {
        let lp = StandardFormLP::from_dense(&[vec![1.0, 1.0]], &[0.0], &[0.0, 0.0]).unwrap();
        let it = initial_point(&lp).unwrap();
        assert_eq!(it.x, vec![1.0, 1.0]);
        assert_eq!(it.s, vec![1.0, 1.0]);
        assert_eq!(duality_measure(&it), 1.0);
    }

    #[test]
    fn affine_direction_satisfies_its_system() {
        let lp = two_var();
        let it = Iterate::new(vec![1.0, 1.0], vec![0.0], vec![1.0, 1.0]);
        let res = residuals(&lp, &it).unwrap();
        let d = affine_direction(&lp, &it, &res, &factor_at(&lp, &it)).unwrap();
        let adx = lp.a().mul_vec(&d.dx);
        assert!((adx[0] - res.r_b[0]).abs() < 1e-12);
        for i in 0..2 {
            assert!((it.s[i] * d.dx[i] + it.x[i] * d.ds[i] - it.x[i] * it.s[i]).abs() < 1e-12);
        }
        let at = lp.a().tr_mul_vec(&d.dlambda);
        for i in 0..2 {
            assert!((at[i] + d.ds[i] - res.r_c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn corrector_is_orthogonal_and_vanishes_on_zero_rhs() {
        let lp = two_var();
        let it = Iterate::new(vec![1.0, 2.0], vec![0.1], vec![0.5, 1.5]);
        let res = residuals(&lp, &it).unwrap();
        let f = factor_at(&lp, &it);
        let d1 = affine_direction(&lp, &it, &res, &f).unwrap();
        let d2 = corrector_direction(&lp, &it, &d1, 0.2, duality_measure(&it), &f).unwrap();
        assert!(dot(&d2.dx, &d2.ds).abs() < 1e-12);

        let zero = Direction {
            dx: vec![0.0; 2],
            dlambda: vec![0.0],
            ds: vec![0.0; 2],
            order: DirectionOrder::First,
        };
        let d0 = corrector_direction(&lp, &it, &zero, 0.0, 1.0, &f).unwrap();
        assert!(d0
            .dx
            .iter()
            .chain(&d0.ds)
            .chain(&d0.dlambda)
            .all(|v| *v == 0.0));
    }

    #[test]
    fn ratio_step_examples() {
        assert_eq!(ratio_step(&[1.0, 2.0], &[2.0, 1.0]), 0.5);
        assert_eq!(ratio_step(&[1.0, 2.0], &[-2.0, 0.0]), 1.0);
        assert_eq!(ratio_step(&[1.0, 1.0], &[1.0, 4.0]), 0.25);
    }

    #[test]
    fn sigma_examples() {
        let cfg = SolverConfig::default();
        assert!((centering_sigma(1.0, 0.1, &cfg) - 1e-3).abs() < 1e-18);
        assert_eq!(centering_sigma(2.0, 2.0, &cfg), 0.5);
        assert_eq!(centering_sigma(2.0, 0.0, &cfg), 1e-8);
    }

    #[test]
    fn step_scale_examples() {
        assert!((step_scale(0) - 0.864_664_716_763_387_3).abs() < 1e-15);
        assert!((step_scale(3) - 0.993_262_053_000_914_7).abs() < 1e-15);
        assert!(step_scale(50) >= 1.0 - 1e-20);
        for k in 0..30 {
            assert!(step_scale(k + 1) > step_scale(k));
        }
    }

    #[test]
    fn termination_examples() {
        let cfg = SolverConfig::default();
        // ‖r_b‖ = ‖r_c‖ = 1e-9, μ = 1e-9 with unit scales
        let lp = StandardFormLP::from_dense(&[vec![1.0]], &[1.0], &[1.0]).unwrap();
        let it = Iterate {
            x: vec![1.0],
            lambda: vec![1.0],
            s: vec![1e-9],
            k: 5,
        };
        let res = Residuals {
            r_b: vec![1e-9],
            r_c: vec![1e-9],
        };
        assert_eq!(
            check_termination(&lp, &it, &res, None, 1.0, 1.0, &cfg),
            Some(TerminationStatus::Optimal)
        );

        let far = Residuals {
            r_b: vec![1.0],
            r_c: vec![1.0],
        };
        assert_eq!(
            check_termination(&lp, &it, &far, None, 1e-9, 1e-9, &cfg),
            Some(TerminationStatus::StepTooSmall)
        );
        let blown = Residuals {
            r_b: vec![20.0],
            r_c: vec![1.0],
        };
        assert_eq!(
            check_termination(&lp, &it, &blown, Some(&far), 0.5, 0.5, &cfg),
            Some(TerminationStatus::ResidualBlowup)
        );
        assert_eq!(
            check_termination(&lp, &it, &far, Some(&far), 0.5, 0.5, &cfg),
            None
        );
        let done = Iterate { k: 200, ..it };
        assert_eq!(
            check_termination(&lp, &done, &far, Some(&far), 0.5, 0.5, &cfg),
            Some(TerminationStatus::IterationLimit)
        );
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            sigma_max: 0.7,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn ratio_step_keeps_nonnegativity(
            pairs in prop::collection::vec((1e-3f64..1e3, -1e3f64..1e3), 1..30)
        ) {
            let (v, dv): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let a = ratio_step(&v, &dv);
            prop_assert!((0.0..=1.0).contains(&a));
            for i in 0..v.len() {
                prop_assert!(v[i] - a * dv[i] >= -1e-15 * v[i].max(1.0));
            }
            if a < 1.0 {
                let hit = (0..v.len()).any(|i| (v[i] - a * dv[i]).abs() <= 1e-12 * v[i].max(1.0));
                prop_assert!(hit);
            }
        }
    }
}
