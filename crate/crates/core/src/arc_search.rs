//! Ellipsoidal arc step: `v(α) = v − v̇ sin α + v̈ (1 − cos α)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::ipm_kernel::{combine, KernelError};
use crate::model::{duality_measure, Direction, Iterate, Residuals};
use crate::strategy::SearchStrategy;
use crate::vecops::dot;

/// Largest `α ∈ [0, π/2]` keeping `v − dv sin α' + ddv (1 − cos α') ≥ 0`
/// for every `α' ∈ [0, α]`.
pub fn component_alpha(v: f64, dv: f64, ddv: f64) -> Result<f64, KernelError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(KernelError::Domain(format!(
            "component_alpha needs v > 0, got {v}"
        )));
    }
    if !dv.is_finite() || !ddv.is_finite() {
        return Err(KernelError::Domain(format!(
            "non-finite direction ({dv}, {ddv})"
        )));
    }
    let r = dv.hypot(ddv);
    // asin(t / r) through atan2 of both legs, accurate when |t| ≈ r
    let asin = |t: f64| {
        let t = t.clamp(-r, r);
        t.atan2(((r - t) * (r + t)).max(0.0).sqrt())
    };
    let t = v + ddv;
    let alpha = if dv == 0.0 && ddv == 0.0 {
        FRAC_PI_2
    } else if dv == 0.0 {
        if t >= 0.0 {
            FRAC_PI_2
        } else {
            (t / ddv).clamp(-1.0, 1.0).acos()
        }
    } else if ddv == 0.0 {
        if dv <= v {
            FRAC_PI_2
        } else {
            (v / dv).clamp(-1.0, 1.0).asin()
        }
    } else if dv > 0.0 && ddv > 0.0 {
        if t >= r {
            FRAC_PI_2
        } else {
            asin(t) - ddv.atan2(dv)
        }
    } else if dv > 0.0 {
        if t >= r {
            FRAC_PI_2
        } else {
            asin(t) + (-ddv).atan2(dv)
        }
    } else if ddv < 0.0 {
        if t >= 0.0 {
            FRAC_PI_2
        } else {
            PI - asin(-t) - (-ddv).atan2(-dv)
        }
    } else {
        FRAC_PI_2
    };
    Ok(alpha.clamp(0.0, FRAC_PI_2))
}

/// Minimum of [`component_alpha`] over all components.
pub fn arc_alphas(v: &[f64], dv: &[f64], ddv: &[f64]) -> Result<f64, KernelError> {
    if v.len() != dv.len() || v.len() != ddv.len() {
        return Err(KernelError::Domain(format!(
            "length mismatch: v {}, dv {}, ddv {}",
            v.len(),
            dv.len(),
            ddv.len()
        )));
    }
    let mut alpha = FRAC_PI_2;
    for i in 0..v.len() {
        alpha = alpha.min(component_alpha(v[i], dv[i], ddv[i])?);
    }
    Ok(alpha)
}

/// `(sin α, 1 − cos α)`, exactly `(1, 1)` at the end of the quarter arc.
pub fn arc_coefficients(alpha: f64) -> (f64, f64) {
    if alpha >= FRAC_PI_2 {
        return (1.0, 1.0);
    }
    let h = (0.5 * alpha).sin();
    (alpha.sin(), 2.0 * h * h)
}

fn check_angle(alpha: f64) -> Result<(), KernelError> {
    if (0.0..=FRAC_PI_2).contains(&alpha) {
        Ok(())
    } else {
        Err(KernelError::Domain(format!(
            "arc angle {alpha} outside [0, π/2]"
        )))
    }
}

pub fn arc_update(
    it: &Iterate,
    dir1: &Direction,
    dir2: &Direction,
    alpha_x: f64,
    alpha_s: f64,
) -> Result<Iterate, KernelError> {
    check_angle(alpha_x)?;
    check_angle(alpha_s)?;
    combine(
        it,
        dir1,
        dir2,
        arc_coefficients(alpha_x),
        arc_coefficients(alpha_s),
    )
}

/// Duality measure after an arc step with equal angles `α`, predicted from
/// the current iterate:
/// `μ[1 − sin α + σ(1 − cos α)] − (1/n)[(ẍᵀr_c − λ̈ᵀr_b) sin α (1 − cos α) + (ẋᵀr_c − λ̇ᵀr_b)(1 − cos α)²]`.
pub fn predicted_mu(
    it: &Iterate,
    dir1: &Direction,
    dir2: &Direction,
    res: &Residuals,
    sigma: f64,
    alpha: f64,
) -> f64 {
    let n = it.x.len();
    if n == 0 {
        return 0.0;
    }
    let mu = duality_measure(it);
    let (sn, omc) = arc_coefficients(alpha);
    let second = dot(&dir2.dx, &res.r_c) - dot(&dir2.dlambda, &res.r_b);
    let first = dot(&dir1.dx, &res.r_c) - dot(&dir1.dlambda, &res.r_b);
    mu * (1.0 - sn + sigma * omc) - (second * sn * omc + first * omc * omc) / n as f64
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ArcSearch;

impl SearchStrategy for ArcSearch {
    fn name(&self) -> &'static str {
        "arc"
    }

    fn step_lengths(
        &self,
        it: &Iterate,
        dir1: &Direction,
        dir2: &Direction,
    ) -> Result<(f64, f64), KernelError> {
        Ok((
            arc_alphas(&it.x, &dir1.dx, &dir2.dx)?,
            arc_alphas(&it.s, &dir1.ds, &dir2.ds)?,
        ))
    }

    fn update(
        &self,
        it: &Iterate,
        dir1: &Direction,
        dir2: &Direction,
        alpha_x: f64,
        alpha_s: f64,
    ) -> Result<Iterate, KernelError> {
        arc_update(it, dir1, dir2, alpha_x, alpha_s)
    }

    fn residual_factor(&self, alpha: f64) -> f64 {
        1.0 - arc_coefficients(alpha).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DirectionOrder;
    use std::f64::consts::FRAC_PI_3;
    use std::f64::consts::FRAC_PI_6;

    fn dir(dx: Vec<f64>, dl: Vec<f64>, ds: Vec<f64>, order: DirectionOrder) -> Direction {
        Direction {
            dx,
            dlambda: dl,
            ds,
            order,
        }
    }

    #[test]
    fn component_alpha_examples() {
        assert_eq!(component_alpha(0.3, -1.0, 1.0).unwrap(), FRAC_PI_2);
        assert!((component_alpha(1.0, 2.0, 0.0).unwrap() - FRAC_PI_6).abs() < 1e-15);
        assert!((component_alpha(1.0, 0.0, -2.0).unwrap() - FRAC_PI_3).abs() < 1e-15);
        assert_eq!(component_alpha(1.0, 0.0, 0.0).unwrap(), FRAC_PI_2);
        assert!(component_alpha(0.0, 1.0, 1.0).is_err());
        assert!(component_alpha(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn arc_alphas_is_min() {
        let a = arc_alphas(&[1.0, 1.0], &[2.0, 0.0], &[0.0, -2.0]).unwrap();
        assert!((a - FRAC_PI_6).abs() < 1e-15);
        assert_eq!(
            arc_alphas(&[1.0, 2.0], &[-1.0, 0.0], &[1.0, 0.0]).unwrap(),
            FRAC_PI_2
        );
        assert_eq!(
            arc_alphas(&[1.0], &[2.0], &[0.0]).unwrap(),
            component_alpha(1.0, 2.0, 0.0).unwrap()
        );
    }

    #[test]
    fn update_endpoints() {
        let it = Iterate::new(vec![3.0, 2.0], vec![0.5], vec![1.0, 4.0]);
        let d1 = dir(
            vec![1.0, -1.0],
            vec![0.25],
            vec![0.5, 1.0],
            DirectionOrder::First,
        );
        let d2 = dir(
            vec![0.1, 0.2],
            vec![-0.1],
            vec![0.3, -0.2],
            DirectionOrder::Second,
        );
        assert_eq!(arc_update(&it, &d1, &d2, 0.0, 0.0).unwrap(), it);
        let full = arc_update(&it, &d1, &d2, FRAC_PI_2, FRAC_PI_2).unwrap();
        for i in 0..2 {
            assert_eq!(full.x[i], it.x[i] - d1.dx[i] + d2.dx[i]);
            assert_eq!(full.s[i], it.s[i] - d1.ds[i] + d2.ds[i]);
        }
        assert!(arc_update(&it, &d1, &d2, 2.0, 0.0).is_err());
    }

    #[test]
    fn lost_positivity_is_reported() {
        let it = Iterate::new(vec![1.0], vec![], vec![1.0]);
        let d1 = dir(vec![2.0], vec![], vec![0.0], DirectionOrder::First);
        let d2 = dir(vec![0.0], vec![], vec![0.0], DirectionOrder::Second);
        assert!(matches!(
            arc_update(&it, &d1, &d2, FRAC_PI_2, FRAC_PI_2),
            Err(KernelError::LostPositivity { vector: "x", .. })
        ));
    }

    #[test]
    fn predicted_mu_special_cases() {
        let it = Iterate::new(vec![2.0, 1.0], vec![0.0], vec![1.0, 3.0]);
        let d1 = dir(
            vec![1.0, 0.5],
            vec![0.2],
            vec![0.3, 0.4],
            DirectionOrder::First,
        );
        let d2 = dir(
            vec![0.1, -0.1],
            vec![0.05],
            vec![-0.2, 0.1],
            DirectionOrder::Second,
        );
        let res = Residuals {
            r_b: vec![0.7],
            r_c: vec![0.1, -0.4],
        };
        assert_eq!(
            predicted_mu(&it, &d1, &d2, &res, 0.2, 0.0),
            duality_measure(&it)
        );
        let feasible = Residuals {
            r_b: vec![0.0],
            r_c: vec![0.0, 0.0],
        };
        let mu = duality_measure(&it);
        assert!((predicted_mu(&it, &d1, &d2, &feasible, 0.2, FRAC_PI_2) - 0.2 * mu).abs() < 1e-15);
    }

    #[test]
    fn trig_inequality_chain() {
        for i in 0..=1000 {
            let a = FRAC_PI_2 * i as f64 / 1000.0;
            let (sn, omc) = arc_coefficients(a);
            let cos = 1.0 - omc;
            assert!(1.0 - cos * cos >= omc - 1e-15);
            assert!(omc >= 0.5 * sn * sn - 1e-15);
        }
    }
}
