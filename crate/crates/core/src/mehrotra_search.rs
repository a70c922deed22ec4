//! Mehrotra's line step `v(α) = v − α(v̇ − v̈)`.

use crate::ipm_kernel::{combine, ratio_step, KernelError};
use crate::model::{Direction, Iterate};
use crate::strategy::SearchStrategy;

/// `ratio_step(v, dv − ddv)`.
pub fn line_alphas(v: &[f64], dv: &[f64], ddv: &[f64]) -> f64 {
    let combined: Vec<f64> = dv.iter().zip(ddv).map(|(d, dd)| d - dd).collect();
    ratio_step(v, &combined)
}

fn check_step(alpha: f64) -> Result<(), KernelError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(KernelError::Domain(format!(
            "line step {alpha} outside [0, 1]"
        )))
    }
}

pub fn line_update(
    it: &Iterate,
    dir1: &Direction,
    dir2: &Direction,
    alpha_x: f64,
    alpha_s: f64,
) -> Result<Iterate, KernelError> {
    check_step(alpha_x)?;
    check_step(alpha_s)?;
    combine(it, dir1, dir2, (alpha_x, alpha_x), (alpha_s, alpha_s))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MehrotraSearch;

impl SearchStrategy for MehrotraSearch {
    fn name(&self) -> &'static str {
        "mehrotra"
    }

    fn step_lengths(
        &self,
        it: &Iterate,
        dir1: &Direction,
        dir2: &Direction,
    ) -> Result<(f64, f64), KernelError> {
        Ok((
            line_alphas(&it.x, &dir1.dx, &dir2.dx),
            line_alphas(&it.s, &dir1.ds, &dir2.ds),
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
        line_update(it, dir1, dir2, alpha_x, alpha_s)
    }

    fn residual_factor(&self, alpha: f64) -> f64 {
        1.0 - alpha
    }
}
