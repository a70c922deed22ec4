#![allow(dead_code)]

pub mod checks;

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use arclp::ipm_kernel::{affine_direction, corrector_direction};
use arclp::normal_eq::{assemble_normal, factorize, PivotPolicy};
use arclp::{
    parse_mps_file, residuals, to_standard_form, CscMatrix, Direction, Iterate, Residuals,
    StandardFormLP,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Reference results for the bundled problems: name, objective, arc and
/// Mehrotra iteration counts.
pub const REFERENCE: [(&str, f64, usize, usize); 7] = [
    ("afiro", -464.7531, 9, 9),
    ("sc50b", -70.0000, 8, 8),
    ("sc50a", -64.5751, 10, 9),
    ("blend", -30.8121, 12, 14),
    ("share2b", -415.73, 13, 15),
    ("adlittle", 2.2549e5, 15, 15),
    ("scagr7", -2.3314e6, 15, 17),
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.mps"))
}

pub fn fixture(name: &str) -> StandardFormLP {
    let raw = parse_mps_file(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    to_standard_form(&raw).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `v − dv sin α + ddv (1 − cos α)` evaluated directly.
pub fn arc_value(v: f64, dv: f64, ddv: f64, alpha: f64) -> f64 {
    v - dv * alpha.sin() + ddv * (1.0 - alpha.cos())
}

/// First angle in `(0, π/2]` where the arc component turns negative, located
/// by a fine scan followed by bisection. `None` if no sample is negative.
pub fn first_violation(v: f64, dv: f64, ddv: f64) -> Option<f64> {
    const SCAN: usize = 20_000;
    let h = FRAC_PI_2 / SCAN as f64;
    let mut lo = 0.0;
    for i in 1..=SCAN {
        let a = if i == SCAN { FRAC_PI_2 } else { i as f64 * h };
        if arc_value(v, dv, ddv, a) < 0.0 {
            let mut hi = a;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if arc_value(v, dv, ddv, mid) < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        lo = a;
    }
    None
}

/// Random dense LP data with full row rank (with probability one) and a
/// strictly positive, infeasible iterate.
pub struct RandomInstance {
    pub lp: StandardFormLP,
    pub it: Iterate,
}

pub fn random_instance(rng: &mut ChaCha8Rng, m: usize, n: usize) -> RandomInstance {
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let lp = StandardFormLP::from_dense(&a, &b, &c).unwrap();
    let x = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
    let lambda = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
    RandomInstance {
        lp,
        it: Iterate::new(x, lambda, s),
    }
}

/// Both directions at `it` through the normal-equation kernel.
pub fn kernel_directions(
    lp: &StandardFormLP,
    it: &Iterate,
    sigma: f64,
) -> (Residuals, Direction, Direction) {
    let res = residuals(lp, it).unwrap();
    let normal = assemble_normal(lp.a(), &it.x, &it.s).unwrap();
    let factor = factorize(&normal, PivotPolicy::Strict).unwrap();
    let mu = arclp::duality_measure(it);
    let d1 = affine_direction(lp, it, &res, &factor).unwrap();
    let d2 = corrector_direction(lp, it, &d1, sigma, mu, &factor).unwrap();
    (res, d1, d2)
}

fn dense(a: &CscMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        m[(i, j)] += v;
    }
    m
}

/// The full `(2n+m)` Newton-type block system
/// `[A 0 0; 0 Aᵀ I; S 0 X] (dx, dλ, ds) = rhs`, solved densely by LU with
/// partial pivoting. Returns `(dx, dλ, ds)`.
pub fn block_solve(
    lp: &StandardFormLP,
    it: &Iterate,
    rhs: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (m, n) = (lp.m(), lp.n());
    let a = dense(lp.a());
    let size = 2 * n + m;
    let mut k = DMatrix::zeros(size, size);
    for i in 0..m {
        for j in 0..n {
            k[(i, j)] = a[(i, j)];
            k[(m + j, n + i)] = a[(i, j)];
        }
    }
    for j in 0..n {
        k[(m + j, n + m + j)] = 1.0;
        k[(m + n + j, j)] = it.s[j];
        k[(m + n + j, n + m + j)] = it.x[j];
    }
    let sol = k
        .lu()
        .solve(&DVector::from_column_slice(rhs))
        .expect("block system is nonsingular");
    let sol = sol.as_slice();
    (
        sol[..n].to_vec(),
        sol[n..n + m].to_vec(),
        sol[n + m..].to_vec(),
    )
}

/// Affine and corrector directions from the block system.
pub fn oracle_directions(
    lp: &StandardFormLP,
    it: &Iterate,
    sigma: f64,
) -> (
    (Vec<f64>, Vec<f64>, Vec<f64>),
    (Vec<f64>, Vec<f64>, Vec<f64>),
) {
    let (m, n) = (lp.m(), lp.n());
    let res = residuals(lp, it).unwrap();
    let mu = dot(&it.x, &it.s) / n as f64;
    let mut rhs1 = res.r_b.clone();
    rhs1.extend_from_slice(&res.r_c);
    rhs1.extend(it.x.iter().zip(&it.s).map(|(x, s)| x * s));
    let first = block_solve(lp, it, &rhs1);
    let mut rhs2 = vec![0.0; m + n];
    rhs2.extend((0..n).map(|i| sigma * mu - 2.0 * first.0[i] * first.2[i]));
    let second = block_solve(lp, it, &rhs2);
    (first, second)
}

/// `‖got − want‖ / ‖want‖`.
pub fn rel_vec_err(got: &[f64], want: &[f64]) -> f64 {
    let diff: Vec<f64> = got.iter().zip(want).map(|(g, w)| g - w).collect();
    norm(&diff) / norm(want).max(f64::MIN_POSITIVE)
}
