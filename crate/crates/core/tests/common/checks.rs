#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use arclp::arc_search::{arc_alphas, component_alpha, predicted_mu};
use arclp::driver::{prepare, run_method, IterationEvent};
use arclp::mehrotra_search::line_update;
use arclp::model::DirectionOrder;
use arclp::{
    arc_search::arc_update, duality_measure, residuals, Direction, Iterate, SearchStrategy,
    SolverConfig,
};
use arclp::{ArcSearch, MehrotraSearch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// One `(v, dv, ddv)` triple from the given sign pattern: 1 `dv=0`,
/// 2 `ddv=0`, 3 `(+,+)`, 4 `(+,−)`, 5 `(−,−)`, 6 `(−,+)`, 7 both zero.
pub fn random_triple(rng: &mut ChaCha8Rng, case: usize) -> (f64, f64, f64) {
    let v = log_uniform(rng, 1e-3, 1e3);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (p, q) = (log_uniform(rng, 1e-3, 1e3), log_uniform(rng, 1e-3, 1e3));
    let (dv, ddv) = match case {
        1 => (0.0, sign * q),
        2 => (sign * p, 0.0),
        3 => (p, q),
        4 => (p, -q),
        5 => (-p, -q),
        6 => (-p, q),
        _ => (0.0, 0.0),
    };
    (v, dv, ddv)
}

#[derive(Debug, Default)]
pub struct AlphaReport {
    pub triples: usize,
    pub per_case: [usize; 7],
    /// Triples where the arc went negative somewhere on `[0, α]`.
    pub unsound: usize,
    /// Triples with `α < π/2` that stay nonnegative past `α + 10⁻⁴`.
    pub loose: usize,
    pub errors: usize,
    pub max_gap: f64,
}

impl AlphaReport {
    pub fn ok(&self) -> bool {
        self.unsound == 0
            && self.loose == 0
            && self.errors == 0
            && self.per_case.iter().all(|&c| c > 0)
    }
}

/// Closed-form step angles against a grid check and a scan-and-bisect
/// oracle for the first sign change.
pub fn alpha_soundness(count: usize, seed: u64) -> AlphaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = AlphaReport {
        triples: count,
        ..Default::default()
    };
    for t in 0..count {
        let case = t % 7 + 1;
        let (v, dv, ddv) = random_triple(&mut rng, case);
        r.per_case[case - 1] += 1;
        let Ok(alpha) = component_alpha(v, dv, ddv) else {
            r.errors += 1;
            continue;
        };
        let scale = 1e-12 * (v.abs() + dv.abs() + ddv.abs());
        if !(0.0..=FRAC_PI_2).contains(&alpha)
            || (0..=1000).any(|i| arc_value(v, dv, ddv, alpha * i as f64 / 1000.0) < -scale)
        {
            r.unsound += 1;
            continue;
        }
        if alpha < FRAC_PI_2 {
            match first_violation(v, dv, ddv) {
                Some(root) => {
                    let gap = (alpha - root).abs();
                    r.max_gap = r.max_gap.max(gap);
                    if gap > 1e-4 {
                        r.loose += 1;
                    }
                }
                None => {
                    let end = (alpha + 1e-4).min(FRAC_PI_2);
                    let fails = (1..=1000).any(|i| {
                        arc_value(v, dv, ddv, alpha + (end - alpha) * i as f64 / 1000.0) < 0.0
                    });
                    if !fails {
                        r.loose += 1;
                    }
                }
            }
        }
    }
    r
}

#[derive(Debug, Default)]
pub struct Worst {
    pub value: f64,
    pub checks: usize,
}

impl Worst {
    pub fn add(&mut self, v: f64) {
        self.checks += 1;
        if v.is_nan() || v > self.value {
            self.value = if v.is_nan() { f64::INFINITY } else { v };
        }
    }
}

/// Predicted versus recomputed duality measure after an equal-angle arc
/// step, relative to the recomputed value.
pub fn predicted_mu_random(count: usize, seed: u64) -> Worst {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst::default();
    while worst.checks < count {
        let m = rng.gen_range(1..=8);
        let n = rng.gen_range(m + 1..=16);
        let inst = random_instance(&mut rng, m, n);
        let sigma = rng.gen_range(1e-3..0.5);
        let (res, d1, d2) = kernel_directions(&inst.lp, &inst.it, sigma);
        let ax = arc_alphas(&inst.it.x, &d1.dx, &d2.dx).unwrap();
        let as_ = arc_alphas(&inst.it.s, &d1.ds, &d2.ds).unwrap();
        let alpha = ax.min(as_) * rng.gen_range(0.0..0.99);
        let next = arc_update(&inst.it, &d1, &d2, alpha, alpha).unwrap();
        let actual = duality_measure(&next);
        worst.add(rel_err(
            predicted_mu(&inst.it, &d1, &d2, &res, sigma, alpha),
            actual,
        ));
    }
    worst
}

/// Normal-equation directions against the dense block system.
pub fn dense_oracle(count: usize, seed: u64) -> Worst {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst::default();
    for _ in 0..count {
        let m = rng.gen_range(1..=10);
        let n = rng.gen_range(m + 1..=20);
        let inst = random_instance(&mut rng, m, n);
        let sigma = rng.gen_range(1e-3..0.5);
        let (_, d1, d2) = kernel_directions(&inst.lp, &inst.it, sigma);
        let ((x1, l1, s1), (x2, l2, s2)) = oracle_directions(&inst.lp, &inst.it, sigma);
        for (got, want) in [
            (&d1.dx, &x1),
            (&d1.dlambda, &l1),
            (&d1.ds, &s1),
            (&d2.dx, &x2),
            (&d2.dlambda, &l2),
            (&d2.ds, &s2),
        ] {
            worst.add(rel_vec_err(got, want));
        }
    }
    worst
}

/// Number of random inputs on which the quarter-arc update and the unit
/// line update differ in any bit.
pub fn endpoint_mismatches(count: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for _ in 0..count {
        let m = rng.gen_range(0..=6);
        let n = rng.gen_range(1..=12);
        let mut vec = |len: usize, lo: f64, hi: f64| -> Vec<f64> {
            (0..len).map(|_| rng.gen_range(lo..hi)).collect()
        };
        let d1 = Direction {
            dx: vec(n, -5.0, 5.0),
            dlambda: vec(m, -5.0, 5.0),
            ds: vec(n, -5.0, 5.0),
            order: DirectionOrder::First,
        };
        let d2 = Direction {
            dx: vec(n, -5.0, 5.0),
            dlambda: vec(m, -5.0, 5.0),
            ds: vec(n, -5.0, 5.0),
            order: DirectionOrder::Second,
        };
        let it = Iterate::new(vec(n, 10.5, 50.0), vec(m, -5.0, 5.0), vec(n, 10.5, 50.0));
        let arc = arc_update(&it, &d1, &d2, FRAC_PI_2, FRAC_PI_2).unwrap();
        let line = line_update(&it, &d1, &d2, 1.0, 1.0).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
        if bits(&arc.x) != bits(&line.x)
            || bits(&arc.lambda) != bits(&line.lambda)
            || bits(&arc.s) != bits(&line.s)
        {
            mismatches += 1;
        }
    }
    mismatches
}

/// Residual recursion `r⁺ = (1 − sin α)·r` for the arc step and
/// `r⁺ = (1 − α)·r` for the line step on random instances, scaled by
/// `1 + ‖r‖`.
pub fn residual_recursion_random(count: usize, seed: u64) -> Worst {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst::default();
    for _ in 0..count {
        let m = rng.gen_range(1..=8);
        let n = rng.gen_range(m + 1..=16);
        let inst = random_instance(&mut rng, m, n);
        let (res, d1, d2) = kernel_directions(&inst.lp, &inst.it, rng.gen_range(1e-3..0.5));
        let strategies: [&dyn SearchStrategy; 2] = [&ArcSearch, &MehrotraSearch];
        for strategy in strategies {
            let (ax, as_) = strategy.step_lengths(&inst.it, &d1, &d2).unwrap();
            let (ax, as_) = (0.9 * ax, 0.9 * as_);
            let next = strategy.update(&inst.it, &d1, &d2, ax, as_).unwrap();
            let r = residuals(&inst.lp, &next).unwrap();
            worst.add(recursion_gap(
                &res.r_b,
                &r.r_b,
                strategy.residual_factor(ax),
            ));
            worst.add(recursion_gap(
                &res.r_c,
                &r.r_c,
                strategy.residual_factor(as_),
            ));
        }
    }
    worst
}

pub fn recursion_gap(prev: &[f64], next: &[f64], factor: f64) -> f64 {
    let diff: Vec<f64> = prev.iter().zip(next).map(|(p, q)| q - factor * p).collect();
    norm(&diff) / (1.0 + norm(prev))
}

#[derive(Debug, Default)]
pub struct TraceReport {
    /// Worst of the three complementarity identities, divided by `n·μ`.
    pub identities: Worst,
    /// Worst one-step residual recursion gap, over `1 + ‖r^k‖`.
    pub recursion: Worst,
    /// Worst product-form gap before the first column drop, over `1 + ‖r⁰‖`.
    pub product: Worst,
    /// Iterations whose iterate was not strictly positive.
    pub nonpositive: usize,
}

struct Snapshot {
    r_b: Vec<f64>,
    r_c: Vec<f64>,
    alpha_x: f64,
    alpha_s: f64,
    col_map: Vec<usize>,
    m: usize,
}

/// Solve `lp` with `strategy` and check the per-iteration identities,
/// residual recursion and product form along the way.
pub fn trace_solve(
    lp: &arclp::StandardFormLP,
    strategy: &dyn SearchStrategy,
    cfg: &SolverConfig,
) -> (arclp::SolveResult, TraceReport) {
    let prepared = prepare(lp, cfg).unwrap_or_else(|s| panic!("prepare settled: {:?}", s.status));
    let mut rep = TraceReport::default();
    let mut prev: Option<Snapshot> = None;
    let mut start: Option<(Vec<f64>, Vec<f64>)> = None;
    let (mut rho_b, mut rho_c) = (1.0, 1.0);
    let mut product_live = true;
    let mut observer = |e: &IterationEvent<'_>| {
        let (it, d1, d2) = (e.iterate, e.dir1, e.dir2);
        if !it.is_interior() {
            rep.nonpositive += 1;
        }
        let n = it.x.len() as f64;
        let mu = duality_measure(it);
        let scale = n * mu;
        let first = dot(&it.s, &d1.dx) + dot(&it.x, &d1.ds) - dot(&it.x, &it.s);
        let second = dot(&it.s, &d2.dx) + dot(&it.x, &d2.ds)
            - (e.sigma * mu * n - 2.0 * dot(&d1.dx, &d1.ds));
        let cross = dot(&d2.dx, &d2.ds);
        rep.identities
            .add(first.abs().max(second.abs()).max(cross.abs()) / scale);

        let same = prev
            .as_ref()
            .is_some_and(|p| p.col_map == e.col_map && p.m == e.lp.m());
        if let (true, Some(p)) = (same, prev.as_ref()) {
            rep.recursion.add(recursion_gap(
                &p.r_b,
                &e.residuals.r_b,
                strategy.residual_factor(p.alpha_x),
            ));
            rep.recursion.add(recursion_gap(
                &p.r_c,
                &e.residuals.r_c,
                strategy.residual_factor(p.alpha_s),
            ));
        }
        if prev.is_some() && !same {
            product_live = false;
        }
        if product_live {
            match &start {
                None => start = Some((e.residuals.r_b.clone(), e.residuals.r_c.clone())),
                Some((b0, c0)) => {
                    let p = prev.as_ref().unwrap();
                    rho_b *= strategy.residual_factor(p.alpha_x);
                    rho_c *= strategy.residual_factor(p.alpha_s);
                    rep.product.add(recursion_gap(b0, &e.residuals.r_b, rho_b));
                    rep.product.add(recursion_gap(c0, &e.residuals.r_c, rho_c));
                }
            }
        }
        prev = Some(Snapshot {
            r_b: e.residuals.r_b.clone(),
            r_c: e.residuals.r_c.clone(),
            alpha_x: e.alpha_x,
            alpha_s: e.alpha_s,
            col_map: e.col_map.to_vec(),
            m: e.lp.m(),
        });
    };
    let result = run_method(&prepared, strategy, cfg, Some(&mut observer));
    (result, rep)
}
