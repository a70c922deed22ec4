use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use arclp::driver::{central_path_reference, prepare, run_method, IterationEvent};
use arclp::{ArcSearch, RuleSet, SolverConfig, StandardFormLP};
use serde::Serialize;

use crate::report::Format;

/// `min x₁ s.t. x₁ + x₂ = 5, x ≥ 0`.
pub fn example_problem() -> StandardFormLP {
    StandardFormLP::from_dense(&[vec![1.0, 1.0]], &[5.0], &[1.0, 0.0])
        .expect("fixed example is well formed")
        .with_names(vec!["c1".into()], vec!["x1".into(), "x2".into()])
        .expect("names match dimensions")
}

/// One plotted point. `series` is `central_path` (param = μ), `iterate`
/// (param = iteration) or `ellipse` (param = α, step = iteration the arc
/// starts from).
#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub series: &'static str,
    pub step: usize,
    pub param: f64,
    pub x1: f64,
    pub x2: f64,
}

pub const ELLIPSE_SAMPLES: usize = 32;

fn mu_grid() -> Vec<f64> {
    (-40..=8)
        .rev()
        .map(|k| 10f64.powf(k as f64 / 4.0))
        .collect()
}

pub fn collect(cfg: &SolverConfig) -> Vec<PathPoint> {
    let mut points = Vec::new();
    for (i, mu) in mu_grid().into_iter().enumerate() {
        let (x, _, _) = central_path_reference(mu).expect("grid values are positive");
        points.push(PathPoint {
            series: "central_path",
            step: i,
            param: mu,
            x1: x[0],
            x2: x[1],
        });
    }

    let cfg = SolverConfig {
        presolve: RuleSet::none(),
        ..cfg.clone()
    };
    let lp = example_problem();
    let Ok(prepared) = prepare(&lp, &cfg) else {
        return points;
    };
    let mut arcs = Vec::new();
    let mut iterates = Vec::new();
    let mut observer = |e: &IterationEvent<'_>| {
        let expand = |v: &[f64]| {
            let mut full = [0.0; 2];
            for (&j, &vj) in e.col_map.iter().zip(v) {
                full[j] = vj;
            }
            full
        };
        let (x, dx, ddx) = (expand(&e.iterate.x), expand(&e.dir1.dx), expand(&e.dir2.dx));
        iterates.push(x);
        for s in 0..=ELLIPSE_SAMPLES {
            let alpha = FRAC_PI_2 * s as f64 / ELLIPSE_SAMPLES as f64;
            let (p, q) = (alpha.sin(), 1.0 - alpha.cos());
            let at = |i: usize| x[i] - dx[i] * p + ddx[i] * q;
            arcs.push(PathPoint {
                series: "ellipse",
                step: iterates.len() - 1,
                param: alpha,
                x1: at(0),
                x2: at(1),
            });
        }
    };
    let result = run_method(&prepared, &ArcSearch, &cfg, Some(&mut observer));
    iterates.push([result.x_full[0], result.x_full[1]]);
    for (k, x) in iterates.into_iter().enumerate() {
        points.push(PathPoint {
            series: "iterate",
            step: k,
            param: k as f64,
            x1: x[0],
            x2: x[1],
        });
    }
    points.extend(arcs);
    points
}

pub fn write_points(out: &mut dyn Write, points: &[PathPoint], format: Format) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, points)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for p in points {
                w.serialize(p)?;
            }
            w.flush()
        }
        Format::Text => {
            writeln!(
                out,
                "{:<12} {:>4} {:>12} {:>14} {:>14}",
                "series", "step", "param", "x1", "x2"
            )?;
            for p in points {
                writeln!(
                    out,
                    "{:<12} {:>4} {:>12.5e} {:>14.7e} {:>14.7e}",
                    p.series, p.step, p.param, p.x1, p.x2
                )?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_properties() {
        let points = collect(&SolverConfig::default());
        let path: Vec<&PathPoint> = points
            .iter()
            .filter(|p| p.series == "central_path")
            .collect();
        for p in &path {
            assert!((p.x1 + p.x2 - 5.0).abs() <= 1e-10);
        }
        let last = path.last().unwrap();
        assert!(last.x1.hypot(last.x2 - 5.0) <= 1e-6);

        let iterates: Vec<&PathPoint> = points.iter().filter(|p| p.series == "iterate").collect();
        assert!(iterates.len() >= 2);
        for p in points
            .iter()
            .filter(|p| p.series == "ellipse" && p.param == 0.0)
        {
            let it = iterates[p.step];
            assert_eq!((p.x1, p.x2), (it.x1, it.x2));
        }
        let end = iterates.last().unwrap();
        assert!(end.x1.hypot(end.x2 - 5.0) <= 1e-4);
    }
}
