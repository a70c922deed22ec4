use std::io::{self, Write};

use arclp::driver::ProblemDims;
use arclp::SolveResult;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// One problem's line of the comparison table. Empty cells mean the method
/// was not run or the problem never reached the solver.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Row {
    pub name: String,
    pub m0: Option<usize>,
    pub n0: Option<usize>,
    pub m1: Option<usize>,
    pub n1: Option<usize>,
    pub arc_iter: Option<usize>,
    pub arc_obj: Option<f64>,
    pub arc_infeas: Option<f64>,
    pub meh_iter: Option<usize>,
    pub meh_obj: Option<f64>,
    pub meh_infeas: Option<f64>,
    pub arc_status: String,
    pub meh_status: String,
}

impl Row {
    pub fn failed(name: String, status: &str) -> Self {
        Row {
            name,
            arc_status: status.to_string(),
            meh_status: status.to_string(),
            ..Default::default()
        }
    }

    pub fn from_results(
        name: String,
        arc: Option<&SolveResult>,
        meh: Option<&SolveResult>,
    ) -> Self {
        let dims: Option<ProblemDims> = arc.or(meh).map(|r| r.dims);
        let status = |r: Option<&SolveResult>| r.map_or(String::new(), |r| r.status.to_string());
        Row {
            name,
            m0: dims.map(|d| d.m0),
            n0: dims.map(|d| d.n0),
            m1: dims.map(|d| d.m1),
            n1: dims.map(|d| d.n1),
            arc_iter: arc.map(|r| r.iterations),
            arc_obj: arc.map(|r| r.objective),
            arc_infeas: arc.map(|r| r.infeasibility),
            meh_iter: meh.map(|r| r.iterations),
            meh_obj: meh.map(|r| r.objective),
            meh_infeas: meh.map(|r| r.infeasibility),
            arc_status: status(arc),
            meh_status: status(meh),
        }
    }
}

fn sci(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$e}"))
}

fn int(v: Option<usize>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn write_rows(out: &mut dyn Write, rows: &[Row], format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            writeln!(out)
        }
        Format::Text => write_table(out, rows),
    }
}

fn write_table(out: &mut dyn Write, rows: &[Row]) -> io::Result<()> {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(7);
    writeln!(
        out,
        "{:width$} {:>5} {:>5} {:>5} {:>5} | {:>4} {:>11} {:>8} | {:>4} {:>11} {:>8} | status",
        "problem",
        "m0",
        "n0",
        "m1",
        "n1",
        "arc",
        "objective",
        "infeas",
        "meh",
        "objective",
        "infeas"
    )?;
    for r in rows {
        let status = if r.arc_status == r.meh_status || r.meh_status.is_empty() {
            r.arc_status.clone()
        } else if r.arc_status.is_empty() {
            r.meh_status.clone()
        } else {
            format!("{}/{}", r.arc_status, r.meh_status)
        };
        writeln!(
            out,
            "{:width$} {:>5} {:>5} {:>5} {:>5} | {:>4} {:>11} {:>8} | {:>4} {:>11} {:>8} | {}",
            r.name,
            int(r.m0),
            int(r.n0),
            int(r.m1),
            int(r.n1),
            int(r.arc_iter),
            sci(r.arc_obj, 4),
            sci(r.arc_infeas, 1),
            int(r.meh_iter),
            sci(r.meh_obj, 4),
            sci(r.meh_infeas, 1),
            status
        )?;
    }
    Ok(())
}

/// Key-value summary of single solves.
pub fn write_solve_text(
    out: &mut dyn Write,
    name: &str,
    results: &[&SolveResult],
) -> io::Result<()> {
    for r in results {
        writeln!(out, "problem:       {name}")?;
        writeln!(out, "method:        {}", r.method)?;
        writeln!(
            out,
            "size:          {}x{} -> {}x{}",
            r.dims.m0, r.dims.n0, r.dims.m1, r.dims.n1
        )?;
        writeln!(out, "status:        {}", r.status)?;
        writeln!(out, "iterations:    {}", r.iterations)?;
        writeln!(out, "objective:     {:.4e}", r.objective)?;
        writeln!(out, "infeasibility: {:.1e}", r.infeasibility)?;
    }
    Ok(())
}
