//! # MPS input
//!
//! Reads fixed or free format MPS files into a [`RawLP`] and converts the
//! row-typed form into a standard-form LP by adding one slack column per
//! inequality row.
//!
//! Only the nonnegative-variable subset of the format is accepted: a
//! `RANGES` section, or any bound other than `LO 0` / `PL`, is rejected.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::model::{ModelError, StandardFormLP};
use crate::sparse::CscMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MpsError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unsupported MPS feature: {feature}")]
    Unsupported { line: usize, feature: String },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

impl MpsError {
    fn parse(line: usize, msg: impl Into<String>) -> Self {
        MpsError::Parse {
            line,
            msg: msg.into(),
        }
    }

    fn unsupported(line: usize, feature: impl Into<String>) -> Self {
        MpsError::Unsupported {
            line,
            feature: feature.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    /// `=`
    E,
    /// `≤`
    L,
    /// `≥`
    G,
    /// free row; the first one is the objective
    N,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub name: String,
    pub sense: RowSense,
}

/// An LP as written in an MPS file, before standard-form conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLP {
    pub name: String,
    /// All declared rows, including free rows.
    pub rows: Vec<RawRow>,
    /// Index into `rows` of the objective row.
    pub objective_row: usize,
    pub columns: Vec<String>,
    /// `(column, row, value)` with duplicates already summed.
    pub entries: Vec<(usize, usize, f64)>,
    /// Right-hand side per row (zero where not given).
    pub rhs: Vec<f64>,
}

impl RawLP {
    pub fn objective_name(&self) -> &str {
        &self.rows[self.objective_row].name
    }

    /// Number of non-free rows.
    pub fn constraint_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.sense != RowSense::N).count()
    }

    pub fn inequality_rows(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| matches!(r.sense, RowSense::L | RowSense::G))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Rows,
    Columns,
    Rhs,
    Bounds,
    ObjSense,
}

/// Possible field splits of a data line. Whitespace splitting covers free
/// format and every fixed-format file whose names contain no blanks; the
/// fixed MPS column layout is offered as a second reading.
fn field_candidates<'a>(line: &'a str, expected: &[usize]) -> Vec<Vec<&'a str>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    const SPANS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];
    let fixed: Vec<&str> = SPANS
        .iter()
        .filter_map(|&(lo, hi)| line.get(lo.min(line.len())..hi.min(line.len())))
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .collect();
    let mut out = Vec::new();
    if expected.contains(&tokens.len()) {
        out.push(tokens.clone());
    }
    if expected.contains(&fixed.len()) && fixed != tokens {
        out.push(fixed);
    }
    if out.is_empty() {
        out.push(tokens);
    }
    out
}

fn fields<'a>(line: &'a str, expected: &[usize]) -> Vec<&'a str> {
    field_candidates(line, expected).swap_remove(0)
}

/// First reading of `line` that `interpret` accepts, or the error of the first.
fn first_reading<'a, T>(
    line: &'a str,
    expected: &[usize],
    mut interpret: impl FnMut(&[&'a str]) -> Result<T, MpsError>,
) -> Result<T, MpsError> {
    let mut first_err = None;
    for f in field_candidates(line, expected) {
        match interpret(&f) {
            Ok(v) => return Ok(v),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.expect("at least one candidate"))
}

fn parse_value(tok: &str, line: usize) -> Result<f64, MpsError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| MpsError::parse(line, format!("invalid number '{tok}'")))?;
    if !v.is_finite() {
        return Err(MpsError::parse(line, format!("non-finite number '{tok}'")));
    }
    Ok(v)
}

pub fn parse_mps(text: &str) -> Result<RawLP, MpsError> {
    let mut name = String::new();
    let mut rows: Vec<RawRow> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut objective_row: Option<usize> = None;
    let mut columns: Vec<String> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut entry_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs_entries: Vec<(usize, f64)> = Vec::new();
    let mut section: Option<Section> = None;
    let mut ended = false;

    let lookup_row = |row_index: &HashMap<String, usize>, name: &str, line: usize| {
        row_index
            .get(name)
            .copied()
            .ok_or_else(|| MpsError::parse(line, format!("unknown row '{name}'")))
    };

    for (lineno, raw_line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw_line.trim_end();
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        if ended {
            return Err(MpsError::parse(line_no, "content after ENDATA"));
        }

        if !line.starts_with(' ') && !line.starts_with('\t') {
            let mut toks = line.split_whitespace();
            let head = toks.next().unwrap_or_default().to_ascii_uppercase();
            section = match head.as_str() {
                "NAME" => {
                    name = toks.collect::<Vec<_>>().join(" ");
                    None
                }
                "ROWS" => Some(Section::Rows),
                "COLUMNS" => Some(Section::Columns),
                "RHS" => Some(Section::Rhs),
                "BOUNDS" => Some(Section::Bounds),
                "RANGES" => return Err(MpsError::unsupported(line_no, "RANGES section")),
                "OBJSENSE" => match toks.next().map(str::to_ascii_uppercase).as_deref() {
                    Some("MAX") | Some("MAXIMIZE") => {
                        return Err(MpsError::unsupported(line_no, "maximization"))
                    }
                    Some(_) => None,
                    None => Some(Section::ObjSense),
                },
                "ENDATA" => {
                    ended = true;
                    None
                }
                other => {
                    return Err(MpsError::parse(
                        line_no,
                        format!("unknown section '{other}'"),
                    ))
                }
            };
            continue;
        }

        let Some(sec) = section else {
            return Err(MpsError::parse(line_no, "data line outside of a section"));
        };
        match sec {
            Section::ObjSense => {
                let t = line.trim().to_ascii_uppercase();
                if t.starts_with("MAX") {
                    return Err(MpsError::unsupported(line_no, "maximization"));
                }
            }
            Section::Rows => {
                let f = fields(line, &[2]);
                if f.len() != 2 {
                    return Err(MpsError::parse(
                        line_no,
                        "ROWS entry needs a type and a name",
                    ));
                }
                let sense = match f[0].to_ascii_uppercase().as_str() {
                    "E" => RowSense::E,
                    "L" => RowSense::L,
                    "G" => RowSense::G,
                    "N" => RowSense::N,
                    other => {
                        return Err(MpsError::parse(
                            line_no,
                            format!("unknown row type '{other}'"),
                        ))
                    }
                };
                if row_index.contains_key(f[1]) {
                    return Err(MpsError::parse(
                        line_no,
                        format!("duplicate row '{}'", f[1]),
                    ));
                }
                if sense == RowSense::N && objective_row.is_none() {
                    objective_row = Some(rows.len());
                }
                row_index.insert(f[1].to_string(), rows.len());
                rows.push(RawRow {
                    name: f[1].to_string(),
                    sense,
                });
            }
            Section::Columns => {
                if line.contains("'MARKER'") {
                    return Err(MpsError::unsupported(line_no, "integer markers"));
                }
                let (col_name, pairs) = first_reading(line, &[3, 5], |f| {
                    if f.len() != 3 && f.len() != 5 {
                        return Err(MpsError::parse(
                            line_no,
                            "COLUMNS entry needs 3 or 5 fields",
                        ));
                    }
                    let mut pairs = Vec::new();
                    for pair in f[1..].chunks(2) {
                        pairs.push((
                            lookup_row(&row_index, pair[0], line_no)?,
                            parse_value(pair[1], line_no)?,
                        ));
                    }
                    Ok((f[0], pairs))
                })?;
                let col = match col_index.get(col_name) {
                    Some(&c) => c,
                    None => {
                        col_index.insert(col_name.to_string(), columns.len());
                        columns.push(col_name.to_string());
                        columns.len() - 1
                    }
                };
                for (row, v) in pairs {
                    match entry_index.get(&(col, row)) {
                        Some(&p) => entries[p].2 += v,
                        None => {
                            entry_index.insert((col, row), entries.len());
                            entries.push((col, row, v));
                        }
                    }
                }
            }
            Section::Rhs => {
                let pairs = first_reading(line, &[2, 3, 4, 5], |f| {
                    // an odd field count carries a set name in front
                    let f = match f.len() {
                        2 | 4 => f,
                        3 | 5 => &f[1..],
                        _ => return Err(MpsError::parse(line_no, "malformed RHS entry")),
                    };
                    f.chunks(2)
                        .map(|pair| {
                            Ok((
                                lookup_row(&row_index, pair[0], line_no)?,
                                parse_value(pair[1], line_no)?,
                            ))
                        })
                        .collect::<Result<Vec<_>, MpsError>>()
                })?;
                rhs_entries.extend(pairs);
            }
            Section::Bounds => {
                let f = fields(line, &[3, 4]);
                if f.len() < 3 {
                    return Err(MpsError::parse(line_no, "malformed BOUNDS entry"));
                }
                let kind = f[0].to_ascii_uppercase();
                let valueless = matches!(kind.as_str(), "PL" | "FR" | "MI" | "BV");
                let (col, value) = match (f.len(), valueless) {
                    (4, _) => (f[2], Some(f[3])),
                    (3, true) => (f[2], None),
                    _ => (f[1], f.get(2).copied()),
                };
                if !col_index.contains_key(col) {
                    return Err(MpsError::parse(line_no, format!("unknown column '{col}'")));
                }
                let default_bound = match kind.as_str() {
                    "PL" => true,
                    "LO" => match value {
                        Some(v) => parse_value(v, line_no)? == 0.0,
                        None => false,
                    },
                    _ => false,
                };
                if !default_bound {
                    return Err(MpsError::unsupported(
                        line_no,
                        format!("bound type {kind} on column '{col}'"),
                    ));
                }
            }
        }
    }

    if !ended {
        return Err(MpsError::parse(text.lines().count(), "missing ENDATA"));
    }
    let objective_row = objective_row.ok_or_else(|| MpsError::parse(0, "no objective (N) row"))?;

    let mut rhs = vec![0.0; rows.len()];
    for (row, v) in rhs_entries {
        rhs[row] = v;
    }
    Ok(RawLP {
        name,
        rows,
        objective_row,
        columns,
        entries,
        rhs,
    })
}

pub fn parse_mps_file(path: impl AsRef<Path>) -> Result<RawLP, MpsError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MpsError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_mps(&text)
}

/// Convert to `min cᵀx s.t. Ax = b, x ≥ 0`.
///
/// Constraint rows keep their file order. Each `L` row gains a `+1` slack
/// column and each `G` row a `−1` surplus column, appended after the
/// structural columns in row order. An RHS entry on the objective row is a
/// negated objective constant.
pub fn to_standard_form(raw: &RawLP) -> Result<StandardFormLP, ModelError> {
    let mut row_map = vec![usize::MAX; raw.rows.len()];
    let mut row_names = Vec::new();
    let mut b = Vec::new();
    for (i, row) in raw.rows.iter().enumerate() {
        if row.sense != RowSense::N {
            row_map[i] = row_names.len();
            row_names.push(row.name.clone());
            b.push(raw.rhs[i]);
        }
    }
    let m = row_names.len();
    let n_struct = raw.columns.len();
    let mut c = vec![0.0; n_struct];
    let mut triplets = Vec::with_capacity(raw.entries.len() + m);
    for &(col, row, v) in &raw.entries {
        if row == raw.objective_row {
            c[col] += v;
        } else if row_map[row] != usize::MAX {
            triplets.push((row_map[row], col, v));
        }
    }

    let mut col_names = raw.columns.clone();
    for (i, row) in raw.rows.iter().enumerate() {
        let sign = match row.sense {
            RowSense::L => 1.0,
            RowSense::G => -1.0,
            _ => continue,
        };
        triplets.push((row_map[i], col_names.len(), sign));
        col_names.push(format!("slack:{}", row.name));
        c.push(0.0);
    }

    let a = CscMatrix::from_triplets(m, col_names.len(), &triplets)?;
    let f_obj = -raw.rhs[raw.objective_row];
    StandardFormLP::new(a, b, c, f_obj)?.with_names(row_names, col_names)
}
