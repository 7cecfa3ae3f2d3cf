//! Plain-text result tables.
//!
//! Output is byte-stable: fixed column order, floats with 17 significant
//! digits, every row newline terminated.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, PhotonDistribution};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    fn delimited(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn structured(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format_float(*v),
            Cell::Float(_) => "null".into(),
            Cell::Text(s) => json_string(s),
        }
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Comma-separated, header first.
    pub fn to_delimited(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::delimited).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON object `{"columns": [...], "rows": [[...], ...]}`, one row per line.
    pub fn to_structured(&self) -> String {
        let cols: Vec<String> = self.columns.iter().map(|c| json_string(c)).collect();
        let mut out = format!("{{\n  \"columns\": [{}],\n  \"rows\": [\n", cols.join(", "));
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(Cell::structured).collect();
            let sep = if i + 1 == self.rows.len() { "" } else { "," };
            let _ = writeln!(out, "    [{}]{sep}", cells.join(", "));
        }
        out.push_str("  ]\n}\n");
        out
    }

    /// `n,m,re,im`, row-major.
    pub fn density_matrix(rho: &DensityMatrix) -> Self {
        let mut t = Table::new(&["n", "m", "re", "im"]);
        for n in 0..rho.dim() {
            for m in 0..rho.dim() {
                let c = rho.get(n, m);
                t.push(vec![n.into(), m.into(), c.re.into(), c.im.into()]);
            }
        }
        t
    }

    /// `n,p,ci,theory`; missing half-widths print as 0, missing theory entries as 0.
    pub fn distribution(p: &PhotonDistribution, theory: &[f64]) -> Self {
        let mut t = Table::new(&["n", "p", "ci", "theory"]);
        for (n, &v) in p.values.iter().enumerate() {
            let ci = p.half_widths.as_ref().map_or(0.0, |h| h[n]);
            let th = theory.get(n).copied().unwrap_or(0.0);
            t.push(vec![n.into(), v.into(), ci.into(), th.into()]);
        }
        t
    }
}

/// Parses a `phi,n,p` table (header required, `#` comments and blank lines
/// ignored) into `(φ, n, P)` triples.
pub fn parse_triples(text: &str) -> Result<Vec<(f64, usize, f64)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::param("measured", "empty table"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["phi", "n", "p"] {
        return Err(Error::param("measured", format!("expected header `phi,n,p`, got `{header}`")));
    }
    lines
        .map(|(lineno, line)| {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::param("measured", format!("line {lineno}: cannot parse `{line}`"));
            if f.len() != 3 {
                return Err(bad());
            }
            Ok((
                f[0].parse().map_err(|_| bad())?,
                f[1].parse().map_err(|_| bad())?,
                f[2].parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}
