//! Plain CSV output with fixed float formatting.

use std::io::{self, Write};

/// Significant digits for every float written to CSV.
pub const SIG_DIGITS: usize = 10;

/// Formats `v` with ten significant digits, in positional notation when the
/// exponent is moderate and scientific notation otherwise.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("exponent");
    if (-5..15).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => fmt_float(*f),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(f) => Some(*f),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

pub fn write_table<W: Write>(out: &mut W, columns: &[&str], rows: &[Vec<Cell>]) -> io::Result<()> {
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
