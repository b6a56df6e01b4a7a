//! In-memory result tables and their CSV form.

use std::path::Path;

use crate::error::{Error, Result};

/// Significant digits written for every floating-point cell.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            Value::Int(n) => Some(*n as f64),
            Value::Text(_) => None,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Value::Num(x) => format_significant(*x),
            Value::Int(n) => n.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as u64)
    }
}

impl From<u64> for Value {
    fn from(n: u64) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Int(b as u64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits, trailing zeros
/// removed. Plain notation for magnitudes in `[1e-5, 1e12)`, scientific
/// otherwise. Negative zero prints as `0`.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..12).contains(&exponent) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A header plus rows of equal width.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Panics if the row width differs from the header; rows are built by
    /// this crate, so a mismatch is a bug.
    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of column `name`; text cells become NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[k].as_f64().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    /// Rendered cells of column `name`.
    pub fn texts(&self, name: &str) -> Option<Vec<String>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k].render()).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 cells"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    /// Parses CSV produced by [`to_csv`](Self::to_csv). Cells that parse as
    /// numbers are read back as numbers.
    pub fn from_csv(text: &str, file: &str) -> Result<Self> {
        let bad = |message: String| Error::Table {
            file: file.to_string(),
            message,
        };
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut table = Table::new(columns);
        for record in r.records() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            if record.len() != table.columns.len() {
                return Err(bad(format!("row of width {}", record.len())));
            }
            let row = record
                .iter()
                .map(|cell| match cell.parse::<f64>() {
                    Ok(x) => Value::Num(x),
                    Err(_) => Value::Text(cell.to_string()),
                })
                .collect();
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_significant(0.0), "0");
        assert_eq!(format_significant(-0.0), "0");
        assert_eq!(format_significant(1.0), "1");
        assert_eq!(format_significant(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_significant(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(
            format_significant(std::f64::consts::PI * 100.0),
            "314.159265359"
        );
        assert_eq!(format_significant(1.5e-7), "1.5e-7");
        assert_eq!(format_significant(1.23456789012345e-3), "0.00123456789012");
        assert_eq!(format_significant(6.02214076e23), "6.02214076e23");
        assert_eq!(format_significant(0.99999999999999), "1");
    }

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new(["name", "x", "n"]);
        t.push(vec!["a,b".into(), 0.1.into(), 3usize.into()]);
        t.push(vec!["c".into(), (-1e-9).into(), 0usize.into()]);
        let text = t.to_csv().unwrap();
        assert_eq!(text, "name,x,n\n\"a,b\",0.1,3\nc,-1e-9,0\n");
        let back = Table::from_csv(&text, "t.csv").unwrap();
        assert_eq!(back.to_csv().unwrap(), text);
        assert_eq!(back.numbers("x").unwrap(), vec![0.1, -1e-9]);
        assert_eq!(back.texts("name").unwrap(), vec!["a,b", "c"]);
    }
}
