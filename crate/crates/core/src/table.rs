//! Deterministic CSV table serialization: RFC 4180, UTF-8, header row,
//! reals at 6 significant digits, empty cells for undefined values.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub const SIG_DIGITS: usize = 6;

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Str(String),
    Int(i64),
    /// None or a non-finite value renders as an empty cell.
    Real(Option<f64>),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(Some(v))
    }
}
impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Real(v)
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => match v {
                Some(x) => fmt_real(*x),
                None => String::new(),
            },
        }
    }
}

/// Formats a real at [`SIG_DIGITS`] significant digits (round half to
/// even); non-finite renders as empty.
pub fn fmt_real(x: f64) -> String {
    format_significant(x, SIG_DIGITS)
}

/// Significant-digit formatting. Rust's float formatter rounds ties to
/// even on the exact decimal expansion, so the mantissa digits are taken
/// from it and re-positioned.
pub fn format_significant(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    // extreme magnitudes stay in scientific notation
    if !(-7..=15).contains(&exp) {
        return sci;
    }
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("0.{zeros}{digits}")
    } else if (exp as usize) < digits.len() - 1 {
        let (head, tail) = digits.split_at(exp as usize + 1);
        format!("{head}.{tail}")
    } else {
        let zeros = "0".repeat(exp as usize + 1 - digits.len());
        format!("{digits}{zeros}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Writes rows under a fixed header as RFC 4180 CSV (CRLF, quoting only
/// where needed).
pub fn write_table<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    for row in rows {
        assert_eq!(row.len(), header.len(), "row width differs from header");
    }
    let file = std::fs::File::create(path)?;
    write_table_to(file, header, rows)
}

pub fn write_table_to<W: Write>(w: W, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(w);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row.iter().map(|c| c.render()))?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_real(0.01234567), "0.0123457");
        assert_eq!(fmt_real(123456.7), "123457");
        assert_eq!(fmt_real(1234567.0), "1234570");
        assert_eq!(fmt_real(1.0), "1.00000");
        assert_eq!(fmt_real(-0.5), "-0.500000");
        assert_eq!(fmt_real(0.0), "0");
    }

    #[test]
    fn round_half_even() {
        // 0.1234565 is stored as 0.12345649999999999... so rounds down;
        // use exactly representable ties instead.
        assert_eq!(format_significant(0.125, 2), "0.12");
        assert_eq!(format_significant(0.375, 2), "0.38");
        assert_eq!(format_significant(2.5, 1), "2");
        assert_eq!(format_significant(3.5, 1), "4");
    }

    #[test]
    fn carry_over_keeps_significance() {
        assert_eq!(fmt_real(0.999999951), "1.00000");
        assert_eq!(fmt_real(9.9999995e-3), "0.0100000");
    }

    #[test]
    fn non_finite_is_empty() {
        assert_eq!(fmt_real(f64::NAN), "");
        assert_eq!(fmt_real(f64::INFINITY), "");
    }

    #[test]
    fn extreme_magnitude_scientific() {
        assert_eq!(fmt_real(1.234567e20), "1.23457e20");
        assert_eq!(fmt_real(1.234567e-12), "1.23457e-12");
    }

    #[test]
    fn empty_row_set_writes_header_only() {
        let mut buf = Vec::new();
        write_table_to(&mut buf, &["a", "b"], &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\r\n");
    }

    #[test]
    fn undefined_value_is_empty_cell() {
        let mut buf = Vec::new();
        write_table_to(
            &mut buf,
            &["x", "y"],
            &[vec![Cell::from(1.5), Cell::Real(None)]],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y\r\n1.50000,\r\n");
    }

    #[test]
    fn quoting_when_needed() {
        let mut buf = Vec::new();
        write_table_to(&mut buf, &["s"], &[vec![Cell::from("a,b")]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "s\r\n\"a,b\"\r\n");
    }
}
