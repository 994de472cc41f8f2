//! Text formats shared by the command-line tool.
//!
//! Histograms are either one real per line (no header) or a JSON array.
//! Matrices are CSV with one row per line. Feature files are CSV rows of
//! `class_index, v_0, ..., v_{dim-1}`. Numbers are written with 12
//! significant digits.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses histogram text: a JSON array of reals or one real per line.
pub fn parse_histogram(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim_start_matches('\u{feff}').trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str::<Vec<f64>>(trimmed).map_err(|e| Error::Parse(e.to_string()));
    }
    trimmed
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_real(l, i + 1))
        .collect()
}

pub fn read_histogram_file(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_histogram(&read(path.as_ref())?)
}

/// Parses CSV rows of comma-separated reals.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.trim_start_matches('\u{feff}')
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.split(',').map(|cell| parse_real(cell, i + 1)).collect())
        .collect()
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    parse_matrix(&read(path.as_ref())?)
}

/// Parses `class_index, v_0, ..., v_{dim-1}` rows.
pub fn parse_features(text: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut out = Vec::new();
    for (i, line) in text.trim_start_matches('\u{feff}').lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let head = cells.next().unwrap_or_default().trim();
        let class = head
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("line {}: bad class index `{head}`", i + 1)))?;
        let v = cells.map(|c| parse_real(c, i + 1)).collect::<Result<Vec<_>>>()?;
        out.push((class, v));
    }
    Ok(out)
}

pub fn read_features_file(path: impl AsRef<Path>) -> Result<Vec<(usize, Vec<f64>)>> {
    parse_features(&read(path.as_ref())?)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_real(cell: &str, line: usize) -> Result<f64> {
    let cell = cell.trim();
    cell.parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: `{cell}` is not a number")))
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros dropped.
pub fn format_real(x: f64) -> String {
    const DIGITS: usize = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= DIGITS as i32 {
        format!("{}e{}{:02}", strip_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One value per line.
pub fn histogram_to_csv(values: &[f64]) -> String {
    values.iter().map(|v| format_real(*v) + "\n").collect()
}

pub fn histogram_to_json(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format_real(*v)).collect();
    format!("[{}]\n", cells.join(", "))
}

pub fn matrix_to_csv<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format_real(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_formats() {
        assert_eq!(parse_histogram("0.5\n0.5\n").unwrap(), vec![0.5, 0.5]);
        assert_eq!(parse_histogram("0.25\r\n\r\n0.75").unwrap(), vec![0.25, 0.75]);
        assert_eq!(parse_histogram(" [0.1, 0.9] ").unwrap(), vec![0.1, 0.9]);
        assert!(parse_histogram("0.5\nabc\n").is_err());
        assert!(parse_histogram("[0.5,").is_err());
    }

    #[test]
    fn matrix_and_feature_formats() {
        let m = parse_matrix("0,1\n1,0\n").unwrap();
        assert_eq!(m, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let f = parse_features("0, 1.5, 2\n2,3,4\n").unwrap();
        assert_eq!(f, vec![(0, vec![1.5, 2.0]), (2, vec![3.0, 4.0])]);
        assert!(parse_features("x,1\n").is_err());
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(23.0 / 11.0), "2.09090909091");
        assert_eq!(format_real(0.89375), "0.89375");
        assert_eq!(format_real(4.0), "4");
        assert_eq!(format_real(-0.125), "-0.125");
        assert_eq!(format_real(1.0 / 3.0 * 1e-7), "3.33333333333e-08");
        assert_eq!(format_real(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_real(0.0), "0");
        let v = 0.1 + 0.2;
        assert_eq!(format_real(v), "0.3");
    }

    #[test]
    fn writers_round_trip_through_parsers() {
        let v = vec![0.89375, 0.03125, 0.0125, 0.00625];
        assert_eq!(parse_histogram(&histogram_to_csv(&v)).unwrap(), v);
        assert_eq!(parse_histogram(&histogram_to_json(&v)).unwrap(), v);
        let rows = [vec![0.0, 2.5], vec![2.5, 0.0]];
        let text = matrix_to_csv(rows.iter().map(|r| r.as_slice()));
        assert_eq!(text, "0,2.5\n2.5,0\n");
    }
}
