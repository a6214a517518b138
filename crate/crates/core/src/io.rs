//! CSV and JSON outputs. Numbers are written in C's `%.17g` style so every
//! value round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::checks::CheckReport;
use crate::error::{Error, Result};
use crate::grid::{build_grid, ScalarField};
use crate::heat_compare::DecaySeries;
use crate::series::{MassRecord, MassSeries};

/// Formats like C's `printf("%.17g", x)`.
pub fn format_g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

/// Snapshot matrix: row `i` holds the nodes with x index `i`. A 1D field is a
/// single column.
pub fn snapshot_to_string(field: &ScalarField) -> String {
    let n = field.grid().n();
    let cols = if field.grid().dim() == 1 { 1 } else { n };
    let mut out = String::new();
    for row in field.values().chunks(cols) {
        let line: Vec<String> = row.iter().map(|&v| format_g17(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_snapshot(path: &Path, field: &ScalarField) -> Result<()> {
    write_text(path, &snapshot_to_string(field))
}

/// Reads a snapshot; the node count is taken from the file and the spacing
/// from `b / (N - 1)`.
pub fn read_snapshot(path: &Path, dim: usize, b: f64) -> Result<ScalarField> {
    let file_err = |reason: String| Error::FileError {
        path: path.display().to_string(),
        reason,
    };
    let text = fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| file_err(format!("line {}: {e}", lineno + 1)))?;
        rows.push(row);
    }
    let n = rows.len();
    if n < 2 {
        return Err(file_err(format!("need at least 2 rows, found {n}")));
    }
    let want_cols = if dim == 1 { 1 } else { n };
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != want_cols) {
        return Err(file_err(format!(
            "row {} has {} columns, expected {want_cols}",
            i + 1,
            r.len()
        )));
    }
    let grid = build_grid(dim, b, b / (n - 1) as f64)?;
    ScalarField::new(grid, rows.concat()).map_err(|e| file_err(e.to_string()))
}

pub const SERIES_HEADER: &str = "t,mass,max_u,min_u,l2_norm,lk_norm,int_u_alpha";

pub fn series_to_string(series: &MassSeries) -> String {
    let mut out = String::with_capacity(series.len() * 128);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for r in series.records() {
        let cols = [r.t, r.mass, r.max_u, r.min_u, r.l2_norm, r.lk_norm, r.int_u_alpha];
        let line: Vec<String> = cols.iter().map(|&v| format_g17(v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn write_series(path: &Path, series: &MassSeries) -> Result<()> {
    write_text(path, &series_to_string(series))
}

pub fn parse_series(text: &str, lk_order: f64) -> Result<MassSeries> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == SERIES_HEADER => {}
        Some((i, _)) => {
            return Err(Error::ParseError {
                line: i + 1,
                reason: format!("expected header `{SERIES_HEADER}`"),
            })
        }
        None => return Err(Error::EmptySeries),
    }
    let mut series = MassSeries::new(lk_order);
    for (i, line) in lines {
        let v = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::ParseError {
                line: i + 1,
                reason: e.to_string(),
            })?;
        if v.len() != 7 {
            return Err(Error::ParseError {
                line: i + 1,
                reason: format!("expected 7 columns, found {}", v.len()),
            });
        }
        series
            .push(MassRecord {
                t: v[0],
                mass: v[1],
                max_u: v[2],
                min_u: v[3],
                l2_norm: v[4],
                lk_norm: v[5],
                int_u_alpha: v[6],
                negativity_flag: v[3] < 0.0,
            })
            .map_err(|e| Error::ParseError {
                line: i + 1,
                reason: e.to_string(),
            })?;
    }
    Ok(series)
}

pub fn read_series(path: &Path, lk_order: f64) -> Result<MassSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::FileError {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_series(&text, lk_order)
}

pub fn decay_to_string(series: &DecaySeries) -> String {
    let mut out = String::from("t,d,log_d\n");
    for p in &series.points {
        let _ = writeln!(out, "{},{},{}", format_g17(p.t), format_g17(p.d), format_g17(p.d.ln()));
    }
    out
}

pub fn write_decay(path: &Path, series: &DecaySeries) -> Result<()> {
    write_text(path, &decay_to_string(series))
}

pub fn write_report(path: &Path, reports: &[CheckReport]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(reports)?;
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g17_matches_c_printf() {
        // Reference strings from glibc printf("%.17g").
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (0.5, "0.5"),
            (100.0, "100"),
            (1e-5, "1.0000000000000001e-05"),
            (1.5e20, "1.5e+20"),
            (123456789012345678.0, "1.2345678901234568e+17"),
            (12345678901234567.0, "12345678901234568"),
            (-2.25, "-2.25"),
            (0.0001, "0.0001"),
            (1.0 / 3.0, "0.33333333333333331"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g17(x), want, "{x:e}");
        }
    }

    proptest! {
        #[test]
        fn g17_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = format_g17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for dim in [1, 2] {
            let g = build_grid(dim, 1.0, 0.125).unwrap();
            let f = ScalarField::from_fn(g, |p| p.iter().map(|x| (3.1 * x).sin()).sum::<f64>() / 7.0).unwrap();
            let path = dir.path().join(format!("u{dim}.csv"));
            write_snapshot(&path, &f).unwrap();
            let back = read_snapshot(&path, dim, 1.0).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn ill_shaped_snapshot_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "1,2,3\n4,5\n6,7,8\n").unwrap();
        assert!(matches!(read_snapshot(&path, 2, 1.0), Err(Error::FileError { .. })));
        fs::write(&path, "1,x\n4,5\n").unwrap();
        assert!(matches!(read_snapshot(&path, 2, 1.0), Err(Error::FileError { .. })));
    }

    #[test]
    fn series_round_trip() {
        let g = build_grid(2, 1.0, 0.125).unwrap();
        let mut s = MassSeries::new(1.5);
        for k in 0..4 {
            let u = ScalarField::from_fn(g, |p| 0.3 + k as f64 * p[0] * p[1]).unwrap();
            s.push(MassRecord::measure(k as f64 * 0.1, &u, 1.5, 1.5).unwrap())
                .unwrap();
        }
        let back = parse_series(&series_to_string(&s), 1.5).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn bad_series_header() {
        assert!(matches!(
            parse_series("a,b\n1,2\n", 2.0),
            Err(Error::ParseError { line: 1, .. })
        ));
        assert!(matches!(parse_series("", 2.0), Err(Error::EmptySeries)));
    }
}
