//! CSV and small-file emission helpers.
//!
//! Every emitted CSV starts with `#`-prefixed comment lines naming the
//! generating command and seed, then a one-line header, then rows.
//! Floats are written with Rust's shortest round-trip formatting, so a
//! rerun with the same config reproduces byte-identical files.

use crate::align::AlignmentCurve;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes a file atomically (temp file in the same directory, then rename).
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Builds CSV text from comment lines, a header, and preformatted rows.
pub fn csv_text(comments: &[String], header: &str, rows: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "{header}");
    for r in rows {
        let _ = writeln!(out, "{r}");
    }
    out
}

/// Writes an alignment curve in the standard two-column layout.
pub fn write_curve_csv(path: &Path, comments: &[String], curve: &AlignmentCurve) -> Result<()> {
    let mut all_comments = comments.to_vec();
    all_comments.push(format!("retained_at_zero = {}", fmt_f64(curve.retained_at_zero)));
    let rows: Vec<String> = curve
        .thresholds
        .iter()
        .zip(&curve.values)
        .map(|(t, v)| format!("{},{}", fmt_f64(*t), fmt_f64(*v)))
        .collect();
    write_atomic(path, &csv_text(&all_comments, "threshold,alignment", &rows))
}

/// Reads an alignment curve written by [`write_curve_csv`]. The
/// `retained_at_zero` comment is recovered when present, otherwise it
/// defaults to the curve's value at threshold 0.
pub fn read_curve_csv(path: &Path) -> Result<AlignmentCurve> {
    let text = std::fs::read_to_string(path)?;
    let mut thresholds = Vec::new();
    let mut values = Vec::new();
    let mut retained: Option<f64> = None;
    let mut saw_header = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "retained_at_zero" {
                    retained = value.trim().parse().ok();
                }
            }
            continue;
        }
        if !saw_header {
            if trimmed != "threshold,alignment" {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected header 'threshold,alignment', found '{trimmed}'"),
                });
            }
            saw_header = true;
            continue;
        }
        let (t, v) = trimmed.split_once(',').ok_or(Error::Parse {
            line: line_no,
            msg: "expected 'threshold,alignment' row".into(),
        })?;
        let t: f64 = t.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad threshold '{t}'"),
        })?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad alignment '{v}'"),
        })?;
        if let Some(&last) = thresholds.last() {
            if t <= last {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("thresholds must be strictly ascending ({t} after {last})"),
                });
            }
        }
        thresholds.push(t);
        values.push(v);
    }
    if thresholds.is_empty() {
        return Err(Error::Parse { line: 1, msg: "curve file has no data rows".into() });
    }
    let retained = retained.unwrap_or(values[0]);
    Ok(AlignmentCurve { thresholds, values, retained_at_zero: retained })
}

/// Sample mean and standard error (zero for fewer than two samples).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_csv_roundtrip() {
        let curve = AlignmentCurve {
            thresholds: vec![0.0, 0.5, 1.25],
            values: vec![10.0, 4.5, 0.1],
            retained_at_zero: 9.75,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        write_curve_csv(&path, &[String::from("repalign test seed=1")], &curve).unwrap();
        let back = read_curve_csv(&path).unwrap();
        assert_eq!(curve, back);
    }

    #[test]
    fn unsorted_curve_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "threshold,alignment\n0,5\n2,3\n1,4\n").unwrap();
        match read_curve_csv(&path) {
            Err(crate::error::Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn floats_roundtrip_exactly() {
        for v in [0.1, 1.0 / 3.0, 9.586360212737963, -2.5e-17] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v, back, "{s}");
        }
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        let (m, se) = mean_stderr(&[2.0, 2.0, 2.0]);
        assert_eq!(m, 2.0);
        assert_eq!(se, 0.0);
    }
}
