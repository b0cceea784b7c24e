//! Synthetic dataset generators for the illustrative experiments, plus a
//! generic CSV ingestion path for real datasets.
//!
//! Everything here is deterministic under its seed.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, orthonormal_columns, Mat, SvdResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// Which axis separates the two classes of the circle dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleLabeling {
    /// Classes split along the first principal direction (across the two
    /// clusters): the label vector lands mostly on the top singular vector.
    MajorAxis,
    /// Classes split along the second principal direction (within each
    /// cluster): the label vector lands mostly on the weak direction.
    MinorAxis,
}

/// Two clusters of unit-norm 2-d points at angles around `π/4` and
/// `−3π/4` with uniform angular noise.
///
/// The defaults are calibrated so the two singular values of the
/// generated matrix land on 9.58 and 2.84.
#[derive(Debug, Clone)]
pub struct CircleSpec {
    pub n_per_class: usize,
    /// Half-width of the uniform angular noise, radians; must lie in
    /// `(0, π/4]` so the labelings stay clean.
    pub angle_spread: f64,
    pub seed: u64,
    pub labeling: CircleLabeling,
}

impl Default for CircleSpec {
    fn default() -> Self {
        CircleSpec {
            n_per_class: 50,
            angle_spread: 0.5,
            seed: 1726,
            labeling: CircleLabeling::MajorAxis,
        }
    }
}

const CLUSTER_ANGLES: [f64; 2] = [std::f64::consts::FRAC_PI_4, -3.0 * std::f64::consts::FRAC_PI_4];

/// Generates the two-cluster circle dataset with ±1 labels.
///
/// Angular offsets are stratified: each cluster gets the same number of
/// positive and negative offsets (never exactly zero), so both labelings
/// are exactly balanced.
pub fn circle_dataset(spec: &CircleSpec) -> Result<Dataset> {
    if spec.n_per_class == 0 {
        return Err(Error::invalid_input("circle_dataset: n_per_class must be at least 1"));
    }
    if !(spec.angle_spread > 0.0) || spec.angle_spread > std::f64::consts::FRAC_PI_4 {
        return Err(Error::invalid_input(
            "circle_dataset: angle_spread must lie in (0, pi/4]",
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_pos = spec.n_per_class.div_ceil(2);
    let mut rows = Vec::with_capacity(2 * spec.n_per_class);
    let mut offsets = Vec::with_capacity(2 * spec.n_per_class);
    for &center in &CLUSTER_ANGLES {
        for i in 0..spec.n_per_class {
            // Offset magnitude in (0, spread]; sign from the stratification.
            let mag = (1.0 - rng.random::<f64>()) * spec.angle_spread;
            let offset = if i < n_pos { mag } else { -mag };
            let theta = center + offset;
            rows.push(vec![theta.cos(), theta.sin()]);
            offsets.push(offset);
        }
    }
    let x = Mat::from_rows(&rows)?;

    // Major axis: direction of the cluster line (π/4). Minor axis: its
    // perpendicular (3π/4). Labels are the sign of the projection.
    let axis = match spec.labeling {
        CircleLabeling::MajorAxis => std::f64::consts::FRAC_PI_4,
        CircleLabeling::MinorAxis => 3.0 * std::f64::consts::FRAC_PI_4,
    };
    let (ax, ay) = (axis.cos(), axis.sin());
    let y: Vec<f64> = (0..x.rows())
        .map(|r| {
            let p = x.get(r, 0) * ax + x.get(r, 1) * ay;
            if p > 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();

    Dataset::new(x, y)
}

/// Unit-norm label vector built from a weighted mix of left singular
/// vectors: `y = Σ w_k · u_{i_k}`, normalized.
pub fn synthetic_singular_targets(svd: &SvdResult, mix: &[(usize, f64)]) -> Result<Vec<f64>> {
    if mix.iter().all(|(_, w)| *w == 0.0) {
        return Err(Error::invalid_input(
            "synthetic_singular_targets: at least one weight must be nonzero",
        ));
    }
    let mut y = vec![0.0; svd.n()];
    for &(idx, w) in mix {
        if idx >= svd.rank {
            return Err(Error::invalid_input(format!(
                "synthetic_singular_targets: index {idx} out of range (rank {})",
                svd.rank
            )));
        }
        for (r, yv) in y.iter_mut().enumerate() {
            *yv += w * svd.u.get(r, idx);
        }
    }
    let nrm = norm_sq(&y).sqrt();
    for yv in y.iter_mut() {
        *yv /= nrm;
    }
    Ok(y)
}

/// Seeded random matrix with a prescribed power-law spectrum
/// `σ_i ∝ (i+1)^{−alpha}`, scaled so the squared Frobenius norm equals
/// the row count (unit average row energy, like row-normalized data).
///
/// Stands in for real-data representations, whose spectra decay; a flat
/// Gaussian spectrum would make every direction converge at the same
/// rate and hide the fast/slow structure.
pub fn decaying_spectrum_matrix(n: usize, d: usize, alpha: f64, seed: u64) -> Result<Mat> {
    if n == 0 || d == 0 {
        return Err(Error::invalid_input("decaying_spectrum_matrix: empty shape"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid_input("decaying_spectrum_matrix: alpha must be nonnegative"));
    }
    let r = n.min(d);
    let mut sigma: Vec<f64> = (0..r).map(|i| ((i + 1) as f64).powf(-alpha)).collect();
    let scale = (n as f64 / sigma.iter().map(|s| s * s).sum::<f64>()).sqrt();
    for s in sigma.iter_mut() {
        *s *= scale;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gu = Mat::from_fn(n, r, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let gv = Mat::from_fn(d, r, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let u = orthonormal_columns(&gu)?;
    let v = orthonormal_columns(&gv)?;

    let mut out = Mat::zeros(n, d);
    for i in 0..n {
        for k in 0..r {
            let s = sigma[k] * u.get(i, k);
            if s == 0.0 {
                continue;
            }
            for j in 0..d {
                let val = out.get(i, j) + s * v.get(j, k);
                out.set(i, j, val);
            }
        }
    }
    Ok(out)
}

/// Seeded random orthogonal matrix (QR of a uniform random square matrix).
pub fn random_orthogonal(dim: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(dim, dim, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    orthonormal_columns(&g).expect("square random matrix")
}

/// Seeded uniform random vector with entries in [-1, 1).
pub fn uniform_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}

/// Options for [`load_csv`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Scale every feature row to unit norm after the split.
    pub normalize_rows: bool,
    /// Affinely map labels onto [-1, 1] by their min/max (constant label
    /// columns map to all zeros).
    pub map_labels: bool,
}

/// Loads a rectangular numeric CSV with a one-line header into a dataset,
/// splitting off the named label column. Lines starting with `#` are
/// comments. Errors carry 1-based line numbers.
pub fn load_csv(path: &Path, label_column: &str, options: CsvOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, label_column, options)
}

fn parse_csv(text: &str, label_column: &str, options: CsvOptions) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.len() < 2 {
        return Err(Error::Parse {
            line: header_line,
            msg: "header needs a label column and at least one feature".into(),
        });
    }
    let label_idx = names.iter().position(|n| *n == label_column).ok_or_else(|| Error::Parse {
        line: header_line,
        msg: format!("label column '{label_column}' not found in header"),
    })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != names.len() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {} cells, found {}", names.len(), cells.len()),
            });
        }
        let mut row = Vec::with_capacity(names.len() - 1);
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("non-numeric cell '{}' in column '{}'", cell, names[c]),
            })?;
            if c == label_idx {
                labels.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: header_line, msg: "no data rows".into() });
    }

    let mut x = Mat::from_rows(&rows)?;
    if options.normalize_rows {
        x = crate::linalg::normalize_rows(&x);
    }
    if options.map_labels {
        let min = labels.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = labels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max > min {
            for l in labels.iter_mut() {
                *l = -1.0 + 2.0 * (*l - min) / (max - min);
            }
        } else {
            labels.iter_mut().for_each(|l| *l = 0.0);
        }
    }
    Dataset::new(x, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::alignment_at;
    use crate::linalg::{norm, thin_svd};

    #[test]
    fn circle_rows_are_unit_norm() {
        let data = circle_dataset(&CircleSpec::default()).unwrap();
        for r in 0..data.x.rows() {
            assert!((norm(data.x.row(r)) - 1.0).abs() < 1e-12, "row {r}");
        }
    }

    #[test]
    fn circle_classes_exactly_balanced() {
        for labeling in [CircleLabeling::MajorAxis, CircleLabeling::MinorAxis] {
            for n_per_class in [3usize, 50, 101] {
                let spec = CircleSpec { n_per_class, labeling, ..CircleSpec::default() };
                let data = circle_dataset(&spec).unwrap();
                let pos = data.y.iter().filter(|&&v| v > 0.0).count();
                assert_eq!(pos * 2, data.len(), "{labeling:?} n_per_class={n_per_class}");
            }
        }
    }

    #[test]
    fn circle_is_deterministic() {
        let a = circle_dataset(&CircleSpec::default()).unwrap();
        let b = circle_dataset(&CircleSpec::default()).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);
    }

    #[test]
    fn circle_default_spectrum_matches_published_values() {
        let data = circle_dataset(&CircleSpec::default()).unwrap();
        let svd = thin_svd(&data.x).unwrap();
        assert_eq!(svd.rank, 2);
        assert!(
            (svd.sigma[0] - 9.58).abs() < 0.05,
            "sigma1 = {}",
            svd.sigma[0]
        );
        assert!(
            (svd.sigma[1] - 2.84).abs() < 0.05,
            "sigma2 = {}",
            svd.sigma[1]
        );
    }

    #[test]
    fn circle_major_labeling_better_aligned_than_minor() {
        let major = circle_dataset(&CircleSpec::default()).unwrap();
        let minor = circle_dataset(&CircleSpec {
            labeling: CircleLabeling::MinorAxis,
            ..CircleSpec::default()
        })
        .unwrap();
        let svd = thin_svd(&major.x).unwrap();
        assert_eq!(major.x, minor.x, "same points, different labels");
        let tau = 0.5 * (svd.sigma[0] + svd.sigma[1]);
        let a_major = alignment_at(&svd, &major.y, tau).unwrap();
        let a_minor = alignment_at(&svd, &minor.y, tau).unwrap();
        assert!(
            a_major > a_minor,
            "major {a_major} must exceed minor {a_minor} at mid threshold"
        );
    }

    #[test]
    fn singular_target_single_index() {
        let m = decaying_spectrum_matrix(40, 12, 0.7, 3).unwrap();
        let svd = thin_svd(&m).unwrap();
        let y = synthetic_singular_targets(&svd, &[(9, 1.0)]).unwrap();
        assert!((norm(&y) - 1.0).abs() < 1e-12);
        assert!((alignment_at(&svd, &y, svd.sigma[9]).unwrap() - 1.0).abs() < 1e-10);
        assert!(alignment_at(&svd, &y, svd.sigma[9] * 1.000001).unwrap() < 1e-10);
    }

    #[test]
    fn singular_target_validation() {
        let m = decaying_spectrum_matrix(10, 4, 0.5, 4).unwrap();
        let svd = thin_svd(&m).unwrap();
        assert!(synthetic_singular_targets(&svd, &[(99, 1.0)]).is_err());
        assert!(synthetic_singular_targets(&svd, &[(0, 0.0)]).is_err());
    }

    #[test]
    fn decaying_matrix_has_prescribed_spectrum() {
        let n = 50;
        let d = 20;
        let alpha = 0.7;
        let m = decaying_spectrum_matrix(n, d, alpha, 5).unwrap();
        let svd = thin_svd(&m).unwrap();
        assert_eq!(svd.rank, d);
        let raw: Vec<f64> = (0..d).map(|i| ((i + 1) as f64).powf(-alpha)).collect();
        let scale = (n as f64 / raw.iter().map(|s| s * s).sum::<f64>()).sqrt();
        for (k, &s) in svd.sigma.iter().enumerate() {
            let expect = raw[k] * scale;
            assert!(
                (s - expect).abs() < 1e-8 * expect,
                "sigma[{k}] = {s}, expected {expect}"
            );
        }
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let q = random_orthogonal(7, 6);
        let qtq = q.transpose().matmul(&q);
        for i in 0..7 {
            for j in 0..7 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((qtq.get(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_roundtrip_small() {
        let text = "f1,f2,target\n1.0,2.0,1\n3.0,4.0,-1\n";
        let data = parse_csv(text, "target", CsvOptions::default()).unwrap();
        assert_eq!(data.x.rows(), 2);
        assert_eq!(data.x.cols(), 2);
        assert_eq!(data.y, vec![1.0, -1.0]);
        assert_eq!(data.x.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn csv_normalize_flag() {
        let text = "a,b,y\n3.0,4.0,0\n";
        let data = parse_csv(text, "y", CsvOptions { normalize_rows: true, map_labels: false }).unwrap();
        assert!((norm(data.x.row(0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_label_mapping() {
        let text = "a,y\n1.0,10\n2.0,20\n3.0,30\n";
        let data = parse_csv(text, "y", CsvOptions { normalize_rows: false, map_labels: true }).unwrap();
        assert_eq!(data.y, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn csv_constant_labels_map_to_zero() {
        let text = "a,y\n1.0,5\n2.0,5\n";
        let data = parse_csv(text, "y", CsvOptions { normalize_rows: false, map_labels: true }).unwrap();
        assert_eq!(data.y, vec![0.0, 0.0]);
    }

    #[test]
    fn csv_malformed_row_names_line() {
        let text = "a,b,y\n1.0,2.0\n";
        match parse_csv(text, "y", CsvOptions::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text2 = "a,b,y\n1.0,2.0,3.0\n1.0,oops,3.0\n";
        match parse_csv(text2, "y", CsvOptions::default()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_missing_label_column() {
        let text = "a,b\n1.0,2.0\n";
        assert!(matches!(
            parse_csv(text, "target", CsvOptions::default()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn csv_comments_are_skipped() {
        let text = "# produced by: align --seed 3\na,y\n5.0,1.0\n";
        let data = parse_csv(text, "y", CsvOptions::default()).unwrap();
        assert_eq!(data.len(), 1);
    }
}
