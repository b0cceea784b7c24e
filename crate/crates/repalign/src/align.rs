//! The alignment metric and alignment-threshold curves.
//!
//! Alignment of a representation with a label vector at threshold `τ` is
//! the label energy carried by singular directions at or above `τ`:
//! `Σ (u_iᵀ y)²` over retained directions with `σ_i ≥ τ` (inclusive).
//! As a function of `τ` this is a non-increasing step function; the curve
//! type samples it on a grid that represents every step.
//!
//! Retained-rank convention: sums run over the numerically nonzero
//! directions only. At `τ = 0` the full-basis value is `‖y‖²`; the curve
//! stores that as its first value and additionally reports the
//! retained-direction partial sum, whose gap to `‖y‖²` is exactly the
//! irreducible least-squares residual.

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, project_labels, SvdResult};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Alignment as a step function of the threshold.
///
/// `thresholds` is strictly ascending and starts at 0; `values` has the
/// same length and is non-increasing. `values[0]` is the full-basis value
/// `‖y‖²`; `retained_at_zero` is the partial sum over retained directions.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
    pub retained_at_zero: f64,
}

impl AlignmentCurve {
    /// Evaluates the sampled curve at `tau` by right-continuous step
    /// interpolation: the value of the largest grid point at or below `tau`.
    pub fn value_at(&self, tau: f64) -> f64 {
        let mut out = self.values[0];
        for (t, v) in self.thresholds.iter().zip(&self.values) {
            if *t <= tau {
                out = *v;
            } else {
                break;
            }
        }
        out
    }

    /// Largest grid threshold.
    pub fn max_threshold(&self) -> f64 {
        *self.thresholds.last().unwrap()
    }
}

/// Alignment at a single threshold: `Σ_{σ_i ≥ τ} (u_iᵀ y)²` over retained
/// directions, inclusive at `σ_i = τ`.
pub fn alignment_at(svd: &SvdResult, y: &[f64], tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::invalid_input("alignment_at: tau must be nonnegative"));
    }
    let coeffs = project_labels(svd, y)?;
    let sum: f64 = coeffs
        .iter()
        .zip(&svd.sigma)
        .filter(|(_, &s)| s >= tau)
        .map(|(c, _)| c * c)
        .sum();
    // An empty f64 sum is -0.0; keep the reported value clean.
    Ok(sum + 0.0)
}

/// Threshold grid choice for [`alignment_curve`].
#[derive(Debug, Clone)]
pub enum ThresholdGrid {
    /// `{0} ∪ distinct singular values ∪ midpoints between consecutive
    /// distinct values ∪ one point past σ_max`, so every step of the step
    /// function (including the drop to zero) is represented.
    Auto,
    /// Explicit grid; must be sorted ascending and nonnegative.
    Explicit(Vec<f64>),
}

/// Samples the alignment step function over a threshold grid.
///
/// The first grid point is always 0 and its value is the full-basis
/// alignment `‖y‖²`; every later value is the retained-direction sum.
pub fn alignment_curve(svd: &SvdResult, y: &[f64], grid: &ThresholdGrid) -> Result<AlignmentCurve> {
    let coeffs = project_labels(svd, y)?;
    let squares: Vec<f64> = coeffs.iter().map(|c| c * c).collect();
    let retained_at_zero: f64 = squares.iter().sum::<f64>() + 0.0;
    let full0 = norm_sq(y);

    let thresholds = match grid {
        ThresholdGrid::Auto => auto_grid(&svd.sigma),
        ThresholdGrid::Explicit(g) => {
            if g.is_empty() {
                return Err(Error::invalid_input("alignment_curve: empty grid"));
            }
            for w in g.windows(2) {
                if !(w[0] < w[1]) {
                    return Err(Error::invalid_input("alignment_curve: grid must be strictly ascending"));
                }
            }
            if g[0] < 0.0 {
                return Err(Error::invalid_input("alignment_curve: negative grid point"));
            }
            let mut g = g.clone();
            if g[0] != 0.0 {
                g.insert(0, 0.0);
            }
            g
        }
    };

    let mut values = Vec::with_capacity(thresholds.len());
    for (k, &tau) in thresholds.iter().enumerate() {
        if k == 0 {
            values.push(full0);
            continue;
        }
        let v: f64 = squares
            .iter()
            .zip(&svd.sigma)
            .filter(|(_, &s)| s >= tau)
            .map(|(q, _)| *q)
            .sum();
        values.push(v + 0.0);
    }

    Ok(AlignmentCurve { thresholds, values, retained_at_zero })
}

/// `{0} ∪ distinct σ ∪ midpoints ∪ one step past σ_max`, ascending.
fn auto_grid(sigma: &[f64]) -> Vec<f64> {
    let mut asc: Vec<f64> = sigma.to_vec();
    asc.sort_by(|a, b| a.partial_cmp(b).unwrap());
    asc.dedup();

    let mut grid = vec![0.0];
    for (i, &s) in asc.iter().enumerate() {
        if i > 0 {
            let mid = 0.5 * (asc[i - 1] + s);
            if mid > *grid.last().unwrap() && mid < s {
                grid.push(mid);
            }
        }
        if s > *grid.last().unwrap() {
            grid.push(s);
        }
    }
    // One point beyond the largest singular value so the final drop to
    // zero shows up in the sampled curve.
    if let Some(&max) = asc.last() {
        if max > 0.0 {
            let gap = if asc.len() >= 2 {
                max - asc[asc.len() - 2]
            } else {
                max
            };
            grid.push(max + 0.5 * gap);
        }
    }
    grid
}

/// Pointwise difference `a − b` of two sampled curves, evaluated on the
/// union of their threshold grids with right-continuous interpolation.
pub fn curve_diff(a: &AlignmentCurve, b: &AlignmentCurve) -> AlignmentCurve {
    let mut grid: Vec<f64> = a
        .thresholds
        .iter()
        .chain(b.thresholds.iter())
        .copied()
        .collect();
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    grid.dedup();

    let values: Vec<f64> = grid.iter().map(|&t| a.value_at(t) - b.value_at(t)).collect();
    AlignmentCurve {
        thresholds: grid,
        values,
        retained_at_zero: a.retained_at_zero - b.retained_at_zero,
    }
}

/// Uniform random permutation of the label entries under a fixed seed.
pub fn shuffle_labels(y: &[f64], seed: u64) -> Vec<f64> {
    let mut out = y.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.shuffle(&mut rng);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{thin_svd, Mat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_near(a: f64, b: f64, tol: f64, msg: &str) {
        assert!((a - b).abs() <= tol, "{msg}: {a} vs {b}");
    }

    fn random_svd(n: usize, d: usize, seed: u64) -> crate::linalg::SvdResult {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Mat::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        thin_svd(&m).unwrap()
    }

    #[test]
    fn tau_zero_full_rank_square_gives_norm() {
        let svd = random_svd(8, 8, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
        let a = alignment_at(&svd, &y, 0.0).unwrap();
        assert_near(a, norm_sq(&y), 1e-10, "full alignment at tau 0");
    }

    #[test]
    fn basis_vector_is_step_function() {
        let svd = random_svd(20, 6, 3);
        let k = 2;
        let y = svd.u.col(k);
        let sk = svd.sigma[k];
        assert_near(alignment_at(&svd, &y, sk).unwrap(), 1.0, 1e-10, "inclusive at sigma_k");
        assert_near(alignment_at(&svd, &y, sk * 0.5).unwrap(), 1.0, 1e-10, "below sigma_k");
        assert_near(
            alignment_at(&svd, &y, sk * (1.0 + 1e-9)).unwrap(),
            0.0,
            1e-10,
            "above sigma_k",
        );
    }

    #[test]
    fn curve_for_basis_vector() {
        let svd = random_svd(15, 5, 4);
        let k = 3;
        let y = svd.u.col(k);
        let curve = alignment_curve(&svd, &y, &ThresholdGrid::Auto).unwrap();
        for (t, v) in curve.thresholds.iter().zip(&curve.values).skip(1) {
            let expect = if *t <= svd.sigma[k] { 1.0 } else { 0.0 };
            assert_near(*v, expect, 1e-10, &format!("step at tau {t}"));
        }
        // The grid extends past sigma_max, so the zero tail is visible.
        assert!(curve.max_threshold() > svd.sigma[0]);
        assert_near(*curve.values.last().unwrap(), 0.0, 1e-10, "tail is zero");
    }

    #[test]
    fn uniform_projections_decrease_linearly() {
        // Build y with equal projection on every left direction of an
        // orthogonal representation: alignment drops by 1 per direction.
        let m = Mat::from_fn(4, 4, |r, c| {
            // scaled identity-ish with distinct singular values
            if r == c {
                (c + 1) as f64
            } else {
                0.0
            }
        });
        let svd = thin_svd(&m).unwrap();
        let y: Vec<f64> = (0..4)
            .map(|r| (0..4).map(|k| svd.u.get(r, k)).sum::<f64>())
            .collect();
        let curve = alignment_curve(&svd, &y, &ThresholdGrid::Auto).unwrap();
        // At each singular value exactly k directions remain.
        for (k, &s) in svd.sigma.iter().enumerate() {
            let v = alignment_at(&svd, &y, s).unwrap();
            assert_near(v, (k + 1) as f64, 1e-10, &format!("count at sigma_{k}"));
        }
        assert_near(curve.values[0], 4.0, 1e-10, "norm at zero");
    }

    #[test]
    fn explicit_grid_validation() {
        let svd = random_svd(6, 3, 5);
        let y = vec![1.0; 6];
        let bad = ThresholdGrid::Explicit(vec![0.5, 0.2]);
        assert!(alignment_curve(&svd, &y, &bad).is_err());
        let neg = ThresholdGrid::Explicit(vec![-0.1, 0.2]);
        assert!(alignment_curve(&svd, &y, &neg).is_err());
        // A grid not starting at 0 gets the zero point prepended.
        let shifted = ThresholdGrid::Explicit(vec![0.5, 1.0]);
        let curve = alignment_curve(&svd, &y, &shifted).unwrap();
        assert_eq!(curve.thresholds[0], 0.0);
        assert_eq!(curve.thresholds.len(), 3);
        assert_near(curve.values[0], norm_sq(&y), 1e-12, "zero point value");
    }

    #[test]
    fn diff_of_identical_curves_is_zero() {
        let svd = random_svd(10, 4, 6);
        let y = vec![1.0; 10];
        let c = alignment_curve(&svd, &y, &ThresholdGrid::Auto).unwrap();
        let d = curve_diff(&c, &c);
        for v in d.values {
            assert_near(v, 0.0, 1e-12, "zero diff");
        }
    }

    #[test]
    fn diff_of_two_basis_curves() {
        let svd = random_svd(18, 5, 7);
        let (s1, s2) = (svd.sigma[0], svd.sigma[1]);
        let a = alignment_curve(&svd, &svd.u.col(0), &ThresholdGrid::Auto).unwrap();
        let b = alignment_curve(&svd, &svd.u.col(1), &ThresholdGrid::Auto).unwrap();
        let d = curve_diff(&a, &b);
        for (t, v) in d.thresholds.iter().zip(&d.values) {
            // Skip the tau=0 point: both full-basis values are 1.
            if *t == 0.0 {
                assert_near(*v, 0.0, 1e-10, "equal at zero");
            } else if *t <= s2 {
                assert_near(*v, 0.0, 1e-10, &format!("flat at {t}"));
            } else if *t <= s1 {
                assert_near(*v, 1.0, 1e-10, &format!("plus one at {t}"));
            } else {
                assert_near(*v, 0.0, 1e-10, &format!("beyond sigma1 at {t}"));
            }
        }
    }

    #[test]
    fn shuffle_preserves_multiset_and_is_seeded() {
        let y = vec![3.0, -1.0, 2.0, 2.0, 0.5, 9.0];
        let a = shuffle_labels(&y, 42);
        let b = shuffle_labels(&y, 42);
        assert_eq!(a, b, "same seed, same permutation");
        let mut sa = a.clone();
        let mut sy = y.clone();
        sa.sort_by(|x, z| x.partial_cmp(z).unwrap());
        sy.sort_by(|x, z| x.partial_cmp(z).unwrap());
        assert_eq!(sa, sy, "multiset preserved");
        assert_near(norm_sq(&a), norm_sq(&y), 1e-12, "norm preserved");
    }

    #[test]
    fn shuffle_constant_vector_unchanged() {
        let y = vec![1.5; 9];
        assert_eq!(shuffle_labels(&y, 7), y);
    }

    #[test]
    fn monotone_in_tau() {
        let svd = random_svd(30, 10, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y: Vec<f64> = (0..30).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let tau = svd.sigma[0] * 1.1 * (i as f64) / 49.0;
            let v = alignment_at(&svd, &y, tau).unwrap();
            assert!(v <= prev + 1e-12, "non-increasing");
            assert!(v >= 0.0 && v <= norm_sq(&y) + 1e-10, "bounds");
            prev = v;
        }
    }
}
