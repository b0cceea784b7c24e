//! Batch gradient-descent dynamics for linear regression on a fixed
//! representation: exact closed-form trajectories, the iterative update
//! they predict, an iteration bound driven by the alignment value, and
//! per-direction fast/slow phase diagnostics.
//!
//! With thin SVD `Φ = U Σ Vᵀ`, zero-initialized batch GD
//! `w_{t+1} = w_t − ηΦᵀ(Φw_t − y)` with `0 < η < σ_max⁻²` satisfies
//!
//! `‖Φw_t − Φw*‖² = Σ_i (1 − ησ_i²)^{2t} (u_iᵀy)²`
//!
//! and the training loss adds the irreducible residual `‖Φw* − y‖²`.

use crate::error::{Error, Result};
use crate::linalg::{least_squares_solution, norm, norm_sq, thin_svd, Mat, SvdResult};

/// Step size, iteration budget, and recording cadence for iterative GD.
#[derive(Debug, Clone)]
pub struct GdConfig {
    pub eta: f64,
    pub max_iters: usize,
    pub record_every: usize,
}

impl GdConfig {
    pub fn new(eta: f64, max_iters: usize, record_every: usize) -> GdConfig {
        GdConfig { eta, max_iters, record_every }
    }
}

/// Default step size: half the stability limit of the instance.
pub fn default_eta(svd: &SvdResult) -> f64 {
    let smax = svd.sigma_max();
    if smax > 0.0 {
        0.5 / (smax * smax)
    } else {
        0.5
    }
}

fn check_eta(eta: f64, sigma_max: f64) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::invalid_config("step size must be positive"));
    }
    if sigma_max > 0.0 && eta >= 1.0 / (sigma_max * sigma_max) {
        return Err(Error::invalid_config(format!(
            "step size {eta} is at or above the stability limit {}",
            1.0 / (sigma_max * sigma_max)
        )));
    }
    Ok(())
}

/// Recorded trajectory of an iterative GD run.
#[derive(Debug, Clone)]
pub struct TrajectoryReport {
    pub iters: Vec<usize>,
    /// `‖Φw_t − Φw*‖` at each recorded iteration.
    pub pred_dist: Vec<f64>,
    /// `‖Φw_t − y‖²` at each recorded iteration.
    pub train_loss: Vec<f64>,
    /// `‖w_t‖` at each recorded iteration.
    pub weight_norm: Vec<f64>,
    /// Weights after the final iteration.
    pub final_weights: Vec<f64>,
}

/// Exact closed-form trajectory values at iteration `t`:
/// returns `(pred_dist, train_loss)` where
/// `pred_dist² = Σ (1−ησ_i²)^{2t} (u_iᵀy)²` and
/// `train_loss = pred_dist² + ‖Φw* − y‖²`.
pub fn closed_form_trajectory(svd: &SvdResult, y: &[f64], eta: f64, t: usize) -> Result<(f64, f64)> {
    check_eta(eta, svd.sigma_max())?;
    let coeffs = crate::linalg::project_labels(svd, y)?;
    let mut dist_sq = 0.0;
    let mut retained = 0.0;
    for (c, &s) in coeffs.iter().zip(&svd.sigma) {
        let share = c * c;
        retained += share;
        let factor = 1.0 - eta * s * s;
        dist_sq += factor.powi(2 * t as i32) * share;
    }
    let irreducible = (norm_sq(y) - retained).max(0.0);
    Ok((dist_sq.sqrt(), dist_sq + irreducible))
}

/// Single-instance batch GD stepper with cached predictions. Exposes the
/// raw iterate so callers can record arbitrary quantities per step.
pub struct LinearGd<'a> {
    phi: &'a Mat,
    y: &'a [f64],
    eta: f64,
    w: Vec<f64>,
    pred: Vec<f64>,
    proj: Vec<f64>,
    irreducible: f64,
    t: usize,
}

impl<'a> LinearGd<'a> {
    /// Validates the step size against the spectrum and prepares the run.
    /// Computes the thin SVD internally; use [`LinearGd::with_svd`] to
    /// reuse an existing decomposition.
    pub fn new(phi: &'a Mat, y: &'a [f64], eta: f64) -> Result<LinearGd<'a>> {
        let svd = thin_svd(phi)?;
        LinearGd::with_svd(phi, &svd, y, eta)
    }

    pub fn with_svd(phi: &'a Mat, svd: &SvdResult, y: &'a [f64], eta: f64) -> Result<LinearGd<'a>> {
        if y.len() != phi.rows() {
            return Err(Error::invalid_input(format!(
                "gd: label vector has length {}, expected {}",
                y.len(),
                phi.rows()
            )));
        }
        check_eta(eta, svd.sigma_max())?;
        let w_star = least_squares_solution(svd, y)?;
        let proj = phi.mul_vec(&w_star);
        let irreducible = proj.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
        Ok(LinearGd {
            phi,
            y,
            eta,
            w: vec![0.0; phi.cols()],
            pred: vec![0.0; phi.rows()],
            proj,
            irreducible,
            t: 0,
        })
    }

    #[cfg(test)]
    pub(crate) fn unchecked(phi: &'a Mat, y: &'a [f64], eta: f64) -> LinearGd<'a> {
        let svd = thin_svd(phi).unwrap();
        let w_star = least_squares_solution(&svd, y).unwrap();
        let proj = phi.mul_vec(&w_star);
        let irreducible = proj.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
        LinearGd {
            phi,
            y,
            eta,
            w: vec![0.0; phi.cols()],
            pred: vec![0.0; phi.rows()],
            proj,
            irreducible,
            t: 0,
        }
    }

    /// One batch update `w ← w − ηΦᵀ(Φw − y)`.
    pub fn step(&mut self) {
        let residual: Vec<f64> = self.pred.iter().zip(self.y).map(|(p, t)| p - t).collect();
        let grad = self.phi.tr_mul_vec(&residual);
        for (wj, g) in self.w.iter_mut().zip(&grad) {
            *wj -= self.eta * g;
        }
        self.pred = self.phi.mul_vec(&self.w);
        self.t += 1;
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn weight_norm(&self) -> f64 {
        norm(&self.w)
    }

    /// `‖Φw_t − Φw*‖`.
    pub fn pred_dist(&self) -> f64 {
        self.pred
            .iter()
            .zip(&self.proj)
            .map(|(p, s)| (p - s) * (p - s))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖Φw_t − y‖²`.
    pub fn train_loss(&self) -> f64 {
        self.pred.iter().zip(self.y).map(|(p, t)| (p - t) * (p - t)).sum()
    }

    /// `‖Φw* − y‖²`, the floor of the training loss.
    pub fn irreducible(&self) -> f64 {
        self.irreducible
    }

    /// Squared-error loss of `Φ v` against the labels for an arbitrary
    /// weight vector (used by callers for test-set evaluation).
    pub fn loss_of(phi: &Mat, y: &[f64], w: &[f64]) -> f64 {
        phi.mul_vec(w)
            .iter()
            .zip(y)
            .map(|(p, t)| (p - t) * (p - t))
            .sum()
    }
}

const DIVERGENCE_WINDOW: usize = 10;

/// Runs exact batch GD from `w_0 = 0`, recording `‖Φw_t − Φw*‖`, the
/// training loss, and `‖w_t‖` at the configured cadence (iteration 0 and
/// the final iteration are always recorded).
///
/// The step size is validated against the spectrum up front; as a second
/// line of defense, a training loss that increases over 10 consecutive
/// records raises [`Error::Diverged`].
pub fn iterative_gd(phi: &Mat, y: &[f64], cfg: &GdConfig) -> Result<TrajectoryReport> {
    if cfg.record_every == 0 {
        return Err(Error::invalid_config("record_every must be at least 1"));
    }
    let mut gd = LinearGd::new(phi, y, cfg.eta)?;
    run_trajectory(&mut gd, cfg)
}

fn run_trajectory(gd: &mut LinearGd, cfg: &GdConfig) -> Result<TrajectoryReport> {
    let mut report = TrajectoryReport {
        iters: Vec::new(),
        pred_dist: Vec::new(),
        train_loss: Vec::new(),
        weight_norm: Vec::new(),
        final_weights: Vec::new(),
    };
    let mut increases = 0usize;
    let mut last_loss = f64::INFINITY;
    let mut record = |gd: &LinearGd, report: &mut TrajectoryReport| -> Result<()> {
        let loss = gd.train_loss();
        report.iters.push(gd.t());
        report.pred_dist.push(gd.pred_dist());
        report.train_loss.push(loss);
        report.weight_norm.push(gd.weight_norm());
        if loss > last_loss {
            increases += 1;
            if increases >= DIVERGENCE_WINDOW {
                return Err(Error::Diverged { iter: gd.t(), window: DIVERGENCE_WINDOW });
            }
        } else {
            increases = 0;
        }
        last_loss = loss;
        Ok(())
    };

    record(gd, &mut report)?;
    for t in 1..=cfg.max_iters {
        gd.step();
        if t % cfg.record_every == 0 || t == cfg.max_iters {
            record(gd, &mut report)?;
        }
    }
    report.final_weights = gd.weights().to_vec();
    Ok(report)
}

#[cfg(test)]
pub(crate) fn iterative_gd_unchecked(phi: &Mat, y: &[f64], cfg: &GdConfig) -> Result<TrajectoryReport> {
    let mut gd = LinearGd::unchecked(phi, y, cfg.eta);
    run_trajectory(&mut gd, cfg)
}

/// Iterations needed by iterative GD to reduce the reducible loss
/// `‖Φw_t − Φw*‖²` by at least `drop_target` from its initial value, or
/// `None` if `cap` iterations were not enough.
pub fn iterations_to_reduce(
    phi: &Mat,
    y: &[f64],
    eta: f64,
    drop_target: f64,
    cap: usize,
) -> Result<Option<usize>> {
    let mut gd = LinearGd::new(phi, y, eta)?;
    let r0 = gd.pred_dist().powi(2);
    if 0.0 >= drop_target {
        return Ok(Some(0));
    }
    for t in 1..=cap {
        gd.step();
        let r = gd.pred_dist().powi(2);
        if r0 - r >= drop_target {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Upper bound on iterations to reduce the loss by `omega` when the
/// alignment at threshold `tau` is `delta`:
/// `ceil(−ln(1 − ω/δ) / (2ητ²))`.
pub fn iteration_bound(delta: f64, omega: f64, eta: f64, tau: f64) -> Result<u64> {
    if !(delta > 0.0) {
        return Err(Error::invalid_input("iteration_bound: delta must be positive"));
    }
    if !(omega >= 0.0) || omega >= delta {
        return Err(Error::invalid_input(
            "iteration_bound: omega must satisfy 0 <= omega < delta (the bound diverges as omega -> delta)",
        ));
    }
    if !(eta > 0.0) || !(tau > 0.0) {
        return Err(Error::invalid_input("iteration_bound: eta and tau must be positive"));
    }
    let raw = -(1.0 - omega / delta).ln() / (2.0 * eta * tau * tau);
    Ok(raw.ceil() as u64)
}

/// Per-direction share of the loss and the weight movement needed to
/// clear it.
#[derive(Debug, Clone)]
pub struct PhaseEntry {
    pub sigma: f64,
    /// `(u_iᵀy)²`: this direction's share of the reducible loss.
    pub loss_share: f64,
    /// `y^U_i / σ_i`: where the rotated weight must move to clear the share.
    pub required_weight: f64,
    /// Whether `σ_i ≥ τ` (a fast direction at this threshold).
    pub is_fast: bool,
}

/// Fast/slow decomposition of an instance at threshold `tau`.
#[derive(Debug, Clone)]
pub struct PhaseBreakdown {
    pub entries: Vec<PhaseEntry>,
    /// `‖y‖² − Σ loss_share`: label energy outside the column span.
    pub residual: f64,
}

pub fn phase_breakdown(svd: &SvdResult, y: &[f64], tau: f64) -> Result<PhaseBreakdown> {
    let coeffs = crate::linalg::project_labels(svd, y)?;
    let mut entries = Vec::with_capacity(svd.rank);
    let mut total = 0.0;
    for (c, &s) in coeffs.iter().zip(&svd.sigma) {
        total += c * c;
        entries.push(PhaseEntry {
            sigma: s,
            loss_share: c * c,
            required_weight: c / s,
            is_fast: s >= tau,
        });
    }
    Ok(PhaseBreakdown { entries, residual: norm_sq(y) - total })
}

/// For each loss fraction `f`, the first recorded `‖w_t‖` at which the
/// reducible loss has dropped by at least `f` of its initial value
/// (with a 1e-12 relative slack so `f = 1` is attainable in floating
/// point). Unreached fractions come back as `None`.
pub fn weight_norm_at_loss(
    phi: &Mat,
    y: &[f64],
    cfg: &GdConfig,
    loss_fractions: &[f64],
) -> Result<Vec<Option<f64>>> {
    if cfg.record_every == 0 {
        return Err(Error::invalid_config("record_every must be at least 1"));
    }
    for w in loss_fractions.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::invalid_input("loss fractions must be strictly ascending"));
        }
    }
    if loss_fractions.iter().any(|&f| !(f > 0.0) || f > 1.0) {
        return Err(Error::invalid_input("loss fractions must lie in (0, 1]"));
    }

    let mut gd = LinearGd::new(phi, y, cfg.eta)?;
    let r0 = gd.pred_dist().powi(2);
    let mut out: Vec<Option<f64>> = vec![None; loss_fractions.len()];
    let mut next = 0usize;
    let slack = 1e-12 * r0;

    let check = |gd: &LinearGd, next: &mut usize, out: &mut Vec<Option<f64>>| {
        let r = gd.pred_dist().powi(2);
        while *next < loss_fractions.len() && r0 - r >= loss_fractions[*next] * r0 - slack {
            out[*next] = Some(gd.weight_norm());
            *next += 1;
        }
    };

    check(&gd, &mut next, &mut out);
    for t in 1..=cfg.max_iters {
        gd.step();
        if t % cfg.record_every == 0 || t == cfg.max_iters {
            check(&gd, &mut next, &mut out);
            if next == loss_fractions.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// Loss decomposition check data: left side `‖Φw − y‖²` and right side
/// `Σ (σ_i w^V_i − y^U_i)² + ‖y‖² − Σ (y^U_i)²` computed through the SVD.
pub fn loss_decomposition(svd: &SvdResult, phi: &Mat, y: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    if w.len() != phi.cols() || y.len() != phi.rows() {
        return Err(Error::invalid_input("loss_decomposition: shape mismatch"));
    }
    let lhs = LinearGd::loss_of(phi, y, w);
    let y_u = crate::linalg::project_labels(svd, y)?;
    // w rotated into the right singular basis.
    let mut rhs = 0.0;
    let mut retained = 0.0;
    for k in 0..svd.rank {
        let wv: f64 = (0..svd.d()).map(|j| svd.v.get(j, k) * w[j]).sum();
        let term = svd.sigma[k] * wv - y_u[k];
        rhs += term * term;
        retained += y_u[k] * y_u[k];
    }
    rhs += norm_sq(y) - retained;
    Ok((lhs, rhs))
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

    fn rel_diff(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    fn random_instance(n: usize, d: usize, seed: u64) -> (Mat, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = Mat::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        (phi, y)
    }

    #[test]
    fn closed_form_at_zero_is_projection_energy() {
        let (phi, y) = random_instance(40, 8, 1);
        let svd = thin_svd(&phi).unwrap();
        let eta = default_eta(&svd);
        let (dist, loss) = closed_form_trajectory(&svd, &y, eta, 0).unwrap();
        let coeffs = crate::linalg::project_labels(&svd, &y).unwrap();
        assert_near(dist * dist, norm_sq(&coeffs), 1e-10, "t=0 distance");
        assert_near(loss, norm_sq(&y), 1e-10, "t=0 loss is ‖y‖²");
    }

    #[test]
    fn closed_form_contracts_to_zero() {
        let (phi, y) = random_instance(20, 5, 2);
        let svd = thin_svd(&phi).unwrap();
        let eta = default_eta(&svd);
        let (dist, _) = closed_form_trajectory(&svd, &y, eta, 1_000_000).unwrap();
        assert!(dist < 1e-6 * norm(&y), "contraction: {dist}");
    }

    #[test]
    fn closed_form_matches_iterative() {
        let (phi, y) = random_instance(200, 50, 3);
        let svd = thin_svd(&phi).unwrap();
        let eta = default_eta(&svd);
        let cfg = GdConfig::new(eta, 100, 1);
        let report = iterative_gd(&phi, &y, &cfg).unwrap();
        for &t in &[1usize, 10, 100] {
            let (dist, loss) = closed_form_trajectory(&svd, &y, eta, t).unwrap();
            let idx = report.iters.iter().position(|&i| i == t).unwrap();
            assert!(
                rel_diff(dist, report.pred_dist[idx]) < 1e-8,
                "pred_dist at t={t}: closed {dist} vs iter {}",
                report.pred_dist[idx]
            );
            assert!(
                rel_diff(loss, report.train_loss[idx]) < 1e-8,
                "loss at t={t}"
            );
        }
    }

    #[test]
    fn eta_out_of_range_is_rejected() {
        let (phi, y) = random_instance(10, 3, 4);
        let svd = thin_svd(&phi).unwrap();
        let bad = 1.0 / (svd.sigma_max() * svd.sigma_max());
        assert!(matches!(
            closed_form_trajectory(&svd, &y, bad, 5),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            iterative_gd(&phi, &y, &GdConfig::new(bad * 2.0, 10, 1)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn zero_labels_keep_zero_weights() {
        let (phi, _) = random_instance(12, 4, 5);
        let y = vec![0.0; 12];
        let report = iterative_gd(&phi, &y, &GdConfig::new(0.01, 20, 5)).unwrap();
        for wn in report.weight_norm {
            assert_eq!(wn, 0.0);
        }
    }

    #[test]
    fn orthonormal_square_scalar_recurrence() {
        let t = 1.1_f64;
        let phi = Mat::from_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]).unwrap();
        let y = vec![0.8, -0.4];
        let w_star = phi.tr_mul_vec(&y);
        let mut gd = LinearGd::new(&phi, &y, 0.5).unwrap();
        for step in 1..=6 {
            gd.step();
            let scale = 1.0 - 0.5_f64.powi(step);
            for k in 0..2 {
                assert_near(
                    gd.weights()[k],
                    scale * w_star[k],
                    1e-12,
                    &format!("w at step {step}"),
                );
            }
        }
    }

    #[test]
    fn final_loss_respects_optimum() {
        let (phi, y) = random_instance(30, 6, 6);
        let report = iterative_gd(&phi, &y, &GdConfig::new(0.01, 500, 50)).unwrap();
        let svd = thin_svd(&phi).unwrap();
        let w_star = crate::linalg::least_squares_solution(&svd, &y).unwrap();
        let best = LinearGd::loss_of(&phi, &y, &w_star);
        assert!(*report.train_loss.last().unwrap() >= best - 1e-10);
    }

    #[test]
    fn losses_are_monotone_under_valid_eta() {
        let (phi, y) = random_instance(60, 12, 7);
        let report = iterative_gd(&phi, &y, &GdConfig::new(0.005, 300, 3)).unwrap();
        for w in report.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "loss must not increase");
        }
        for w in report.pred_dist.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "pred_dist must not increase");
        }
    }

    #[test]
    fn divergence_detector_fires_on_bad_eta() {
        let (phi, y) = random_instance(15, 4, 8);
        let svd = thin_svd(&phi).unwrap();
        let bad = 2.5 / (svd.sigma_max() * svd.sigma_max());
        let err = iterative_gd_unchecked(&phi, &y, &GdConfig::new(bad, 500, 1)).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "got {err:?}");
    }

    #[test]
    fn iteration_bound_examples() {
        assert_eq!(iteration_bound(1.0, 0.0, 0.1, 1.0).unwrap(), 0);
        assert_eq!(iteration_bound(1.0, 0.9, 0.1, 1.0).unwrap(), 12);
        assert!(iteration_bound(1.0, 1.0, 0.1, 1.0).is_err());
        assert!(iteration_bound(0.5, 0.7, 0.1, 1.0).is_err());
    }

    #[test]
    fn phase_breakdown_basis_vector() {
        let (phi, _) = random_instance(25, 5, 9);
        let svd = thin_svd(&phi).unwrap();
        let y = svd.u.col(0);
        let tau = 0.5 * (svd.sigma[0] + svd.sigma[1]);
        let pb = phase_breakdown(&svd, &y, tau).unwrap();
        let fast: f64 = pb.entries.iter().filter(|e| e.is_fast).map(|e| e.loss_share).sum();
        let slow: f64 = pb.entries.iter().filter(|e| !e.is_fast).map(|e| e.loss_share).sum();
        assert_near(fast, 1.0, 1e-10, "fast share");
        assert_near(slow, 0.0, 1e-10, "slow share");
    }

    #[test]
    fn phase_breakdown_two_process_instance() {
        // Rank-2 instance with σ = (6, 1) and equal loss shares: the slow
        // process must move its weight 6 times farther.
        let phi = Mat::from_rows(&[vec![6.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let svd = thin_svd(&phi).unwrap();
        let h = 0.5_f64.sqrt();
        let y = vec![h, h];
        let pb = phase_breakdown(&svd, &y, 3.0).unwrap();
        assert_eq!(pb.entries.len(), 2);
        assert_near(pb.entries[0].loss_share, 0.5, 1e-12, "fast share");
        assert_near(pb.entries[1].loss_share, 0.5, 1e-12, "slow share");
        assert!(pb.entries[0].is_fast && !pb.entries[1].is_fast);
        let ratio = pb.entries[1].required_weight.abs() / pb.entries[0].required_weight.abs();
        assert_near(ratio, 6.0, 1e-10, "required weight ratio");
        assert_near(pb.residual, 0.0, 1e-12, "no residual");
    }

    #[test]
    fn phase_shares_sum_to_retained_alignment() {
        let (phi, y) = random_instance(40, 9, 10);
        let svd = thin_svd(&phi).unwrap();
        let pb = phase_breakdown(&svd, &y, 1.0).unwrap();
        let total: f64 = pb.entries.iter().map(|e| e.loss_share).sum();
        let retained = crate::align::alignment_at(&svd, &y, 0.0).unwrap();
        assert_near(total, retained, 1e-8, "share total");
        assert_near(total + pb.residual, norm_sq(&y), 1e-8, "energy budget");
    }

    #[test]
    fn weight_norm_at_loss_orderings() {
        let (phi, _) = random_instance(50, 10, 11);
        let svd = thin_svd(&phi).unwrap();
        let y_best = svd.u.col(0);
        let y_worst = svd.u.col(svd.rank - 1);
        let eta = default_eta(&svd);
        let cfg = GdConfig::new(eta, 200_000, 1);
        let best = weight_norm_at_loss(&phi, &y_best, &cfg, &[0.9]).unwrap()[0].unwrap();
        let worst = weight_norm_at_loss(&phi, &y_worst, &cfg, &[0.9]).unwrap()[0].unwrap();
        assert!(
            best < worst,
            "aligned target needs smaller weights: {best} vs {worst}"
        );
    }

    #[test]
    fn weight_norm_small_fraction_small_weights() {
        let (phi, y) = random_instance(30, 6, 12);
        let cfg = GdConfig::new(0.005, 10_000, 1);
        let got = weight_norm_at_loss(&phi, &y, &cfg, &[0.01, 0.5]).unwrap();
        let early = got[0].unwrap();
        let later = got[1].unwrap();
        assert!(early < later, "weights grow with the fraction");
    }

    #[test]
    fn weight_norm_full_reduction_reaches_solution() {
        // Consistent system: labels in the column span.
        let (phi, _) = random_instance(30, 6, 13);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let w_true: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let y = phi.mul_vec(&w_true);
        let svd = thin_svd(&phi).unwrap();
        let eta = default_eta(&svd);
        let cfg = GdConfig::new(eta, 2_000_000, 10);
        let got = weight_norm_at_loss(&phi, &y, &cfg, &[1.0]).unwrap();
        let w_star = crate::linalg::least_squares_solution(&svd, &y).unwrap();
        let wn = got[0].expect("full reduction reached");
        assert_near(wn, norm(&w_star), 1e-4, "weight norm at full reduction");
    }

    #[test]
    fn decomposition_and_pythagoras() {
        let (phi, y) = random_instance(45, 9, 15);
        let svd = thin_svd(&phi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let w: Vec<f64> = (0..9).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let (lhs, rhs) = loss_decomposition(&svd, &phi, &y, &w).unwrap();
        assert!(rel_diff(lhs, rhs) < 1e-8, "decomposition: {lhs} vs {rhs}");

        // Pythagoras: ‖Φw − y‖² = ‖Φw* − y‖² + ‖Φw − Φw*‖².
        let w_star = crate::linalg::least_squares_solution(&svd, &y).unwrap();
        let irreducible = LinearGd::loss_of(&phi, &y, &w_star);
        let pw = phi.mul_vec(&w);
        let ps = phi.mul_vec(&w_star);
        let dist_sq: f64 = pw.iter().zip(&ps).map(|(a, b)| (a - b) * (a - b)).sum();
        assert!(
            rel_diff(lhs, irreducible + dist_sq) < 1e-8,
            "pythagoras: {lhs} vs {}",
            irreducible + dist_sq
        );
    }

    #[test]
    fn bound_holds_on_random_instance() {
        let (phi, y) = random_instance(80, 16, 17);
        let svd = thin_svd(&phi).unwrap();
        let eta = default_eta(&svd);
        let tau = svd.sigma[svd.rank / 2];
        let delta = crate::align::alignment_at(&svd, &y, tau).unwrap();
        let bound = iteration_bound(delta, 0.9 * delta, eta, tau).unwrap();
        let measured = iterations_to_reduce(&phi, &y, eta, 0.9 * delta, bound as usize)
            .unwrap()
            .expect("target reached within the bound");
        assert!(measured as u64 <= bound, "measured {measured} > bound {bound}");
    }
}
