//! Closed-form gradient-descent trajectories and alignment-driven
//! iteration bounds, checked against the iterative update.
//!
//! For linear regression on a fixed representation, zero-initialized
//! batch GD satisfies `‖Φw_t − Φw*‖² = Σ (1−ησ_i²)^{2t} (u_iᵀy)²`, and
//! reducing the loss by 0.9·Alignment(Φ, y, τ) takes at most
//! `⌈−ln(0.1)/(2ητ²)⌉` iterations.

use repalign::align::alignment_at;
use repalign::datagen::{decaying_spectrum_matrix, uniform_vector};
use repalign::gd::{
    closed_form_trajectory, default_eta, iteration_bound, iterations_to_reduce, iterative_gd,
    GdConfig,
};
use repalign::linalg::thin_svd;

fn main() {
    let (n, d) = (400, 40);
    let phi = decaying_spectrum_matrix(n, d, 0.8, 21).unwrap();
    let y = uniform_vector(n, 22);
    let svd = thin_svd(&phi).unwrap();
    let eta = default_eta(&svd);
    println!("instance: {n}x{d}, sigma_max = {:.3}, eta = {eta:.5}", svd.sigma_max());

    let report = iterative_gd(&phi, &y, &GdConfig::new(eta, 1000, 1)).unwrap();
    println!("\nclosed form vs iterative (prediction distance):");
    for &t in &[1usize, 10, 100, 1000] {
        let (dist, loss) = closed_form_trajectory(&svd, &y, eta, t).unwrap();
        let k = report.iters.iter().position(|&i| i == t).unwrap();
        let rel = (dist - report.pred_dist[k]).abs() / dist.max(report.pred_dist[k]);
        println!(
            "  t = {t:5}  closed {dist:12.6e}  iterative {:12.6e}  rel diff {rel:8.2e}  loss {loss:10.4}",
            report.pred_dist[k]
        );
    }

    println!("\niteration bounds per threshold (reduce reducible loss by 0.9*delta):");
    println!("  {:>8} {:>10} {:>8} {:>9}", "tau", "delta", "bound", "measured");
    for idx in [d - 1, d / 2, d / 8, 0] {
        let tau = svd.sigma[idx];
        let delta = alignment_at(&svd, &y, tau).unwrap();
        let bound = iteration_bound(delta, 0.9 * delta, eta, tau).unwrap();
        let measured = iterations_to_reduce(&phi, &y, eta, 0.9 * delta, bound as usize)
            .unwrap()
            .expect("bound is sound");
        println!("  {tau:8.3} {delta:10.3} {bound:8} {measured:9}");
    }
}
