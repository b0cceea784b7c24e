//! Two synthetic label vectors whose learning curves cross, exactly as
//! their alignment curves predict.
//!
//! On a decaying-spectrum representation, y1 sits entirely on the 10th
//! singular vector; y2 is a 0.9/0.435 mix of the 5th and 50th. Early on,
//! y2 trains faster (most of its energy rides the large 5th direction);
//! once that part is gone it crawls through the 50th direction while y1
//! keeps contracting at the 10th direction's rate and overtakes it.

use repalign::align::alignment_at;
use repalign::datagen::{decaying_spectrum_matrix, synthetic_singular_targets};
use repalign::gd::{default_eta, iterative_gd, GdConfig};
use repalign::linalg::thin_svd;

fn main() {
    let phi = decaying_spectrum_matrix(600, 60, 0.7, 11).unwrap();
    let svd = thin_svd(&phi).unwrap();
    let y1 = synthetic_singular_targets(&svd, &[(9, 1.0)]).unwrap();
    let y2 = synthetic_singular_targets(&svd, &[(4, 0.9), (49, 0.435)]).unwrap();
    println!(
        "sigma_5 = {:.3}, sigma_10 = {:.3}, sigma_50 = {:.3}",
        svd.sigma[4], svd.sigma[9], svd.sigma[49]
    );

    println!("\nalignment of y2 drops exactly at the mixed-in singular values:");
    for tau in [0.5 * svd.sigma[49], 0.5 * (svd.sigma[49] + svd.sigma[4]), svd.sigma[4] * 1.01] {
        println!(
            "  alignment(y2, tau = {tau:6.3}) = {:.6}",
            alignment_at(&svd, &y2, tau).unwrap()
        );
    }

    let eta = default_eta(&svd);
    let cfg = GdConfig::new(eta, 200, 1);
    let r1 = iterative_gd(&phi, &y1, &cfg).unwrap();
    let r2 = iterative_gd(&phi, &y2, &cfg).unwrap();

    println!("\nlearning curves (training loss):");
    println!("  {:>5} {:>12} {:>12}", "t", "y1 (10th)", "y2 (5th+50th)");
    for &t in &[1usize, 5, 10, 25, 50, 75, 100, 150, 200] {
        let k = r1.iters.iter().position(|&i| i == t).unwrap();
        println!("  {t:5} {:12.6} {:12.6}", r1.train_loss[k], r2.train_loss[k]);
    }
    let lead = r1
        .iters
        .iter()
        .enumerate()
        .find(|(k, &t)| t > 0 && r2.train_loss[*k] < r1.train_loss[*k])
        .map(|(k, _)| k);
    let crossing = lead.and_then(|start| {
        r1.iters
            .iter()
            .enumerate()
            .skip(start)
            .find(|(k, _)| r1.train_loss[*k] < r2.train_loss[*k])
            .map(|(_, t)| *t)
    });
    println!("\ny2 leads early; y1 takes over at t = {crossing:?}");
}
