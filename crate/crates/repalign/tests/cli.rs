//! End-to-end tests of the `repalign` binary: output contracts, error
//! exits, config precedence, and the shuffled-label control.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_repalign"))
}

fn read_csv_column(path: &Path, col: usize) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

/// Gini coefficient of a nonnegative sample (0 = uniform, 1 = concentrated).
fn gini(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut num = 0.0;
    for a in values {
        for b in values {
            num += (a - b).abs();
        }
    }
    num / (2.0 * n * n * mean)
}

#[test]
fn align_missing_input_fails_with_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["align", "--input", "/nonexistent/file.csv", "--label-column", "y"])
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty(), "an error must land on stderr");
}

#[test]
fn gd_rejects_eta_above_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["gd", "--n", "100", "--d", "10", "--eta", "1000"])
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("stability limit"), "stderr: {stderr}");
}

#[test]
fn align_shuffled_projections_are_flatter() {
    // Labels on the top singular direction: projections concentrate on
    // one index; shuffling spreads them out, dropping the Gini.
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("a");
    let status = bin()
        .args([
            "align",
            "--generator",
            "decaying",
            "--n",
            "300",
            "--d",
            "30",
            "--labels",
            "mix",
            "--mix",
            "0:1.0",
            "--shuffle-seed",
            "3",
        ])
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let plain = read_csv_column(&out_dir.join("projections.csv"), 2);
    let shuffled = read_csv_column(&out_dir.join("projections_shuffled.csv"), 2);
    assert_eq!(plain.len(), 30);
    let (g_plain, g_shuffled) = (gini(&plain), gini(&shuffled));
    assert!(
        g_shuffled < g_plain,
        "shuffled projections must be flatter: {g_shuffled} vs {g_plain}"
    );
}

#[test]
fn gd_emits_contract_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("g");
    let status = bin()
        .args(["gd", "--n", "120", "--d", "12", "--iters", "200"])
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let header = |name: &str| {
        std::fs::read_to_string(out_dir.join(name))
            .unwrap()
            .lines()
            .find(|l| !l.starts_with('#'))
            .unwrap()
            .to_string()
    };
    assert_eq!(header("trajectory.csv"), "iter,pred_dist,loss,weight_norm");
    assert_eq!(
        header("phases.csv"),
        "index,sigma,loss_share,required_weight,is_fast"
    );
    assert_eq!(header("bounds.csv"), "tau,delta,omega,bound,measured_iters,satisfied");
}

#[test]
fn align_circle_curve_starts_at_n() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("a");
    let status = bin()
        .args(["align", "--generator", "circle"])
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let values = read_csv_column(&out_dir.join("curve.csv"), 1);
    // ±1 labels: the τ=0 value is exactly n.
    assert_eq!(values[0], 100.0);
}

#[test]
fn train_depth_three_emits_four_curves_per_phase() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("t");
    let status = bin()
        .args([
            "train",
            "--n",
            "300",
            "--widths",
            "60,20,20,20,1",
            "--epochs",
            "3",
            "--converge",
            "false",
        ])
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    for phase in ["init", "trained"] {
        let count = std::fs::read_dir(&out_dir)
            .unwrap()
            .filter(|e| {
                let name = e.as_ref().unwrap().file_name().to_string_lossy().into_owned();
                name.starts_with(&format!("align_{phase}_")) && name.ends_with(".csv")
            })
            .count();
        assert_eq!(count, 4, "{phase}: 3 hidden + input");
    }
    // The emitted checkpoint parses back into a usable model.
    let model = repalign::nn::load_checkpoint(&out_dir.join("checkpoint.txt")).unwrap();
    assert_eq!(model.spec.layer_widths, vec![60, 20, 20, 20, 1]);
    let x = repalign::linalg::Mat::from_fn(4, 60, |r, c| ((r * 13 + c) % 7) as f64 / 7.0);
    let p1 = model.predict(&x);
    let p2 = repalign::nn::load_checkpoint(&out_dir.join("checkpoint.txt"))
        .unwrap()
        .predict(&x);
    assert_eq!(p1, p2, "checkpoint reload gives identical forward outputs");
}

#[test]
fn peaks_emits_nine_curves_per_seed_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("p");
    let status = bin()
        .args([
            "peaks",
            "--seeds",
            "2",
            "--n-source",
            "300",
            "--n-target",
            "40",
            "--n-test",
            "60",
            "--epoch-cap",
            "5",
            "--target-steps",
            "50",
        ])
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out_dir.join("manifest.txt").exists());
    for seed in 0..2 {
        let count = std::fs::read_dir(&out_dir)
            .unwrap()
            .filter(|e| {
                let name = e.as_ref().unwrap().file_name().to_string_lossy().into_owned();
                name.starts_with(&format!("seed{seed}_align_")) && name.ends_with(".csv")
            })
            .count();
        assert!(count >= 9, "seed {seed} has {count} alignment curves, need >= 9");
    }
}

#[test]
fn cli_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("base.cfg");
    std::fs::write(&cfg_path, "generator=circle\ncircle_seed=1\n").unwrap();

    // Run with the file's seed, with an overridden seed, and directly.
    let from_file = dir.path().join("file");
    let overridden = dir.path().join("override");
    let direct = dir.path().join("direct");
    assert!(bin()
        .args(["align", "--config", cfg_path.to_str().unwrap()])
        .arg("--out")
        .arg(&from_file)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["align", "--config", cfg_path.to_str().unwrap(), "--circle-seed", "2"])
        .arg("--out")
        .arg(&overridden)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["align", "--generator", "circle", "--circle-seed", "2"])
        .arg("--out")
        .arg(&direct)
        .status()
        .unwrap()
        .success());

    let a = std::fs::read(from_file.join("curve.csv")).unwrap();
    let b = std::fs::read(overridden.join("curve.csv")).unwrap();
    let c = std::fs::read(direct.join("curve.csv")).unwrap();
    assert_ne!(a, b, "override must change the output");
    assert_eq!(b, c, "flag override equals a direct run");
}

#[test]
fn env_var_sets_default_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["align", "--generator", "circle"])
        .env("REPALIGN_OUT", dir.path())
        .current_dir(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("align/curve.csv").exists());
    assert!(dir.path().join("align/manifest.txt").exists());
}

#[test]
fn peaks_depth_flag_controls_source_network() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("p");
    let status = bin()
        .args([
            "peaks",
            "--seeds",
            "1",
            "--depth",
            "2",
            "--width",
            "20",
            "--n-source",
            "200",
            "--n-target",
            "30",
            "--n-test",
            "40",
            "--epoch-cap",
            "3",
            "--target-steps",
            "30",
        ])
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = std::fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("depth=2"));
}

#[test]
fn diff_subtracts_external_curves() {
    let dir = tempfile::tempdir().unwrap();
    let align_dir = dir.path().join("a");
    assert!(bin()
        .args(["align", "--generator", "circle", "--shuffle-seed", "4"])
        .arg("--out")
        .arg(&align_dir)
        .status()
        .unwrap()
        .success());
    let diff_dir = dir.path().join("d");
    assert!(bin()
        .args([
            "diff",
            "--a",
            align_dir.join("curve.csv").to_str().unwrap(),
            "--b",
            align_dir.join("curve_shuffled.csv").to_str().unwrap(),
        ])
        .arg("--out")
        .arg(&diff_dir)
        .status()
        .unwrap()
        .success());
    let diff = repalign::io::read_curve_csv(&diff_dir.join("diff.csv")).unwrap();
    assert_eq!(diff.value_at(0.0), 0.0, "both curves start at ||y||^2");
    // True labels concentrate on the top direction, so somewhere in the
    // mid-threshold range the difference is positive.
    assert!(diff.values.iter().any(|&v| v > 0.0));
}
