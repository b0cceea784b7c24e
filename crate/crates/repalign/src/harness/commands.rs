//! The five harness commands. Each takes a fully merged [`KvConfig`],
//! writes its CSVs and a gnuplot script into the output directory, and
//! finishes with an atomically written manifest. Exit status of the
//! binary is zero only when every requested output was written and all
//! internal self-checks passed.

use super::{KvConfig, RunContext};
use crate::align::{alignment_at, alignment_curve, curve_diff, shuffle_labels, ThresholdGrid};
use crate::dataset::Dataset;
use crate::datagen::{
    circle_dataset, decaying_spectrum_matrix, load_csv, synthetic_singular_targets, uniform_vector,
    CircleLabeling, CircleSpec, CsvOptions,
};
use crate::error::{Error, Result};
use crate::gd::{
    closed_form_trajectory, default_eta, iteration_bound, iterations_to_reduce, iterative_gd,
    phase_breakdown, GdConfig,
};
use crate::io::{fmt_f64, mean_stderr};
use crate::linalg::{norm, norm_sq, normalize_rows, thin_svd, SvdResult};
use crate::nn::{
    hidden_representation, init_model, save_checkpoint, train, Activation, LossKind, MlpSpec,
    OptimizerKind, TrainConfig,
};
use crate::peaks::{
    make_dataset, make_task_triple, pooled_median_threshold, transfer_experiment, LabelKind,
    PeaksTask, RepKind, TargetTask, TransferConfig,
};
use std::path::Path;

/// Parses a task written with variable names, e.g. `A,B,C`.
fn parse_task(s: &str) -> Result<PeaksTask> {
    let vars: Vec<usize> = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            if t.len() == 1 {
                let c = t.chars().next().unwrap().to_ascii_uppercase();
                if ('A'..='F').contains(&c) {
                    return Ok(c as usize - 'A' as usize);
                }
            }
            Err(Error::invalid_config(format!("bad task variable '{t}' (want A..F)")))
        })
        .collect::<Result<_>>()?;
    if vars.len() != 3 {
        return Err(Error::invalid_config("task needs exactly three variables, e.g. A,B,C"));
    }
    PeaksTask::new(vars[0], vars[1], vars[2])
}

/// Parses a singular-vector mix like `4:0.9;49:0.435` (index:weight pairs).
fn parse_mix(s: &str) -> Result<Vec<(usize, f64)>> {
    s.split(';')
        .map(|pair| {
            let (idx, w) = pair
                .split_once(':')
                .ok_or_else(|| Error::invalid_config(format!("bad mix entry '{pair}'")))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| Error::invalid_config(format!("bad mix index '{idx}'")))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::invalid_config(format!("bad mix weight '{w}'")))?;
            Ok((idx, w))
        })
        .collect()
}

/// Resolves the shared input keys into a dataset.
///
/// Sources: `input=<csv>` with `label_column` (flags `normalize`,
/// `map_labels`), or `generator=circle|decaying|peaks`.
fn load_input(cfg: &KvConfig) -> Result<(Dataset, String)> {
    if let Some(path) = cfg.get("input") {
        let label_column = cfg
            .get("label_column")
            .ok_or_else(|| Error::invalid_config("csv input needs label_column"))?;
        let options = CsvOptions {
            normalize_rows: cfg.bool_or("normalize", false)?,
            map_labels: cfg.bool_or("map_labels", false)?,
        };
        let data = load_csv(Path::new(path), label_column, options)?;
        return Ok((data, format!("input={path}")));
    }
    match cfg.str_or("generator", "circle") {
        "circle" => {
            let defaults = CircleSpec::default();
            let labeling = match cfg.str_or("labeling", "major_axis") {
                "major_axis" => CircleLabeling::MajorAxis,
                "minor_axis" => CircleLabeling::MinorAxis,
                other => {
                    return Err(Error::invalid_config(format!(
                        "labeling must be major_axis or minor_axis, found '{other}'"
                    )))
                }
            };
            let spec = CircleSpec {
                n_per_class: cfg.usize_or("circle_n_per_class", defaults.n_per_class)?,
                angle_spread: cfg.f64_or("circle_spread", defaults.angle_spread)?,
                seed: cfg.u64_or("circle_seed", defaults.seed)?,
                labeling,
            };
            let note = format!("seed={}", spec.seed);
            Ok((circle_dataset(&spec)?, note))
        }
        "decaying" => {
            let n = cfg.usize_or("n", 600)?;
            let d = cfg.usize_or("d", 60)?;
            let alpha = cfg.f64_or("alpha", 0.7)?;
            let matrix_seed = cfg.u64_or("matrix_seed", 1)?;
            let phi = decaying_spectrum_matrix(n, d, alpha, matrix_seed)?;
            let y = match cfg.str_or("labels", "uniform") {
                "uniform" => uniform_vector(n, cfg.u64_or("label_seed", 2)?),
                "mix" => {
                    let mix = parse_mix(
                        cfg.get("mix")
                            .ok_or_else(|| Error::invalid_config("labels=mix needs a mix key"))?,
                    )?;
                    let svd = thin_svd(&phi)?;
                    synthetic_singular_targets(&svd, &mix)?
                }
                other => {
                    return Err(Error::invalid_config(format!(
                        "labels must be uniform or mix, found '{other}'"
                    )))
                }
            };
            let note = format!("matrix_seed={matrix_seed}");
            Ok((Dataset::new(phi, y)?, note))
        }
        "peaks" => {
            let task = match cfg.get("task") {
                Some(t) => parse_task(t)?,
                None => make_task_triple(cfg.u64_or("task_seed", 0)?).source,
            };
            let n = cfg.usize_or("n", 2000)?;
            let data_seed = cfg.u64_or("data_seed", 7)?;
            let note = format!("seed={data_seed} task={}", task.name());
            Ok((make_dataset(&task, n, data_seed)?, note))
        }
        other => Err(Error::invalid_config(format!("unknown generator '{other}'"))),
    }
}

fn gnuplot_header() -> String {
    "set datafile separator \",\"\nset key outside\n".to_string()
}

// ── align ───────────────────────────────────────────────────────────

/// Alignment curve and per-direction projections for a dataset, with an
/// optional shuffled-label control.
pub fn cmd_align(cfg: &KvConfig, out_dir: &Path) -> Result<Vec<String>> {
    let mut ctx = RunContext::new("align", cfg, out_dir)?;
    let (data, note) = load_input(cfg)?;
    let svd = thin_svd(&data.x)?;

    let grid = match cfg.str_or("grid", "auto") {
        "auto" => ThresholdGrid::Auto,
        "uniform" => {
            let max = cfg.f64_or("grid_max", svd.sigma_max() * 1.05)?;
            let points = cfg.usize_or("grid_points", 100)?.max(2);
            let step = max / (points - 1) as f64;
            ThresholdGrid::Explicit((0..points).map(|i| i as f64 * step).collect())
        }
        other => return Err(Error::invalid_config(format!("unknown grid '{other}'"))),
    };

    let emit = |ctx: &mut RunContext, suffix: &str, y: &[f64]| -> Result<()> {
        let curve = alignment_curve(&svd, y, &grid)?;
        ctx.write_curve(&format!("curve{suffix}.csv"), &note, &curve)?;
        let coeffs = crate::linalg::project_labels(&svd, y)?;
        let rows: Vec<String> = coeffs
            .iter()
            .zip(&svd.sigma)
            .enumerate()
            .map(|(i, (c, s))| format!("{},{},{}", i + 1, fmt_f64(*s), fmt_f64(c * c)))
            .collect();
        ctx.write_csv(
            &format!("projections{suffix}.csv"),
            &note,
            "index,sigma,projection_sq",
            &rows,
        )
    };

    emit(&mut ctx, "", &data.y)?;
    let mut seeds = Vec::new();
    if let Some(shuffle_seed) = cfg.get("shuffle_seed") {
        let shuffle_seed: u64 = shuffle_seed
            .parse()
            .map_err(|_| Error::invalid_config("bad shuffle_seed"))?;
        let shuffled = shuffle_labels(&data.y, shuffle_seed);
        emit(&mut ctx, "_shuffled", &shuffled)?;
        seeds.push(shuffle_seed);
    }

    let mut script = gnuplot_header();
    script.push_str("set xlabel \"threshold\"\nset ylabel \"alignment\"\n");
    if ctx.outputs.contains(&"curve_shuffled.csv".to_string()) {
        script.push_str(
            "plot \"curve.csv\" using 1:2 with steps title \"labels\", \\\n     \"curve_shuffled.csv\" using 1:2 with steps title \"shuffled\"\n",
        );
    } else {
        script.push_str("plot \"curve.csv\" using 1:2 with steps title \"labels\"\n");
    }
    ctx.write_file("align.gnuplot", &script)?;
    ctx.finish(seeds)
}

// ── gd ──────────────────────────────────────────────────────────────

/// Iterative vs closed-form trajectories with a self-check column, a
/// threshold/iteration-bound table, and a fast/slow phase table.
pub fn cmd_gd(cfg: &KvConfig, out_dir: &Path) -> Result<Vec<String>> {
    let mut ctx = RunContext::new("gd", cfg, out_dir)?;
    // The synthetic decaying-spectrum instance is the default input here.
    let mut cfg_with_default = cfg.clone();
    if !cfg.contains("input") && !cfg.contains("generator") {
        cfg_with_default.set("generator", "decaying");
    }
    let (data, note) = load_input(&cfg_with_default)?;
    ctx.config.apply(&cfg_with_default);
    ctx.config.set("command", "gd");

    let svd = thin_svd(&data.x)?;
    let eta = cfg.f64_or("eta", default_eta(&svd))?;
    let iters = cfg.usize_or("iters", 1000)?;
    let record_every = cfg.usize_or("record_every", (iters / 200).max(1))?;
    ctx.config.set("eta", fmt_f64(eta));
    ctx.config.set("iters", iters);
    ctx.config.set("record_every", record_every);

    let report = iterative_gd(&data.x, &data.y, &GdConfig::new(eta, iters, record_every))?;

    // Canonical trajectory file.
    let rows: Vec<String> = report
        .iters
        .iter()
        .zip(&report.pred_dist)
        .zip(&report.train_loss)
        .zip(&report.weight_norm)
        .map(|(((t, d), l), w)| format!("{t},{},{},{}", fmt_f64(*d), fmt_f64(*l), fmt_f64(*w)))
        .collect();
    ctx.write_csv("trajectory.csv", &note, "iter,pred_dist,loss,weight_norm", &rows)?;

    // Closed-form comparison with relative-difference self-check columns.
    let dist_floor = 1e-12 * norm(&data.y);
    let loss_floor = 1e-12 * norm_sq(&data.y);
    let mut max_rel: f64 = 0.0;
    let mut comparison = Vec::with_capacity(report.iters.len());
    for (k, &t) in report.iters.iter().enumerate() {
        let (cd, cl) = closed_form_trajectory(&svd, &data.y, eta, t)?;
        let rd = (report.pred_dist[k] - cd).abs() / report.pred_dist[k].abs().max(cd.abs()).max(dist_floor);
        let rl = (report.train_loss[k] - cl).abs() / report.train_loss[k].abs().max(cl.abs()).max(loss_floor);
        max_rel = max_rel.max(rd).max(rl);
        comparison.push(format!(
            "{t},{},{},{},{},{},{}",
            fmt_f64(report.pred_dist[k]),
            fmt_f64(cd),
            fmt_f64(rd),
            fmt_f64(report.train_loss[k]),
            fmt_f64(cl),
            fmt_f64(rl)
        ));
    }
    ctx.write_csv(
        "comparison.csv",
        &note,
        "iter,pred_dist_iter,pred_dist_closed,pred_dist_rel_diff,loss_iter,loss_closed,loss_rel_diff",
        &comparison,
    )?;

    // Iteration-bound table at the spectrum quartiles (or explicit taus).
    let taus: Vec<f64> = match cfg.get("taus") {
        None => spectrum_quartiles(&svd),
        Some("quartiles") => spectrum_quartiles(&svd),
        Some(_) => cfg
            .f64_list("taus")?
            .ok_or_else(|| Error::invalid_config("bad taus list"))?,
    };
    let mut bound_rows = Vec::new();
    let mut all_satisfied = true;
    for &tau in &taus {
        let delta = alignment_at(&svd, &data.y, tau)?;
        if delta <= 0.0 {
            bound_rows.push(format!("{},0,0,0,0,true", fmt_f64(tau)));
            continue;
        }
        let omega = 0.9 * delta;
        let bound = iteration_bound(delta, omega, eta, tau)?;
        let measured = iterations_to_reduce(&data.x, &data.y, eta, omega, bound as usize)?;
        let (measured_s, ok) = match measured {
            Some(m) => (m.to_string(), m as u64 <= bound),
            None => ("-1".to_string(), false),
        };
        all_satisfied &= ok;
        bound_rows.push(format!(
            "{},{},{},{bound},{measured_s},{ok}",
            fmt_f64(tau),
            fmt_f64(delta),
            fmt_f64(omega)
        ));
    }
    ctx.write_csv(
        "bounds.csv",
        &note,
        "tau,delta,omega,bound,measured_iters,satisfied",
        &bound_rows,
    )?;

    // Fast/slow phase table at the median threshold.
    let tau_mid = taus[taus.len() / 2];
    let phases = phase_breakdown(&svd, &data.y, tau_mid)?;
    let phase_rows: Vec<String> = phases
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            format!(
                "{},{},{},{},{}",
                i + 1,
                fmt_f64(e.sigma),
                fmt_f64(e.loss_share),
                fmt_f64(e.required_weight),
                e.is_fast
            )
        })
        .collect();
    ctx.write_csv(
        "phases.csv",
        &note,
        "index,sigma,loss_share,required_weight,is_fast",
        &phase_rows,
    )?;

    let mut script = gnuplot_header();
    script.push_str("set xlabel \"iteration\"\nset ylabel \"loss\"\nset logscale y\n");
    script.push_str(
        "plot \"comparison.csv\" using 1:5 with lines title \"iterative\", \\\n     \"comparison.csv\" using 1:6 with points title \"closed form\"\n",
    );
    ctx.write_file("gd.gnuplot", &script)?;

    if max_rel >= 1e-8 {
        return Err(Error::invalid_input(format!(
            "self-check failed: closed-form vs iterative max relative diff {max_rel:e} >= 1e-8"
        )));
    }
    if !all_satisfied {
        return Err(Error::invalid_input(
            "self-check failed: an iteration bound was violated",
        ));
    }
    ctx.finish(vec![])
}

/// Quartiles (25/50/75/100%) of the retained spectrum, ascending order
/// statistics of the singular values.
fn spectrum_quartiles(svd: &SvdResult) -> Vec<f64> {
    let mut asc: Vec<f64> = svd.sigma.clone();
    asc.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let r = asc.len();
    [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|q| asc[(((r - 1) as f64) * q).floor() as usize])
        .collect()
}

// ── train ───────────────────────────────────────────────────────────

/// Trains a network, checkpoints it, and emits per-layer alignment
/// curves before and after training (the input row goes through
/// row-normalization for comparability).
pub fn cmd_train(cfg: &KvConfig, out_dir: &Path) -> Result<Vec<String>> {
    let mut ctx = RunContext::new("train", cfg, out_dir)?;
    let mut cfg_with_default = cfg.clone();
    if !cfg.contains("input") && !cfg.contains("generator") {
        cfg_with_default.set("generator", "peaks");
    }
    let (data, note) = load_input(&cfg_with_default)?;
    ctx.config.apply(&cfg_with_default);
    ctx.config.set("command", "train");

    let widths: Vec<usize> = cfg
        .str_or("widths", "60,60,1")
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::invalid_config(format!("bad width '{t}'")))
        })
        .collect::<Result<_>>()?;
    if widths[0] != data.x.cols() {
        return Err(Error::invalid_config(format!(
            "widths[0]={} does not match the {} input features",
            widths[0],
            data.x.cols()
        )));
    }
    let spec = MlpSpec {
        layer_widths: widths,
        activation: Activation::parse(cfg.str_or("activation", "relu"))?,
        loss: LossKind::parse(cfg.str_or("loss", "mse"))?,
        init_seed: cfg.u64_or("init_seed", 0)?,
        rbf_bandwidth: cfg.f64_or("rbf_bandwidth", 1.0)?,
    };
    let train_cfg = TrainConfig {
        optimizer: OptimizerKind::parse(cfg.str_or("optimizer", "adam"))?,
        lr: cfg.f64_or("lr", 0.001)?,
        batch_size: cfg.usize_or("batch_size", 64)?,
        epochs: cfg.usize_or("epochs", 200)?,
        shuffle_seed: cfg.u64_or("shuffle_seed", 0)?,
        stop_on_convergence: cfg.bool_or("converge", true)?,
    };

    let model0 = init_model(&spec)?;
    let hidden = spec.hidden_layers();
    let emit_phase = |ctx: &mut RunContext, phase: &str, model: &crate::nn::MlpModel| -> Result<()> {
        let input_rep = normalize_rows(&data.x);
        let svd = thin_svd(&input_rep)?;
        let curve = alignment_curve(&svd, &data.y, &ThresholdGrid::Auto)?;
        ctx.write_curve(&format!("align_{phase}_input.csv"), &note, &curve)?;
        for layer in 1..=hidden {
            let rep = normalize_rows(&hidden_representation(model, &data.x, layer)?);
            let svd = thin_svd(&rep)?;
            let curve = alignment_curve(&svd, &data.y, &ThresholdGrid::Auto)?;
            ctx.write_curve(&format!("align_{phase}_hidden{layer}.csv"), &note, &curve)?;
        }
        Ok(())
    };

    emit_phase(&mut ctx, "init", &model0)?;
    let (model, history) = train(model0, &data, &train_cfg)?;
    emit_phase(&mut ctx, "trained", &model)?;

    let rows: Vec<String> = history
        .iter()
        .enumerate()
        .map(|(e, l)| format!("{},{}", e + 1, fmt_f64(*l)))
        .collect();
    ctx.write_csv("history.csv", &note, "epoch,mean_loss", &rows)?;

    save_checkpoint(&model, &ctx.out_dir.join("checkpoint.txt"))?;
    ctx.outputs.push("checkpoint.txt".to_string());

    let mut script = gnuplot_header();
    script.push_str("set xlabel \"threshold\"\nset ylabel \"alignment\"\n");
    script.push_str("plot \"align_init_input.csv\" using 1:2 with steps title \"input\", \\\n");
    for layer in 1..=hidden {
        script.push_str(&format!(
            "     \"align_init_hidden{layer}.csv\" using 1:2 with steps dashtype 2 title \"init h{layer}\", \\\n"
        ));
    }
    for layer in 1..hidden {
        script.push_str(&format!(
            "     \"align_trained_hidden{layer}.csv\" using 1:2 with steps title \"trained h{layer}\", \\\n"
        ));
    }
    script.push_str(&format!(
        "     \"align_trained_hidden{hidden}.csv\" using 1:2 with steps title \"trained h{hidden}\"\n"
    ));
    ctx.write_file("train.gnuplot", &script)?;

    ctx.finish(vec![spec.init_seed, train_cfg.shuffle_seed])
}

// ── peaks ───────────────────────────────────────────────────────────

/// Full transfer experiment: alignment bars/curves, few-shot learning
/// curves, weight-norm milestones, curve differences, and sign tests.
pub fn cmd_peaks(cfg: &KvConfig, out_dir: &Path) -> Result<Vec<String>> {
    let mut ctx = RunContext::new("peaks", cfg, out_dir)?;

    let seeds: Vec<u64> = match cfg.u64_list("seed_list")? {
        Some(list) => list,
        None => (0..cfg.u64_or("seeds", 10)?).collect(),
    };
    let triple = match (cfg.get("source"), cfg.get("related"), cfg.get("unrelated")) {
        (Some(s), Some(r), Some(u)) => crate::peaks::TaskTriple {
            source: parse_task(s)?,
            related: parse_task(r)?,
            unrelated: parse_task(u)?,
        },
        _ => make_task_triple(cfg.u64_or("triple_seed", 0)?),
    };
    let mut tcfg = TransferConfig::new(triple, seeds.clone());
    tcfg.n_train_source = cfg.usize_or("n_source", tcfg.n_train_source)?;
    tcfg.n_train_target = cfg.usize_or("n_target", tcfg.n_train_target)?;
    tcfg.n_test = cfg.usize_or("n_test", tcfg.n_test)?;
    tcfg.hidden_layers = cfg.usize_or("depth", tcfg.hidden_layers)?;
    tcfg.hidden_width = cfg.usize_or("width", tcfg.hidden_width)?;
    tcfg.epoch_cap = cfg.usize_or("epoch_cap", tcfg.epoch_cap)?;
    tcfg.target_steps = cfg.usize_or("target_steps", tcfg.target_steps)?;
    tcfg.target_record_every = cfg.usize_or("record_every", tcfg.target_record_every)?;
    tcfg.jobs = cfg.usize_or("jobs", 1)?;
    ctx.config.set("source", triple.source.spec_string());
    ctx.config.set("related", triple.related.spec_string());
    ctx.config.set("unrelated", triple.unrelated.spec_string());
    let seed_echo: Vec<String> = seeds.iter().map(|s| s.to_string()).collect();
    ctx.config.set("seed_list", seed_echo.join(","));

    let report = transfer_experiment(&tcfg)?;

    // Per-seed curve, learning-curve, weight-norm, and difference files.
    for outcome in &report.outcomes {
        let seed = outcome.seed;
        let note = format!("seed={seed}");
        for rep in RepKind::ALL {
            for label in LabelKind::ALL {
                let curve = outcome.curve(rep, label);
                ctx.write_curve(
                    &format!("seed{seed}_align_{}_{}.csv", rep.name(), label.name()),
                    &note,
                    curve,
                )?;
            }
        }
        for label in LabelKind::ALL {
            let diff = curve_diff(outcome.curve(RepKind::Trained, label), outcome.curve(RepKind::Init, label));
            ctx.write_curve(
                &format!("seed{seed}_diff_trained_init_{}.csv", label.name()),
                &note,
                &diff,
            )?;
        }
        for run in &outcome.target_runs {
            ctx.notes.push(format!(
                "sweep_winner: seed={seed} task={} rep={} eta={}",
                run.task.name(),
                run.rep.name(),
                fmt_f64(run.eta)
            ));
            let rows: Vec<String> = run
                .iters
                .iter()
                .zip(&run.train_loss)
                .zip(&run.test_loss)
                .map(|((t, tr), te)| format!("{t},{},{}", fmt_f64(*tr), fmt_f64(*te)))
                .collect();
            ctx.write_csv(
                &format!("seed{seed}_{}_{}_learning.csv", run.task.name(), run.rep.name()),
                &format!("{note} eta={}", fmt_f64(run.eta)),
                "iter,train_mse,test_mse",
                &rows,
            )?;
            let rows: Vec<String> = run
                .milestones
                .iter()
                .filter_map(|(f, w)| w.map(|w| format!("{},{}", fmt_f64(*f), fmt_f64(w))))
                .collect();
            ctx.write_csv(
                &format!("seed{seed}_{}_{}_weightnorm.csv", run.task.name(), run.rep.name()),
                &note,
                "fraction,weight_norm",
                &rows,
            )?;
        }
    }

    let all_note = format!("seeds={}", seeds.len());

    // Aggregated alignment curves on the union grid.
    for rep in RepKind::ALL {
        for label in LabelKind::ALL {
            let curves: Vec<_> = report.outcomes.iter().map(|o| o.curve(rep, label)).collect();
            let mut grid: Vec<f64> = curves
                .iter()
                .flat_map(|c| c.thresholds.iter().copied())
                .collect();
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            grid.dedup();
            let rows: Vec<String> = grid
                .iter()
                .map(|&t| {
                    let vals: Vec<f64> = curves.iter().map(|c| c.value_at(t)).collect();
                    let (m, se) = mean_stderr(&vals);
                    format!("{},{},{}", fmt_f64(t), fmt_f64(m), fmt_f64(se))
                })
                .collect();
            ctx.write_csv(
                &format!("agg_align_{}_{}.csv", rep.name(), label.name()),
                &all_note,
                "threshold,mean,stderr",
                &rows,
            )?;
        }
    }

    // Bar summary: alignment at the trained/original pooled median
    // threshold, per representation and label set.
    let mut bar_rows = Vec::new();
    for label in LabelKind::ALL {
        for rep in RepKind::ALL {
            let vals: Vec<f64> = report
                .outcomes
                .iter()
                .map(|o| {
                    let tau = pooled_median_threshold(
                        o.curve(RepKind::Trained, label),
                        o.curve(RepKind::Original, label),
                    );
                    o.curve(rep, label).value_at(tau)
                })
                .collect();
            let (m, se) = mean_stderr(&vals);
            bar_rows.push(format!("{},{},{},{}", label.name(), rep.name(), fmt_f64(m), fmt_f64(se)));
        }
    }
    ctx.write_csv("bars_alignment.csv", &all_note, "label,rep,mean,stderr", &bar_rows)?;

    // Aggregated learning curves (iteration grids are shared).
    for task in TargetTask::ALL {
        for rep in RepKind::ALL {
            let runs: Vec<_> = report
                .outcomes
                .iter()
                .map(|o| o.target_run(task, rep))
                .collect();
            let iters = &runs[0].iters;
            let rows: Vec<String> = (0..iters.len())
                .map(|k| {
                    let train_vals: Vec<f64> = runs.iter().map(|r| r.train_loss[k]).collect();
                    let test_vals: Vec<f64> = runs.iter().map(|r| r.test_loss[k]).collect();
                    let (tm, ts) = mean_stderr(&train_vals);
                    let (em, es) = mean_stderr(&test_vals);
                    format!(
                        "{},{},{},{},{}",
                        iters[k],
                        fmt_f64(tm),
                        fmt_f64(ts),
                        fmt_f64(em),
                        fmt_f64(es)
                    )
                })
                .collect();
            ctx.write_csv(
                &format!("agg_{}_{}_learning.csv", task.name(), rep.name()),
                &all_note,
                "iter,train_mean,train_stderr,test_mean,test_stderr",
                &rows,
            )?;
        }
    }

    // Source-training summary.
    let rows: Vec<String> = report
        .outcomes
        .iter()
        .map(|o| {
            format!(
                "{},{},{},{}",
                o.seed,
                o.source_epochs_run,
                fmt_f64(o.source_initial_loss),
                fmt_f64(o.source_final_loss)
            )
        })
        .collect();
    ctx.write_csv(
        "source_training.csv",
        &all_note,
        "seed,epochs,initial_loss,final_loss",
        &rows,
    )?;

    // Sign tests across seeds.
    let n = report.seeds();
    let tests = [
        (
            "alignment: trained > init on source labels",
            report.alignment_wins(RepKind::Trained, RepKind::Init, LabelKind::Source),
        ),
        (
            "alignment: trained > original on related labels",
            report.alignment_wins(RepKind::Trained, RepKind::Original, LabelKind::Related),
        ),
        (
            "alignment: trained < original on unrelated labels",
            report.alignment_wins(RepKind::Original, RepKind::Trained, LabelKind::Unrelated),
        ),
        (
            "test mse: trained < init on related task",
            report.final_test_loss_wins(TargetTask::Related, RepKind::Trained, RepKind::Init),
        ),
        (
            "test mse: trained > original on unrelated task",
            report.final_test_loss_wins(TargetTask::Unrelated, RepKind::Original, RepKind::Trained),
        ),
        (
            "weight norm at 50% reduction: trained < init on related task",
            report.milestone_weight_wins(TargetTask::Related, RepKind::Trained, RepKind::Init, 0.5),
        ),
    ];
    let rows: Vec<String> = tests.iter().map(|(name, wins)| format!("{name},{wins},{n}")).collect();
    ctx.write_csv("sign_tests.csv", &all_note, "test,wins,seeds", &rows)?;

    let mut script = gnuplot_header();
    script.push_str("set xlabel \"threshold\"\nset ylabel \"alignment\"\n");
    script.push_str(
        "plot \"agg_align_original_source.csv\" using 1:2 with steps title \"original\", \\\n     \"agg_align_init_source.csv\" using 1:2 with steps title \"init\", \\\n     \"agg_align_trained_source.csv\" using 1:2 with steps title \"trained\"\n",
    );
    ctx.write_file("peaks.gnuplot", &script)?;

    ctx.finish(seeds)
}

// ── diff ────────────────────────────────────────────────────────────

/// Subtracts two alignment-curve CSVs (`a − b`) on their union grid.
pub fn cmd_diff(cfg: &KvConfig, out_dir: &Path) -> Result<Vec<String>> {
    let mut ctx = RunContext::new("diff", cfg, out_dir)?;
    let a_path = cfg
        .get("a")
        .ok_or_else(|| Error::invalid_config("diff needs a=<curve csv>"))?;
    let b_path = cfg
        .get("b")
        .ok_or_else(|| Error::invalid_config("diff needs b=<curve csv>"))?;
    let a = crate::io::read_curve_csv(Path::new(a_path))?;
    let b = crate::io::read_curve_csv(Path::new(b_path))?;
    let diff = curve_diff(&a, &b);
    ctx.write_curve("diff.csv", &format!("a={a_path} b={b_path}"), &diff)?;

    let mut script = gnuplot_header();
    script.push_str("set xlabel \"threshold\"\nset ylabel \"alignment difference\"\n");
    script.push_str("plot \"diff.csv\" using 1:2 with steps title \"a - b\"\n");
    ctx.write_file("diff.gnuplot", &script)?;
    ctx.finish(vec![])
}
