//! Thin CLI over the harness commands. Flag values override config-file
//! entries, which override built-in defaults; every run writes a
//! manifest that can be fed back through `--config` to reproduce the
//! outputs byte for byte (sequential mode).

use clap::{Args, Parser, Subcommand};
use repalign::harness::{cmd_align, cmd_diff, cmd_gd, cmd_peaks, cmd_train, KvConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "repalign",
    version,
    about = "Spectral alignment between representations and labels: curves, GD convergence checks, transfer benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Alignment curve and per-direction label projections for a dataset.
    Align(AlignArgs),
    /// Iterative vs closed-form GD trajectories and iteration bounds.
    Gd(GdArgs),
    /// Train a small MLP and emit per-layer alignment before/after.
    Train(TrainArgs),
    /// Peaks-function transfer experiment (alignment, learning curves, sign tests).
    Peaks(PeaksArgs),
    /// Subtract two alignment-curve CSVs (a − b).
    Diff(DiffArgs),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat key=value config file (a previous run's manifest works).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $REPALIGN_OUT/<command> or runs/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct InputArgs {
    /// CSV input path (rectangular, numeric, one header line).
    #[arg(long)]
    input: Option<String>,
    /// Name of the label column in the CSV header.
    #[arg(long)]
    label_column: Option<String>,
    /// Row-normalize the CSV features.
    #[arg(long)]
    normalize: bool,
    /// Affinely map CSV labels onto [-1, 1].
    #[arg(long)]
    map_labels: bool,
    /// Synthetic source: circle | decaying | peaks.
    #[arg(long)]
    generator: Option<String>,
    /// Circle labeling: major_axis | minor_axis.
    #[arg(long)]
    labeling: Option<String>,
    #[arg(long)]
    circle_n_per_class: Option<usize>,
    #[arg(long)]
    circle_spread: Option<f64>,
    #[arg(long)]
    circle_seed: Option<u64>,
    /// Rows of the decaying-spectrum matrix.
    #[arg(long)]
    n: Option<usize>,
    /// Columns of the decaying-spectrum matrix.
    #[arg(long)]
    d: Option<usize>,
    /// Power-law exponent of the decaying spectrum.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    matrix_seed: Option<u64>,
    /// Label source for the decaying generator: uniform | mix.
    #[arg(long)]
    labels: Option<String>,
    #[arg(long)]
    label_seed: Option<u64>,
    /// Singular-vector mix, e.g. "4:0.9;49:0.435".
    #[arg(long)]
    mix: Option<String>,
    /// Peaks task by variables, e.g. A,B,C.
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    task_seed: Option<u64>,
    #[arg(long)]
    data_seed: Option<u64>,
}

impl InputArgs {
    fn collect(&self, cfg: &mut KvConfig) {
        set_opt(cfg, "input", &self.input);
        set_opt(cfg, "label_column", &self.label_column);
        if self.normalize {
            cfg.set("normalize", true);
        }
        if self.map_labels {
            cfg.set("map_labels", true);
        }
        set_opt(cfg, "generator", &self.generator);
        set_opt(cfg, "labeling", &self.labeling);
        set_opt(cfg, "circle_n_per_class", &self.circle_n_per_class);
        set_opt(cfg, "circle_spread", &self.circle_spread);
        set_opt(cfg, "circle_seed", &self.circle_seed);
        set_opt(cfg, "n", &self.n);
        set_opt(cfg, "d", &self.d);
        set_opt(cfg, "alpha", &self.alpha);
        set_opt(cfg, "matrix_seed", &self.matrix_seed);
        set_opt(cfg, "labels", &self.labels);
        set_opt(cfg, "label_seed", &self.label_seed);
        set_opt(cfg, "mix", &self.mix);
        set_opt(cfg, "task", &self.task);
        set_opt(cfg, "task_seed", &self.task_seed);
        set_opt(cfg, "data_seed", &self.data_seed);
    }
}

fn set_opt<T: ToString>(cfg: &mut KvConfig, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        cfg.set(key, v.to_string());
    }
}

#[derive(Args)]
struct AlignArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Shuffle labels with this seed and emit a second curve.
    #[arg(long)]
    shuffle_seed: Option<u64>,
    /// Threshold grid: auto | uniform.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args)]
struct GdArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Step size (default: half the stability limit).
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    record_every: Option<usize>,
    /// Thresholds for the bound table: "quartiles" or a comma list.
    #[arg(long)]
    taus: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Layer widths, e.g. 60,60,1.
    #[arg(long)]
    widths: Option<String>,
    /// relu | tanh | prelu | leaky_relu | linear | rbf_layer.
    #[arg(long)]
    activation: Option<String>,
    /// mse | logistic.
    #[arg(long)]
    loss: Option<String>,
    /// sgd | sgd_momentum | adam | rmsprop.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    init_seed: Option<u64>,
    #[arg(long)]
    shuffle_seed: Option<u64>,
    #[arg(long)]
    rbf_bandwidth: Option<f64>,
    /// Stop early on the 20-epoch convergence rule (true|false).
    #[arg(long)]
    converge: Option<bool>,
}

#[derive(Args)]
struct PeaksArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of seeds (0..N-1) to run.
    #[arg(long)]
    seeds: Option<u64>,
    /// Explicit comma-separated seed list (overrides --seeds).
    #[arg(long)]
    seed_list: Option<String>,
    #[arg(long)]
    triple_seed: Option<u64>,
    /// Explicit tasks, e.g. --source A,B,C --related B,A,C --unrelated E,D,F.
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    related: Option<String>,
    #[arg(long)]
    unrelated: Option<String>,
    #[arg(long)]
    n_source: Option<usize>,
    #[arg(long)]
    n_target: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    /// Hidden layers of the source network.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    epoch_cap: Option<usize>,
    #[arg(long)]
    target_steps: Option<usize>,
    #[arg(long)]
    record_every: Option<usize>,
    /// Worker threads across seeds (default 1 = sequential).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct DiffArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First curve CSV (minuend).
    #[arg(long)]
    a: Option<String>,
    /// Second curve CSV (subtrahend).
    #[arg(long)]
    b: Option<String>,
}

fn resolve(common: &CommonArgs, overrides: KvConfig, command: &str) -> Result<(KvConfig, PathBuf), repalign::Error> {
    let mut cfg = KvConfig::new();
    if let Some(path) = &common.config {
        cfg.apply(&KvConfig::from_file(path)?);
    }
    cfg.apply(&overrides);
    let out = match &common.out {
        Some(p) => p.clone(),
        None => match std::env::var_os("REPALIGN_OUT") {
            Some(root) => PathBuf::from(root).join(command),
            None => PathBuf::from("runs").join(command),
        },
    };
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(PathBuf, Vec<String>), repalign::Error> {
    match cli.command {
        Cmd::Align(args) => {
            let mut over = KvConfig::new();
            args.input.collect(&mut over);
            set_opt(&mut over, "shuffle_seed", &args.shuffle_seed);
            set_opt(&mut over, "grid", &args.grid);
            set_opt(&mut over, "grid_max", &args.grid_max);
            set_opt(&mut over, "grid_points", &args.grid_points);
            let (cfg, out) = resolve(&args.common, over, "align")?;
            Ok((out.clone(), cmd_align(&cfg, &out)?))
        }
        Cmd::Gd(args) => {
            let mut over = KvConfig::new();
            args.input.collect(&mut over);
            set_opt(&mut over, "eta", &args.eta);
            set_opt(&mut over, "iters", &args.iters);
            set_opt(&mut over, "record_every", &args.record_every);
            set_opt(&mut over, "taus", &args.taus);
            let (cfg, out) = resolve(&args.common, over, "gd")?;
            Ok((out.clone(), cmd_gd(&cfg, &out)?))
        }
        Cmd::Train(args) => {
            let mut over = KvConfig::new();
            args.input.collect(&mut over);
            set_opt(&mut over, "widths", &args.widths);
            set_opt(&mut over, "activation", &args.activation);
            set_opt(&mut over, "loss", &args.loss);
            set_opt(&mut over, "optimizer", &args.optimizer);
            set_opt(&mut over, "lr", &args.lr);
            set_opt(&mut over, "batch_size", &args.batch_size);
            set_opt(&mut over, "epochs", &args.epochs);
            set_opt(&mut over, "init_seed", &args.init_seed);
            set_opt(&mut over, "shuffle_seed", &args.shuffle_seed);
            set_opt(&mut over, "rbf_bandwidth", &args.rbf_bandwidth);
            set_opt(&mut over, "converge", &args.converge);
            let (cfg, out) = resolve(&args.common, over, "train")?;
            Ok((out.clone(), cmd_train(&cfg, &out)?))
        }
        Cmd::Peaks(args) => {
            let mut over = KvConfig::new();
            set_opt(&mut over, "seeds", &args.seeds);
            set_opt(&mut over, "seed_list", &args.seed_list);
            set_opt(&mut over, "triple_seed", &args.triple_seed);
            set_opt(&mut over, "source", &args.source);
            set_opt(&mut over, "related", &args.related);
            set_opt(&mut over, "unrelated", &args.unrelated);
            set_opt(&mut over, "n_source", &args.n_source);
            set_opt(&mut over, "n_target", &args.n_target);
            set_opt(&mut over, "n_test", &args.n_test);
            set_opt(&mut over, "depth", &args.depth);
            set_opt(&mut over, "width", &args.width);
            set_opt(&mut over, "epoch_cap", &args.epoch_cap);
            set_opt(&mut over, "target_steps", &args.target_steps);
            set_opt(&mut over, "record_every", &args.record_every);
            set_opt(&mut over, "jobs", &args.jobs);
            let (cfg, out) = resolve(&args.common, over, "peaks")?;
            Ok((out.clone(), cmd_peaks(&cfg, &out)?))
        }
        Cmd::Diff(args) => {
            let mut over = KvConfig::new();
            set_opt(&mut over, "a", &args.a);
            set_opt(&mut over, "b", &args.b);
            let (cfg, out) = resolve(&args.common, over, "diff")?;
            Ok((out.clone(), cmd_diff(&cfg, &out)?))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, files)) => {
            println!("wrote {} files to {}", files.len(), out.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
