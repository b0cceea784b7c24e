//! The peaks-function multitask benchmark: task construction, RBF input
//! encoding, dataset generation, and the full source-to-target transfer
//! experiment.
//!
//! A peaks function over six latent variables (A..F, encoded 0..5) picks
//! one of two variables depending on a third: `IF X > 0.5 THEN Y ELSE Z`.
//! Each latent is encoded into 10 RBF features (centers 0.0..0.9, height
//! 0.5, std 0.1), giving 60 features per sample; inputs are row-normalized
//! and labels mean-centered.
//!
//! The transfer experiment trains a ReLU network on a source task, then
//! measures how the final-hidden representation aligns with the source,
//! a related task (same variables, different order), and an unrelated
//! task (the complementary variables), and how linear models on those
//! representations generalize from few target samples.

use crate::align::{alignment_curve, AlignmentCurve, ThresholdGrid};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gd::LinearGd;
use crate::linalg::{normalize_rows, thin_svd, Mat};
use crate::nn::{
    hidden_representation, init_model, train, Activation, LossKind, MlpSpec, OptimizerKind,
    TrainConfig,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NUM_VARS: usize = 6;
pub const CENTERS_PER_VAR: usize = 10;
pub const NUM_FEATURES: usize = NUM_VARS * CENTERS_PER_VAR;
pub const RBF_HEIGHT: f64 = 0.5;
pub const RBF_STD: f64 = 0.1;

/// Display name of a latent variable index (0..5 → A..F).
pub fn var_name(idx: usize) -> char {
    (b'A' + idx as u8) as char
}

/// One peaks function `P_{X,Y,Z}` over three distinct latent variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeaksTask {
    pub x_var: usize,
    pub y_var: usize,
    pub z_var: usize,
}

impl PeaksTask {
    pub fn new(x_var: usize, y_var: usize, z_var: usize) -> Result<PeaksTask> {
        if x_var >= NUM_VARS || y_var >= NUM_VARS || z_var >= NUM_VARS {
            return Err(Error::invalid_input("peaks task: variable index out of range"));
        }
        if x_var == y_var || x_var == z_var || y_var == z_var {
            return Err(Error::invalid_input("peaks task: variables must be pairwise distinct"));
        }
        Ok(PeaksTask { x_var, y_var, z_var })
    }

    pub fn vars(&self) -> [usize; 3] {
        [self.x_var, self.y_var, self.z_var]
    }

    pub fn name(&self) -> String {
        format!(
            "P({},{},{})",
            var_name(self.x_var),
            var_name(self.y_var),
            var_name(self.z_var)
        )
    }

    /// Parseable comma form, e.g. `C,A,E` (accepted by the CLI's --task).
    pub fn spec_string(&self) -> String {
        format!(
            "{},{},{}",
            var_name(self.x_var),
            var_name(self.y_var),
            var_name(self.z_var)
        )
    }
}

/// Every ordered triple of distinct variables: exactly 6·5·4 = 120 tasks.
pub fn all_tasks() -> Vec<PeaksTask> {
    let mut out = Vec::with_capacity(120);
    for x in 0..NUM_VARS {
        for y in 0..NUM_VARS {
            for z in 0..NUM_VARS {
                if x != y && x != z && y != z {
                    out.push(PeaksTask { x_var: x, y_var: y, z_var: z });
                }
            }
        }
    }
    out
}

/// `IF sample[X] > 0.5 THEN sample[Y] ELSE sample[Z]` (strict inequality,
/// so exactly 0.5 takes the ELSE branch).
pub fn eval_peaks(task: &PeaksTask, sample: &[f64]) -> Result<f64> {
    if sample.len() != NUM_VARS {
        return Err(Error::invalid_input(format!(
            "eval_peaks: sample has {} entries, expected {NUM_VARS}",
            sample.len()
        )));
    }
    if sample.iter().any(|&v| !(0.0..1.0).contains(&v)) {
        return Err(Error::invalid_input("eval_peaks: sample values must lie in [0, 1)"));
    }
    Ok(if sample[task.x_var] > 0.5 {
        sample[task.y_var]
    } else {
        sample[task.z_var]
    })
}

/// Variable-major RBF encoding of one latent sample: feature `v·10 + c`
/// is `0.5·exp(−(sample[v] − 0.1c)² / (2·0.1²))`.
pub fn encode_rbf(sample: &[f64]) -> Vec<f64> {
    assert_eq!(sample.len(), NUM_VARS, "encode_rbf expects 6 latent values");
    let denom = 2.0 * RBF_STD * RBF_STD;
    let mut out = Vec::with_capacity(NUM_FEATURES);
    for &v in sample {
        for c in 0..CENTERS_PER_VAR {
            let center = 0.1 * c as f64;
            out.push(RBF_HEIGHT * (-(v - center) * (v - center) / denom).exp());
        }
    }
    out
}

/// Latent draws shared across tasks for a fixed seed.
fn sample_latents(n: usize, seed: u64) -> Vec<[f64; NUM_VARS]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut s = [0.0; NUM_VARS];
            for v in s.iter_mut() {
                *v = rng.random::<f64>();
            }
            s
        })
        .collect()
}

fn inputs_from_latents(latents: &[[f64; NUM_VARS]]) -> Mat {
    let rows: Vec<Vec<f64>> = latents.iter().map(|s| encode_rbf(s)).collect();
    normalize_rows(&Mat::from_rows(&rows).expect("fixed-width rows"))
}

/// Mean-centered labels of a task over shared latents.
fn labels_from_latents(task: &PeaksTask, latents: &[[f64; NUM_VARS]]) -> Vec<f64> {
    let mut y: Vec<f64> = latents
        .iter()
        .map(|s| eval_peaks(task, s).expect("latents lie in [0,1)"))
        .collect();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    for v in y.iter_mut() {
        *v -= mean;
    }
    y
}

/// Dataset of `n` samples for a peaks task: uniform latents, row-normalized
/// 60-dim RBF encodings, mean-centered labels. The same seed reuses the
/// same latent draws across tasks, so source and target datasets share
/// inputs.
pub fn make_dataset(task: &PeaksTask, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid_input("make_dataset: n must be at least 1"));
    }
    let latents = sample_latents(n, seed);
    Dataset::new(inputs_from_latents(&latents), labels_from_latents(task, &latents))
}

/// Source task plus a related and an unrelated target task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskTriple {
    pub source: PeaksTask,
    /// Same variable set as the source, non-identity order.
    pub related: PeaksTask,
    /// The complementary three variables.
    pub unrelated: PeaksTask,
}

/// Uniformly random triple: source from 3-of-6 variables, related a
/// non-identity permutation of them, unrelated an ordering of the rest.
pub fn make_task_triple(seed: u64) -> TaskTriple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars: Vec<usize> = (0..NUM_VARS).collect();
    vars.shuffle(&mut rng);
    let chosen = [vars[0], vars[1], vars[2]];
    let rest = [vars[3], vars[4], vars[5]];

    let source = PeaksTask { x_var: chosen[0], y_var: chosen[1], z_var: chosen[2] };
    let related = loop {
        let mut perm = chosen;
        perm.shuffle(&mut rng);
        if perm != chosen {
            break PeaksTask { x_var: perm[0], y_var: perm[1], z_var: perm[2] };
        }
    };
    let mut other = rest;
    other.shuffle(&mut rng);
    let unrelated = PeaksTask { x_var: other[0], y_var: other[1], z_var: other[2] };
    TaskTriple { source, related, unrelated }
}

// ── Transfer experiment ─────────────────────────────────────────────

/// Representation under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepKind {
    /// Row-normalized RBF input encodings.
    Original,
    /// Final hidden layer of the untrained network (plus bias column,
    /// row-normalized).
    Init,
    /// Final hidden layer after training on the source task.
    Trained,
}

impl RepKind {
    pub const ALL: [RepKind; 3] = [RepKind::Original, RepKind::Init, RepKind::Trained];

    pub fn name(&self) -> &'static str {
        match self {
            RepKind::Original => "original",
            RepKind::Init => "init",
            RepKind::Trained => "trained",
        }
    }
}

/// Label vector under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    Source,
    Related,
    Unrelated,
}

impl LabelKind {
    pub const ALL: [LabelKind; 3] = [LabelKind::Source, LabelKind::Related, LabelKind::Unrelated];

    pub fn name(&self) -> &'static str {
        match self {
            LabelKind::Source => "source",
            LabelKind::Related => "related",
            LabelKind::Unrelated => "unrelated",
        }
    }
}

/// Target task for the few-shot linear models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetTask {
    Related,
    Unrelated,
}

impl TargetTask {
    pub const ALL: [TargetTask; 2] = [TargetTask::Related, TargetTask::Unrelated];

    pub fn name(&self) -> &'static str {
        match self {
            TargetTask::Related => "related",
            TargetTask::Unrelated => "unrelated",
        }
    }
}

/// Step sizes swept for the target linear models; the best final test
/// loss wins. Step sizes at or above an instance's stability limit are
/// skipped.
pub const TARGET_STEP_SIZES: [f64; 3] = [0.01, 0.1, 1.0];

/// Loss-reduction milestones at which weight norms are recorded.
pub const MILESTONE_FRACTIONS: [f64; 11] =
    [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];

/// Configuration of [`transfer_experiment`].
#[derive(Debug, Clone)]
pub struct TransferConfig {
    pub triple: TaskTriple,
    pub n_train_source: usize,
    pub n_train_target: usize,
    pub n_test: usize,
    pub seeds: Vec<u64>,
    /// Depth of the source network (1 reproduces the main experiment).
    pub hidden_layers: usize,
    pub hidden_width: usize,
    /// Epoch cap for source training (training also stops on the
    /// 20-epoch convergence rule).
    pub epoch_cap: usize,
    /// Batch GD iterations for each target linear model.
    pub target_steps: usize,
    pub target_record_every: usize,
    /// Worker threads across seeds (1 = sequential).
    pub jobs: usize,
}

impl TransferConfig {
    pub fn new(triple: TaskTriple, seeds: Vec<u64>) -> TransferConfig {
        TransferConfig {
            triple,
            n_train_source: 10_000,
            n_train_target: 100,
            n_test: 1000,
            seeds,
            hidden_layers: 1,
            hidden_width: 60,
            epoch_cap: 400,
            target_steps: 300,
            target_record_every: 10,
            jobs: 1,
        }
    }
}

/// Best-of-sweep linear-model run on one (task, representation) pair.
#[derive(Debug, Clone)]
pub struct TargetRun {
    pub task: TargetTask,
    pub rep: RepKind,
    pub eta: f64,
    pub iters: Vec<usize>,
    /// Mean squared error on the target training subset.
    pub train_loss: Vec<f64>,
    /// Mean squared error on the held-out test set.
    pub test_loss: Vec<f64>,
    /// `(fraction, ‖w‖)` at each reached loss-reduction milestone.
    pub milestones: Vec<(f64, Option<f64>)>,
}

/// Everything measured for one seed.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Alignment curves for all 3 representations × 3 label vectors.
    pub curves: Vec<(RepKind, LabelKind, AlignmentCurve)>,
    pub target_runs: Vec<TargetRun>,
    pub source_initial_loss: f64,
    pub source_final_loss: f64,
    pub source_epochs_run: usize,
}

impl SeedOutcome {
    pub fn curve(&self, rep: RepKind, label: LabelKind) -> &AlignmentCurve {
        &self
            .curves
            .iter()
            .find(|(r, l, _)| *r == rep && *l == label)
            .expect("curve present")
            .2
    }

    pub fn target_run(&self, task: TargetTask, rep: RepKind) -> &TargetRun {
        self.target_runs
            .iter()
            .find(|r| r.task == task && r.rep == rep)
            .expect("target run present")
    }
}

/// Aggregated transfer-experiment results across seeds.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub outcomes: Vec<SeedOutcome>,
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(tag)
}

/// Runs the full transfer experiment. Seeds are independent; with
/// `jobs > 1` they run on worker threads and are reassembled in seed
/// order, so results do not depend on scheduling.
pub fn transfer_experiment(cfg: &TransferConfig) -> Result<ExperimentReport> {
    if cfg.n_train_source == 0 || cfg.n_train_target == 0 || cfg.n_test == 0 {
        return Err(Error::invalid_input("transfer_experiment: counts must be at least 1"));
    }
    if cfg.n_train_target > cfg.n_train_source {
        return Err(Error::invalid_input(
            "transfer_experiment: target subset cannot exceed the source dataset",
        ));
    }
    if cfg.seeds.is_empty() {
        return Err(Error::invalid_input("transfer_experiment: at least one seed"));
    }
    if cfg.hidden_layers == 0 {
        return Err(Error::invalid_input("transfer_experiment: at least one hidden layer"));
    }
    if cfg.epoch_cap == 0 || cfg.target_steps == 0 || cfg.target_record_every == 0 {
        return Err(Error::invalid_input(
            "transfer_experiment: epoch cap, target steps, and record cadence must be at least 1",
        ));
    }

    let jobs = cfg.jobs.max(1).min(cfg.seeds.len());
    let outcomes: Vec<Result<SeedOutcome>> = if jobs <= 1 {
        cfg.seeds.iter().map(|&s| run_seed(cfg, s)).collect()
    } else {
        let mut slots: Vec<Option<Result<SeedOutcome>>> = (0..cfg.seeds.len()).map(|_| None).collect();
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots_mutex = std::sync::Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if idx >= cfg.seeds.len() {
                        break;
                    }
                    let out = run_seed(cfg, cfg.seeds[idx]);
                    slots_mutex.lock().unwrap()[idx] = Some(out);
                });
            }
        });
        slots.into_iter().map(|s| s.expect("every slot filled")).collect()
    };

    let mut done = Vec::with_capacity(outcomes.len());
    for (i, out) in outcomes.into_iter().enumerate() {
        match out {
            Ok(o) => done.push(o),
            Err(e) => {
                return Err(Error::WithSeed { seed: cfg.seeds[i], source: Box::new(e) });
            }
        }
    }
    Ok(ExperimentReport { outcomes: done })
}

fn run_seed(cfg: &TransferConfig, seed: u64) -> Result<SeedOutcome> {
    let data_seed = sub_seed(seed, 1);
    let test_seed = sub_seed(seed, 2);
    let init_seed = sub_seed(seed, 3);
    let shuffle_seed = sub_seed(seed, 4);
    let subset_seed = sub_seed(seed, 5);

    // Shared latents: one input matrix, three label vectors.
    let latents = sample_latents(cfg.n_train_source, data_seed);
    let source_x = inputs_from_latents(&latents);
    let y_source = labels_from_latents(&cfg.triple.source, &latents);
    let y_related = labels_from_latents(&cfg.triple.related, &latents);
    let y_unrelated = labels_from_latents(&cfg.triple.unrelated, &latents);

    // Source network.
    let mut widths = vec![NUM_FEATURES];
    widths.extend(vec![cfg.hidden_width; cfg.hidden_layers]);
    widths.push(1);
    let spec = MlpSpec::new(widths, Activation::Relu, LossKind::Mse, init_seed);
    let model0 = init_model(&spec)?;
    let last_hidden = spec.hidden_layers();

    let init_rep = normalize_rows(&hidden_representation(&model0, &source_x, last_hidden)?);

    let source_data = Dataset::new(source_x.clone(), y_source.clone())?;
    let train_cfg = TrainConfig {
        optimizer: OptimizerKind::Adam,
        lr: 0.001,
        batch_size: 64,
        epochs: cfg.epoch_cap,
        shuffle_seed,
        stop_on_convergence: true,
    };
    let (model, history) = train(model0, &source_data, &train_cfg)?;
    let trained_rep = normalize_rows(&hidden_representation(&model, &source_x, last_hidden)?);

    // Alignment curves: representations × label vectors.
    let mut curves = Vec::with_capacity(9);
    for rep in RepKind::ALL {
        let rep_mat = match rep {
            RepKind::Original => &source_x,
            RepKind::Init => &init_rep,
            RepKind::Trained => &trained_rep,
        };
        let svd = thin_svd(rep_mat)?;
        for label in LabelKind::ALL {
            let y = match label {
                LabelKind::Source => &y_source,
                LabelKind::Related => &y_related,
                LabelKind::Unrelated => &y_unrelated,
            };
            curves.push((rep, label, alignment_curve(&svd, y, &ThresholdGrid::Auto)?));
        }
    }

    // Few-shot target runs: a subset of the shared inputs for training,
    // fresh latents for testing.
    let mut idx: Vec<usize> = (0..cfg.n_train_source).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(subset_seed);
    idx.shuffle(&mut rng);
    idx.truncate(cfg.n_train_target);
    idx.sort_unstable();

    let test_latents = sample_latents(cfg.n_test, test_seed);
    let test_x = inputs_from_latents(&test_latents);
    let test_init_rep = normalize_rows(&hidden_representation(&model_at_init(&spec)?, &test_x, last_hidden)?);
    let test_trained_rep = normalize_rows(&hidden_representation(&model, &test_x, last_hidden)?);

    let mut target_runs = Vec::with_capacity(6);
    for task in TargetTask::ALL {
        let (task_def, y_full) = match task {
            TargetTask::Related => (&cfg.triple.related, &y_related),
            TargetTask::Unrelated => (&cfg.triple.unrelated, &y_unrelated),
        };
        let y_train: Vec<f64> = idx.iter().map(|&i| y_full[i]).collect();
        let y_test = labels_from_latents(task_def, &test_latents);
        for rep in RepKind::ALL {
            let (train_mat, test_mat) = match rep {
                RepKind::Original => (source_x.select_rows(&idx), test_x.clone()),
                RepKind::Init => (init_rep.select_rows(&idx), test_init_rep.clone()),
                RepKind::Trained => (trained_rep.select_rows(&idx), test_trained_rep.clone()),
            };
            target_runs.push(run_target(
                cfg, task, rep, &train_mat, &y_train, &test_mat, &y_test,
            )?);
        }
    }

    Ok(SeedOutcome {
        seed,
        curves,
        target_runs,
        source_initial_loss: *history.first().expect("at least one epoch"),
        source_final_loss: *history.last().expect("at least one epoch"),
        source_epochs_run: history.len(),
    })
}

/// Re-create the untrained model (same init seed) for test-set
/// representations of the init network.
fn model_at_init(spec: &MlpSpec) -> Result<crate::nn::MlpModel> {
    init_model(spec)
}

/// Sweeps the step sizes on one (task, representation) pair and keeps
/// the run with the best final test loss.
fn run_target(
    cfg: &TransferConfig,
    task: TargetTask,
    rep: RepKind,
    train_x: &Mat,
    train_y: &[f64],
    test_x: &Mat,
    test_y: &[f64],
) -> Result<TargetRun> {
    let svd = thin_svd(train_x)?;
    let n_train = train_y.len() as f64;
    let n_test = test_y.len() as f64;

    let mut best: Option<TargetRun> = None;
    let mut etas: Vec<f64> = TARGET_STEP_SIZES
        .iter()
        .copied()
        .filter(|&e| {
            let smax = svd.sigma_max();
            smax == 0.0 || e < 1.0 / (smax * smax)
        })
        .collect();
    if etas.is_empty() {
        // Degenerate spectrum; fall back to half the stability limit.
        etas.push(crate::gd::default_eta(&svd));
    }

    for &eta in &etas {
        let mut gd = LinearGd::with_svd(train_x, &svd, train_y, eta)?;
        let r0 = gd.pred_dist().powi(2);
        let slack = 1e-12 * r0;
        let mut iters = Vec::new();
        let mut train_loss = Vec::new();
        let mut test_loss = Vec::new();
        let mut milestones: Vec<(f64, Option<f64>)> =
            MILESTONE_FRACTIONS.iter().map(|&f| (f, None)).collect();
        let mut next_milestone = 0usize;

        let record = |gd: &LinearGd,
                          iters: &mut Vec<usize>,
                          train_loss: &mut Vec<f64>,
                          test_loss: &mut Vec<f64>,
                          milestones: &mut Vec<(f64, Option<f64>)>,
                          next_milestone: &mut usize| {
            iters.push(gd.t());
            train_loss.push(gd.train_loss() / n_train);
            test_loss.push(LinearGd::loss_of(test_x, test_y, gd.weights()) / n_test);
            let r = gd.pred_dist().powi(2);
            while *next_milestone < milestones.len()
                && r0 - r >= milestones[*next_milestone].0 * r0 - slack
            {
                milestones[*next_milestone].1 = Some(gd.weight_norm());
                *next_milestone += 1;
            }
        };

        record(&gd, &mut iters, &mut train_loss, &mut test_loss, &mut milestones, &mut next_milestone);
        for t in 1..=cfg.target_steps {
            gd.step();
            if t % cfg.target_record_every == 0 || t == cfg.target_steps {
                record(&gd, &mut iters, &mut train_loss, &mut test_loss, &mut milestones, &mut next_milestone);
            }
        }

        let candidate = TargetRun {
            task,
            rep,
            eta,
            iters,
            train_loss,
            test_loss,
            milestones,
        };
        let better = match &best {
            None => true,
            Some(b) => {
                candidate.test_loss.last().unwrap() < b.test_loss.last().unwrap()
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one step size ran"))
}

// ── Report statistics ───────────────────────────────────────────────

/// Median of the pooled positive grid thresholds of two curves; the
/// evaluation point for curve comparisons. Zero when neither curve has
/// a positive threshold (rank-0 representations).
pub fn pooled_median_threshold(a: &AlignmentCurve, b: &AlignmentCurve) -> f64 {
    let mut pool: Vec<f64> = a
        .thresholds
        .iter()
        .chain(b.thresholds.iter())
        .copied()
        .filter(|&t| t > 0.0)
        .collect();
    if pool.is_empty() {
        return 0.0;
    }
    pool.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pool[pool.len() / 2]
}

impl ExperimentReport {
    pub fn seeds(&self) -> usize {
        self.outcomes.len()
    }

    /// Number of seeds where alignment of `rep_a` exceeds `rep_b` against
    /// `label` at the pooled median threshold.
    pub fn alignment_wins(&self, rep_a: RepKind, rep_b: RepKind, label: LabelKind) -> usize {
        self.outcomes
            .iter()
            .filter(|o| {
                let a = o.curve(rep_a, label);
                let b = o.curve(rep_b, label);
                let tau = pooled_median_threshold(a, b);
                a.value_at(tau) > b.value_at(tau)
            })
            .count()
    }

    /// Number of seeds where the final test loss of `rep_a` is below
    /// `rep_b` on `task`.
    pub fn final_test_loss_wins(&self, task: TargetTask, rep_a: RepKind, rep_b: RepKind) -> usize {
        self.outcomes
            .iter()
            .filter(|o| {
                let a = o.target_run(task, rep_a).test_loss.last().copied().unwrap();
                let b = o.target_run(task, rep_b).test_loss.last().copied().unwrap();
                a < b
            })
            .count()
    }

    /// Number of seeds where `rep_a` reaches the given loss-reduction
    /// milestone with a smaller weight norm than `rep_b` (seeds where
    /// either side never reaches the milestone don't count as wins).
    pub fn milestone_weight_wins(
        &self,
        task: TargetTask,
        rep_a: RepKind,
        rep_b: RepKind,
        fraction: f64,
    ) -> usize {
        self.outcomes
            .iter()
            .filter(|o| {
                let find = |rep: RepKind| {
                    o.target_run(task, rep)
                        .milestones
                        .iter()
                        .find(|(f, _)| (*f - fraction).abs() < 1e-12)
                        .and_then(|(_, w)| *w)
                };
                match (find(rep_a), find(rep_b)) {
                    (Some(a), Some(b)) => a < b,
                    _ => false,
                }
            })
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    #[test]
    fn eval_peaks_branches() {
        let task = PeaksTask::new(0, 1, 2).unwrap();
        let mut sample = [0.7, 0.3, 0.9, 0.1, 0.1, 0.1];
        assert_eq!(eval_peaks(&task, &sample).unwrap(), 0.3);
        sample[0] = 0.2;
        assert_eq!(eval_peaks(&task, &sample).unwrap(), 0.9);
        // Boundary: 0.5 > 0.5 is false, so the ELSE branch fires.
        sample[0] = 0.5;
        assert_eq!(eval_peaks(&task, &sample).unwrap(), 0.9);
    }

    #[test]
    fn eval_peaks_validates() {
        let task = PeaksTask::new(0, 1, 2).unwrap();
        assert!(eval_peaks(&task, &[0.5; 5]).is_err());
        assert!(eval_peaks(&task, &[0.5, 0.5, 0.5, 0.5, 0.5, 1.0]).is_err());
        assert!(eval_peaks(&task, &[0.5, 0.5, 0.5, 0.5, 0.5, -0.1]).is_err());
        assert!(PeaksTask::new(0, 0, 1).is_err());
        assert!(PeaksTask::new(0, 1, 6).is_err());
    }

    #[test]
    fn eval_peaks_returns_a_latent_value() {
        let tasks = all_tasks();
        let latents = sample_latents(50, 77);
        for task in tasks.iter().take(10) {
            for s in &latents {
                let v = eval_peaks(task, s).unwrap();
                assert!(s.contains(&v));
            }
        }
    }

    #[test]
    fn encode_rbf_peak_and_neighbor_values() {
        let mut sample = [0.0; NUM_VARS];
        sample[2] = 0.3;
        let f = encode_rbf(&sample);
        assert_eq!(f.len(), NUM_FEATURES);
        // Variable 2 at exactly center 0.3 → feature index 2·10+3 peaks at 0.5.
        assert!((f[23] - 0.5).abs() < 1e-15);
        // Value 0.1 at center 0.0: 0.5·e^{−0.5} ≈ 0.30327.
        let mut s2 = [0.5; NUM_VARS];
        s2[0] = 0.1;
        let f2 = encode_rbf(&s2);
        assert!((f2[0] - 0.5 * (-0.5_f64).exp()).abs() < 1e-12);
        assert!((f2[0] - 0.30327).abs() < 1e-5);
        for v in &f2 {
            assert!(*v > 0.0 && *v <= 0.5);
        }
    }

    #[test]
    fn dataset_invariants() {
        let task = PeaksTask::new(1, 0, 3).unwrap();
        let data = make_dataset(&task, 200, 9).unwrap();
        let mean: f64 = data.y.iter().sum::<f64>() / data.y.len() as f64;
        assert!(mean.abs() < 1e-12, "labels mean-centered");
        for r in 0..data.x.rows() {
            assert!((norm(data.x.row(r)) - 1.0).abs() < 1e-12, "unit rows");
        }
    }

    #[test]
    fn same_seed_shares_inputs_across_tasks() {
        let a = make_dataset(&PeaksTask::new(0, 1, 2).unwrap(), 50, 4).unwrap();
        let b = make_dataset(&PeaksTask::new(3, 4, 5).unwrap(), 50, 4).unwrap();
        assert_eq!(a.x, b.x);
        assert_ne!(a.y, b.y);
        let c = make_dataset(&PeaksTask::new(0, 1, 2).unwrap(), 50, 4).unwrap();
        assert_eq!(a.x, c.x);
        assert_eq!(a.y, c.y);
    }

    #[test]
    fn exactly_120_tasks() {
        let tasks = all_tasks();
        assert_eq!(tasks.len(), 120);
        let mut dedup: Vec<[usize; 3]> = tasks.iter().map(|t| t.vars()).collect();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 120);
    }

    #[test]
    fn triple_invariants_over_many_seeds() {
        for seed in 0..1000 {
            let t = make_task_triple(seed);
            let mut src = t.source.vars();
            let mut rel = t.related.vars();
            assert_ne!(src, rel, "related must reorder");
            src.sort();
            rel.sort();
            assert_eq!(src, rel, "related uses the same variable set");
            let unr = t.unrelated.vars();
            for v in unr {
                assert!(!src.contains(&v), "unrelated is disjoint");
            }
        }
    }

    #[test]
    fn triple_is_seed_deterministic() {
        assert_eq!(make_task_triple(33), make_task_triple(33));
    }

    #[test]
    fn small_transfer_experiment_shape() {
        // Desk-size smoke run: tiny counts, single seed.
        let triple = make_task_triple(5);
        let mut cfg = TransferConfig::new(triple, vec![0]);
        cfg.n_train_source = 400;
        cfg.n_train_target = 40;
        cfg.n_test = 80;
        cfg.epoch_cap = 10;
        cfg.target_steps = 200;
        cfg.target_record_every = 10;
        let report = transfer_experiment(&cfg).unwrap();
        assert_eq!(report.outcomes.len(), 1);
        let o = &report.outcomes[0];
        assert_eq!(o.curves.len(), 9);
        assert_eq!(o.target_runs.len(), 6);
        for run in &o.target_runs {
            assert_eq!(run.iters.len(), run.train_loss.len());
            assert_eq!(run.iters.len(), run.test_loss.len());
            assert!(TARGET_STEP_SIZES.contains(&run.eta));
        }
        // Curves are over the same label energy budget: τ=0 value is ‖y‖².
        for (_, _, curve) in &o.curves {
            assert!(curve.values[0] > 0.0);
        }
    }

    #[test]
    fn parallel_seeds_match_sequential() {
        let triple = make_task_triple(6);
        let mut cfg = TransferConfig::new(triple, vec![0, 1]);
        cfg.n_train_source = 200;
        cfg.n_train_target = 30;
        cfg.n_test = 50;
        cfg.epoch_cap = 5;
        cfg.target_steps = 100;
        cfg.target_record_every = 10;
        let seq = transfer_experiment(&cfg).unwrap();
        cfg.jobs = 2;
        let par = transfer_experiment(&cfg).unwrap();
        for (a, b) in seq.outcomes.iter().zip(&par.outcomes) {
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.source_final_loss, b.source_final_loss);
            for ((_, _, ca), (_, _, cb)) in a.curves.iter().zip(&b.curves) {
                assert_eq!(ca.values, cb.values);
            }
        }
    }
}
