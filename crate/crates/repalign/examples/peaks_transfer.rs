//! Desk-size peaks transfer experiment: positive transfer to a related
//! task, negative transfer to an unrelated one, read off alignment.
//!
//! Trains the 60-60-1 source network on `P(X,Y,Z)` for a few seeds, then
//! compares original inputs, the init-time hidden representation, and
//! the trained hidden representation: alignment curves against all three
//! label sets plus few-shot linear-model test errors on the targets.
//! (The full-scale version of this experiment is `repalign peaks`.)

use repalign::peaks::{
    make_task_triple, transfer_experiment, LabelKind, RepKind, TargetTask, TransferConfig,
};

fn main() {
    let triple = make_task_triple(0);
    println!(
        "source {}   related {}   unrelated {}",
        triple.source.name(),
        triple.related.name(),
        triple.unrelated.name()
    );

    let mut cfg = TransferConfig::new(triple, vec![0, 1, 2]);
    cfg.n_train_source = 3000;
    cfg.n_test = 500;
    cfg.epoch_cap = 150;
    cfg.target_steps = 2000;
    let report = transfer_experiment(&cfg).unwrap();

    let n = report.seeds();
    println!("\nsign tests over {n} seeds (alignment at the pooled median threshold):");
    println!(
        "  trained > init      on source labels:    {}/{n}",
        report.alignment_wins(RepKind::Trained, RepKind::Init, LabelKind::Source)
    );
    println!(
        "  trained > original  on related labels:   {}/{n}",
        report.alignment_wins(RepKind::Trained, RepKind::Original, LabelKind::Related)
    );
    println!(
        "  trained < original  on unrelated labels: {}/{n}",
        report.alignment_wins(RepKind::Original, RepKind::Trained, LabelKind::Unrelated)
    );

    println!("\nfew-shot targets ({} training points):", cfg.n_train_target);
    for task in TargetTask::ALL {
        println!("  {} task, final test MSE per representation:", task.name());
        for rep in RepKind::ALL {
            let vals: Vec<f64> = report
                .outcomes
                .iter()
                .map(|o| *o.target_run(task, rep).test_loss.last().unwrap())
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            println!("    {:9} {mean:.5}", rep.name());
        }
    }
}
