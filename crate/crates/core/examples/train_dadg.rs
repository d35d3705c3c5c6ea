//! One DADG run with the trainer driven step by step.

use dadg::data::{generate_synthetic, make_lodo_splits, Protocol, SyntheticSpec};
use dadg::eval::measure;
use dadg::trainer::{TrainConfig, Trainer};
use dadg::{HyperParams, Variant};

fn main() -> dadg::Result<()> {
    let ds = generate_synthetic(&SyntheticSpec::spurious_shift(0))?;
    let plan = make_lodo_splits(&ds, "reversed", Protocol::Vlcs7030, 1)?;
    let arch = dadg::config::ArchConfig::default().build(ds.input_dim(), ds.num_classes());
    let hp = HyperParams {
        alpha: 0.015,
        iterations: 600,
        ..Default::default()
    };
    let iterations = hp.iterations;
    let mut trainer = Trainer::<f64>::new(TrainConfig { arch: arch.clone(), hp, variant: Variant::Dadg }, &ds, &plan, 1)?;
    for it in 1..=iterations {
        let r = trainer.step()?;
        if it % 100 == 0 {
            println!(
                "iter {it:>4}  F {:.3}  G {:.3}  H {:.3}",
                r.loss_f().unwrap_or(f64::NAN),
                r.loss_g().unwrap_or(f64::NAN),
                r.loss_h().unwrap_or(f64::NAN)
            );
        }
    }
    let out = trainer.finish();
    let m = measure(&arch, &out.model, &ds, &plan)?;
    println!(
        "target acc {:.3}  source acc {:.3}  disc acc {:?}",
        m.target_accuracy, m.source_accuracy, m.disc_accuracy
    );
    Ok(())
}
