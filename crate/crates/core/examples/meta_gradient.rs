//! Exact meta-gradient of the cross-domain validation loss against central
//! differences, and the three outer modes side by side.

use dadg::gradcheck::{check_arch, off_kink_model};
use dadg::meta::{check_episode, meta_gradient_check, outer_gradient, Learner, NetworkObjective};
use dadg::OuterMode;

fn main() -> dadg::Result<()> {
    let arch = check_arch();
    for beta in [0.0, 5e-4, 0.1] {
        let r = meta_gradient_check(&arch, 0, beta, 1e-5)?;
        println!("beta {beta:<6} max rel err vs FD {:.2e}", r.max_rel_err());
    }
    let model = off_kink_model(&arch, 0)?;
    let ep = check_episode(&arch, 0, 6);
    let objective = NetworkObjective::new(&arch, &ep)?;
    let at = Learner::new(model.theta, model.phi);
    for mode in [OuterMode::Combined, OuterMode::Literal, OuterMode::FirstOrder] {
        let g = outer_gradient(&objective, &at, 0.1, mode)?;
        println!(
            "{:<12} |grad theta| {:.4}  |grad phi| {:.4}  G {:.4}  H {:.4}",
            mode.name(),
            g.grad.theta.l2_norm(),
            g.grad.phi.l2_norm(),
            g.loss_g,
            g.loss_h
        );
    }
    Ok(())
}
