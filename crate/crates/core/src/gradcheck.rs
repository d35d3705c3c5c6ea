//! Finite-difference checks of every analytic gradient in the crate, bundled
//! as one suite for the `check-grads` subcommand.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grl::{dal_gradients, dal_loss, grl_backward, grl_forward};
use crate::meta::{
    check_episode, finite_difference_gradient, max_relative_error, meta_gradient_check, outer_update_with,
    training_loss_and_grad, Learner, MetaObjective, NetworkObjective, OuterMode,
};
use crate::model::{init_model, ArchSpec, ModelParams, ParamSet};
use crate::tensor::Matrix;

/// Tolerances applied by [`run_suite`].
pub const FIRST_ORDER_TOL: f64 = 1e-4;
pub const META_FD_TOL: f64 = 1e-4;
pub const META_PLAIN_TOL: f64 = 1e-8;
pub const MODE_IDENTITY_TOL: f64 = 1e-9;
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value.is_finite() && value <= tolerance,
        }
    }
}

/// Small network used by the suite (well under 100 parameters per set).
pub fn check_arch() -> ArchSpec {
    ArchSpec::new(3, 4, 3).with_disc_hidden(vec![3])
}

fn fd_over(set: &ParamSet<f64>, mut loss: impl FnMut(&ParamSet<f64>) -> Result<f64>) -> Result<Vec<f64>> {
    finite_difference_gradient(&set.flatten(), FD_STEP, |flat| {
        let mut probe = set.clone();
        probe.assign_flat(flat)?;
        loss(&probe)
    })
}

/// Freshly initialised model with small nonzero biases. Zero biases put
/// every pre-activation fed by an all-zero ReLU feature exactly on the kink,
/// where central differences are meaningless.
pub fn off_kink_model(arch: &ArchSpec, seed: u64) -> Result<ModelParams<f64>> {
    use rand::{Rng, SeedableRng};
    let mut model = init_model::<f64>(arch, seed)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
    let sets = [Some(&mut model.theta), Some(&mut model.phi), model.psi.as_mut()];
    for set in sets.into_iter().flatten() {
        for layer in &mut set.layers {
            for b in &mut layer.bias {
                *b = rng.random_range(-0.2..0.2);
            }
        }
    }
    Ok(model)
}

/// Largest deviation of the GRL from identity-forward / `−λ`-backward over
/// random arrays, for each `λ` in `{0, 0.5, 1, 2}`.
pub fn grl_exactness(seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..64).map(|_| rng.random_range(-10.0..10.0)).collect();
    let x = Matrix::from_vec(8, 8, data).expect("8x8");
    let mut worst: f64 = 0.0;
    for lambda in [0.0, 0.5, 1.0, 2.0] {
        let fwd = grl_forward(&x);
        let bwd = grl_backward(&x, lambda);
        for (i, &v) in x.as_slice().iter().enumerate() {
            worst = worst.max((fwd.as_slice()[i] - v).abs());
            worst = worst.max((bwd.as_slice()[i] - (-lambda * v)).abs());
        }
    }
    worst
}

/// First-order checks for `F` (w.r.t. `ψ`, and the reversed `θ` gradient),
/// `G` and `H` (w.r.t. `θ` and `φ`).
pub fn first_order_checks(arch: &ArchSpec, seed: u64) -> Result<Vec<CheckResult>> {
    let model = off_kink_model(arch, seed)?;
    let psi = model.psi()?.clone();
    let episode = check_episode(arch, seed, 6);
    let (a, b) = (&episode.train[0], &episode.train[1]);
    let lambda = 1.0;

    let dal = dal_gradients(arch, &model.theta, &psi, a, b, lambda)?;
    let fd_psi = fd_over(&psi, |p| dal_loss(arch, &model.theta, p, a, b))?;
    let fd_theta = fd_over(&model.theta, |t| dal_loss(arch, t, &psi, a, b))?;
    let reversed: Vec<f64> = fd_theta.iter().map(|g| -lambda * g).collect();

    let at = Learner::new(model.theta.clone(), model.phi.clone());
    let objective = NetworkObjective::new(arch, &episode)?;
    let g = objective.train_loss_grad(&at)?.grad;
    let h = objective.val_loss_grad(&at)?.grad;
    let loss_at = |which: &[crate::model::Batch], theta: &ParamSet<f64>, phi: &ParamSet<f64>| -> Result<f64> {
        Ok(training_loss_and_grad(arch, &Learner::new(theta.clone(), phi.clone()), which)?.loss)
    };
    let train = &episode.train[..];
    let val = std::slice::from_ref(&episode.val);

    let mut out = vec![
        CheckResult::new("L_disc d/dpsi", max_relative_error(&dal.psi.flatten(), &fd_psi), FIRST_ORDER_TOL),
        CheckResult::new("L_disc reversed d/dtheta", max_relative_error(&dal.theta.flatten(), &reversed), FIRST_ORDER_TOL),
    ];
    for (name, grad, batches) in [("L_train", &g, train), ("L_val", &h, val)] {
        let fd_t = fd_over(&at.theta, |t| loss_at(batches, t, &at.phi))?;
        let fd_p = fd_over(&at.phi, |p| loss_at(batches, &at.theta, p))?;
        out.push(CheckResult::new(
            format!("{name} d/dtheta"),
            max_relative_error(&grad.theta.flatten(), &fd_t),
            FIRST_ORDER_TOL,
        ));
        out.push(CheckResult::new(
            format!("{name} d/dphi"),
            max_relative_error(&grad.phi.flatten(), &fd_p),
            FIRST_ORDER_TOL,
        ));
    }
    Ok(out)
}

/// `max |(combined − literal) − (−γ∇G)|` at `β = 0`.
pub fn mode_identity_gap(arch: &ArchSpec, seed: u64, gamma: f64) -> Result<f64> {
    let model = init_model::<f64>(arch, seed)?;
    let episode = check_episode(arch, seed, 6);
    let objective = NetworkObjective::new(arch, &episode)?;
    let at = Learner::new(model.theta, model.phi);
    let (combined, _) = outer_update_with(&objective, &at, 0.0, gamma, OuterMode::Combined)?;
    let (literal, _) = outer_update_with(&objective, &at, 0.0, gamma, OuterMode::Literal)?;
    let g = objective.train_loss_grad(&at)?.grad;
    let mut diff = combined;
    diff.axpy(-1.0, &literal);
    let mut want = g;
    want.theta.scale(-gamma);
    want.phi.scale(-gamma);
    let got = diff.theta.flatten().into_iter().chain(diff.phi.flatten());
    let expected = want.theta.flatten().into_iter().chain(want.phi.flatten());
    Ok(got.zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// The whole suite on [`check_arch`].
pub fn run_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let arch = check_arch();
    let mut out = vec![CheckResult::new("GRL exactness", grl_exactness(seed), 0.0)];
    out.extend(first_order_checks(&arch, seed)?);
    let meta = meta_gradient_check(&arch, seed, 5e-4, FD_STEP)?;
    out.push(CheckResult::new("meta-gradient vs FD (beta=5e-4)", meta.max_rel_err(), META_FD_TOL));
    let flat = meta_gradient_check(&arch, seed, 0.0, FD_STEP)?;
    out.push(CheckResult::new("meta-gradient vs plain dH (beta=0)", flat.max_rel_err_vs_plain, META_PLAIN_TOL));
    out.push(CheckResult::new(
        "combined - literal = -gamma dG (beta=0)",
        mode_identity_gap(&arch, seed, 5e-4)?,
        MODE_IDENTITY_TOL,
    ));
    Ok(out)
}
