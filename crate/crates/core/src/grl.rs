//! Gradient reversal and the discriminative adversarial learning (DAL) step.
//!
//! The discriminator `d_ψ` is trained to tell the two `S_d` domains apart
//! from extractor features, while the extractor receives the discriminator's
//! gradient through a reversal layer and therefore ascends the same loss:
//!
//! ```text
//! ψ ← ψ − α ∇_ψ F
//! θ ← θ − α ∇_θ(−λ F)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss;
use crate::model::{backward_mlp, forward_mlp, ArchSpec, Batch, ModelParams, ParamSet};
use crate::scalar::Scalar;
use crate::tensor::Matrix;

/// Identity on the way forward, `−λ ×` on the way back.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientReversal {
    pub lambda: f64,
}

impl GradientReversal {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    pub fn forward<S: Scalar>(&self, x: &Matrix<S>) -> Matrix<S> {
        grl_forward(x)
    }

    pub fn backward<S: Scalar>(&self, upstream: &Matrix<S>) -> Matrix<S> {
        grl_backward(upstream, S::from_f64(self.lambda))
    }
}

pub fn grl_forward<S: Scalar>(x: &Matrix<S>) -> Matrix<S> {
    x.clone()
}

pub fn grl_backward<S: Scalar>(upstream: &Matrix<S>, lambda: S) -> Matrix<S> {
    upstream.map(|g| -lambda * g)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DalStepReport {
    /// Discriminator loss before the step.
    pub loss_f: f64,
    /// Discriminator accuracy on the step's batches, before the step.
    pub disc_accuracy: f64,
    pub grad_norm_theta: f64,
    pub grad_norm_psi: f64,
}

/// Gradients of one DAL step. `theta` is already reversed, i.e. it is the
/// gradient of `−λF`, so both parameter sets are updated by descent.
#[derive(Clone, Debug)]
pub struct DalGrads<S> {
    pub loss_f: S,
    pub disc_accuracy: f64,
    pub theta: ParamSet<S>,
    pub psi: ParamSet<S>,
}

impl<S: Scalar> DalGrads<S> {
    pub fn report(&self) -> DalStepReport {
        DalStepReport {
            loss_f: self.loss_f.to_f64(),
            disc_accuracy: self.disc_accuracy,
            grad_norm_theta: self.theta.l2_norm(),
            grad_norm_psi: self.psi.l2_norm(),
        }
    }
}

fn check_domain_side(batch: &Batch, label: u8, which: &str) -> Result<()> {
    if batch.domain_labels.iter().any(|&d| d != label) {
        return Err(Error::InvalidArgument(format!(
            "{which} must carry domain label {label}"
        )));
    }
    Ok(())
}

/// Discriminator loss `F` on the concatenation of one batch per `S_d` domain,
/// with gradients for `ψ` and reversed gradients for `θ`.
pub fn dal_gradients<S: Scalar>(
    arch: &ArchSpec,
    theta: &ParamSet<S>,
    psi: &ParamSet<S>,
    batch_a: &Batch,
    batch_b: &Batch,
    lambda: f64,
) -> Result<DalGrads<S>> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    check_domain_side(batch_a, 0, "batch_a")?;
    check_domain_side(batch_b, 1, "batch_b")?;
    if psi.input_dim() != theta.output_dim() {
        return Err(Error::Shape(format!(
            "extractor emits {} features but discriminator expects {}",
            theta.output_dim(),
            psi.input_dim()
        )));
    }
    let batch = batch_a.concat(batch_b)?;
    batch.validate(usize::MAX)?;

    let x = batch.inputs_as::<S>();
    let (features, f_cache) = forward_mlp(theta, &x, arch.activation, arch.feature_activation)?;
    let grl = GradientReversal::new(lambda);
    let (logits, d_cache) = forward_mlp(psi, &grl.forward(&features), arch.activation, false)?;
    let (loss_f, d_logits) = loss::binary_domain_loss_with_grad(&logits, &batch.domain_labels)?;
    let disc_accuracy = loss::binary_accuracy(&logits, &batch.domain_labels);

    let (g_psi, d_features) = backward_mlp(psi, &d_cache, &d_logits, arch.activation, false)?;
    let reversed = grl.backward(&d_features);
    let (g_theta, _) =
        backward_mlp(theta, &f_cache, &reversed, arch.activation, arch.feature_activation)?;

    Ok(DalGrads {
        loss_f,
        disc_accuracy,
        theta: g_theta,
        psi: g_psi,
    })
}

/// One DAL step with plain gradient steps of size `alpha`. Returns the new
/// `θ` (shared with the rest of the iteration) and the new `ψ`; `φ` is never
/// read or written.
pub fn dal_step<S: Scalar>(
    arch: &ArchSpec,
    model: &ModelParams<S>,
    batch_a: &Batch,
    batch_b: &Batch,
    alpha: f64,
    lambda: f64,
) -> Result<(ParamSet<S>, ParamSet<S>, DalStepReport)> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    let psi = model.psi()?;
    let grads = dal_gradients(arch, &model.theta, psi, batch_a, batch_b, lambda)?;
    let step = S::from_f64(-alpha);
    let mut theta = model.theta.clone();
    theta.axpy(step, &grads.theta);
    let mut psi = psi.clone();
    psi.axpy(step, &grads.psi);
    Ok((theta, psi, grads.report()))
}

/// `F` at the given parameters, evaluated without any gradient work.
pub fn dal_loss<S: Scalar>(
    arch: &ArchSpec,
    theta: &ParamSet<S>,
    psi: &ParamSet<S>,
    batch_a: &Batch,
    batch_b: &Batch,
) -> Result<S> {
    let batch = batch_a.concat(batch_b)?;
    let features = crate::model::forward_features(arch, theta, &batch.inputs_as::<S>())?;
    let logits = crate::model::discriminate(arch, psi, &features)?;
    loss::binary_domain_loss(&logits, &batch.domain_labels)
}
