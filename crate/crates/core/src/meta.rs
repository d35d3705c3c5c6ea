//! Meta-learned cross-domain validation.
//!
//! One meta step takes the DAL-updated extractor `θ` and the classifier `φ`,
//! simulates a classification step on the `S_d` domains,
//!
//! ```text
//! (θ', φ') = (θ, φ) − β ∇G(θ, φ)
//! ```
//!
//! measures the validation loss `H(θ', φ')` on the held-out `S_c` domain and
//! differentiates it back to `(θ, φ)`:
//!
//! ```text
//! ∇_{θ,φ} H(θ', φ') = (I − β ∇²G(θ, φ)) ∇H(θ', φ')
//! ```
//!
//! The Hessian-vector product is computed exactly by re-running the
//! hand-written backward pass of `G` in dual-number arithmetic with tangent
//! `∇H(θ', φ')` (forward-over-reverse).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss;
use crate::model::{
    classification_loss_and_grad, forward_features, classify, init_model_without_discriminator,
    ArchSpec, Batch, ParamSet,
};
use crate::scalar::{Dual, Scalar};
use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterMode {
    /// Descend `G + H∘inner`.
    #[default]
    Combined,
    /// Descend `H∘inner` only.
    Literal,
    /// Descend `G + H` with `H`'s gradient taken at the inner parameters and
    /// no second-order term.
    FirstOrder,
}

impl OuterMode {
    pub fn name(self) -> &'static str {
        match self {
            OuterMode::Combined => "combined",
            OuterMode::Literal => "literal",
            OuterMode::FirstOrder => "first_order",
        }
    }
}

impl std::str::FromStr for OuterMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "combined" => Ok(OuterMode::Combined),
            "literal" => Ok(OuterMode::Literal),
            "first_order" => Ok(OuterMode::FirstOrder),
            other => Err(format!(
                "unknown outer mode `{other}` (expected combined, literal or first_order)"
            )),
        }
    }
}

/// The classification parameters `(θ, φ)` updated by the meta step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Learner<S> {
    pub theta: ParamSet<S>,
    pub phi: ParamSet<S>,
}

impl<S: Scalar> Learner<S> {
    pub fn new(theta: ParamSet<S>, phi: ParamSet<S>) -> Self {
        Self { theta, phi }
    }

    pub fn zeros_like(&self) -> Self {
        Self::new(self.theta.zeros_like(), self.phi.zeros_like())
    }

    pub fn axpy(&mut self, a: S, x: &Learner<S>) {
        self.theta.axpy(a, &x.theta);
        self.phi.axpy(a, &x.phi);
    }

    pub fn all_finite(&self) -> bool {
        self.theta.all_finite() && self.phi.all_finite()
    }

    pub fn len(&self) -> usize {
        self.theta.len() + self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lifts to dual numbers with the given tangent direction.
    pub fn with_tangent(&self, tangent: &Learner<S>) -> Learner<Dual<S>> {
        Learner::new(
            self.theta.zip_map(&tangent.theta, Dual::new),
            self.phi.zip_map(&tangent.phi, Dual::new),
        )
    }
}

impl<S: Scalar> Learner<Dual<S>> {
    pub fn tangent(&self) -> Learner<S> {
        Learner::new(self.theta.map(|d| d.eps), self.phi.map(|d| d.eps))
    }
}

/// A loss value together with its gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGrad<S> {
    pub loss: S,
    pub grad: Learner<S>,
}

/// The pair of losses a meta step works with: a training loss `G` on the
/// meta-train domains and a validation loss `H` on the meta-validation
/// domain. Both must be differentiable in any [`Scalar`], which is what lets
/// the second-order term be computed with dual numbers.
pub trait MetaObjective {
    fn train_loss_grad<T: Scalar>(&self, at: &Learner<T>) -> Result<LossGrad<T>>;
    fn val_loss_grad<T: Scalar>(&self, at: &Learner<T>) -> Result<LossGrad<T>>;

    fn val_loss<T: Scalar>(&self, at: &Learner<T>) -> Result<T> {
        Ok(self.val_loss_grad(at)?.loss)
    }
}

/// Batches of one episode: one per `S_d` domain for training and one from
/// `S_c` for validation.
#[derive(Clone, Debug)]
pub struct EpisodeBatches {
    pub train: Vec<Batch>,
    pub val: Batch,
}

impl EpisodeBatches {
    /// Checks that no validation example comes from a training domain.
    pub fn check_disjoint(&self) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::InvalidArgument("no meta-train batches".into()));
        }
        for (d, _) in &self.val.provenance {
            if self
                .train
                .iter()
                .any(|b| b.provenance.iter().any(|(td, _)| td == d))
            {
                return Err(Error::InvalidArgument(format!(
                    "validation batch shares domain {d} with the meta-train batches"
                )));
            }
        }
        Ok(())
    }
}

/// `G` and `H` for the extractor/classifier network.
#[derive(Clone, Copy, Debug)]
pub struct NetworkObjective<'a> {
    pub arch: &'a ArchSpec,
    pub batches: &'a EpisodeBatches,
}

impl<'a> NetworkObjective<'a> {
    pub fn new(arch: &'a ArchSpec, batches: &'a EpisodeBatches) -> Result<Self> {
        batches.check_disjoint()?;
        Ok(Self { arch, batches })
    }
}

/// Equal-weight mean of the per-domain cross-entropies.
pub fn training_loss_and_grad<S: Scalar>(
    arch: &ArchSpec,
    at: &Learner<S>,
    batches: &[Batch],
) -> Result<LossGrad<S>> {
    if batches.is_empty() {
        return Err(Error::InvalidArgument("no training batches".into()));
    }
    let w = S::one() / S::from_f64(batches.len() as f64);
    let mut total = LossGrad {
        loss: S::zero(),
        grad: at.zeros_like(),
    };
    for batch in batches {
        let g = classification_loss_and_grad(arch, &at.theta, &at.phi, batch)?;
        total.loss += w * g.loss;
        total.grad.theta.axpy(w, &g.theta);
        total.grad.phi.axpy(w, &g.phi);
    }
    Ok(total)
}

impl MetaObjective for NetworkObjective<'_> {
    fn train_loss_grad<T: Scalar>(&self, at: &Learner<T>) -> Result<LossGrad<T>> {
        training_loss_and_grad(self.arch, at, &self.batches.train)
    }

    fn val_loss_grad<T: Scalar>(&self, at: &Learner<T>) -> Result<LossGrad<T>> {
        training_loss_and_grad(self.arch, at, std::slice::from_ref(&self.batches.val))
    }

    fn val_loss<T: Scalar>(&self, at: &Learner<T>) -> Result<T> {
        let x = self.batches.val.inputs_as::<T>();
        let logits = classify(self.arch, &at.phi, &forward_features(self.arch, &at.theta, &x)?)?;
        loss::cross_entropy(&logits, &self.batches.val.class_labels)
    }
}

/// Result of the simulated training step.
#[derive(Clone, Debug)]
pub struct InnerStep<S> {
    pub inner: Learner<S>,
    pub train: LossGrad<S>,
}

/// `(θ', φ') = (θ, φ) − β ∇G(θ, φ)`; the inputs are not modified.
pub fn inner_step<O: MetaObjective, S: Scalar>(
    objective: &O,
    at: &Learner<S>,
    beta: f64,
) -> Result<InnerStep<S>> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be >= 0, got {beta}")));
    }
    let train = objective.train_loss_grad(at)?;
    if !train.loss.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "training loss is not finite: {:?}",
            train.loss
        )));
    }
    let mut inner = at.clone();
    inner.axpy(S::from_f64(-beta), &train.grad);
    Ok(InnerStep { inner, train })
}

pub fn inner_update<S: Scalar>(
    arch: &ArchSpec,
    theta_shared: &ParamSet<S>,
    phi: &ParamSet<S>,
    train_batches: &[Batch],
    beta: f64,
) -> Result<(ParamSet<S>, ParamSet<S>, S)> {
    let at = Learner::new(theta_shared.clone(), phi.clone());
    let step = inner_step(&TrainOnly { arch, batches: train_batches }, &at, beta)?;
    Ok((step.inner.theta, step.inner.phi, step.train.loss))
}

struct TrainOnly<'a> {
    arch: &'a ArchSpec,
    batches: &'a [Batch],
}

impl MetaObjective for TrainOnly<'_> {
    fn train_loss_grad<T: Scalar>(&self, at: &Learner<T>) -> Result<LossGrad<T>> {
        training_loss_and_grad(self.arch, at, self.batches)
    }

    fn val_loss_grad<T: Scalar>(&self, _at: &Learner<T>) -> Result<LossGrad<T>> {
        Err(Error::InvalidArgument("no validation batch".into()))
    }
}

/// Cross-domain validation loss `H` at the inner-updated parameters.
pub fn cdv_loss<S: Scalar>(
    arch: &ArchSpec,
    theta_inner: &ParamSet<S>,
    phi_inner: &ParamSet<S>,
    batches: &EpisodeBatches,
) -> Result<S> {
    let objective = NetworkObjective::new(arch, batches)?;
    objective.val_loss(&Learner::new(theta_inner.clone(), phi_inner.clone()))
}

/// Outer gradient of one meta step together with the values it was built from.
#[derive(Clone, Debug)]
pub struct OuterGradient<S> {
    pub grad: Learner<S>,
    pub loss_g: S,
    pub loss_h: S,
    pub mode: OuterMode,
}

impl<S: Scalar> OuterGradient<S> {
    pub fn report(&self) -> MetaStepReport {
        MetaStepReport {
            loss_g: self.loss_g.to_f64(),
            loss_h: self.loss_h.to_f64(),
            outer_grad_norm_theta: self.grad.theta.l2_norm(),
            outer_grad_norm_phi: self.grad.phi.l2_norm(),
            mode: self.mode,
        }
    }
}

/// Gradient of `H∘inner` with respect to the pre-step parameters, plus the
/// pieces needed by the other modes.
pub struct MetaGradientParts<S> {
    pub inner: InnerStep<S>,
    pub val_at_inner: LossGrad<S>,
    /// `∇_{θ,φ} H(inner(θ, φ))`
    pub through_inner: Learner<S>,
}

pub fn meta_gradient_parts<O: MetaObjective, S: Scalar>(
    objective: &O,
    at: &Learner<S>,
    beta: f64,
) -> Result<MetaGradientParts<S>> {
    let inner = inner_step(objective, at, beta)?;
    let val_at_inner = objective.val_loss_grad(&inner.inner)?;
    let mut through_inner = val_at_inner.grad.clone();
    if beta != 0.0 {
        // (I − β∇²G) v with v = ∇H(θ', φ')
        let lifted = at.with_tangent(&val_at_inner.grad);
        let hvp = objective.train_loss_grad(&lifted)?.grad.tangent();
        through_inner.axpy(S::from_f64(-beta), &hvp);
    }
    Ok(MetaGradientParts {
        inner,
        val_at_inner,
        through_inner,
    })
}

pub fn outer_gradient<O: MetaObjective, S: Scalar>(
    objective: &O,
    at: &Learner<S>,
    beta: f64,
    mode: OuterMode,
) -> Result<OuterGradient<S>> {
    let parts = meta_gradient_parts(objective, at, beta)?;
    let grad = match mode {
        OuterMode::Literal => parts.through_inner,
        OuterMode::Combined => {
            let mut g = parts.inner.train.grad.clone();
            g.axpy(S::one(), &parts.through_inner);
            g
        }
        OuterMode::FirstOrder => {
            let mut g = parts.inner.train.grad.clone();
            g.axpy(S::one(), &parts.val_at_inner.grad);
            g
        }
    };
    if !grad.all_finite() || !parts.val_at_inner.loss.is_finite() {
        return Err(Error::InvalidArgument("outer gradient is not finite".into()));
    }
    Ok(OuterGradient {
        grad,
        loss_g: parts.inner.train.loss,
        loss_h: parts.val_at_inner.loss,
        mode,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaStepReport {
    pub loss_g: f64,
    pub loss_h: f64,
    pub outer_grad_norm_theta: f64,
    pub outer_grad_norm_phi: f64,
    pub mode: OuterMode,
}

/// Outer step with plain gradient descent of size `gamma` for any objective.
pub fn outer_update_with<O: MetaObjective, S: Scalar>(
    objective: &O,
    at: &Learner<S>,
    beta: f64,
    gamma: f64,
    mode: OuterMode,
) -> Result<(Learner<S>, MetaStepReport)> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    let og = outer_gradient(objective, at, beta, mode)?;
    let mut next = at.clone();
    next.axpy(S::from_f64(-gamma), &og.grad);
    Ok((next, og.report()))
}

pub fn outer_update<S: Scalar>(
    arch: &ArchSpec,
    theta_shared: &ParamSet<S>,
    phi: &ParamSet<S>,
    batches: &EpisodeBatches,
    beta: f64,
    gamma: f64,
    mode: OuterMode,
) -> Result<(ParamSet<S>, ParamSet<S>, MetaStepReport)> {
    let objective = NetworkObjective::new(arch, batches)?;
    let at = Learner::new(theta_shared.clone(), phi.clone());
    let (next, report) = outer_update_with(&objective, &at, beta, gamma, mode)?;
    Ok((next.theta, next.phi, report))
}

/// `|a − b| / max(|a|, |b|, 1e-6)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| relative_error(x, y))
        .fold(0.0, f64::max)
}

/// Central finite differences of `f` at `x`.
pub fn finite_difference_gradient(
    x: &[f64],
    epsilon: f64,
    mut f: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + epsilon;
        let plus = f(&probe)?;
        probe[i] = x[i] - epsilon;
        let minus = f(&probe)?;
        probe[i] = x[i];
        out.push((plus - minus) / (2.0 * epsilon));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaGradCheckReport {
    pub beta: f64,
    pub epsilon: f64,
    pub num_params: usize,
    /// Meta-gradient vs finite differences of `(θ, φ) ↦ H(inner(θ, φ))`.
    pub max_rel_err_theta: f64,
    pub max_rel_err_phi: f64,
    /// Meta-gradient vs the plain `∇H` at the pre-step parameters.
    pub max_rel_err_vs_plain: f64,
    /// `‖∇(combined) − ∇(first_order)‖₂`
    pub second_order_gap: f64,
}

impl MetaGradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.max_rel_err_theta.max(self.max_rel_err_phi)
    }
}

/// Synthetic episode used by the gradient checks: `n` examples per domain,
/// domains 0 and 1 for training and 2 for validation.
pub fn check_episode(arch: &ArchSpec, seed: u64, n: usize) -> EpisodeBatches {
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c4ec);
    let mut batch = |domain: usize, label: u8| {
        let data: Vec<f64> = (0..n * arch.input_dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Batch {
            inputs: Matrix::from_vec(n, arch.input_dim, data).expect("sized above"),
            class_labels: (0..n).map(|i| (i + domain) % arch.num_classes).collect(),
            domain_labels: vec![label; n],
            provenance: (0..n).map(|i| (domain, i)).collect(),
        }
    };
    let train = vec![batch(0, 0), batch(1, 1)];
    let val = batch(2, 0);
    EpisodeBatches { train, val }
}

/// Compares the analytic meta-gradient with finite differences on a small
/// model initialised from `seed`.
pub fn meta_gradient_check(
    arch: &ArchSpec,
    seed: u64,
    beta: f64,
    epsilon: f64,
) -> Result<MetaGradCheckReport> {
    let model = init_model_without_discriminator::<f64>(arch, seed)?;
    let batches = check_episode(arch, seed, 6);
    let objective = NetworkObjective::new(arch, &batches)?;
    let at = Learner::new(model.theta, model.phi);

    let parts = meta_gradient_parts(&objective, &at, beta)?;
    let analytic_theta = parts.through_inner.theta.flatten();
    let analytic_phi = parts.through_inner.phi.flatten();

    let composed = |candidate: &Learner<f64>| -> Result<f64> {
        let inner = inner_step(&objective, candidate, beta)?;
        objective.val_loss(&inner.inner)
    };
    let fd_theta = finite_difference_gradient(&at.theta.flatten(), epsilon, |flat| {
        let mut c = at.clone();
        c.theta.assign_flat(flat)?;
        composed(&c)
    })?;
    let fd_phi = finite_difference_gradient(&at.phi.flatten(), epsilon, |flat| {
        let mut c = at.clone();
        c.phi.assign_flat(flat)?;
        composed(&c)
    })?;

    let plain = objective.val_loss_grad(&at)?.grad;
    let mut all_analytic = analytic_theta.clone();
    all_analytic.extend(&analytic_phi);
    let mut all_plain = plain.theta.flatten();
    all_plain.extend(plain.phi.flatten());

    let combined = outer_gradient(&objective, &at, beta, OuterMode::Combined)?.grad;
    let first = outer_gradient(&objective, &at, beta, OuterMode::FirstOrder)?.grad;
    let mut gap = combined.clone();
    gap.axpy(-1.0, &first);
    let second_order_gap = (gap.theta.l2_norm().powi(2) + gap.phi.l2_norm().powi(2)).sqrt();

    Ok(MetaGradCheckReport {
        beta,
        epsilon,
        num_params: at.len(),
        max_rel_err_theta: max_relative_error(&analytic_theta, &fd_theta),
        max_rel_err_phi: max_relative_error(&analytic_phi, &fd_phi),
        max_rel_err_vs_plain: max_relative_error(&all_analytic, &all_plain),
        second_order_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_model, Activation, Dense};

    /// One scalar parameter `w` carried as the single weight of `θ`.
    struct ScalarChain;

    fn scalar(w: f64) -> Learner<f64> {
        let mut theta = ParamSet::zeros(&[1, 1]);
        theta.layers[0].weight[(0, 0)] = w;
        Learner::new(theta, ParamSet { layers: Vec::<Dense<f64>>::new() })
    }

    fn w_of<T: Scalar>(l: &Learner<T>) -> T {
        l.theta.layers[0].weight[(0, 0)]
    }

    fn with_w_grad<T: Scalar>(l: &Learner<T>, loss: T, dw: T) -> LossGrad<T> {
        let mut grad = l.zeros_like();
        grad.theta.layers[0].weight[(0, 0)] = dw;
        LossGrad { loss, grad }
    }

    impl MetaObjective for ScalarChain {
        // G(w) = w²
        fn train_loss_grad<T: Scalar>(&self, at: &Learner<T>) -> Result<LossGrad<T>> {
            let w = w_of(at);
            Ok(with_w_grad(at, w * w, T::from_f64(2.0) * w))
        }
        // H(v) = (v − 1)²
        fn val_loss_grad<T: Scalar>(&self, at: &Learner<T>) -> Result<LossGrad<T>> {
            let d = w_of(at) - T::one();
            Ok(with_w_grad(at, d * d, T::from_f64(2.0) * d))
        }
    }

    struct ShiftedSquare;

    impl MetaObjective for ShiftedSquare {
        // G(w) = (w − 1)²
        fn train_loss_grad<T: Scalar>(&self, at: &Learner<T>) -> Result<LossGrad<T>> {
            let d = w_of(at) - T::one();
            Ok(with_w_grad(at, d * d, T::from_f64(2.0) * d))
        }
        fn val_loss_grad<T: Scalar>(&self, at: &Learner<T>) -> Result<LossGrad<T>> {
            self.train_loss_grad(at)
        }
    }

    #[test]
    fn inner_step_on_scalar_surrogate() {
        let step = inner_step(&ShiftedSquare, &scalar(0.0), 0.1).unwrap();
        assert!((w_of(&step.inner) - 0.2).abs() < 1e-15);
        assert_eq!(step.train.loss, 1.0);
    }

    #[test]
    fn scalar_chain_rule_oracle() {
        // v = w − β·2w = 0.8 at w = 1, β = 0.1
        // dG/dw + dH/dv · dv/dw = 2 + 2(0.8 − 1)(0.8) = 1.68
        let og = outer_gradient(&ScalarChain, &scalar(1.0), 0.1, OuterMode::Combined).unwrap();
        assert!((w_of(&og.grad) - 1.68).abs() < 1e-12);
        let gamma = 0.05;
        let (next, _) =
            outer_update_with(&ScalarChain, &scalar(1.0), 0.1, gamma, OuterMode::Combined)
                .unwrap();
        assert!((w_of(&next) - (1.0 - gamma * 1.68)).abs() < 1e-15);
    }

    #[test]
    fn zero_gamma_keeps_parameters() {
        for mode in [OuterMode::Combined, OuterMode::Literal, OuterMode::FirstOrder] {
            let (next, _) = outer_update_with(&ScalarChain, &scalar(0.3), 0.1, 0.0, mode).unwrap();
            assert_eq!(next, scalar(0.3));
        }
    }

    #[test]
    fn negative_step_sizes_are_rejected() {
        assert!(inner_step(&ScalarChain, &scalar(0.0), -0.1).is_err());
        assert!(outer_update_with(&ScalarChain, &scalar(0.0), 0.1, -1.0, OuterMode::Combined)
            .is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in [OuterMode::Combined, OuterMode::Literal, OuterMode::FirstOrder] {
            assert_eq!(mode.name().parse::<OuterMode>().unwrap(), mode);
        }
        assert!("second_order".parse::<OuterMode>().is_err());
    }

    fn tiny_arch() -> ArchSpec {
        ArchSpec::new(3, 4, 3)
            .with_extractor_hidden(vec![4])
            .with_activation(Activation::Tanh)
    }

    #[test]
    fn zero_beta_inner_update_is_identity() {
        let arch = tiny_arch();
        let m = init_model::<f64>(&arch, 2).unwrap();
        let batches = check_episode(&arch, 2, 5);
        let (t, p, g) = inner_update(&arch, &m.theta, &m.phi, &batches.train, 0.0).unwrap();
        assert_eq!(t, m.theta);
        assert_eq!(p, m.phi);
        assert!(g > 0.0);
    }

    #[test]
    fn overlapping_validation_domain_is_rejected() {
        let arch = tiny_arch();
        let m = init_model::<f64>(&arch, 2).unwrap();
        let mut batches = check_episode(&arch, 2, 5);
        batches.val.provenance[0].0 = 1;
        assert!(cdv_loss(&arch, &m.theta, &m.phi, &batches).is_err());
        assert!(outer_update(&arch, &m.theta, &m.phi, &batches, 0.1, 0.1, OuterMode::Combined)
            .is_err());
    }

    #[test]
    fn zero_classifier_gives_uniform_validation_loss() {
        let arch = tiny_arch();
        let m = init_model::<f64>(&arch, 4).unwrap();
        let batches = check_episode(&arch, 4, 5);
        let h = cdv_loss(&arch, &m.theta, &m.phi.zeros_like(), &batches).unwrap();
        assert!((h - 3.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn meta_step_leaves_inputs_untouched() {
        let arch = tiny_arch();
        let m = init_model::<f64>(&arch, 9).unwrap();
        let before = m.clone();
        let batches = check_episode(&arch, 9, 5);
        let _ = outer_update(&arch, &m.theta, &m.phi, &batches, 0.3, 0.1, OuterMode::Combined)
            .unwrap();
        assert_eq!(m, before);
    }
}
