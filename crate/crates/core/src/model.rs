//! The three networks: feature extractor `f_θ`, classifier `c_φ` and domain
//! discriminator `d_ψ`.
//!
//! Every network is a stack of dense layers stored as a [`ParamSet`]. Forward
//! passes are pure functions of the parameters; the `*_with_cache` variants
//! keep the intermediate activations needed by the hand-written backward
//! passes in [`backward_mlp`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss;
use crate::scalar::Scalar;
use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Activation::Relu => {
                if x.primal_gt(S::zero()) {
                    x
                } else {
                    S::zero()
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative evaluated at the pre-activation `x`.
    #[inline]
    pub fn derivative<S: Scalar>(self, x: S) -> S {
        match self {
            Activation::Relu => {
                if x.primal_gt(S::zero()) {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                S::one() - t * t
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(format!("unknown activation `{other}` (expected relu or tanh)")),
        }
    }
}

/// Layer widths of the three networks.
///
/// The extractor is `input_dim → extractor_hidden… → feature_dim`, the
/// classifier a single linear map `feature_dim → num_classes` and the
/// discriminator `feature_dim → disc_hidden… → 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub input_dim: usize,
    pub feature_dim: usize,
    pub extractor_hidden: Vec<usize>,
    pub num_classes: usize,
    pub disc_hidden: Vec<usize>,
    pub disc_out: usize,
    pub activation: Activation,
    /// Apply the activation to the extractor output as well.
    pub feature_activation: bool,
}

impl ArchSpec {
    pub fn new(input_dim: usize, feature_dim: usize, num_classes: usize) -> Self {
        Self {
            input_dim,
            feature_dim,
            extractor_hidden: Vec::new(),
            num_classes,
            disc_hidden: vec![1024, 1024],
            disc_out: 1,
            activation: Activation::Relu,
            feature_activation: true,
        }
    }

    pub fn with_extractor_hidden(mut self, hidden: Vec<usize>) -> Self {
        self.extractor_hidden = hidden;
        self
    }

    pub fn with_disc_hidden(mut self, hidden: Vec<usize>) -> Self {
        self.disc_hidden = hidden;
        self
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_feature_activation(mut self, on: bool) -> Self {
        self.feature_activation = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let widths = [self.input_dim, self.feature_dim]
            .into_iter()
            .chain(self.extractor_hidden.iter().copied())
            .chain(self.disc_hidden.iter().copied());
        if widths.into_iter().any(|w| w == 0) {
            return Err(Error::InvalidArgument("layer widths must be at least 1".into()));
        }
        if self.disc_out != 1 {
            return Err(Error::InvalidArgument(format!(
                "discriminator output must have width 1, got {}",
                self.disc_out
            )));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {}",
                self.num_classes
            )));
        }
        Ok(())
    }

    fn extractor_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim];
        dims.extend(&self.extractor_hidden);
        dims.push(self.feature_dim);
        dims
    }

    fn classifier_dims(&self) -> Vec<usize> {
        vec![self.feature_dim, self.num_classes]
    }

    fn discriminator_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.feature_dim];
        dims.extend(&self.disc_hidden);
        dims.push(self.disc_out);
        dims
    }
}

/// One affine layer; `weight` is `fan_in × fan_out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense<S> {
    pub weight: Matrix<S>,
    pub bias: Vec<S>,
}

/// An ordered collection of named arrays (`layer{i}.weight`, `layer{i}.bias`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSet<S> {
    pub layers: Vec<Dense<S>>,
}

impl<S: Scalar> ParamSet<S> {
    pub fn zeros(dims: &[usize]) -> Self {
        let layers = dims
            .windows(2)
            .map(|w| Dense {
                weight: Matrix::zeros(w[0], w[1]),
                bias: vec![S::zero(); w[1]],
            })
            .collect();
        Self { layers }
    }

    pub fn zeros_like(&self) -> Self {
        self.map(|_| S::zero())
    }

    /// Number of scalar parameters.
    pub fn len(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.as_slice().len() + l.bias.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map(|l| l.weight.rows()).unwrap_or(0)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.weight.cols()).unwrap_or(0)
    }

    /// `(name, shape, values)` for every array in order.
    pub fn named_arrays(&self) -> Vec<(String, Vec<usize>, &[S])> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            out.push((
                format!("layer{i}.weight"),
                vec![l.weight.rows(), l.weight.cols()],
                l.weight.as_slice(),
            ));
            out.push((format!("layer{i}.bias"), vec![l.bias.len()], l.bias.as_slice()));
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> ParamSet<T> {
        ParamSet {
            layers: self
                .layers
                .iter()
                .map(|l| Dense {
                    weight: l.weight.map(&f),
                    bias: l.bias.iter().map(|&b| f(b)).collect(),
                })
                .collect(),
        }
    }

    /// Combines two identically shaped sets elementwise.
    pub fn zip_map<U: Scalar, T: Scalar>(
        &self,
        other: &ParamSet<U>,
        f: impl Fn(S, U) -> T,
    ) -> ParamSet<T> {
        debug_assert_eq!(self.len(), other.len());
        ParamSet {
            layers: self
                .layers
                .iter()
                .zip(&other.layers)
                .map(|(a, b)| {
                    let w: Vec<T> = a
                        .weight
                        .as_slice()
                        .iter()
                        .zip(b.weight.as_slice())
                        .map(|(&x, &y)| f(x, y))
                        .collect();
                    Dense {
                        weight: Matrix::from_vec(a.weight.rows(), a.weight.cols(), w)
                            .expect("shapes checked by construction"),
                        bias: a.bias.iter().zip(&b.bias).map(|(&x, &y)| f(x, y)).collect(),
                    }
                })
                .collect(),
        }
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut S> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weight.as_mut_slice().iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn values(&self) -> impl Iterator<Item = S> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weight.as_slice().iter().chain(l.bias.iter()).copied())
    }

    /// `self += a · x`
    pub fn axpy(&mut self, a: S, x: &ParamSet<S>) {
        debug_assert_eq!(self.len(), x.len());
        for (v, d) in self.values_mut().zip(x.values()) {
            *v += a * d;
        }
    }

    pub fn scale(&mut self, a: S) {
        for v in self.values_mut() {
            *v *= a;
        }
    }

    pub fn flatten(&self) -> Vec<S> {
        self.values().collect()
    }

    /// Overwrites every value from a flat slice in `flatten` order.
    pub fn assign_flat(&mut self, flat: &[S]) -> Result<()> {
        if flat.len() != self.len() {
            return Err(Error::Shape(format!(
                "{} values for a parameter set of {}",
                flat.len(),
                self.len()
            )));
        }
        for (v, &f) in self.values_mut().zip(flat) {
            *v = f;
        }
        Ok(())
    }

    pub fn l2_norm(&self) -> f64 {
        self.values()
            .map(|v| {
                let x = v.to_f64();
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &ParamSet<S>) -> f64 {
        self.values()
            .zip(other.values())
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max)
    }

    pub fn cast<T: Scalar>(&self) -> ParamSet<T> {
        self.map(|v| T::from_f64(v.to_f64()))
    }
}

/// Parameters `θ` (extractor), `φ` (classifier) and `ψ` (discriminator).
///
/// `psi` is `None` for variants that never train a discriminator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<S> {
    pub theta: ParamSet<S>,
    pub phi: ParamSet<S>,
    pub psi: Option<ParamSet<S>>,
}

impl<S: Scalar> ModelParams<S> {
    pub fn psi(&self) -> Result<&ParamSet<S>> {
        self.psi
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("model has no discriminator".into()))
    }

    pub fn all_finite(&self) -> bool {
        self.theta.all_finite()
            && self.phi.all_finite()
            && self.psi.as_ref().is_none_or(|p| p.all_finite())
    }

    pub fn cast<T: Scalar>(&self) -> ModelParams<T> {
        ModelParams {
            theta: self.theta.cast(),
            phi: self.phi.cast(),
            psi: self.psi.as_ref().map(|p| p.cast()),
        }
    }
}

/// A mini-batch. `domain_labels` are episode-local (position of the example's
/// domain within `S_d`); `provenance` records `(dataset domain, example index)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub inputs: Matrix<f64>,
    pub class_labels: Vec<usize>,
    pub domain_labels: Vec<u8>,
    pub provenance: Vec<(usize, usize)>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }

    pub fn validate(&self, num_classes: usize) -> Result<()> {
        let n = self.inputs.rows();
        if n == 0 {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        if self.class_labels.len() != n || self.domain_labels.len() != n {
            return Err(Error::Shape(format!(
                "batch has {n} inputs but {} class labels and {} domain labels",
                self.class_labels.len(),
                self.domain_labels.len()
            )));
        }
        if let Some(&y) = self.class_labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::InvalidArgument(format!(
                "class label {y} out of range for {num_classes} classes"
            )));
        }
        if let Some(&d) = self.domain_labels.iter().find(|&&d| d > 1) {
            return Err(Error::InvalidArgument(format!("domain label {d} is not binary")));
        }
        if !self.inputs.all_finite() {
            return Err(Error::InvalidArgument("batch contains non-finite inputs".into()));
        }
        Ok(())
    }

    pub fn inputs_as<S: Scalar>(&self) -> Matrix<S> {
        self.inputs.map(S::from_f64)
    }

    /// Concatenates two batches (used to form the balanced DAL batch).
    pub fn concat(&self, other: &Batch) -> Result<Batch> {
        let mut class_labels = self.class_labels.clone();
        class_labels.extend(&other.class_labels);
        let mut domain_labels = self.domain_labels.clone();
        domain_labels.extend(&other.domain_labels);
        let mut provenance = self.provenance.clone();
        provenance.extend(&other.provenance);
        Ok(Batch {
            inputs: self.inputs.vstack(&other.inputs)?,
            class_labels,
            domain_labels,
            provenance,
        })
    }
}

fn init_params(dims: &[usize], activation: Activation, rng: &mut ChaCha8Rng) -> ParamSet<f64> {
    let mut p = ParamSet::zeros(dims);
    for layer in &mut p.layers {
        let fan_in = layer.weight.rows() as f64;
        let gain = match activation {
            Activation::Relu => 2.0,
            Activation::Tanh => 1.0,
        };
        let std = (gain / fan_in).sqrt();
        for w in layer.weight.as_mut_slice() {
            let z: f64 = StandardNormal.sample(rng);
            *w = std * z;
        }
    }
    p
}

/// Deterministic initialization: fan-in scaled zero-mean Gaussian weights,
/// zero biases. Parameters are drawn in the order θ, φ, ψ from one stream.
pub fn init_model<S: Scalar>(arch: &ArchSpec, seed: u64) -> Result<ModelParams<S>> {
    let mut p = init_model_without_discriminator::<S>(arch, seed)?;
    let mut rng = init_rng(seed);
    // Skip past θ and φ so ψ is independent of whether it was requested.
    let _ = init_params(&arch.extractor_dims(), arch.activation, &mut rng);
    let _ = init_params(&arch.classifier_dims(), arch.activation, &mut rng);
    p.psi = Some(init_params(&arch.discriminator_dims(), arch.activation, &mut rng).cast());
    Ok(p)
}

/// Same θ and φ as [`init_model`] for the same seed, with no ψ allocated.
pub fn init_model_without_discriminator<S: Scalar>(
    arch: &ArchSpec,
    seed: u64,
) -> Result<ModelParams<S>> {
    arch.validate()?;
    let mut rng = init_rng(seed);
    let theta = init_params(&arch.extractor_dims(), arch.activation, &mut rng);
    let phi = init_params(&arch.classifier_dims(), arch.activation, &mut rng);
    Ok(ModelParams {
        theta: theta.cast(),
        phi: phi.cast(),
        psi: None,
    })
}

fn init_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(crate::trainer::STREAM_INIT);
    rng
}

/// Intermediate values of an MLP forward pass.
#[derive(Clone, Debug)]
pub struct MlpCache<S> {
    /// Input to each layer.
    inputs: Vec<Matrix<S>>,
    /// Pre-activation output of each layer.
    pre: Vec<Matrix<S>>,
}

/// Forward pass; the activation is applied after every layer except the
/// last, and after the last too when `final_activation` is set.
pub fn forward_mlp<S: Scalar>(
    params: &ParamSet<S>,
    x: &Matrix<S>,
    activation: Activation,
    final_activation: bool,
) -> Result<(Matrix<S>, MlpCache<S>)> {
    if x.cols() != params.input_dim() {
        return Err(Error::Shape(format!(
            "input has width {}, network expects {}",
            x.cols(),
            params.input_dim()
        )));
    }
    let n_layers = params.layers.len();
    let mut cache = MlpCache {
        inputs: Vec::with_capacity(n_layers),
        pre: Vec::with_capacity(n_layers),
    };
    let mut h = x.clone();
    for (i, layer) in params.layers.iter().enumerate() {
        let mut z = h.matmul(&layer.weight)?;
        z.add_row_vector(&layer.bias);
        let activate = i + 1 < n_layers || final_activation;
        let out = if activate { z.map(|v| activation.apply(v)) } else { z.clone() };
        cache.inputs.push(h);
        cache.pre.push(z);
        h = out;
    }
    Ok((h, cache))
}

/// Backward pass matching [`forward_mlp`]; returns parameter gradients and
/// the gradient with respect to the network input.
pub fn backward_mlp<S: Scalar>(
    params: &ParamSet<S>,
    cache: &MlpCache<S>,
    grad_out: &Matrix<S>,
    activation: Activation,
    final_activation: bool,
) -> Result<(ParamSet<S>, Matrix<S>)> {
    let n_layers = params.layers.len();
    let mut grads = params.zeros_like();
    let mut g = grad_out.clone();
    for i in (0..n_layers).rev() {
        let activate = i + 1 < n_layers || final_activation;
        if activate {
            let pre = cache.pre[i].as_slice();
            for (gv, &z) in g.as_mut_slice().iter_mut().zip(pre) {
                *gv *= activation.derivative(z);
            }
        }
        grads.layers[i].weight = cache.inputs[i].t_matmul(&g)?;
        grads.layers[i].bias = g.column_sums();
        g = g.matmul_t(&params.layers[i].weight)?;
    }
    Ok((grads, g))
}

pub fn forward_features<S: Scalar>(
    arch: &ArchSpec,
    theta: &ParamSet<S>,
    inputs: &Matrix<S>,
) -> Result<Matrix<S>> {
    Ok(forward_mlp(theta, inputs, arch.activation, arch.feature_activation)?.0)
}

pub fn classify<S: Scalar>(
    arch: &ArchSpec,
    phi: &ParamSet<S>,
    features: &Matrix<S>,
) -> Result<Matrix<S>> {
    Ok(forward_mlp(phi, features, arch.activation, false)?.0)
}

pub fn discriminate<S: Scalar>(
    arch: &ArchSpec,
    psi: &ParamSet<S>,
    features: &Matrix<S>,
) -> Result<Matrix<S>> {
    if !features.all_finite() {
        return Err(Error::InvalidArgument("non-finite features".into()));
    }
    Ok(forward_mlp(psi, features, arch.activation, false)?.0)
}

/// Class logits for raw inputs.
pub fn predict_logits<S: Scalar>(
    arch: &ArchSpec,
    params: &ModelParams<S>,
    inputs: &Matrix<S>,
) -> Result<Matrix<S>> {
    let features = forward_features(arch, &params.theta, inputs)?;
    classify(arch, &params.phi, &features)
}

/// Gradients of one classification loss with respect to `θ` and `φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierGrads<S> {
    pub loss: S,
    pub theta: ParamSet<S>,
    pub phi: ParamSet<S>,
}

/// Mean softmax cross-entropy of `c_φ(f_θ(x))` and its gradients.
pub fn classification_loss_and_grad<S: Scalar>(
    arch: &ArchSpec,
    theta: &ParamSet<S>,
    phi: &ParamSet<S>,
    batch: &Batch,
) -> Result<ClassifierGrads<S>> {
    let x = batch.inputs_as::<S>();
    let (features, f_cache) = forward_mlp(theta, &x, arch.activation, arch.feature_activation)?;
    let (logits, c_cache) = forward_mlp(phi, &features, arch.activation, false)?;
    let (loss, d_logits) = loss::cross_entropy_with_grad(&logits, &batch.class_labels)?;
    let (g_phi, d_features) = backward_mlp(phi, &c_cache, &d_logits, arch.activation, false)?;
    let (g_theta, _) =
        backward_mlp(theta, &f_cache, &d_features, arch.activation, arch.feature_activation)?;
    Ok(ClassifierGrads {
        loss,
        theta: g_theta,
        phi: g_phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch() -> ArchSpec {
        ArchSpec::new(3, 4, 3)
            .with_extractor_hidden(vec![5])
            .with_disc_hidden(vec![6])
    }

    #[test]
    fn init_is_deterministic_and_seed_sensitive() {
        let a: ModelParams<f64> = init_model(&arch(), 7).unwrap();
        let b: ModelParams<f64> = init_model(&arch(), 7).unwrap();
        let c: ModelParams<f64> = init_model(&arch(), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.theta, c.theta);
    }

    #[test]
    fn init_biases_are_zero() {
        let p: ModelParams<f64> = init_model(&arch(), 3).unwrap();
        for set in [&p.theta, &p.phi, p.psi.as_ref().unwrap()] {
            for layer in &set.layers {
                assert!(layer.bias.iter().all(|&b| b == 0.0));
            }
        }
    }

    #[test]
    fn discriminator_free_init_shares_theta_and_phi() {
        let full: ModelParams<f64> = init_model(&arch(), 11).unwrap();
        let lean: ModelParams<f64> = init_model_without_discriminator(&arch(), 11).unwrap();
        assert_eq!(full.theta, lean.theta);
        assert_eq!(full.phi, lean.phi);
        assert!(lean.psi.is_none());
    }

    #[test]
    fn rejects_bad_arch() {
        assert!(init_model::<f64>(&ArchSpec::new(0, 4, 2), 0).is_err());
        assert!(init_model::<f64>(&arch().with_extractor_hidden(vec![3, 0]), 0).is_err());
        assert!(init_model::<f64>(&ArchSpec::new(3, 4, 1), 0).is_err());
        let mut a = arch();
        a.disc_out = 2;
        assert!(a.validate().is_err());
    }

    #[test]
    fn identity_extractor_passes_inputs_through() {
        let arch = ArchSpec::new(3, 3, 2);
        let mut theta = ParamSet::<f64>::zeros(&[3, 3]);
        theta.layers[0].weight = Matrix::identity(3);
        let x = Matrix::from_rows(&[[0.5, 1.5, 2.0], [3.0, 0.0, 0.25]]).unwrap();
        assert_eq!(forward_features(&arch, &theta, &x).unwrap(), x);
        let linear = arch.with_feature_activation(false);
        let neg = Matrix::from_rows(&[[-0.5, 1.5, -2.0]]).unwrap();
        assert_eq!(forward_features(&linear, &theta, &neg).unwrap(), neg);
    }

    #[test]
    fn zero_parameters_give_zero_outputs() {
        let arch = arch();
        let x = Matrix::from_rows(&[[1.0, -2.0, 3.0], [0.1, 0.2, 0.3]]).unwrap();
        let theta = ParamSet::<f64>::zeros(&arch.extractor_dims());
        let f = forward_features(&arch, &theta, &x).unwrap();
        assert!(f.as_slice().iter().all(|&v| v == 0.0));
        let phi = ParamSet::<f64>::zeros(&arch.classifier_dims());
        let logits = classify(&arch, &phi, &f).unwrap();
        assert_eq!(logits.shape(), (2, 3));
        assert!(logits.as_slice().iter().all(|&v| v == 0.0));
        let psi = ParamSet::<f64>::zeros(&arch.discriminator_dims());
        let d = discriminate(&arch, &psi, &f).unwrap();
        assert_eq!(d.shape(), (2, 1));
        assert!(d.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_hot_classifier_selects_features() {
        let arch = ArchSpec::new(2, 3, 2);
        let mut phi = ParamSet::<f64>::zeros(&[3, 2]);
        phi.layers[0].weight[(2, 0)] = 1.0;
        phi.layers[0].weight[(0, 1)] = 1.0;
        let f = Matrix::from_rows(&[[0.3, -1.0, 7.0]]).unwrap();
        let logits = classify(&arch, &phi, &f).unwrap();
        assert_eq!(logits.as_slice(), &[7.0, 0.3]);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let arch = arch();
        let p: ModelParams<f64> = init_model(&arch, 1).unwrap();
        let x = Matrix::<f64>::zeros(2, 4);
        assert!(matches!(forward_features(&arch, &p.theta, &x), Err(Error::Shape(_))));
    }

    #[test]
    fn named_arrays_cover_every_parameter() {
        let p: ModelParams<f64> = init_model(&arch(), 1).unwrap();
        let names: Vec<_> = p.theta.named_arrays().into_iter().map(|(n, _, _)| n).collect();
        assert_eq!(names, ["layer0.weight", "layer0.bias", "layer1.weight", "layer1.bias"]);
        let total: usize = p.theta.named_arrays().iter().map(|(_, _, v)| v.len()).sum();
        assert_eq!(total, p.theta.len());
    }

    #[test]
    fn batch_validation() {
        let good = Batch {
            inputs: Matrix::from_rows(&[[1.0, 2.0]]).unwrap(),
            class_labels: vec![1],
            domain_labels: vec![0],
            provenance: vec![(0, 0)],
        };
        assert!(good.validate(2).is_ok());
        assert!(good.validate(1).is_err());
        let mut bad = good.clone();
        bad.domain_labels = vec![2];
        assert!(bad.validate(2).is_err());
        let mut nan = good;
        nan.inputs[(0, 1)] = f64::NAN;
        assert!(nan.validate(2).is_err());
    }
}
