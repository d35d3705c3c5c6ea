//! Episodic training: the full DADG iteration, its ablations and the pooled
//! DeepAll baseline.
//!
//! One DADG iteration:
//!
//! 1. split the source domains into `S_d` (two domains) and `S_c` (one);
//! 2. DAL step on one batch from each `S_d` domain, giving `θ^{m+1}`;
//! 3. inner classification step on `S_d` batches;
//! 4. validation loss on an `S_c` batch at the inner parameters;
//! 5. outer update of `(θ, φ)` from `θ^{m+1}` with the meta-gradient.
//!
//! Randomness comes from independent ChaCha streams derived from one seed
//! (initialisation, episode sampling, batch sampling, splits), so variants
//! trained with the same seed see the same mini-batch sequence.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{BatchIterator, MultiDomainDataset, SplitPlan};
use crate::error::{Error, Result};
use crate::grl::{dal_gradients, DalStepReport};
use crate::meta::{outer_gradient, training_loss_and_grad, EpisodeBatches, Learner, MetaStepReport, NetworkObjective, OuterMode};
use crate::model::{init_model, init_model_without_discriminator, ArchSpec, Batch, ModelParams, ParamSet};
use crate::scalar::Scalar;

pub const STREAM_INIT: u64 = 1;
pub const STREAM_EPISODE: u64 = 2;
pub const STREAM_BATCH: u64 = 3;
pub const STREAM_SPLIT: u64 = 4;

/// Seeded generator on one of the named streams.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// DAL step size.
    pub alpha: f64,
    /// Inner (simulated training) step size.
    pub beta: f64,
    /// Outer step size, also used by the classification steps of the
    /// baselines.
    pub gamma: f64,
    /// Gradient reversal coefficient.
    pub lambda: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub iterations: usize,
    /// Examples per DAL step, split evenly between the two `S_d` domains.
    pub batch_dal: usize,
    /// Examples per domain for each classification batch.
    pub batch_cdv: usize,
    pub outer_mode: OuterMode,
    /// Momentum and weight decay for the discriminator update.
    pub psi_momentum: bool,
    /// Momentum and weight decay for the adversarial extractor update.
    pub theta_dal_momentum: bool,
    /// Momentum and weight decay for the outer and classification updates.
    pub outer_momentum: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            alpha: 5e-5,
            beta: 5e-4,
            gamma: 5e-4,
            lambda: 1.0,
            momentum: 0.9,
            weight_decay: 5e-5,
            iterations: 2000,
            batch_dal: 64,
            batch_cdv: 32,
            outer_mode: OuterMode::Combined,
            psi_momentum: true,
            theta_dal_momentum: false,
            outer_momentum: true,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("momentum", self.momentum),
            ("weight_decay", self.weight_decay),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.batch_dal < 2 || self.batch_cdv < 1 {
            return Err(Error::InvalidArgument(
                "batch_dal must be >= 2 and batch_cdv >= 1".into(),
            ));
        }
        Ok(())
    }

    fn dal_half(&self) -> usize {
        (self.batch_dal / 2).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Dadg,
    #[serde(rename = "deepall")]
    DeepAll,
    DadgDal,
    DadgCdv,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::DeepAll, Variant::DadgDal, Variant::DadgCdv, Variant::Dadg];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Dadg => "dadg",
            Variant::DeepAll => "deepall",
            Variant::DadgDal => "dadg_dal",
            Variant::DadgCdv => "dadg_cdv",
        }
    }

    pub fn min_source_domains(self) -> usize {
        match self {
            Variant::Dadg | Variant::DadgCdv => 3,
            Variant::DadgDal => 2,
            Variant::DeepAll => 1,
        }
    }

    pub fn uses_discriminator(self) -> bool {
        matches!(self, Variant::Dadg | Variant::DadgDal)
    }

    pub fn uses_meta(self) -> bool {
        matches!(self, Variant::Dadg | Variant::DadgCdv)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected dadg, deepall, dadg_dal or dadg_cdv)"))
    }
}

/// One iteration's split of the source domains (dataset domain indices).
///
/// `s_d` is kept in ascending order: the discriminator's label for an
/// example is the position of its domain in `s_d`, so a fixed order keeps
/// the label of every domain pair consistent across iterations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Episode {
    pub s_d: [usize; 2],
    pub s_c: usize,
}

pub fn sample_episode(source_domains: &[usize], rng: &mut impl Rng) -> Result<Episode> {
    if source_domains.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "episodes need at least 3 source domains, got {}",
            source_domains.len()
        )));
    }
    let c = rng.random_range(0..source_domains.len());
    let s_c = source_domains[c];
    let rest: Vec<usize> = source_domains.iter().copied().filter(|&d| d != s_c).collect();
    let mut s_d: Vec<usize> = rest.choose_multiple(rng, 2).copied().collect();
    s_d.sort_unstable();
    Ok(Episode {
        s_d: [s_d[0], s_d[1]],
        s_c,
    })
}

/// SGD with optional momentum and L2 weight decay (`v ← μv + g + λ_wd·p`,
/// `p ← p − lr·v`).
#[derive(Clone, Debug)]
pub struct Sgd<S> {
    pub momentum: f64,
    pub weight_decay: f64,
    velocity: Option<ParamSet<S>>,
}

impl<S: Scalar> Sgd<S> {
    pub fn new(momentum: f64, weight_decay: f64) -> Self {
        Self {
            momentum,
            weight_decay,
            velocity: None,
        }
    }

    pub fn raw() -> Self {
        Self::new(0.0, 0.0)
    }

    fn configured(hp: &HyperParams, enabled: bool) -> Self {
        if enabled {
            Self::new(hp.momentum, hp.weight_decay)
        } else {
            Self::raw()
        }
    }

    pub fn step(&mut self, params: &mut ParamSet<S>, grad: &ParamSet<S>, lr: f64) {
        if self.momentum == 0.0 && self.weight_decay == 0.0 {
            params.axpy(S::from_f64(-lr), grad);
            return;
        }
        let mut g = grad.clone();
        if self.weight_decay != 0.0 {
            g.axpy(S::from_f64(self.weight_decay), params);
        }
        let update = if self.momentum != 0.0 {
            match self.velocity.as_mut() {
                Some(v) => {
                    v.scale(S::from_f64(self.momentum));
                    v.axpy(S::one(), &g);
                    v.clone()
                }
                None => {
                    self.velocity = Some(g.clone());
                    g
                }
            }
        } else {
            g
        };
        params.axpy(S::from_f64(-lr), &update);
    }
}

/// Optimizer state carried across iterations.
#[derive(Clone, Debug)]
pub struct OptimizerState<S> {
    pub theta_dal: Sgd<S>,
    pub psi: Sgd<S>,
    pub theta_outer: Sgd<S>,
    pub phi: Sgd<S>,
}

impl<S: Scalar> OptimizerState<S> {
    pub fn new(hp: &HyperParams) -> Self {
        Self {
            theta_dal: Sgd::configured(hp, hp.theta_dal_momentum),
            psi: Sgd::configured(hp, hp.psi_momentum),
            theta_outer: Sgd::configured(hp, hp.outer_momentum),
            phi: Sgd::configured(hp, hp.outer_momentum),
        }
    }
}

/// Batches consumed by one training step of any variant.
#[derive(Clone, Debug, Default)]
pub struct StepBatches {
    /// One batch per `S_d` domain, labelled 0 and 1.
    pub dal: Option<(Batch, Batch)>,
    /// Classification batches: the `S_d` domains, or every source domain
    /// for DeepAll.
    pub train: Vec<Batch>,
    /// The `S_c` batch.
    pub val: Option<Batch>,
}

impl StepBatches {
    fn all(&self) -> impl Iterator<Item = &Batch> {
        self.dal
            .iter()
            .flat_map(|(a, b)| [a, b])
            .chain(&self.train)
            .chain(&self.val)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub episode: Option<Episode>,
    pub dal: Option<DalStepReport>,
    pub meta: Option<MetaStepReport>,
    /// Loss of a conventional classification step (DeepAll, DADG-DAL).
    pub loss_cls: Option<f64>,
}

impl IterationReport {
    pub fn loss_f(&self) -> Option<f64> {
        self.dal.as_ref().map(|d| d.loss_f)
    }

    /// Training loss on the seen domains.
    pub fn loss_g(&self) -> Option<f64> {
        self.meta.as_ref().map(|m| m.loss_g).or(self.loss_cls)
    }

    pub fn loss_h(&self) -> Option<f64> {
        self.meta.as_ref().map(|m| m.loss_h)
    }

    pub fn disc_accuracy(&self) -> Option<f64> {
        self.dal.as_ref().map(|d| d.disc_accuracy)
    }

    fn first_non_finite(&self) -> Option<(&'static str, f64)> {
        [("loss_F", self.loss_f()), ("loss_G", self.loss_g()), ("loss_H", self.loss_h())]
            .into_iter()
            .find_map(|(n, v)| v.filter(|x| !x.is_finite()).map(|x| (n, x)))
    }
}

fn check_param_finite<S: Scalar>(model: &ModelParams<S>) -> Result<()> {
    if model.all_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("parameters became non-finite".into()))
    }
}

/// One training step of `variant` on pre-drawn batches.
///
/// * `deepall`: cross-entropy step on the pooled `train` batches.
/// * `dadg_dal`: DAL step, then a cross-entropy step on the `S_d` batches.
/// * `dadg_cdv`: meta step only.
/// * `dadg`: DAL step followed by the meta step from the shared `θ^{m+1}`.
pub fn train_variant_step<S: Scalar>(
    variant: Variant,
    arch: &ArchSpec,
    model: &ModelParams<S>,
    batches: &StepBatches,
    hp: &HyperParams,
    opt: &mut OptimizerState<S>,
) -> Result<(ModelParams<S>, IterationReport)> {
    let mut next = model.clone();
    let mut report = IterationReport {
        iteration: 0,
        episode: None,
        dal: None,
        meta: None,
        loss_cls: None,
    };
    let missing = |what: &str| Error::InvalidArgument(format!("{variant} step needs {what}"));

    if variant.uses_discriminator() {
        let (a, b) = batches.dal.as_ref().ok_or_else(|| missing("DAL batches"))?;
        let psi = next.psi.as_mut().ok_or_else(|| missing("a discriminator"))?;
        let grads = dal_gradients(arch, &model.theta, psi, a, b, hp.lambda)?;
        report.dal = Some(grads.report());
        opt.psi.step(psi, &grads.psi, hp.alpha);
        opt.theta_dal.step(&mut next.theta, &grads.theta, hp.alpha);
    }

    if variant.uses_meta() {
        let val = batches.val.clone().ok_or_else(|| missing("a validation batch"))?;
        let episode = EpisodeBatches {
            train: batches.train.clone(),
            val,
        };
        let objective = NetworkObjective::new(arch, &episode)?;
        let shared = Learner::new(next.theta.clone(), next.phi.clone());
        let og = outer_gradient(&objective, &shared, hp.beta, hp.outer_mode)?;
        report.meta = Some(og.report());
        opt.theta_outer.step(&mut next.theta, &og.grad.theta, hp.gamma);
        opt.phi.step(&mut next.phi, &og.grad.phi, hp.gamma);
    } else {
        if batches.train.is_empty() {
            return Err(missing("classification batches"));
        }
        let pooled = batches.train[1..]
            .iter()
            .try_fold(batches.train[0].clone(), |acc, b| acc.concat(b))?;
        let at = Learner::new(next.theta.clone(), next.phi.clone());
        let lg = training_loss_and_grad(arch, &at, std::slice::from_ref(&pooled))?;
        report.loss_cls = Some(lg.loss.to_f64());
        opt.theta_outer.step(&mut next.theta, &lg.grad.theta, hp.gamma);
        opt.phi.step(&mut next.phi, &lg.grad.phi, hp.gamma);
    }

    if let Some((name, v)) = report.first_non_finite() {
        return Err(Error::InvalidArgument(format!("{name} is {v}")));
    }
    check_param_finite(&next)?;
    Ok((next, report))
}

/// Full DADG iteration on pre-drawn batches.
pub fn dadg_iteration<S: Scalar>(
    arch: &ArchSpec,
    model: &ModelParams<S>,
    batches: &StepBatches,
    hp: &HyperParams,
    opt: &mut OptimizerState<S>,
) -> Result<(ModelParams<S>, IterationReport)> {
    train_variant_step(Variant::Dadg, arch, model, batches, hp, opt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub arch: ArchSpec,
    pub hp: HyperParams,
    pub variant: Variant,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub reports: Vec<IterationReport>,
    /// Training examples drawn per dataset domain, counted with repetition.
    pub examples_seen: BTreeMap<usize, usize>,
}

impl TrainHistory {
    pub fn last(&self) -> Option<&IterationReport> {
        self.reports.last()
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<S> {
    pub model: ModelParams<S>,
    pub history: TrainHistory,
}

/// Stateful driver for one training run.
pub struct Trainer<'a, S> {
    config: TrainConfig,
    plan: SplitPlan,
    model: ModelParams<S>,
    opt: OptimizerState<S>,
    episode_rng: ChaCha8Rng,
    dal_iters: BTreeMap<usize, BatchIterator<'a>>,
    cls_iters: BTreeMap<usize, BatchIterator<'a>>,
    history: TrainHistory,
    iteration: usize,
}

impl<'a, S: Scalar> Trainer<'a, S> {
    pub fn new(
        config: TrainConfig,
        dataset: &'a MultiDomainDataset,
        plan: &SplitPlan,
        seed: u64,
    ) -> Result<Self> {
        config.hp.validate()?;
        config.arch.validate()?;
        if config.arch.input_dim != dataset.input_dim() {
            return Err(Error::Shape(format!(
                "architecture expects {} inputs, dataset has {}",
                config.arch.input_dim,
                dataset.input_dim()
            )));
        }
        if config.arch.num_classes != dataset.num_classes() {
            return Err(Error::Shape(format!(
                "architecture has {} classes, dataset has {}",
                config.arch.num_classes,
                dataset.num_classes()
            )));
        }
        let variant = config.variant;
        let sources = plan.source_domains();
        if sources.contains(&plan.target_domain) {
            return Err(Error::InvalidArgument("target domain listed as a source".into()));
        }
        if sources.len() < variant.min_source_domains() {
            return Err(Error::InvalidArgument(format!(
                "{variant} needs at least {} source domains, got {}",
                variant.min_source_domains(),
                sources.len()
            )));
        }
        let model = if variant.uses_discriminator() {
            init_model(&config.arch, seed)?
        } else {
            init_model_without_discriminator(&config.arch, seed)?
        };

        let mut batch_rng = stream_rng(seed, STREAM_BATCH);
        let mut dal_iters = BTreeMap::new();
        let mut cls_iters = BTreeMap::new();
        for split in &plan.sources {
            let dal_seed = batch_rng.next_u64();
            let cls_seed = batch_rng.next_u64();
            if split.train.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "source domain #{} has no training examples",
                    split.domain
                )));
            }
            if variant.uses_discriminator() {
                dal_iters.insert(
                    split.domain,
                    BatchIterator::new(
                        dataset,
                        split.domain,
                        &split.train,
                        config.hp.dal_half(),
                        ChaCha8Rng::seed_from_u64(dal_seed),
                    )?,
                );
            }
            cls_iters.insert(
                split.domain,
                BatchIterator::new(
                    dataset,
                    split.domain,
                    &split.train,
                    config.hp.batch_cdv,
                    ChaCha8Rng::seed_from_u64(cls_seed),
                )?,
            );
        }
        let opt = OptimizerState::new(&config.hp);
        Ok(Self {
            config,
            plan: plan.clone(),
            model,
            opt,
            episode_rng: stream_rng(seed, STREAM_EPISODE),
            dal_iters,
            cls_iters,
            history: TrainHistory::default(),
            iteration: 0,
        })
    }

    pub fn model(&self) -> &ModelParams<S> {
        &self.model
    }

    pub fn history(&self) -> &TrainHistory {
        &self.history
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    fn next_episode(&mut self) -> Result<Option<Episode>> {
        let sources = self.plan.source_domains();
        match self.config.variant {
            Variant::DeepAll => Ok(None),
            Variant::DadgDal if sources.len() == 2 => Ok(Some(Episode {
                s_d: [sources[0].min(sources[1]), sources[0].max(sources[1])],
                s_c: usize::MAX,
            })),
            _ => sample_episode(&sources, &mut self.episode_rng).map(Some),
        }
    }

    fn draw_batches(&mut self, episode: Option<Episode>) -> StepBatches {
        let variant = self.config.variant;
        let mut batches = StepBatches::default();
        match episode {
            None => {
                batches.train = self.cls_iters.values_mut().map(|it| it.next_labeled(0)).collect();
            }
            Some(ep) => {
                if variant.uses_discriminator() {
                    let a = self.dal_iters.get_mut(&ep.s_d[0]).expect("source iterator").next_labeled(0);
                    let b = self.dal_iters.get_mut(&ep.s_d[1]).expect("source iterator").next_labeled(1);
                    batches.dal = Some((a, b));
                }
                batches.train = ep
                    .s_d
                    .iter()
                    .zip([0u8, 1])
                    .map(|(d, l)| self.cls_iters.get_mut(d).expect("source iterator").next_labeled(l))
                    .collect();
                if variant.uses_meta() {
                    batches.val = Some(self.cls_iters.get_mut(&ep.s_c).expect("source iterator").next_labeled(0));
                }
            }
        }
        batches
    }

    /// Runs one iteration of the configured variant.
    pub fn step(&mut self) -> Result<&IterationReport> {
        let episode = self.next_episode()?;
        let batches = self.draw_batches(episode);
        for b in batches.all() {
            for &(d, _) in &b.provenance {
                *self.history.examples_seen.entry(d).or_default() += 1;
            }
        }
        let result = train_variant_step(
            self.config.variant,
            &self.config.arch,
            &self.model,
            &batches,
            &self.config.hp,
            &mut self.opt,
        );
        let (model, mut report) = match result {
            Ok(r) => r,
            Err(e) => {
                let last = self
                    .history
                    .last()
                    .map(|r| format!("; last finite report: {}", serde_json::to_string(r).unwrap_or_default()))
                    .unwrap_or_default();
                return Err(Error::Diverged {
                    iteration: self.iteration,
                    detail: format!("{e}{last}"),
                });
            }
        };
        report.iteration = self.iteration;
        report.episode = episode;
        self.model = model;
        self.iteration += 1;
        self.history.reports.push(report);
        Ok(self.history.reports.last().expect("just pushed"))
    }

    pub fn run(mut self) -> Result<TrainOutcome<S>> {
        for _ in 0..self.config.hp.iterations {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> TrainOutcome<S> {
        TrainOutcome {
            model: self.model,
            history: self.history,
        }
    }
}

/// Trains `config.variant` for `config.hp.iterations` iterations on the
/// source domains of `plan`.
pub fn train<S: Scalar>(
    config: &TrainConfig,
    dataset: &MultiDomainDataset,
    plan: &SplitPlan,
    seed: u64,
) -> Result<TrainOutcome<S>> {
    Trainer::new(config.clone(), dataset, plan, seed)?.run()
}

/// Shuffled copy of `items` (helper for examples and probes).
pub fn shuffled<T: Clone>(items: &[T], rng: &mut impl Rng) -> Vec<T> {
    let mut v = items.to_vec();
    v.shuffle(rng);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn episodes_partition_three_sources() {
        let mut rng = stream_rng(3, STREAM_EPISODE);
        for _ in 0..200 {
            let ep = sample_episode(&[4, 7, 9], &mut rng).unwrap();
            let mut all = vec![ep.s_d[0], ep.s_d[1], ep.s_c];
            assert!(ep.s_d[0] < ep.s_d[1]);
            assert!(!ep.s_d.contains(&ep.s_c));
            all.sort_unstable();
            assert_eq!(all, vec![4, 7, 9]);
        }
    }

    #[test]
    fn episodes_with_more_sources() {
        let mut rng = stream_rng(1, STREAM_EPISODE);
        for _ in 0..100 {
            let ep = sample_episode(&[0, 1, 2, 3, 4], &mut rng).unwrap();
            assert!(!ep.s_d.contains(&ep.s_c));
            assert_ne!(ep.s_d[0], ep.s_d[1]);
        }
    }

    #[test]
    fn too_few_sources() {
        let mut rng = stream_rng(1, STREAM_EPISODE);
        assert!(sample_episode(&[0, 1], &mut rng).is_err());
    }

    #[test]
    fn defaults_match_published_settings() {
        let hp = HyperParams::default();
        assert_eq!(hp.alpha, 5e-5);
        assert_eq!(hp.beta, 5e-4);
        assert_eq!(hp.gamma, 5e-4);
        assert_eq!(hp.lambda, 1.0);
        assert_eq!(hp.momentum, 0.9);
        assert_eq!(hp.weight_decay, 5e-5);
        assert_eq!(hp.iterations, 2000);
        assert_eq!((hp.batch_dal, hp.batch_cdv), (64, 32));
        assert_eq!(hp.outer_mode, OuterMode::Combined);
    }

    #[test]
    fn rejects_invalid_hyperparameters() {
        let hp = HyperParams { gamma: -1.0, ..HyperParams::default() };
        assert!(hp.validate().is_err());
        let hp = HyperParams { batch_cdv: 0, ..HyperParams::default() };
        assert!(hp.validate().is_err());
        let hp = HyperParams { alpha: f64::NAN, ..HyperParams::default() };
        assert!(hp.validate().is_err());
    }

    #[test]
    fn sgd_momentum_matches_hand_computation() {
        let mut p = ParamSet::<f64>::zeros(&[1, 1]);
        p.layers[0].weight[(0, 0)] = 1.0;
        let mut g = p.zeros_like();
        g.layers[0].weight[(0, 0)] = 0.5;
        let mut opt = Sgd::new(0.9, 0.1);
        opt.step(&mut p, &g, 0.1);
        // v = 0.5 + 0.1·1 = 0.6; p = 1 − 0.06
        assert!((p.layers[0].weight[(0, 0)] - 0.94).abs() < 1e-15);
        opt.step(&mut p, &g, 0.1);
        // v = 0.9·0.6 + 0.5 + 0.1·0.94 = 1.134; p = 0.94 − 0.1134
        assert!((p.layers[0].weight[(0, 0)] - 0.8266).abs() < 1e-12);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("mldg".parse::<Variant>().is_err());
    }
}
