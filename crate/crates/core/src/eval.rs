//! Accuracy evaluation and the leave-one-domain-out experiment runner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, Precision, RunConfig};
use crate::data::{make_lodo_splits, MultiDomainDataset, SplitPlan};
use crate::error::{Error, Result};
use crate::loss;
use crate::model::{discriminate, forward_features, predict_logits, ArchSpec, ModelParams};
use crate::report::{LossCurve, ResultRow, ResultTable, TableMetadata};
use crate::scalar::Scalar;
use crate::tensor::Matrix;
use crate::trainer::{train, TrainConfig, TrainHistory, Variant};

/// Anything that maps raw inputs to class logits.
pub trait Predictor {
    fn logits(&self, inputs: &Matrix<f64>) -> Result<Matrix<f64>>;
}

/// A trained network bundled with its architecture.
#[derive(Clone, Debug)]
pub struct TrainedModel<S> {
    pub arch: ArchSpec,
    pub params: ModelParams<S>,
}

impl<S: Scalar> Predictor for TrainedModel<S> {
    fn logits(&self, inputs: &Matrix<f64>) -> Result<Matrix<f64>> {
        let out = predict_logits(&self.arch, &self.params, &inputs.map(S::from_f64))?;
        Ok(out.map(|v| v.to_f64()))
    }
}

/// Adapts a closure into a [`Predictor`].
pub struct FnPredictor<F>(pub F);

impl<F: Fn(&Matrix<f64>) -> Matrix<f64>> Predictor for FnPredictor<F> {
    fn logits(&self, inputs: &Matrix<f64>) -> Result<Matrix<f64>> {
        Ok((self.0)(inputs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    /// Every example of the target domain.
    Target,
    /// Held-out examples of the source domains, pooled.
    SourceTest,
}

/// Argmax accuracy over `indices` of one domain.
pub fn accuracy_on(
    predictor: &impl Predictor,
    dataset: &MultiDomainDataset,
    domain: usize,
    indices: &[usize],
) -> Result<f64> {
    let (correct, total) = count_correct(predictor, dataset, domain, indices)?;
    if total == 0 {
        return Err(Error::InvalidArgument("cannot evaluate an empty partition".into()));
    }
    Ok(correct as f64 / total as f64)
}

fn count_correct(
    predictor: &impl Predictor,
    dataset: &MultiDomainDataset,
    domain: usize,
    indices: &[usize],
) -> Result<(usize, usize)> {
    if indices.is_empty() {
        return Ok((0, 0));
    }
    let (x, y) = dataset.gather(domain, indices);
    let logits = predictor.logits(&x)?;
    if logits.rows() != y.len() {
        return Err(Error::Shape(format!(
            "predictor returned {} rows for {} inputs",
            logits.rows(),
            y.len()
        )));
    }
    let correct = (0..y.len()).filter(|&i| loss::argmax(logits.row(i)) == y[i]).count();
    Ok((correct, y.len()))
}

/// Fraction of argmax-correct predictions on the chosen partition of `plan`.
pub fn evaluate(
    predictor: &impl Predictor,
    dataset: &MultiDomainDataset,
    plan: &SplitPlan,
    which: Which,
) -> Result<f64> {
    let parts: Vec<(usize, &[usize])> = match which {
        Which::Target => vec![(plan.target_domain, plan.target_test.as_slice())],
        Which::SourceTest => plan.sources.iter().map(|s| (s.domain, s.test.as_slice())).collect(),
    };
    let mut correct = 0;
    let mut total = 0;
    for (d, idx) in parts {
        let (c, t) = count_correct(predictor, dataset, d, idx)?;
        correct += c;
        total += t;
    }
    if total == 0 {
        return Err(Error::InvalidArgument(format!("{which:?} partition is empty")));
    }
    Ok(correct as f64 / total as f64)
}

/// Source indices used for held-out diagnostics: the test part when the
/// protocol has one, the training part otherwise.
fn source_eval_indices(plan: &SplitPlan) -> Vec<(usize, &[usize])> {
    plan.sources
        .iter()
        .map(|s| (s.domain, if s.test.is_empty() { s.train.as_slice() } else { s.test.as_slice() }))
        .collect()
}

/// Accuracy of the model's discriminator on every ordered source pair
/// `(i < j)`, labelling `i` as 0 and `j` as 1 as in training, averaged over
/// pairs. Uses held-out source examples when the split has them.
pub fn discriminator_accuracy<S: Scalar>(
    arch: &ArchSpec,
    model: &ModelParams<S>,
    dataset: &MultiDomainDataset,
    plan: &SplitPlan,
) -> Result<f64> {
    let psi = model.psi()?;
    let parts = source_eval_indices(plan);
    let mut per_domain = Vec::with_capacity(parts.len());
    for &(d, idx) in &parts {
        let (x, _) = dataset.gather(d, idx);
        let feats = forward_features(arch, &model.theta, &x.map(S::from_f64))?;
        let z = discriminate(arch, psi, &feats)?;
        per_domain.push(z.as_slice().iter().map(|v| v.to_f64()).collect::<Vec<f64>>());
    }
    let mut accs = Vec::new();
    for i in 0..per_domain.len() {
        for j in i + 1..per_domain.len() {
            let hits = per_domain[i].iter().filter(|&&z| z <= 0.0).count()
                + per_domain[j].iter().filter(|&&z| z > 0.0).count();
            accs.push(hits as f64 / (per_domain[i].len() + per_domain[j].len()) as f64);
        }
    }
    if accs.is_empty() {
        return Err(Error::InvalidArgument("discriminator accuracy needs two source domains".into()));
    }
    Ok(accs.iter().sum::<f64>() / accs.len() as f64)
}

/// Fits a fresh multinomial logistic regression from frozen features to the
/// source domain identity on the training part and reports its accuracy on
/// the held-out part (or in-sample without one).
///
/// Unlike [`discriminator_accuracy`] this cannot be fooled by a weak
/// discriminator, so it measures how much domain information the features
/// really retain.
pub fn domain_probe_accuracy<S: Scalar>(
    arch: &ArchSpec,
    model: &ModelParams<S>,
    dataset: &MultiDomainDataset,
    plan: &SplitPlan,
    epochs: usize,
    seed: u64,
) -> Result<f64> {
    let features = |d: usize, idx: &[usize]| -> Result<Matrix<f64>> {
        let (x, _) = dataset.gather(d, idx);
        Ok(forward_features(arch, &model.theta, &x.map(S::from_f64))?.map(|v| v.to_f64()))
    };
    let mut train_x = Vec::new();
    let mut test_x = Vec::new();
    for (k, s) in plan.sources.iter().enumerate() {
        train_x.push((k, features(s.domain, &s.train)?));
        let test = if s.test.is_empty() { &s.train } else { &s.test };
        test_x.push((k, features(s.domain, test)?));
    }
    let k = plan.sources.len();
    if k < 2 {
        return Err(Error::InvalidArgument("domain probe needs two source domains".into()));
    }
    let dim = arch.feature_dim;
    // standardise with training statistics
    let rows: Vec<&[f64]> = train_x.iter().flat_map(|(_, m)| (0..m.rows()).map(move |i| m.row(i))).collect();
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..dim).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let scale: Vec<f64> = (0..dim)
        .map(|j| {
            let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            if var > 1e-12 { 1.0 / var.sqrt() } else { 0.0 }
        })
        .collect();
    let norm = |r: &[f64]| -> Vec<f64> { (0..dim).map(|j| (r[j] - mean[j]) * scale[j]).collect() };
    let mut samples: Vec<(Vec<f64>, usize)> = train_x
        .iter()
        .flat_map(|(c, m)| (0..m.rows()).map(move |i| (*c, m.row(i))))
        .map(|(c, r)| (norm(r), c))
        .collect();

    let mut w = vec![vec![0.0; dim + 1]; k];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lr = 0.1;
    let mut probs = vec![0.0; k];
    for _ in 0..epochs {
        for i in (1..samples.len()).rev() {
            samples.swap(i, rng.random_range(0..=i));
        }
        for (x, c) in &samples {
            for (p, wc) in probs.iter_mut().zip(&w) {
                *p = wc[dim] + x.iter().zip(wc).map(|(a, b)| a * b).sum::<f64>();
            }
            let m = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = probs.iter().map(|p| (p - m).exp()).sum();
            for (cls, wc) in w.iter_mut().enumerate() {
                let g = (probs[cls] - m).exp() / z - if cls == *c { 1.0 } else { 0.0 };
                for (wj, xj) in wc.iter_mut().zip(x) {
                    *wj -= lr * g * xj;
                }
                wc[dim] -= lr * g;
            }
        }
    }
    let mut hits = 0;
    let mut total = 0;
    for (c, m) in &test_x {
        for i in 0..m.rows() {
            let x = norm(m.row(i));
            let scores: Vec<f64> = w
                .iter()
                .map(|wc| wc[dim] + x.iter().zip(wc).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            hits += usize::from(loss::argmax(&scores) == *c);
            total += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Everything measured for one trained model.
#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub target_accuracy: f64,
    /// Accuracy on held-out source examples (in-sample without a held-out part).
    pub source_accuracy: f64,
    pub disc_accuracy: Option<f64>,
}

pub fn measure<S: Scalar>(
    arch: &ArchSpec,
    model: &ModelParams<S>,
    dataset: &MultiDomainDataset,
    plan: &SplitPlan,
) -> Result<RunMetrics> {
    let predictor = TrainedModel {
        arch: arch.clone(),
        params: model.clone(),
    };
    let target_accuracy = evaluate(&predictor, dataset, plan, Which::Target)?;
    let mut correct = 0;
    let mut total = 0;
    for (d, idx) in source_eval_indices(plan) {
        let (c, t) = count_correct(&predictor, dataset, d, idx)?;
        correct += c;
        total += t;
    }
    let source_accuracy = correct as f64 / total.max(1) as f64;
    let disc_accuracy = match &model.psi {
        Some(_) if plan.sources.len() >= 2 => Some(discriminator_accuracy(arch, model, dataset, plan)?),
        _ => None,
    };
    Ok(RunMetrics {
        target_accuracy,
        source_accuracy,
        disc_accuracy,
    })
}

/// One cell of the experiment grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub variant: Variant,
    pub target: String,
    pub seed: u64,
}

/// Trains and measures one `(variant, target, seed)` combination.
pub fn run_job<S: Scalar>(
    config: &RunConfig,
    dataset: &MultiDomainDataset,
    arch: &ArchSpec,
    job: &Job,
) -> Result<(RunMetrics, TrainHistory)> {
    let plan = make_lodo_splits(dataset, &job.target, config.run.protocol, job.seed)?;
    let tc = TrainConfig {
        arch: arch.clone(),
        hp: config.hyper.clone(),
        variant: job.variant,
    };
    let outcome = train::<S>(&tc, dataset, &plan, job.seed)?;
    let metrics = measure(arch, &outcome.model, dataset, &plan)?;
    Ok((metrics, outcome.history))
}

/// The `(variant, target, seed)` grid in row order.
pub fn experiment_jobs(config: &RunConfig, dataset: &MultiDomainDataset) -> Result<Vec<Job>> {
    let targets: Vec<String> = if config.run.targets.is_empty() {
        dataset.domain_names().into_iter().map(String::from).collect()
    } else {
        for t in &config.run.targets {
            if dataset.domain_index(t).is_err() {
                return Err(ConfigError::Invalid {
                    key: "run.targets".into(),
                    message: format!("unknown domain `{t}` (dataset has {:?})", dataset.domain_names()),
                }
                .into());
            }
        }
        config.run.targets.clone()
    };
    let mut jobs = Vec::new();
    for &variant in &config.run.variants {
        for target in &targets {
            for &seed in &config.run.seeds {
                jobs.push(Job {
                    variant,
                    target: target.clone(),
                    seed,
                });
            }
        }
    }
    Ok(jobs)
}

/// Output of [`run_experiment_on`]: the table plus optional loss curves.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    pub curves: Vec<LossCurve>,
}

/// Runs the full grid. Failed runs become error rows; nothing is dropped.
pub fn run_experiment(config: &RunConfig) -> Result<ResultTable> {
    let dataset = config.dataset.load()?;
    Ok(run_experiment_on(config, &dataset)?.table)
}

pub fn run_experiment_on(config: &RunConfig, dataset: &MultiDomainDataset) -> Result<ExperimentOutput> {
    config.validate()?;
    let arch = config.arch.build(dataset.input_dim(), dataset.num_classes());
    arch.validate()?;
    let jobs = experiment_jobs(config, dataset)?;
    let work = |job: &Job| match config.run.precision {
        Precision::F64 => run_job::<f64>(config, dataset, &arch, job),
        Precision::F32 => run_job::<f32>(config, dataset, &arch, job),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.run.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<(RunMetrics, TrainHistory)>> = pool.install(|| jobs.par_iter().map(work).collect());

    let mut rows = Vec::with_capacity(jobs.len());
    let mut curves = Vec::new();
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok((metrics, history)) => {
                rows.push(ResultRow::from_run(job, &metrics, &history));
                if config.run.loss_curves {
                    curves.push(LossCurve::from_history(job, &history));
                }
            }
            Err(e) => rows.push(ResultRow::failed(job, &e)),
        }
    }
    let metadata = TableMetadata::new(config, dataset);
    Ok(ExperimentOutput {
        table: ResultTable::new(metadata, rows),
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Domain, Protocol};

    fn dataset() -> MultiDomainDataset {
        let domain = |name: &str, labels: Vec<usize>| Domain {
            name: name.into(),
            inputs: Matrix::from_vec(labels.len(), 1, labels.iter().map(|&y| y as f64).collect()).unwrap(),
            labels,
        };
        MultiDomainDataset::new(
            vec![
                domain("a", vec![0, 0, 1, 1, 1]),
                domain("b", vec![1, 1, 1, 0, 0, 0, 0, 0, 1, 1]),
            ],
            vec!["neg".into(), "pos".into()],
            1,
        )
        .unwrap()
    }

    #[test]
    fn oracle_predictor_scores_one() {
        let ds = dataset();
        let plan = make_lodo_splits(&ds, "b", Protocol::FullTarget, 0).unwrap();
        let oracle = FnPredictor(|x: &Matrix<f64>| {
            Matrix::from_vec(x.rows(), 2, (0..x.rows()).flat_map(|i| [-x[(i, 0)], x[(i, 0)]]).collect()).unwrap()
        });
        assert_eq!(evaluate(&oracle, &ds, &plan, Which::Target).unwrap(), 1.0);
    }

    #[test]
    fn constant_predictor_scores_class_share() {
        let ds = dataset();
        let plan = make_lodo_splits(&ds, "a", Protocol::FullTarget, 0).unwrap();
        let always_zero = FnPredictor(|x: &Matrix<f64>| Matrix::from_vec(x.rows(), 2, [1.0, 0.0].repeat(x.rows())).unwrap());
        assert!((evaluate(&always_zero, &ds, &plan, Which::Target).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn empty_partition_is_an_error() {
        let ds = dataset();
        let plan = make_lodo_splits(&ds, "a", Protocol::FullTarget, 0).unwrap();
        let p = FnPredictor(|x: &Matrix<f64>| Matrix::zeros(x.rows(), 2));
        assert!(evaluate(&p, &ds, &plan, Which::SourceTest).is_err());
    }
}
