//! Loss functions: softmax cross-entropy for class prediction (training and
//! validation losses) and binary cross-entropy with logits for the domain
//! discriminator.
//!
//! Batch means are accumulated as running means, so a batch of identical
//! per-example losses reproduces that loss bit for bit.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Matrix;

fn check_class_labels(n: usize, c: usize, labels: &[usize]) -> Result<()> {
    if labels.len() != n {
        return Err(Error::Shape(format!("{n} logit rows but {} labels", labels.len())));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("loss over an empty batch".into()));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= c) {
        return Err(Error::InvalidArgument(format!(
            "class label {y} out of range for {c} classes"
        )));
    }
    Ok(())
}

fn running_mean<S: Scalar>(values: impl Iterator<Item = S>) -> S {
    let mut mean = S::zero();
    for (k, v) in values.enumerate() {
        mean += (v - mean) / S::from_f64((k + 1) as f64);
    }
    mean
}

/// Per-row `logsumexp(logits) - logits[y]`.
fn nll_rows<'a, S: Scalar>(
    logits: &'a Matrix<S>,
    labels: &'a [usize],
) -> impl Iterator<Item = S> + 'a {
    (0..logits.rows()).map(move |i| {
        let row = logits.row(i);
        let m = row.iter().copied().fold(row[0], S::max);
        let sum: S = row.iter().map(|&l| (l - m).exp()).sum();
        m + sum.ln() - row[labels[i]]
    })
}

/// Mean negative log-likelihood under the softmax of `logits`.
pub fn cross_entropy<S: Scalar>(logits: &Matrix<S>, labels: &[usize]) -> Result<S> {
    check_class_labels(logits.rows(), logits.cols(), labels)?;
    Ok(running_mean(nll_rows(logits, labels)))
}

/// Cross-entropy and its gradient with respect to the logits.
pub fn cross_entropy_with_grad<S: Scalar>(
    logits: &Matrix<S>,
    labels: &[usize],
) -> Result<(S, Matrix<S>)> {
    check_class_labels(logits.rows(), logits.cols(), labels)?;
    let n = logits.rows();
    let inv_n = S::one() / S::from_f64(n as f64);
    let mut grad = Matrix::zeros(n, logits.cols());
    for i in 0..n {
        let row = logits.row(i);
        let m = row.iter().copied().fold(row[0], S::max);
        let exps: Vec<S> = row.iter().map(|&l| (l - m).exp()).collect();
        let sum: S = exps.iter().copied().sum();
        for (j, e) in exps.into_iter().enumerate() {
            let target = if j == labels[i] { S::one() } else { S::zero() };
            grad[(i, j)] = (e / sum - target) * inv_n;
        }
    }
    Ok((running_mean(nll_rows(logits, labels)), grad))
}

fn check_domain_labels<S: Scalar>(logits: &Matrix<S>, labels: &[u8]) -> Result<()> {
    if logits.cols() != 1 {
        return Err(Error::Shape(format!(
            "domain logits must be n x 1, got {}x{}",
            logits.rows(),
            logits.cols()
        )));
    }
    if labels.len() != logits.rows() {
        return Err(Error::Shape(format!(
            "{} domain logits but {} labels",
            logits.rows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("loss over an empty batch".into()));
    }
    if let Some(&d) = labels.iter().find(|&&d| d > 1) {
        return Err(Error::InvalidArgument(format!("domain label {d} is not binary")));
    }
    Ok(())
}

/// Mean binary cross-entropy with logits: `softplus(z) - y·z`.
pub fn binary_domain_loss<S: Scalar>(logits: &Matrix<S>, labels: &[u8]) -> Result<S> {
    check_domain_labels(logits, labels)?;
    Ok(running_mean(
        logits
            .as_slice()
            .iter()
            .zip(labels)
            .map(|(&z, &y)| z.softplus() - S::from_f64(y as f64) * z),
    ))
}

pub fn binary_domain_loss_with_grad<S: Scalar>(
    logits: &Matrix<S>,
    labels: &[u8],
) -> Result<(S, Matrix<S>)> {
    let loss = binary_domain_loss(logits, labels)?;
    let inv_n = S::one() / S::from_f64(labels.len() as f64);
    let grad: Vec<S> = logits
        .as_slice()
        .iter()
        .zip(labels)
        .map(|(&z, &y)| (z.sigmoid() - S::from_f64(y as f64)) * inv_n)
        .collect();
    Ok((loss, Matrix::from_vec(labels.len(), 1, grad)?))
}

/// Fraction of rows whose argmax equals the label.
pub fn argmax_accuracy<S: Scalar>(logits: &Matrix<S>, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let correct = (0..logits.rows())
        .filter(|&i| argmax(logits.row(i)) == labels[i])
        .count();
    correct as f64 / labels.len() as f64
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax<S: Scalar>(row: &[S]) -> usize {
    let mut best = 0;
    for (j, v) in row.iter().enumerate().skip(1) {
        if v.primal_gt(row[best]) {
            best = j;
        }
    }
    best
}

/// Fraction of domain logits on the correct side of zero.
pub fn binary_accuracy<S: Scalar>(logits: &Matrix<S>, labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let correct = logits
        .as_slice()
        .iter()
        .zip(labels)
        .filter(|(&z, &y)| (z.to_f64() > 0.0) == (y == 1))
        .count();
    correct as f64 / labels.len() as f64
}
