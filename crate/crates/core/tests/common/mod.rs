//! Oracles shared by the integration tests.
#![allow(dead_code)]

use dadg::tensor::Matrix;

/// Central differences with step `h`.
pub fn central_diff(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| rel_err(x, y)).fold(0.0, f64::max)
}

/// Multinomial logistic regression on standardised inputs, fitted by full
/// batch gradient descent.
pub struct Probe {
    mean: Vec<f64>,
    sd: Vec<f64>,
    w: Vec<Vec<f64>>,
}

impl Probe {
    pub fn fit(x: &Matrix<f64>, y: &[usize], classes: usize) -> Self {
        let (n, d) = x.shape();
        let mean: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x[(i, j)]).sum::<f64>() / n as f64).collect();
        let sd: Vec<f64> = (0..d)
            .map(|j| ((0..n).map(|i| (x[(i, j)] - mean[j]).powi(2)).sum::<f64>() / n as f64).sqrt().max(1e-8))
            .collect();
        let mut probe = Probe {
            mean,
            sd,
            w: vec![vec![0.0; d + 1]; classes],
        };
        for _ in 0..300 {
            let mut grad = vec![vec![0.0; d + 1]; classes];
            for (i, &yi) in y.iter().enumerate() {
                let z = probe.standardise(x.row(i));
                let p = probe.softmax(&z);
                for c in 0..classes {
                    let delta = p[c] - if yi == c { 1.0 } else { 0.0 };
                    for j in 0..d {
                        grad[c][j] += delta * z[j];
                    }
                    grad[c][d] += delta;
                }
            }
            for (wc, gc) in probe.w.iter_mut().zip(&grad) {
                for (w, g) in wc.iter_mut().zip(gc) {
                    *w -= 0.5 * g / n as f64;
                }
            }
        }
        probe
    }

    fn standardise(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.sd).map(|((v, m), s)| (v - m) / s).collect()
    }

    fn softmax(&self, z: &[f64]) -> Vec<f64> {
        let d = z.len();
        let logits: Vec<f64> = self.w.iter().map(|wc| wc[d] + wc.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()).collect();
        let max = logits.iter().cloned().fold(f64::MIN, f64::max);
        let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect()
    }

    pub fn accuracy(&self, x: &Matrix<f64>, y: &[usize]) -> f64 {
        let hits = (0..x.rows())
            .filter(|&i| {
                let p = self.softmax(&self.standardise(x.row(i)));
                let best = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
                best == y[i]
            })
            .count();
        hits as f64 / x.rows() as f64
    }
}
