//! Synthetic multi-domain datasets with controlled domain shift.
//!
//! * `rotated_moons`: two interleaving half-circles, each domain rotated by
//!   its own angle.
//! * `spurious_shift`: a domain-invariant class signal in coordinates 0–1
//!   (two Gaussian blobs) plus a nuisance pair in coordinates 2–3. The
//!   nuisance pair carries a domain-specific offset and a cue that agrees
//!   with the class label with the domain's correlation; the cue's strength
//!   differs between domains, so a feature extractor can only hide the domain
//!   from a discriminator by dropping the cue. A domain with negative
//!   correlation reverses the cue and is the natural held-out target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, Domain, MultiDomainDataset};
use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RotatedMoons,
    SpuriousShift,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RotatedMoons => "rotated_moons",
            Family::SpuriousShift => "spurious_shift",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rotated_moons" => Ok(Family::RotatedMoons),
            "spurious_shift" => Ok(Family::SpuriousShift),
            other => Err(format!(
                "unknown synthetic family `{other}` (expected rotated_moons or spurious_shift)"
            )),
        }
    }
}

/// Per-domain generator parameters. Fields that a family does not use are
/// ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub name: String,
    /// `rotated_moons`: rotation in degrees.
    pub rotation_deg: f64,
    /// `spurious_shift`: offset of the nuisance pair (coordinates 2 and 3).
    pub nuisance_offset: [f64; 2],
    /// `spurious_shift`: correlation in `[-1, 1]` between the cue and the class.
    pub correlation: f64,
    /// `spurious_shift`: magnitude of the cue along coordinate 2.
    pub cue_strength: f64,
    /// `spurious_shift`: added to the probability that the cue is positive,
    /// for both classes. Non-zero values make the share of positive cues
    /// differ between domains.
    #[serde(default)]
    pub cue_bias: f64,
}

impl DomainParams {
    pub fn rotated(name: &str, rotation_deg: f64) -> Self {
        Self {
            name: name.into(),
            rotation_deg,
            nuisance_offset: [0.0, 0.0],
            correlation: 0.0,
            cue_strength: 0.0,
            cue_bias: 0.0,
        }
    }

    pub fn spurious(name: &str, offset: [f64; 2], correlation: f64, cue_strength: f64) -> Self {
        Self {
            name: name.into(),
            rotation_deg: 0.0,
            nuisance_offset: offset,
            correlation,
            cue_strength,
            cue_bias: 0.0,
        }
    }

    pub fn with_cue_bias(mut self, bias: f64) -> Self {
        self.cue_bias = bias;
        self
    }

    /// Probability of a positive cue given the class.
    pub fn cue_probability(&self, label: usize) -> f64 {
        let agree = (1.0 + self.correlation) / 2.0;
        let p = if label == 1 { agree } else { 1.0 - agree };
        (p + self.cue_bias).clamp(0.0, 1.0)
    }

    fn raw_cue_probability(&self, label: usize) -> f64 {
        let agree = (1.0 + self.correlation) / 2.0;
        (if label == 1 { agree } else { 1.0 - agree }) + self.cue_bias
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub family: Family,
    pub domains: Vec<DomainParams>,
    pub samples_per_domain: usize,
    pub noise_sigma: f64,
    pub input_dim: usize,
    /// `spurious_shift`: blob centres sit at `±class_separation` on both
    /// class coordinates.
    pub class_separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Four moons domains rotated by 0°, 20°, 40° and 60°.
    pub fn rotated_moons(seed: u64) -> Self {
        Self {
            family: Family::RotatedMoons,
            domains: [0.0, 20.0, 40.0, 60.0]
                .iter()
                .enumerate()
                .map(|(i, &a)| DomainParams::rotated(&format!("rot{}", i * 20), a))
                .collect(),
            samples_per_domain: 400,
            noise_sigma: 0.1,
            input_dim: 2,
            class_separation: 0.0,
            seed,
        }
    }

    /// Three source domains whose cue agrees with the class with correlation
    /// 0.9 and a fourth domain, `reversed`, where it is anti-correlated.
    pub fn spurious_shift(seed: u64) -> Self {
        Self {
            family: Family::SpuriousShift,
            domains: vec![
                DomainParams::spurious("src_a", [0.0, -2.0], 0.9, 1.0),
                DomainParams::spurious("src_b", [0.0, 0.0], 0.9, 2.0),
                DomainParams::spurious("src_c", [0.0, 2.0], 0.9, 3.0),
                DomainParams::spurious("reversed", [0.0, 1.0], -0.9, 2.0),
            ],
            samples_per_domain: 400,
            noise_sigma: 0.5,
            input_dim: 4,
            class_separation: 0.5,
            seed,
        }
    }

    /// Name of the domain with the most negative correlation, if any.
    pub fn reversed_domain(&self) -> Option<&str> {
        self.domains
            .iter()
            .filter(|d| d.correlation < 0.0)
            .min_by(|a, b| a.correlation.total_cmp(&b.correlation))
            .map(|d| d.name.as_str())
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let min_dim = match self.family {
            Family::RotatedMoons => 2,
            Family::SpuriousShift => 4,
        };
        if self.input_dim < min_dim {
            return Err(DataError::InvalidSpec(format!(
                "{} needs input_dim >= {min_dim}, got {}",
                self.family.name(),
                self.input_dim
            )));
        }
        if self.domains.is_empty() {
            return Err(DataError::InvalidSpec("no domains".into()));
        }
        if self.samples_per_domain < 2 {
            return Err(DataError::InvalidSpec(
                "samples_per_domain must be at least 2 so both classes appear".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(DataError::InvalidSpec("noise_sigma must be >= 0".into()));
        }
        for d in &self.domains {
            if !(-1.0..=1.0).contains(&d.correlation) {
                return Err(DataError::InvalidSpec(format!(
                    "domain `{}` correlation {} outside [-1, 1]",
                    d.name, d.correlation
                )));
            }
            for y in 0..2 {
                let p = d.raw_cue_probability(y);
                if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                    return Err(DataError::InvalidSpec(format!(
                        "domain `{}`: cue probability {p} for class {y} outside [0, 1]",
                        d.name
                    )));
                }
            }
            if d.name.is_empty() || d.name.contains(['/', '\\']) {
                return Err(DataError::InvalidSpec(format!("bad domain name `{}`", d.name)));
            }
        }
        Ok(())
    }
}

fn domain_rng(seed: u64, domain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1000 + domain as u64);
    rng
}

/// Generates the dataset described by `spec`. Within each domain the
/// examples are ordered by class (half of each, class 0 first).
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MultiDomainDataset, DataError> {
    spec.validate()?;
    let n = spec.samples_per_domain;
    let dim = spec.input_dim;
    let sigma = spec.noise_sigma;
    let mut domains = Vec::with_capacity(spec.domains.len());
    for (di, params) in spec.domains.iter().enumerate() {
        let mut rng = domain_rng(spec.seed, di);
        let mut data = Vec::with_capacity(n * dim);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = usize::from(i >= n / 2);
            let mut row = vec![0.0; dim];
            match spec.family {
                Family::RotatedMoons => {
                    let t = rng.random::<f64>() * std::f64::consts::PI;
                    let (x, y) = if label == 0 {
                        (t.cos(), t.sin())
                    } else {
                        (1.0 - t.cos(), 0.5 - t.sin())
                    };
                    let (s, c) = params.rotation_deg.to_radians().sin_cos();
                    row[0] = c * x - s * y;
                    row[1] = s * x + c * y;
                }
                Family::SpuriousShift => {
                    let sign = if label == 1 { 1.0 } else { -1.0 };
                    let cue = if rng.random::<f64>() < params.cue_probability(label) { 1.0 } else { -1.0 };
                    row[0] = sign * spec.class_separation;
                    row[1] = sign * spec.class_separation;
                    row[2] = params.nuisance_offset[0] + params.cue_strength * cue;
                    row[3] = params.nuisance_offset[1];
                }
            }
            if sigma > 0.0 {
                for v in &mut row {
                    *v += sigma * rng.sample::<f64, _>(StandardNormal);
                }
            }
            data.extend(row);
            labels.push(label);
        }
        domains.push(Domain {
            name: params.name.clone(),
            inputs: Matrix::from_vec(n, dim, data).expect("sized above"),
            labels,
        });
    }
    MultiDomainDataset::new(domains, vec!["class0".into(), "class1".into()], dim)
}
