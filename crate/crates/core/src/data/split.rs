use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, MultiDomainDataset};

/// How source domains are partitioned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Every source example is used for training.
    #[default]
    FullTarget,
    /// Each source domain is shuffled and split 70% train / 30% held-out test.
    Vlcs7030,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::FullTarget => "full_target",
            Protocol::Vlcs7030 => "vlcs_70_30",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full_target" => Ok(Protocol::FullTarget),
            "vlcs_70_30" => Ok(Protocol::Vlcs7030),
            other => Err(format!(
                "unknown protocol `{other}` (expected full_target or vlcs_70_30)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSplit {
    pub domain: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Leave-one-domain-out partition: the target domain is test-only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub target_domain: usize,
    pub protocol: Protocol,
    pub sources: Vec<SourceSplit>,
    pub target_test: Vec<usize>,
}

impl SplitPlan {
    pub fn source_domains(&self) -> Vec<usize> {
        self.sources.iter().map(|s| s.domain).collect()
    }

    pub fn source(&self, domain: usize) -> Option<&SourceSplit> {
        self.sources.iter().find(|s| s.domain == domain)
    }

    /// Keeps only the listed source domains (the target is unchanged).
    pub fn restrict_sources(&self, keep: &[usize]) -> SplitPlan {
        SplitPlan {
            sources: self
                .sources
                .iter()
                .filter(|s| keep.contains(&s.domain))
                .cloned()
                .collect(),
            ..self.clone()
        }
    }
}

/// Number of training examples kept from a source domain of `n` examples.
fn train_count(n: usize) -> usize {
    (n * 7 + 5) / 10
}

pub fn make_lodo_splits(
    dataset: &MultiDomainDataset,
    target_domain: &str,
    protocol: Protocol,
    seed: u64,
) -> Result<SplitPlan, DataError> {
    let target = dataset.domain_index(target_domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(crate::trainer::STREAM_SPLIT);
    let mut sources = Vec::new();
    for (d, domain) in dataset.domains().iter().enumerate() {
        if d == target {
            continue;
        }
        let all: Vec<usize> = (0..domain.len()).collect();
        let split = match protocol {
            Protocol::FullTarget => SourceSplit {
                domain: d,
                train: all,
                test: Vec::new(),
            },
            Protocol::Vlcs7030 => {
                let mut shuffled = all;
                shuffled.shuffle(&mut rng);
                let test = shuffled.split_off(train_count(shuffled.len()));
                SourceSplit {
                    domain: d,
                    train: shuffled,
                    test,
                }
            }
        };
        sources.push(split);
    }
    Ok(SplitPlan {
        target_domain: target,
        protocol,
        sources,
        target_test: (0..dataset.domain(target).len()).collect(),
    })
}
