use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::{DataError, MultiDomainDataset};
use crate::model::Batch;

/// Endless mini-batch stream over a fixed index set of one domain.
///
/// Indices are shuffled without replacement; the final batch of an epoch may
/// be short, after which the order is reshuffled.
#[derive(Clone, Debug)]
pub struct BatchIterator<'a> {
    dataset: &'a MultiDomainDataset,
    domain: usize,
    order: Vec<usize>,
    pos: usize,
    batch_size: usize,
    rng: ChaCha8Rng,
    domain_label: u8,
}

impl<'a> BatchIterator<'a> {
    pub fn new(
        dataset: &'a MultiDomainDataset,
        domain: usize,
        indices: &[usize],
        batch_size: usize,
        mut rng: ChaCha8Rng,
    ) -> Result<Self, DataError> {
        if indices.is_empty() {
            return Err(DataError::EmptyIndices);
        }
        if batch_size == 0 {
            return Err(DataError::Invalid("batch size must be at least 1".into()));
        }
        if domain >= dataset.num_domains() {
            return Err(DataError::UnknownDomain(format!("#{domain}")));
        }
        let len = dataset.domain(domain).len();
        if let Some(&i) = indices.iter().find(|&&i| i >= len) {
            return Err(DataError::Invalid(format!(
                "index {i} out of range for a domain of {len} examples"
            )));
        }
        let mut order = indices.to_vec();
        order.shuffle(&mut rng);
        Ok(Self {
            dataset,
            domain,
            order,
            pos: 0,
            batch_size,
            rng,
            domain_label: 0,
        })
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    /// Sets the episode-local domain label attached to subsequent batches.
    pub fn set_domain_label(&mut self, label: u8) {
        self.domain_label = label;
    }

    pub fn next_batch(&mut self) -> Batch {
        let end = (self.pos + self.batch_size).min(self.order.len());
        let picked = &self.order[self.pos..end];
        let (inputs, class_labels) = self.dataset.gather(self.domain, picked);
        let batch = Batch {
            inputs,
            class_labels,
            domain_labels: vec![self.domain_label; picked.len()],
            provenance: picked.iter().map(|&i| (self.domain, i)).collect(),
        };
        self.pos = end;
        if self.pos == self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        batch
    }

    pub fn next_labeled(&mut self, domain_label: u8) -> Batch {
        self.set_domain_label(domain_label);
        self.next_batch()
    }
}

impl Iterator for BatchIterator<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        Some(self.next_batch())
    }
}
