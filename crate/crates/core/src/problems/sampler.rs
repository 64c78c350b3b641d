use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchOrder {
    /// A fresh permutation every epoch, consumed in consecutive chunks.
    #[default]
    ShuffledEpoch,
    IidWithReplacement,
}

/// Training-example indices of one minibatch. `id` counts batches drawn so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub id: u64,
    pub epoch: u64,
    pub indices: Vec<usize>,
}

/// Draws minibatches of training indices `0..population`.
#[derive(Debug, Clone)]
pub struct MiniBatchSampler {
    population: usize,
    batch_size: usize,
    order: BatchOrder,
    rng: ChaCha8Rng,
    perm: Vec<usize>,
    cursor: usize,
    epoch: u64,
    next_id: u64,
}

impl MiniBatchSampler {
    pub fn new(population: usize, batch_size: usize, order: BatchOrder, stream: RngStream) -> Result<Self> {
        if population == 0 {
            return Err(Error::contract("cannot sample from an empty training set"));
        }
        if batch_size == 0 {
            return Err(Error::contract("batch size must be positive"));
        }
        Ok(Self {
            population,
            batch_size: batch_size.min(population),
            order,
            rng: stream.generator(),
            perm: (0..population).collect(),
            cursor: population,
            epoch: 0,
            next_id: 0,
        })
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn next_batch(&mut self) -> Batch {
        let indices = match self.order {
            BatchOrder::ShuffledEpoch => {
                if self.cursor >= self.population {
                    self.perm.shuffle(&mut self.rng);
                    self.cursor = 0;
                    if self.next_id > 0 {
                        self.epoch += 1;
                    }
                }
                let end = (self.cursor + self.batch_size).min(self.population);
                let chunk = self.perm[self.cursor..end].to_vec();
                self.cursor = end;
                chunk
            }
            BatchOrder::IidWithReplacement => (0..self.batch_size)
                .map(|_| self.rng.random_range(0..self.population))
                .collect(),
        };
        let batch = Batch {
            id: self.next_id,
            epoch: self.epoch,
            indices,
        };
        self.next_id += 1;
        batch
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffled_epoch_visits_everything_once() {
        let mut s = MiniBatchSampler::new(10, 3, BatchOrder::ShuffledEpoch, RngStream::new(1, 2)).unwrap();
        for epoch in 0..3 {
            let mut seen = Vec::new();
            while seen.len() < 10 {
                let b = s.next_batch();
                assert_eq!(b.epoch, epoch);
                seen.extend(b.indices);
            }
            seen.sort_unstable();
            assert_eq!(seen, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn sequences_are_seed_deterministic() {
        for order in [BatchOrder::ShuffledEpoch, BatchOrder::IidWithReplacement] {
            let mut a = MiniBatchSampler::new(50, 7, order, RngStream::new(4, 4)).unwrap();
            let mut b = MiniBatchSampler::new(50, 7, order, RngStream::new(4, 4)).unwrap();
            for _ in 0..30 {
                assert_eq!(a.next_batch(), b.next_batch());
            }
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(MiniBatchSampler::new(0, 1, BatchOrder::ShuffledEpoch, RngStream::new(0, 0)).is_err());
        assert!(MiniBatchSampler::new(3, 0, BatchOrder::ShuffledEpoch, RngStream::new(0, 0)).is_err());
    }
}
