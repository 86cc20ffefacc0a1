use rand::Rng;

use super::StateVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: StateVector,
    pub action_index: usize,
    pub reward: f64,
    pub next_state: StateVector,
}

/// Fixed-capacity ring buffer; the oldest experience is overwritten first.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    buffer: Vec<Experience>,
    capacity: usize,
    inserted: u64,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            buffer: Vec::with_capacity(capacity.min(4096)),
            capacity,
            inserted: 0,
        }
    }

    pub fn push(&mut self, e: Experience) {
        if self.buffer.len() < self.capacity {
            self.buffer.push(e);
        } else {
            let slot = (self.inserted % self.capacity as u64) as usize;
            self.buffer[slot] = e;
        }
        self.inserted += 1;
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn insertions(&self) -> u64 {
        self.inserted
    }

    /// Oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        let split = if self.buffer.len() < self.capacity {
            0
        } else {
            (self.inserted % self.capacity as u64) as usize
        };
        self.buffer[split..].iter().chain(self.buffer[..split].iter())
    }

    /// Uniform sample with replacement.
    pub fn sample<'a>(&'a self, batch: usize, rng: &mut impl Rng) -> Vec<&'a Experience> {
        if self.buffer.is_empty() {
            return Vec::new();
        }
        (0..batch)
            .map(|_| &self.buffer[rng.random_range(0..self.buffer.len())])
            .collect()
    }
}
