use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::Transition;

/// Fixed-capacity ring buffer with a seeded uniform sampler.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    items: Vec<Transition>,
    capacity: usize,
    next: usize,
    rng: ChaCha8Rng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            items: Vec::with_capacity(capacity.min(4096)),
            capacity,
            next: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Uniform sample with replacement.
    pub fn sample(&mut self, n: usize) -> Vec<&Transition> {
        if self.items.is_empty() {
            return Vec::new();
        }
        let len = self.items.len();
        let idx: Vec<usize> = (0..n).map(|_| self.rng.gen_range(0..len)).collect();
        idx.into_iter().map(|i| &self.items[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Observation;
    use crate::game::ActionMask;

    fn t(action: usize) -> Transition {
        Transition {
            obs: Observation::zeros(),
            action,
            mask: ActionMask::from_indices([action]),
            reward: 0.0,
            next_obs: Observation::zeros(),
            next_mask: ActionMask::none(),
            done: true,
            log_prob: 0.0,
            value: None,
        }
    }

    #[test]
    fn never_exceeds_capacity() {
        let mut buf = ReplayBuffer::new(5, 0);
        for i in 0..12 {
            buf.push(t(i));
            assert!(buf.len() <= 5);
        }
        let kept: Vec<usize> = buf.items.iter().map(|x| x.action).collect();
        assert_eq!(kept, vec![10, 11, 7, 8, 9]);
    }

    #[test]
    fn sampling_reproducible() {
        let mut a = ReplayBuffer::new(50, 3);
        let mut b = ReplayBuffer::new(50, 3);
        for i in 0..50 {
            a.push(t(i));
            b.push(t(i));
        }
        let sa: Vec<usize> = a.sample(20).iter().map(|x| x.action).collect();
        let sb: Vec<usize> = b.sample(20).iter().map(|x| x.action).collect();
        assert_eq!(sa, sb);
    }
}
