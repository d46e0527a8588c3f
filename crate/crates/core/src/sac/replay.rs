use rand::Rng;

use crate::envs::Transition;
use crate::error::{Error, Result};

/// Fixed-capacity FIFO ring of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        }
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

    /// Appends; once full, overwrites the oldest entry.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Oldest-first view, for inspection.
    pub fn iter_fifo(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity { 0 } else { self.cursor };
        self.items[split..].iter().chain(&self.items[..split])
    }

    /// `n` indices uniform over the current contents, with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.items.len() < n || self.items.is_empty() {
            return Err(Error::Protocol(format!(
                "cannot sample {n} transitions from a buffer holding {}",
                self.items.len()
            )));
        }
        let len = self.items.len();
        Ok((0..n).map(|_| rng.gen_range(0..len)).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Transition>> {
        Ok(self
            .sample_indices(n, rng)?
            .into_iter()
            .map(|i| self.items[i])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{reset, TaskDescriptor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tr(r: f64) -> Transition {
        let (_, o) = reset();
        Transition {
            s: o,
            a: [0.0, 0.0],
            r,
            s_next: o,
            done: false,
            g: TaskDescriptor::new(0.0),
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(5);
        for i in 0..6 {
            b.push(tr(i as f64));
        }
        assert_eq!(b.len(), 5);
        let rs: Vec<f64> = b.iter_fifo().map(|t| t.r).collect();
        assert_eq!(rs, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn undersized_sample_is_protocol_error() {
        let mut b = ReplayBuffer::new(10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(b.sample(1, &mut rng), Err(Error::Protocol(_))));
        b.push(tr(0.0));
        assert!(b.sample(2, &mut rng).is_err());
        assert_eq!(b.sample(1, &mut rng).unwrap().len(), 1);
    }

    #[test]
    fn seeded_sampling_repeats() {
        let mut b = ReplayBuffer::new(100);
        for i in 0..50 {
            b.push(tr(i as f64));
        }
        let a = b.sample_indices(32, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let c = b.sample_indices(32, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn sampling_is_uniform_chi_square() {
        let mut b = ReplayBuffer::new(10);
        for i in 0..10 {
            b.push(tr(i as f64));
        }
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        let mut counts = [0usize; 10];
        for _ in 0..n / 10 {
            for i in b.sample_indices(10, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        let expected = n as f64 / 10.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 9 degrees of freedom: 99.9th percentile is 27.88
        assert!(chi2 < 27.88, "chi2 = {chi2}, counts {counts:?}");
        // and each cell within 3σ of the multinomial mean
        let sd = (n as f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 3.0 * sd, "{counts:?}");
        }
    }
}
