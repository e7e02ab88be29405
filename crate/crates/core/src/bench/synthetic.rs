use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use super::{BackendError, CounterBackend, Event};

/// Deterministic stand-in for generated benchmark code: each event reads
/// `base + cost * unroll * max(1, loop)` plus optional seeded Gaussian noise
/// per invocation.
pub struct SyntheticBackend {
    pub base: f64,
    pub cost: f64,
    pub capacity: usize,
    noise: Option<(Normal<f64>, ChaCha12Rng)>,
}

impl SyntheticBackend {
    pub fn new(base: f64, cost: f64, capacity: usize) -> Self {
        SyntheticBackend {
            base,
            cost,
            capacity,
            noise: None,
        }
    }

    pub fn with_noise(mut self, scale: f64, seed: u64) -> Self {
        if scale > 0.0 {
            let normal = Normal::new(0.0, scale).expect("finite noise scale");
            self.noise = Some((normal, ChaCha12Rng::seed_from_u64(seed)));
        }
        self
    }
}

impl CounterBackend for SyntheticBackend {
    fn counter_capacity(&self) -> usize {
        self.capacity
    }

    fn execute(&mut self, loop_count: u32, local_unroll_count: u32, events: &[Event]) -> Result<Vec<f64>, BackendError> {
        let reps = f64::from(loop_count.max(1)) * f64::from(local_unroll_count);
        let clean = self.base + self.cost * reps;
        Ok(events
            .iter()
            .map(|_| match &mut self.noise {
                Some((normal, rng)) => clean + normal.sample(rng),
                None => clean,
            })
            .collect())
    }
}
