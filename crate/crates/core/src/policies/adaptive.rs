//! Set dueling: two policies with dedicated leader sets and a saturating
//! selector counter. Misses in policy-A leader sets increment the counter,
//! misses in policy-B leader sets decrement it; follower sets use policy A
//! while the counter is below its midpoint and policy B otherwise.

use serde::{Deserialize, Serialize};

use super::{PolicySpec, PolicyValidationError};

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveConfig {
    pub policy_a: Box<PolicySpec>,
    pub policy_b: Box<PolicySpec>,
    pub leader_sets_a: Vec<usize>,
    pub leader_sets_b: Vec<usize>,
    pub psel_bits: u32,
}

pub const DEFAULT_PSEL_BITS: u32 = 10;

impl AdaptiveConfig {
    pub fn new(
        policy_a: PolicySpec,
        policy_b: PolicySpec,
        leader_sets_a: Vec<usize>,
        leader_sets_b: Vec<usize>,
        psel_bits: u32,
    ) -> Self {
        let mut cfg = AdaptiveConfig {
            policy_a: Box::new(policy_a),
            policy_b: Box::new(policy_b),
            leader_sets_a,
            leader_sets_b,
            psel_bits,
        };
        cfg.canonicalize();
        cfg
    }

    /// Sorted, deduplicated leader lists; required for name round-tripping.
    pub fn canonicalize(&mut self) {
        self.leader_sets_a.sort_unstable();
        self.leader_sets_a.dedup();
        self.leader_sets_b.sort_unstable();
        self.leader_sets_b.dedup();
    }

    pub fn validate(&self, associativity: usize, num_sets: usize) -> Result<(), PolicyValidationError> {
        if matches!(*self.policy_a, PolicySpec::Adaptive(_)) || matches!(*self.policy_b, PolicySpec::Adaptive(_)) {
            return Err(PolicyValidationError::NestedAdaptive);
        }
        if !(1..=31).contains(&self.psel_bits) {
            return Err(PolicyValidationError::PselBits(self.psel_bits));
        }
        self.policy_a.validate(associativity, num_sets)?;
        self.policy_b.validate(associativity, num_sets)?;
        for &s in self.leader_sets_a.iter().chain(&self.leader_sets_b) {
            if s >= num_sets {
                return Err(PolicyValidationError::LeaderOutOfRange(s, num_sets));
            }
        }
        if let Some(&s) = self.leader_sets_a.iter().find(|s| self.leader_sets_b.contains(s)) {
            return Err(PolicyValidationError::LeaderOverlap(s));
        }
        Ok(())
    }

    pub fn role_of(&self, set_index: usize) -> SetRole {
        if self.leader_sets_a.binary_search(&set_index).is_ok() {
            SetRole::LeaderA
        } else if self.leader_sets_b.binary_search(&set_index).is_ok() {
            SetRole::LeaderB
        } else {
            SetRole::Follower
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetRole {
    LeaderA,
    LeaderB,
    Follower,
}

/// Saturating policy-selection counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PselCounter {
    value: u32,
    bits: u32,
}

impl PselCounter {
    pub fn new(bits: u32) -> Self {
        PselCounter { value: 0, bits }
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn max(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    pub fn midpoint(&self) -> u32 {
        1u32 << (self.bits - 1)
    }

    pub fn increment(&mut self) {
        if self.value < self.max() {
            self.value += 1;
        }
    }

    pub fn decrement(&mut self) {
        if self.value > 0 {
            self.value -= 1;
        }
    }

    /// Followers use policy A below the midpoint, policy B at or above it.
    pub fn followers_use_b(&self) -> bool {
        self.value >= self.midpoint()
    }
}
