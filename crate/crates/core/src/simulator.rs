//! The simulator shell: routes symbolic block accesses to per-set policy
//! state machines, carries the seeded randomness for probabilistic policies,
//! and owns the dueling selector for adaptive configurations.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::geometry::{AccessOutcome, BlockId, CacheGeometry};
use crate::policies::adaptive::SetRole;
use crate::policies::{access_set, flush_set, PolicySpec, PolicyValidationError, PselCounter, SetState, Tag};

/// The policy reported an undefined state (e.g. QLRU R0 replacement with no
/// age-3 line).
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("undefined policy state: {message}")]
pub struct PolicyStateError {
    pub message: String,
}

impl PolicyStateError {
    pub fn new(message: impl Into<String>) -> Self {
        PolicyStateError {
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimulatorError {
    #[error(transparent)]
    InvalidPolicy(#[from] PolicyValidationError),
}

pub struct CacheSimulator {
    geometry: CacheGeometry,
    policy: PolicySpec,
    sets: Vec<Option<SetState>>,
    rngs: Vec<Option<ChaCha12Rng>>,
    psel: Option<PselCounter>,
    seed: u64,
    tags: HashMap<String, Tag>,
    next_tag: u64,
}

impl CacheSimulator {
    /// Build a simulator where every set runs `policy`. An adaptive policy
    /// assigns its leader and follower roles per set.
    pub fn new(geometry: CacheGeometry, policy: PolicySpec, seed: u64) -> Result<Self, SimulatorError> {
        policy.validate(geometry.associativity, geometry.num_sets)?;
        let psel = match &policy {
            PolicySpec::Adaptive(cfg) => Some(PselCounter::new(cfg.psel_bits)),
            _ => None,
        };
        let num_sets = geometry.num_sets;
        Ok(CacheSimulator {
            geometry,
            policy,
            sets: vec![None; num_sets],
            rngs: (0..num_sets).map(|_| None).collect(),
            psel,
            seed,
            tags: HashMap::new(),
            next_tag: 0,
        })
    }

    pub fn geometry(&self) -> &CacheGeometry {
        &self.geometry
    }

    pub fn policy(&self) -> &PolicySpec {
        &self.policy
    }

    pub fn psel_value(&self) -> Option<u32> {
        self.psel.map(|c| c.value())
    }

    /// Intern a block name. The same name maps to the same tag everywhere;
    /// distinct sets still hold distinct blocks because a block is the
    /// (tag, set) pair.
    pub fn intern(&mut self, name: &str) -> Tag {
        if let Some(&tag) = self.tags.get(name) {
            return tag;
        }
        let tag = Tag(self.next_tag);
        self.next_tag += 1;
        self.tags.insert(name.to_owned(), tag);
        tag
    }

    pub fn access(&mut self, block: &BlockId) -> Result<AccessOutcome, PolicyStateError> {
        let tag = self.intern(&block.tag);
        self.access_raw(block.set_index, tag)
    }

    /// Access with a pre-interned tag; the hot path for trace replay.
    pub fn access_raw(&mut self, set_index: usize, tag: Tag) -> Result<AccessOutcome, PolicyStateError> {
        assert!(
            set_index < self.geometry.num_sets,
            "set index {set_index} out of range for {} sets",
            self.geometry.num_sets
        );
        let assoc = self.geometry.associativity;
        let CacheSimulator {
            policy,
            sets,
            rngs,
            psel,
            seed,
            ..
        } = self;
        let (spec, role): (&PolicySpec, SetRole) = match policy {
            PolicySpec::Adaptive(cfg) => {
                let role = cfg.role_of(set_index);
                let spec = match role {
                    SetRole::LeaderA => &*cfg.policy_a,
                    SetRole::LeaderB => &*cfg.policy_b,
                    SetRole::Follower => {
                        if psel.expect("adaptive simulator has a selector").followers_use_b() {
                            &*cfg.policy_b
                        } else {
                            &*cfg.policy_a
                        }
                    }
                };
                (spec, role)
            }
            spec => (spec, SetRole::Follower),
        };
        let state = sets[set_index].get_or_insert_with(|| SetState::fresh(spec, assoc));
        if !state.matches(spec) {
            *state = state.rebuild_for(spec, assoc);
        }
        let rng =
            rngs[set_index].get_or_insert_with(|| ChaCha12Rng::seed_from_u64(per_set_seed(*seed, set_index)));
        let outcome = access_set(state, spec, tag, rng)?;
        if outcome == AccessOutcome::Miss {
            if let Some(psel) = psel {
                match role {
                    SetRole::LeaderA => psel.increment(),
                    SetRole::LeaderB => psel.decrement(),
                    SetRole::Follower => {}
                }
            }
        }
        Ok(outcome)
    }

    /// Remove a block if present; flushing an absent block is a no-op.
    pub fn flush_block(&mut self, block: &BlockId) {
        let tag = self.intern(&block.tag);
        self.flush_raw(block.set_index, tag);
    }

    pub fn flush_raw(&mut self, set_index: usize, tag: Tag) {
        assert!(set_index < self.geometry.num_sets);
        if let Some(state) = &mut self.sets[set_index] {
            flush_set(state, tag);
        }
    }

    /// Invalidate the whole cache: every set becomes empty and per-set policy
    /// metadata returns to its post-invalidation state. The dueling selector
    /// and the random streams persist, as they would on hardware.
    pub fn wbinvd(&mut self) {
        for set in &mut self.sets {
            *set = None;
        }
    }

    pub fn contains(&self, block: &BlockId) -> bool {
        let Some(&tag) = self.tags.get(&block.tag) else {
            return false;
        };
        self.contains_raw(block.set_index, tag)
    }

    pub fn contains_raw(&self, set_index: usize, tag: Tag) -> bool {
        self.sets
            .get(set_index)
            .and_then(|s| s.as_ref())
            .is_some_and(|s| s.contains(tag))
    }

    /// Resident tags of a set in slot/position order.
    pub fn set_tags(&self, set_index: usize) -> Vec<Tag> {
        self.sets
            .get(set_index)
            .and_then(|s| s.as_ref())
            .map(|s| s.tags())
            .unwrap_or_default()
    }
}

fn per_set_seed(seed: u64, set_index: usize) -> u64 {
    // SplitMix64 step keeps per-set streams decorrelated.
    let mut z = seed ^ (set_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
