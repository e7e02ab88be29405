//! Replacement policies as pure per-set state machines.
//!
//! Every policy is a value transformer over one cache set: given the set
//! state and an accessed tag it reports hit or miss and produces the next
//! state. Policies never see other sets; adaptivity (set dueling) is wired
//! up by the simulator, which owns the selector counter.

pub mod adaptive;
pub mod classic;
pub mod mru;
pub mod names;
pub mod permutation;
pub mod plru;
pub mod presets;
pub mod qlru;
pub mod zoo;

use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::geometry::AccessOutcome;
use crate::simulator::PolicyStateError;

pub use adaptive::{AdaptiveConfig, PselCounter};
pub use mru::MruVariant;
pub use names::{format_policy_name, parse_policy_name, PolicyNameError};
pub use permutation::PermutationVectors;
pub use qlru::{validate_qlru_config, InsertionAge, QlruConfig, QlruReplace, QlruUpdate};
pub use zoo::policy_zoo;

/// Interned symbolic tag. Tags are compared by identity within a set; the
/// simulator maps block names to tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag(pub u64);

/// A replacement policy, as configured for a whole cache.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Fifo,
    Lru,
    Plru,
    /// The 12-way policy with three 4-element PLRU trees ordered by recency,
    /// expressed through its permutation vectors.
    Lru3Plru4,
    Mru,
    MruStar,
    Nru,
    Qlru(QlruConfig),
    Permutation(PermutationVectors),
    Adaptive(AdaptiveConfig),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyValidationError {
    #[error("invalid QLRU configuration: {0}")]
    Qlru(#[from] qlru::QlruValidationError),
    #[error("PLRU requires a power-of-two associativity, got {0}")]
    PlruAssoc(usize),
    #[error("LRU3PLRU4 is defined for associativity 12, got {0}")]
    Lru3Plru4Assoc(usize),
    #[error("permutation policy expects {expected} vectors of length {assoc}")]
    PermutationShape { expected: usize, assoc: usize },
    #[error("vector {index} is not a permutation of 0..{assoc}")]
    NotAPermutation { index: usize, assoc: usize },
    #[error("adaptive leader set lists overlap (set {0})")]
    LeaderOverlap(usize),
    #[error("adaptive leader set {0} out of range for {1} sets")]
    LeaderOutOfRange(usize, usize),
    #[error("psel_bits must be in 1..=31, got {0}")]
    PselBits(u32),
    #[error("adaptive policies cannot nest")]
    NestedAdaptive,
}

impl PolicySpec {
    /// Check the spec against a concrete geometry.
    pub fn validate(&self, associativity: usize, num_sets: usize) -> Result<(), PolicyValidationError> {
        match self {
            PolicySpec::Fifo | PolicySpec::Lru | PolicySpec::Mru | PolicySpec::MruStar | PolicySpec::Nru => Ok(()),
            PolicySpec::Plru => {
                if associativity.is_power_of_two() {
                    Ok(())
                } else {
                    Err(PolicyValidationError::PlruAssoc(associativity))
                }
            }
            PolicySpec::Lru3Plru4 => {
                if associativity == 12 {
                    Ok(())
                } else {
                    Err(PolicyValidationError::Lru3Plru4Assoc(associativity))
                }
            }
            PolicySpec::Qlru(cfg) => Ok(validate_qlru_config(cfg)?),
            PolicySpec::Permutation(vectors) => vectors.validate(associativity),
            PolicySpec::Adaptive(cfg) => cfg.validate(associativity, num_sets),
        }
    }

    /// True when outcomes depend only on the access stream (no random draws).
    pub fn is_deterministic(&self) -> bool {
        match self {
            PolicySpec::Qlru(cfg) => !matches!(cfg.insertion, InsertionAge::Probabilistic { .. }),
            PolicySpec::Adaptive(cfg) => cfg.policy_a.is_deterministic() && cfg.policy_b.is_deterministic(),
            _ => true,
        }
    }
}

/// Per-set state for one policy family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetState {
    Lru(classic::OrderState),
    Fifo(classic::OrderState),
    Plru(plru::PlruState),
    Mru(mru::MruState),
    Qlru(qlru::QlruState),
    Perm(permutation::PermutationSetState),
}

impl SetState {
    /// Empty post-invalidation state for `spec`.
    pub fn fresh(spec: &PolicySpec, assoc: usize) -> SetState {
        match spec {
            PolicySpec::Lru => SetState::Lru(classic::OrderState::new(assoc)),
            PolicySpec::Fifo => SetState::Fifo(classic::OrderState::new(assoc)),
            PolicySpec::Plru => SetState::Plru(plru::PlruState::new(assoc)),
            PolicySpec::Mru | PolicySpec::MruStar | PolicySpec::Nru => SetState::Mru(mru::MruState::new(assoc)),
            PolicySpec::Qlru(_) => SetState::Qlru(qlru::QlruState::new(assoc)),
            PolicySpec::Permutation(_) | PolicySpec::Lru3Plru4 => {
                SetState::Perm(permutation::PermutationSetState::new(assoc))
            }
            PolicySpec::Adaptive(_) => unreachable!("adaptive specs are resolved per set by the simulator"),
        }
    }

    /// True if this state shape serves `spec` (a follower set keeps its state
    /// across a selector flip between policies of the same family).
    pub fn matches(&self, spec: &PolicySpec) -> bool {
        matches!(
            (self, spec),
            (SetState::Lru(_), PolicySpec::Lru)
                | (SetState::Fifo(_), PolicySpec::Fifo)
                | (SetState::Plru(_), PolicySpec::Plru)
                | (SetState::Mru(_), PolicySpec::Mru | PolicySpec::MruStar | PolicySpec::Nru)
                | (SetState::Qlru(_), PolicySpec::Qlru(_))
                | (SetState::Perm(_), PolicySpec::Permutation(_) | PolicySpec::Lru3Plru4)
        )
    }

    /// Tags currently present, in slot/position order.
    pub fn tags(&self) -> Vec<Tag> {
        match self {
            SetState::Lru(s) | SetState::Fifo(s) => s.tags(),
            SetState::Plru(s) => s.tags(),
            SetState::Mru(s) => s.tags(),
            SetState::Qlru(s) => s.tags(),
            SetState::Perm(s) => s.tags(),
        }
    }

    pub fn contains(&self, tag: Tag) -> bool {
        match self {
            SetState::Lru(s) | SetState::Fifo(s) => s.contains(tag),
            SetState::Plru(s) => s.contains(tag),
            SetState::Mru(s) => s.contains(tag),
            SetState::Qlru(s) => s.contains(tag),
            SetState::Perm(s) => s.contains(tag),
        }
    }

    pub fn occupancy(&self) -> usize {
        self.tags().len()
    }

    /// Rebuild state for a different policy family, keeping the resident tags
    /// in slot order with that family's stalest metadata. Only reached when a
    /// dueling pair mixes state shapes, which real caches do not do.
    pub fn rebuild_for(&self, spec: &PolicySpec, assoc: usize) -> SetState {
        let tags = self.tags();
        let mut state = SetState::fresh(spec, assoc);
        match &mut state {
            SetState::Lru(s) | SetState::Fifo(s) => s.seed_tags(&tags),
            SetState::Plru(s) => s.seed_tags(&tags),
            SetState::Mru(s) => s.seed_tags(&tags),
            SetState::Qlru(s) => s.seed_tags(&tags),
            SetState::Perm(s) => s.seed_tags(&tags),
        }
        state
    }
}

/// Run one access against a non-adaptive policy.
pub fn access_set(
    state: &mut SetState,
    spec: &PolicySpec,
    tag: Tag,
    rng: &mut ChaCha12Rng,
) -> Result<AccessOutcome, PolicyStateError> {
    match (state, spec) {
        (SetState::Lru(s), PolicySpec::Lru) => Ok(classic::lru_access(s, tag)),
        (SetState::Fifo(s), PolicySpec::Fifo) => Ok(classic::fifo_access(s, tag)),
        (SetState::Plru(s), PolicySpec::Plru) => Ok(plru::plru_access(s, tag)),
        (SetState::Mru(s), PolicySpec::Mru) => Ok(mru::mru_access(s, tag, MruVariant::Mru)),
        (SetState::Mru(s), PolicySpec::MruStar) => Ok(mru::mru_access(s, tag, MruVariant::MruStar)),
        (SetState::Mru(s), PolicySpec::Nru) => Ok(mru::mru_access(s, tag, MruVariant::Nru)),
        (SetState::Qlru(s), PolicySpec::Qlru(cfg)) => qlru::qlru_access(s, tag, cfg, rng),
        (SetState::Perm(s), PolicySpec::Permutation(vectors)) => Ok(permutation::permutation_access(s, tag, vectors)),
        (SetState::Perm(s), PolicySpec::Lru3Plru4) => {
            Ok(permutation::permutation_access(s, tag, permutation::ice_lake_l1_vectors()))
        }
        (state, spec) => unreachable!("state {state:?} does not match policy {spec:?}"),
    }
}

/// Remove a tag from the set if present. Metadata of remaining lines is
/// untouched; the freed slot becomes an empty location.
pub fn flush_set(state: &mut SetState, tag: Tag) {
    match state {
        SetState::Lru(s) | SetState::Fifo(s) => s.flush(tag),
        SetState::Plru(s) => s.flush(tag),
        SetState::Mru(s) => s.flush(tag),
        SetState::Qlru(s) => s.flush(tag),
        SetState::Perm(s) => s.flush(tag),
    }
}
