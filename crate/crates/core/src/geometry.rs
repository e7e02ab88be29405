//! Cache shapes and symbolic block addressing.
//!
//! Blocks are symbolic: a block is a (tag, set index) pair, where tags are
//! plain strings compared by equality. No physical addresses, slice hashes,
//! or multi-level hierarchies are modeled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shape of one simulated cache: `num_sets` sets of `associativity` lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheGeometry {
    pub num_sets: usize,
    pub associativity: usize,
    /// Line size in bytes; informational only (blocks are symbolic).
    pub line_size: usize,
    pub name: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("num_sets must be at least 1")]
    ZeroSets,
    #[error("associativity must be at least 1")]
    ZeroAssociativity,
    #[error("line_size must be a power of two, got {0}")]
    LineSizeNotPowerOfTwo(usize),
}

impl CacheGeometry {
    pub fn new(
        num_sets: usize,
        associativity: usize,
        line_size: usize,
        name: impl Into<String>,
    ) -> Result<Self, GeometryError> {
        if num_sets == 0 {
            return Err(GeometryError::ZeroSets);
        }
        if associativity == 0 {
            return Err(GeometryError::ZeroAssociativity);
        }
        if !line_size.is_power_of_two() {
            return Err(GeometryError::LineSizeNotPowerOfTwo(line_size));
        }
        Ok(CacheGeometry {
            num_sets,
            associativity,
            line_size,
            name: name.into(),
        })
    }

    /// Single-set geometry, the common case for sequence experiments.
    pub fn single_set(associativity: usize) -> Self {
        CacheGeometry::new(1, associativity, 64, "single-set").expect("assoc >= 1")
    }
}

/// A symbolic memory block: a tag plus the set it maps to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockId {
    pub tag: String,
    pub set_index: usize,
}

impl BlockId {
    pub fn new(tag: impl Into<String>, set_index: usize) -> Self {
        BlockId {
            tag: tag.into(),
            set_index,
        }
    }
}

/// Result of a single access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessOutcome {
    Hit,
    Miss,
}

impl AccessOutcome {
    pub fn is_hit(self) -> bool {
        matches!(self, AccessOutcome::Hit)
    }
}
