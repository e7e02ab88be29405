//! Permutation policies: a total order over the lines of a set plus one
//! permutation per hit position and one for the miss case.
//!
//! Position 0 is the most protected end of the order; position A-1 is the
//! victim end ("the smallest element"). A vector `v` transforms the order as
//! `new[j] = old[v[j]]`, i.e. it lists, for every new position, the old
//! position whose element moves there.
//!
//! Partial sets keep their residents packed at the head of the order, in
//! relative order, with the empty positions at the tail. Insertions always
//! happen at position A-1 followed by the miss vector; while the set is not
//! full that position is empty, so fills never evict. A hit applies the
//! vector of the hit position and the order is re-packed, since vectors may
//! interleave empty tail positions into the residents.

use serde::{Deserialize, Serialize};

use super::{PolicyValidationError, Tag};
use crate::geometry::AccessOutcome;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationVectors {
    /// One vector per hit position, index = position of the accessed line.
    pub hit: Vec<Vec<u8>>,
    pub miss: Vec<u8>,
}

impl PermutationVectors {
    pub fn new(hit: Vec<Vec<u8>>, miss: Vec<u8>) -> Self {
        PermutationVectors { hit, miss }
    }

    pub fn associativity(&self) -> usize {
        self.hit.len()
    }

    pub fn validate(&self, assoc: usize) -> Result<(), PolicyValidationError> {
        if self.hit.len() != assoc {
            return Err(PolicyValidationError::PermutationShape {
                expected: assoc + 1,
                assoc,
            });
        }
        for (index, vec) in self.hit.iter().chain(std::iter::once(&self.miss)).enumerate() {
            if !is_permutation(vec, assoc) {
                return Err(PolicyValidationError::NotAPermutation { index, assoc });
            }
        }
        Ok(())
    }

    /// LRU encoded as a permutation policy: a hit at position i moves the
    /// accessed element to the top and shifts positions 0..i down one.
    pub fn lru(assoc: usize) -> Self {
        let hit = (0..assoc).map(|i| promote_to_front(assoc, i)).collect();
        PermutationVectors {
            hit,
            miss: promote_to_front(assoc, assoc - 1),
        }
    }

    /// FIFO: hits change nothing; insertions enter at the top.
    pub fn fifo(assoc: usize) -> Self {
        let identity: Vec<u8> = (0..assoc as u8).collect();
        PermutationVectors {
            hit: vec![identity; assoc],
            miss: promote_to_front(assoc, assoc - 1),
        }
    }
}

fn is_permutation(vec: &[u8], assoc: usize) -> bool {
    if vec.len() != assoc {
        return false;
    }
    let mut seen = vec![false; assoc];
    for &v in vec {
        let v = v as usize;
        if v >= assoc || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// Vector moving old position `i` to the front, shifting 0..i down one.
fn promote_to_front(assoc: usize, i: usize) -> Vec<u8> {
    let mut v = Vec::with_capacity(assoc);
    v.push(i as u8);
    v.extend((0..i as u8).chain(i as u8 + 1..assoc as u8));
    v
}

/// Permutation vectors of the 12-way Ice Lake L1 policy (three PLRU trees of
/// four elements, ordered by tree recency). The published figure lists the
/// twelve hit vectors; the miss transformation equals the hit at the victim
/// position for this policy.
pub fn ice_lake_l1_vectors() -> &'static PermutationVectors {
    use std::sync::OnceLock;
    static VECTORS: OnceLock<PermutationVectors> = OnceLock::new();
    VECTORS.get_or_init(|| {
        let hit: Vec<Vec<u8>> = vec![
            vec![0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
            vec![1, 0, 2, 4, 3, 5, 7, 6, 8, 10, 9, 11],
            vec![2, 0, 1, 5, 3, 4, 8, 6, 7, 11, 9, 10],
            vec![3, 1, 2, 0, 4, 5, 9, 7, 8, 6, 10, 11],
            vec![4, 0, 2, 1, 3, 5, 10, 6, 8, 7, 9, 11],
            vec![5, 0, 1, 2, 3, 4, 11, 6, 7, 8, 9, 10],
            vec![6, 1, 2, 3, 4, 5, 0, 7, 8, 9, 10, 11],
            vec![7, 0, 2, 4, 3, 5, 1, 6, 8, 10, 9, 11],
            vec![8, 0, 1, 5, 3, 4, 2, 6, 7, 11, 9, 10],
            vec![9, 1, 2, 0, 4, 5, 3, 7, 8, 6, 10, 11],
            vec![10, 0, 2, 1, 3, 5, 4, 6, 8, 7, 9, 11],
            vec![11, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        ];
        let miss = hit[11].clone();
        PermutationVectors { hit, miss }
    })
}

/// The order itself: index = position, 0 = most protected, A-1 = victim end.
/// Residents are packed at the head; empty positions form the tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSetState {
    pub order: Vec<Option<Tag>>,
}

impl PermutationSetState {
    pub fn new(assoc: usize) -> Self {
        PermutationSetState {
            order: vec![None; assoc],
        }
    }

    /// State with the given residents, index = order position.
    pub fn with_order(assoc: usize, tags: &[Tag]) -> Self {
        let mut state = PermutationSetState::new(assoc);
        state.seed_tags(tags);
        state
    }

    pub fn tags(&self) -> Vec<Tag> {
        self.order.iter().flatten().copied().collect()
    }

    pub fn contains(&self, tag: Tag) -> bool {
        self.order.iter().flatten().any(|&t| t == tag)
    }

    pub fn flush(&mut self, tag: Tag) {
        for slot in &mut self.order {
            if *slot == Some(tag) {
                *slot = None;
            }
        }
        self.pack();
    }

    pub(super) fn seed_tags(&mut self, tags: &[Tag]) {
        for (slot, &tag) in self.order.iter_mut().zip(tags) {
            *slot = Some(tag);
        }
    }

    fn apply(&mut self, vec: &[u8]) {
        let old = self.order.clone();
        for (j, &src) in vec.iter().enumerate() {
            self.order[j] = old[src as usize];
        }
    }

    /// Restore the packed-residents invariant, keeping relative order.
    fn pack(&mut self) {
        let assoc = self.order.len();
        let mut packed = Vec::with_capacity(assoc);
        packed.extend(self.order.iter().flatten().copied().map(Some));
        packed.resize(assoc, None);
        self.order = packed;
    }
}

pub fn permutation_access(
    state: &mut PermutationSetState,
    tag: Tag,
    vectors: &PermutationVectors,
) -> AccessOutcome {
    if let Some(pos) = state.order.iter().position(|&t| t == Some(tag)) {
        state.apply(&vectors.hit[pos]);
        state.pack();
        return AccessOutcome::Hit;
    }
    // Insert at the victim end (an empty position unless the set is full,
    // in which case the order minimum is replaced) and apply the miss
    // vector.
    let victim = state.order.len() - 1;
    state.order[victim] = Some(tag);
    state.apply(&vectors.miss);
    state.pack();
    AccessOutcome::Miss
}
