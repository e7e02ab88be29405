//! Tree-based pseudo-LRU. Each set keeps a complete binary tree of A-1 bits
//! over its A lines; the bits point toward the next victim, and every access
//! flips the bits on its path to point away from the accessed line.

use super::Tag;
use crate::geometry::AccessOutcome;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlruState {
    pub slots: Vec<Option<Tag>>,
    /// Heap-ordered internal nodes: node 0 is the root, children of node k
    /// are 2k+1 and 2k+2. `false` points into the left subtree.
    pub bits: Vec<bool>,
}

impl PlruState {
    pub fn new(assoc: usize) -> Self {
        assert!(assoc.is_power_of_two(), "PLRU needs a power-of-two associativity");
        PlruState {
            slots: vec![None; assoc],
            bits: vec![false; assoc - 1],
        }
    }

    pub fn tags(&self) -> Vec<Tag> {
        self.slots.iter().flatten().copied().collect()
    }

    pub fn contains(&self, tag: Tag) -> bool {
        self.slots.iter().flatten().any(|&t| t == tag)
    }

    pub fn flush(&mut self, tag: Tag) {
        for slot in &mut self.slots {
            if *slot == Some(tag) {
                *slot = None;
            }
        }
    }

    pub(super) fn seed_tags(&mut self, tags: &[Tag]) {
        for (slot, &tag) in self.slots.iter_mut().zip(tags) {
            *slot = Some(tag);
        }
    }

    /// Leaf the tree bits currently point to.
    fn victim_leaf(&self) -> usize {
        let assoc = self.slots.len();
        let mut node = 0;
        let mut lo = 0;
        let mut width = assoc;
        while width > 1 {
            width /= 2;
            if self.bits[node] {
                node = 2 * node + 2;
                lo += width;
            } else {
                node = 2 * node + 1;
            }
        }
        lo
    }

    /// Point every bit on the path to `leaf` away from it.
    fn touch(&mut self, leaf: usize) {
        let assoc = self.slots.len();
        let mut node = 0;
        let mut lo = 0;
        let mut width = assoc;
        while width > 1 {
            width /= 2;
            let goes_left = leaf < lo + width;
            self.bits[node] = goes_left; // away: point right iff leaf is left
            if goes_left {
                node = 2 * node + 1;
            } else {
                node = 2 * node + 2;
                lo += width;
            }
        }
    }
}

pub fn plru_access(state: &mut PlruState, tag: Tag) -> AccessOutcome {
    if let Some(leaf) = state.slots.iter().position(|&t| t == Some(tag)) {
        state.touch(leaf);
        return AccessOutcome::Hit;
    }
    let leaf = match state.slots.iter().position(Option::is_none) {
        Some(empty) => empty,
        None => state.victim_leaf(),
    };
    state.slots[leaf] = Some(tag);
    state.touch(leaf);
    AccessOutcome::Miss
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_fill_victimizes_first_line() {
        // A=4: after l0 l1 l2 l3 the bits point back at l0.
        let mut s = PlruState::new(4);
        for t in 0..4 {
            assert_eq!(plru_access(&mut s, Tag(t)), AccessOutcome::Miss);
        }
        assert_eq!(plru_access(&mut s, Tag(99)), AccessOutcome::Miss);
        assert!(!s.contains(Tag(0)));
        assert!(s.contains(Tag(1)));
    }

    #[test]
    fn hit_never_changes_contents() {
        let mut s = PlruState::new(4);
        for t in 0..4 {
            plru_access(&mut s, Tag(t));
        }
        let before = s.tags();
        plru_access(&mut s, Tag(2));
        assert_eq!(s.tags(), before);
    }

    #[test]
    fn flush_then_miss_fills_hole_before_evicting() {
        let mut s = PlruState::new(8);
        for t in 0..8 {
            plru_access(&mut s, Tag(t));
        }
        s.flush(Tag(3));
        let resident_before: Vec<_> = s.tags();
        assert_eq!(plru_access(&mut s, Tag(42)), AccessOutcome::Miss);
        // Every line other than the flushed one survived the fill.
        for t in resident_before {
            assert!(s.contains(t));
        }
        assert!(s.contains(Tag(42)));
    }
}
