//! Independent reference models and trace helpers used as oracles by the
//! integration suites. Nothing here touches the crate's policy
//! implementations; the point is to check one against the other.
#![allow(dead_code)] // each test target uses a subset

use cachescope_core::geometry::AccessOutcome;
use cachescope_core::policies::Tag;

/// Reference model for the 12-way Ice Lake L1 policy: three 4-element
/// pseudo-LRU trees ordered by the recency of their last access. A miss
/// replaces the leaf the least-recently-accessed tree points to. While
/// empty slots remain, insertions go to the least-recently-accessed tree
/// that still has one, walking its bits toward the victim but forced away
/// from subtrees without empty leaves, so fills never evict.
pub struct ThreePlruTrees {
    trees: [Plru4; 3],
    /// Tree ids, most recently accessed first.
    recency: [usize; 3],
}

struct Plru4 {
    slots: [Option<Tag>; 4],
    /// bits[0]: root (false = left pair is the victim side);
    /// bits[1]: left pair (false = leaf 0); bits[2]: right pair (false = leaf 2).
    bits: [bool; 3],
}

impl Plru4 {
    fn new() -> Self {
        Plru4 {
            slots: [None; 4],
            bits: [false; 3],
        }
    }

    fn has_empty(&self) -> bool {
        self.slots.iter().any(Option::is_none)
    }

    fn victim_leaf(&self) -> usize {
        if !self.bits[0] {
            usize::from(self.bits[1])
        } else {
            2 + usize::from(self.bits[2])
        }
    }

    /// Bit walk restricted to empty leaves: follow the victim direction at
    /// each node unless that side has no empty leaf.
    fn fill_leaf(&self) -> usize {
        let left_empty = self.slots[0].is_none() || self.slots[1].is_none();
        let go_right = if self.bits[0] {
            self.slots[2].is_none() || self.slots[3].is_none()
        } else {
            !left_empty
        };
        if go_right {
            let preferred = 2 + usize::from(self.bits[2]);
            if self.slots[preferred].is_none() {
                preferred
            } else {
                2 + usize::from(!self.bits[2])
            }
        } else {
            let preferred = usize::from(self.bits[1]);
            if self.slots[preferred].is_none() {
                preferred
            } else {
                usize::from(!self.bits[1])
            }
        }
    }

    fn touch(&mut self, leaf: usize) {
        if leaf < 2 {
            self.bits[0] = true;
            self.bits[1] = leaf == 0;
        } else {
            self.bits[0] = false;
            self.bits[2] = leaf == 2;
        }
    }
}

impl Default for ThreePlruTrees {
    fn default() -> Self {
        Self::new()
    }
}

impl ThreePlruTrees {
    pub fn new() -> Self {
        ThreePlruTrees {
            trees: [Plru4::new(), Plru4::new(), Plru4::new()],
            recency: [0, 1, 2],
        }
    }

    fn make_most_recent(&mut self, tree: usize) {
        let pos = self.recency.iter().position(|&t| t == tree).expect("tree id");
        self.recency[..=pos].rotate_right(1);
    }

    pub fn access(&mut self, tag: Tag) -> AccessOutcome {
        for t in 0..3 {
            if let Some(leaf) = self.trees[t].slots.iter().position(|&s| s == Some(tag)) {
                self.trees[t].touch(leaf);
                self.make_most_recent(t);
                return AccessOutcome::Hit;
            }
        }
        // Insertion: the least-recent tree with an empty slot, or the
        // least-recent tree's victim leaf once every slot is full.
        let (t, leaf) = match self.recency.iter().rev().find(|&&t| self.trees[t].has_empty()) {
            Some(&t) => (t, self.trees[t].fill_leaf()),
            None => {
                let t = self.recency[2];
                (t, self.trees[t].victim_leaf())
            }
        };
        self.trees[t].slots[leaf] = Some(tag);
        self.trees[t].touch(leaf);
        self.make_most_recent(t);
        AccessOutcome::Miss
    }
}

/// Brute-force LRU used by the exhaustive small-instance checks.
pub struct RefLru {
    assoc: usize,
    order: Vec<Tag>, // most recent first
}

impl RefLru {
    pub fn new(assoc: usize) -> Self {
        RefLru {
            assoc,
            order: Vec::new(),
        }
    }

    pub fn access(&mut self, tag: Tag) -> AccessOutcome {
        if let Some(pos) = self.order.iter().position(|&t| t == tag) {
            self.order.remove(pos);
            self.order.insert(0, tag);
            AccessOutcome::Hit
        } else {
            if self.order.len() == self.assoc {
                self.order.pop();
            }
            self.order.insert(0, tag);
            AccessOutcome::Miss
        }
    }
}
