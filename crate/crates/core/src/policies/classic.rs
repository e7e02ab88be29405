//! List-based LRU and FIFO. These are kept deliberately literal so they can
//! serve as reference models for the permutation encodings.

use super::Tag;
use crate::geometry::AccessOutcome;

/// An ordered list of resident tags. Front = most recently used (LRU) or
/// most recently inserted (FIFO); back = next victim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderState {
    assoc: usize,
    order: Vec<Tag>,
}

impl OrderState {
    pub fn new(assoc: usize) -> Self {
        OrderState {
            assoc,
            order: Vec::with_capacity(assoc),
        }
    }

    pub fn tags(&self) -> Vec<Tag> {
        self.order.clone()
    }

    pub fn contains(&self, tag: Tag) -> bool {
        self.order.contains(&tag)
    }

    pub fn flush(&mut self, tag: Tag) {
        self.order.retain(|&t| t != tag);
    }

    pub(super) fn seed_tags(&mut self, tags: &[Tag]) {
        self.order = tags[..tags.len().min(self.assoc)].to_vec();
    }
}

pub fn lru_access(state: &mut OrderState, tag: Tag) -> AccessOutcome {
    if let Some(pos) = state.order.iter().position(|&t| t == tag) {
        state.order.remove(pos);
        state.order.insert(0, tag);
        return AccessOutcome::Hit;
    }
    if state.order.len() == state.assoc {
        state.order.pop();
    }
    state.order.insert(0, tag);
    AccessOutcome::Miss
}

pub fn fifo_access(state: &mut OrderState, tag: Tag) -> AccessOutcome {
    if state.order.contains(&tag) {
        return AccessOutcome::Hit;
    }
    if state.order.len() == state.assoc {
        state.order.pop();
    }
    state.order.insert(0, tag);
    AccessOutcome::Miss
}
