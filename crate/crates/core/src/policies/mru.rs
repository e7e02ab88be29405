//! The one-status-bit policy family: MRU (also known as bit-PLRU or PLRUm),
//! the NRU variant that defers its reset check to replacement time, and the
//! MRU* variant that keeps all bits set while the set is filling.

use super::Tag;
use crate::geometry::AccessOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MruVariant {
    /// Accessed line's bit drops to 0; clearing the last set bit resets all
    /// other bits to 1. Miss victim: leftmost line with its bit set.
    Mru,
    /// Like MRU, but every insertion while the set is not yet full leaves
    /// all status bits at 1.
    MruStar,
    /// Like MRU, but the all-bits-clear check runs only on a replacement
    /// miss, just before victim selection.
    Nru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MruLine {
    pub tag: Tag,
    /// Status bit; 1 (`true`) marks eviction candidates.
    pub bit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MruState {
    pub slots: Vec<Option<MruLine>>,
}

impl MruState {
    pub fn new(assoc: usize) -> Self {
        MruState {
            slots: vec![None; assoc],
        }
    }

    pub fn tags(&self) -> Vec<Tag> {
        self.slots.iter().flatten().map(|l| l.tag).collect()
    }

    pub fn contains(&self, tag: Tag) -> bool {
        self.slots.iter().flatten().any(|l| l.tag == tag)
    }

    pub fn flush(&mut self, tag: Tag) {
        for slot in &mut self.slots {
            if slot.map(|l| l.tag) == Some(tag) {
                *slot = None;
            }
        }
    }

    pub(super) fn seed_tags(&mut self, tags: &[Tag]) {
        for (slot, &tag) in self.slots.iter_mut().zip(tags) {
            *slot = Some(MruLine { tag, bit: true });
        }
    }

    pub fn bits(&self) -> Vec<Option<bool>> {
        self.slots.iter().map(|s| s.map(|l| l.bit)).collect()
    }

    fn is_full(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }

    fn any_bit_set(&self) -> bool {
        self.slots.iter().flatten().any(|l| l.bit)
    }

    fn set_all_bits(&mut self, except: Option<usize>) {
        for (idx, slot) in self.slots.iter_mut().enumerate() {
            if Some(idx) == except {
                continue;
            }
            if let Some(line) = slot {
                line.bit = true;
            }
        }
    }
}

/// The access-time reset for MRU and MRU*: once the set is full and the last
/// set bit was cleared, all bits except the accessed line's are set again.
fn reset_check(state: &mut MruState, accessed: usize) {
    if state.is_full() && !state.any_bit_set() {
        state.set_all_bits(Some(accessed));
    }
}

pub fn mru_access(state: &mut MruState, tag: Tag, variant: MruVariant) -> AccessOutcome {
    if let Some(idx) = state
        .slots
        .iter()
        .position(|slot| slot.map(|l| l.tag) == Some(tag))
    {
        state.slots[idx].as_mut().expect("occupied").bit = false;
        if variant != MruVariant::Nru {
            reset_check(state, idx);
        }
        return AccessOutcome::Hit;
    }

    if let Some(idx) = state.slots.iter().position(Option::is_none) {
        state.slots[idx] = Some(MruLine { tag, bit: false });
        match variant {
            MruVariant::MruStar => state.set_all_bits(None),
            MruVariant::Mru => reset_check(state, idx),
            MruVariant::Nru => {}
        }
        return AccessOutcome::Miss;
    }

    if variant == MruVariant::Nru && !state.any_bit_set() {
        state.set_all_bits(None);
    }
    let victim = state
        .slots
        .iter()
        .position(|slot| slot.map(|l| l.bit) == Some(true))
        .expect("some status bit is set on a full set before replacement");
    state.slots[victim] = Some(MruLine { tag, bit: false });
    if variant != MruVariant::Nru {
        reset_check(state, victim);
    }
    AccessOutcome::Miss
}
