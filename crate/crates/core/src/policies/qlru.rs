//! Quad-age LRU (QLRU / 2-bit RRIP) with its full parameter space: hit
//! promotion `Hxy`, insertion age `Mx` or probabilistic `MR<p>-<x>`,
//! replacement location `R0`/`R1`/`R2`, age update `U0`..`U3`, and the
//! update-on-miss-only (`UMO`) variant.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Tag;
use crate::geometry::AccessOutcome;
use crate::simulator::PolicyStateError;

pub const MAX_AGE: u8 = 3;

/// Age assigned to a block on a miss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InsertionAge {
    /// `Mx`: always insert with age `x`.
    Fixed(u8),
    /// `MR<p>-<x>`: insert with age `x` with probability `1/p`, age 3
    /// otherwise.
    Probabilistic { p: u32, x: u8 },
}

/// Where a block is inserted on a miss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QlruReplace {
    /// Leftmost empty location while filling; otherwise the leftmost line
    /// with age 3. Undefined (an error) if the set is full and no line has
    /// age 3.
    R0,
    /// Like `R0`, but with no age-3 line the leftmost line is replaced
    /// unconditionally.
    R1,
    /// Like `R0`, but fills the rightmost empty location.
    R2,
}

/// How ages are renormalized when no line has age 3 anymore.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QlruUpdate {
    /// `age'(b) = age(b) + (3 - M)` for every line (`M` = current max age).
    U0,
    /// Like `U0` but the accessed line keeps its age.
    U1,
    /// `age'(b) = age(b) + 1` for every line.
    U2,
    /// Like `U2` but the accessed line keeps its age.
    U3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QlruConfig {
    /// Hit promotion: age 3 maps to `hit_x`, age 2 to `hit_y`, 1 and 0 to 0.
    pub hit_x: u8,
    pub hit_y: u8,
    pub insertion: InsertionAge,
    pub replace: QlruReplace,
    pub update: QlruUpdate,
    /// Update on miss only: run the age update just before victim selection
    /// on a replacement miss, instead of after every access.
    pub umo: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QlruValidationError {
    #[error("{replace:?} cannot be combined with {update:?}: it requires an age-3 line on every replacement, which a one-step increment cannot guarantee")]
    ReplaceIncompatibleUpdate {
        replace: QlruReplace,
        update: QlruUpdate,
    },
    #[error("hit promotion x must be in 0..=2, got {0}")]
    HitX(u8),
    #[error("hit promotion y must be in 0..=1, got {0}")]
    HitY(u8),
    #[error("insertion age must be in 0..=3, got {0}")]
    InsertionAge(u8),
    #[error("insertion probability denominator must be positive")]
    ZeroProbability,
}

/// Reject parameter combinations the policy family does not define.
pub fn validate_qlru_config(cfg: &QlruConfig) -> Result<(), QlruValidationError> {
    if cfg.hit_x > 2 {
        return Err(QlruValidationError::HitX(cfg.hit_x));
    }
    if cfg.hit_y > 1 {
        return Err(QlruValidationError::HitY(cfg.hit_y));
    }
    match cfg.insertion {
        InsertionAge::Fixed(x) => {
            if x > MAX_AGE {
                return Err(QlruValidationError::InsertionAge(x));
            }
        }
        InsertionAge::Probabilistic { p, x } => {
            if x > MAX_AGE {
                return Err(QlruValidationError::InsertionAge(x));
            }
            if p == 0 {
                return Err(QlruValidationError::ZeroProbability);
            }
        }
    }
    // R0 and R2 pick their victim among age-3 lines only, so they need an
    // update that always restores one (U0/U1); R1 falls back to the
    // leftmost line and tolerates the incremental updates.
    if matches!(cfg.replace, QlruReplace::R0 | QlruReplace::R2)
        && matches!(cfg.update, QlruUpdate::U2 | QlruUpdate::U3)
    {
        return Err(QlruValidationError::ReplaceIncompatibleUpdate {
            replace: cfg.replace,
            update: cfg.update,
        });
    }
    Ok(())
}

/// New age of a line of age `a` on a hit.
pub fn qlru_hit_age(cfg: &QlruConfig, a: u8) -> u8 {
    match a {
        3 => cfg.hit_x,
        2 => cfg.hit_y,
        _ => 0,
    }
}

/// Age assigned on a miss; probabilistic insertions draw from `rng`.
pub fn qlru_insertion_age(cfg: &QlruConfig, rng: &mut ChaCha12Rng) -> u8 {
    match cfg.insertion {
        InsertionAge::Fixed(x) => x,
        InsertionAge::Probabilistic { p, x } => {
            if rng.gen_range(0..p) == 0 {
                x
            } else {
                MAX_AGE
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QlruLine {
    pub tag: Tag,
    pub age: u8,
}

/// Positional slots; "leftmost" is index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QlruState {
    pub slots: Vec<Option<QlruLine>>,
}

impl QlruState {
    pub fn new(assoc: usize) -> Self {
        QlruState {
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
            *slot = Some(QlruLine { tag, age: MAX_AGE });
        }
    }

    fn position_of(&self, tag: Tag) -> Option<usize> {
        self.slots
            .iter()
            .position(|slot| slot.map(|l| l.tag) == Some(tag))
    }

    fn has_age3(&self) -> bool {
        self.slots.iter().flatten().any(|l| l.age == MAX_AGE)
    }

    fn leftmost_age3(&self) -> Option<usize> {
        self.slots
            .iter()
            .position(|slot| slot.map(|l| l.age) == Some(MAX_AGE))
    }

    fn max_age(&self) -> Option<u8> {
        self.slots.iter().flatten().map(|l| l.age).max()
    }

    fn is_full(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }
}

/// Apply the age update once if no line has age 3 anymore. Empty locations
/// count as age 3 (they are taken before any replacement), so nothing
/// happens while the set is still filling.
///
/// The update is a single application, as the variants define it: `U0`
/// always restores an age-3 line (the maximum-age lines jump to 3), but
/// `U2`/`U3` add one, and `U1` exempts the accessed line, so a state
/// without any age-3 line can persist. That is exactly why `R0` cannot be
/// combined with `U2`/`U3` — and what makes e.g. `_R1_U2` variants
/// observably different from `_R0_U0` ones.
fn normalize(state: &mut QlruState, accessed: Option<usize>, update: QlruUpdate) {
    if !state.is_full() || state.has_age3() {
        return;
    }
    let exempt = match update {
        QlruUpdate::U1 | QlruUpdate::U3 => accessed,
        QlruUpdate::U0 | QlruUpdate::U2 => None,
    };
    let step = match update {
        QlruUpdate::U0 | QlruUpdate::U1 => match state.max_age() {
            Some(m) => MAX_AGE - m,
            None => return, // no occupied lines
        },
        QlruUpdate::U2 | QlruUpdate::U3 => 1,
    };
    for (idx, slot) in state.slots.iter_mut().enumerate() {
        if Some(idx) == exempt {
            continue;
        }
        if let Some(line) = slot {
            line.age = (line.age + step).min(MAX_AGE);
        }
    }
}

/// One QLRU access: hit promotion or miss insertion, plus the age update at
/// the point the variant prescribes.
pub fn qlru_access(
    state: &mut QlruState,
    tag: Tag,
    cfg: &QlruConfig,
    rng: &mut ChaCha12Rng,
) -> Result<AccessOutcome, PolicyStateError> {
    if let Some(idx) = state.position_of(tag) {
        let line = state.slots[idx].as_mut().expect("occupied");
        line.age = qlru_hit_age(cfg, line.age);
        if !cfg.umo {
            normalize(state, Some(idx), cfg.update);
        }
        return Ok(AccessOutcome::Hit);
    }

    // Fill an empty location first: leftmost for R0/R1, rightmost for R2.
    // The U1/U3 exemption covers hit promotions; a block that just received
    // its insertion age takes part in the update like any other (otherwise
    // a single low-age insertion could leave R0 without a victim forever).
    let empty = match cfg.replace {
        QlruReplace::R0 | QlruReplace::R1 => state.slots.iter().position(Option::is_none),
        QlruReplace::R2 => state.slots.iter().rposition(Option::is_none),
    };
    if let Some(idx) = empty {
        let age = qlru_insertion_age(cfg, rng);
        state.slots[idx] = Some(QlruLine { tag, age });
        if !cfg.umo {
            normalize(state, None, cfg.update);
        }
        return Ok(AccessOutcome::Miss);
    }

    // Full set: UMO variants run the update now, before victim selection.
    if cfg.umo {
        normalize(state, None, cfg.update);
    }
    let victim = match state.leftmost_age3() {
        Some(idx) => idx,
        None => match cfg.replace {
            QlruReplace::R1 => 0,
            QlruReplace::R0 | QlruReplace::R2 => {
                return Err(PolicyStateError::new(
                    "QLRU R0/R2 replacement with a full set and no age-3 line is undefined",
                ))
            }
        },
    };
    let age = qlru_insertion_age(cfg, rng);
    state.slots[victim] = Some(QlruLine { tag, age });
    if !cfg.umo {
        normalize(state, None, cfg.update);
    }
    Ok(AccessOutcome::Miss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn cfg(hit_x: u8, hit_y: u8, m: u8, replace: QlruReplace, update: QlruUpdate, umo: bool) -> QlruConfig {
        QlruConfig {
            hit_x,
            hit_y,
            insertion: InsertionAge::Fixed(m),
            replace,
            update,
            umo,
        }
    }

    fn rng() -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(0)
    }

    fn ages(state: &QlruState) -> Vec<Option<(u64, u8)>> {
        state
            .slots
            .iter()
            .map(|s| s.map(|l| (l.tag.0, l.age)))
            .collect()
    }

    #[test]
    fn hit_age_follows_hxy() {
        let c = cfg(0, 0, 1, QlruReplace::R0, QlruUpdate::U0, false);
        assert_eq!(qlru_hit_age(&c, 3), 0);
        let c = cfg(2, 1, 1, QlruReplace::R1, QlruUpdate::U0, false);
        assert_eq!(qlru_hit_age(&c, 2), 1);
        assert_eq!(qlru_hit_age(&c, 3), 2);
        // "0 otherwise", for every promotion function.
        assert_eq!(qlru_hit_age(&c, 1), 0);
        assert_eq!(qlru_hit_age(&c, 0), 0);
    }

    #[test]
    fn fixed_insertion_age() {
        let mut r = rng();
        let c = cfg(0, 0, 1, QlruReplace::R0, QlruUpdate::U0, false);
        assert_eq!(qlru_insertion_age(&c, &mut r), 1);
        let c3 = cfg(0, 0, 3, QlruReplace::R0, QlruUpdate::U0, false);
        assert_eq!(qlru_insertion_age(&c3, &mut r), 3);
    }

    #[test]
    fn probabilistic_insertion_frequency() {
        // MR16-1: the empirical frequency of age 1 over 1e5 draws must be
        // within 0.005 of 1/16.
        let c = QlruConfig {
            hit_x: 1,
            hit_y: 1,
            insertion: InsertionAge::Probabilistic { p: 16, x: 1 },
            replace: QlruReplace::R1,
            update: QlruUpdate::U2,
            umo: false,
        };
        let mut r = rng();
        let n = 100_000;
        let hits = (0..n).filter(|_| qlru_insertion_age(&c, &mut r) == 1).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 1.0 / 16.0).abs() < 0.005, "freq={freq}");
    }

    #[test]
    fn validation_rejects_r0_with_u2_u3() {
        let c = cfg(0, 0, 1, QlruReplace::R0, QlruUpdate::U2, false);
        assert_eq!(
            validate_qlru_config(&c),
            Err(QlruValidationError::R0IncompatibleUpdate(QlruUpdate::U2))
        );
        let c = cfg(0, 0, 1, QlruReplace::R0, QlruUpdate::U3, true);
        assert!(validate_qlru_config(&c).is_err());
        assert!(validate_qlru_config(&cfg(0, 0, 1, QlruReplace::R1, QlruUpdate::U2, false)).is_ok());
        assert!(validate_qlru_config(&cfg(1, 1, 1, QlruReplace::R0, QlruUpdate::U0, false)).is_ok());
    }

    #[test]
    fn r0_fill_goes_left_to_right_with_u1_normalization() {
        // QLRU_H00_M1_R0_U1, A=4, after wbinvd: misses on A B C D fill
        // left-to-right with age 1 (empty locations count as age 3, so no
        // update fires while filling); the final fill makes the set full and
        // the U1 update runs once. Insertions are not exempt, so every line
        // jumps to 3. The exemption shows on hits: touching a line and
        // re-triggering the update leaves the touched line behind.
        let c = cfg(0, 0, 1, QlruReplace::R0, QlruUpdate::U1, false);
        let mut s = QlruState::new(4);
        let mut r = rng();
        for t in 0..3 {
            assert_eq!(qlru_access(&mut s, Tag(t), &c, &mut r).unwrap(), AccessOutcome::Miss);
            assert_eq!(ages(&s)[t as usize], Some((t, 1)));
        }
        qlru_access(&mut s, Tag(3), &c, &mut r).unwrap();
        assert_eq!(
            ages(&s),
            vec![Some((0, 3)), Some((1, 3)), Some((2, 3)), Some((3, 3))]
        );
        // Hit every line: H00 drops each to 0; the last hit leaves no age-3
        // line and U1 raises all except the just-hit line.
        for t in 0..3 {
            qlru_access(&mut s, Tag(t), &c, &mut r).unwrap();
        }
        assert_eq!(
            ages(&s),
            vec![Some((0, 0)), Some((1, 0)), Some((2, 0)), Some((3, 3))]
        );
        qlru_access(&mut s, Tag(3), &c, &mut r).unwrap();
        assert_eq!(
            ages(&s),
            vec![Some((0, 3)), Some((1, 3)), Some((2, 3)), Some((3, 0))]
        );
    }

    #[test]
    fn r2_fills_rightmost_empty() {
        let c = cfg(0, 0, 1, QlruReplace::R2, QlruUpdate::U0, false);
        let mut s = QlruState::new(4);
        let mut r = rng();
        qlru_access(&mut s, Tag(0), &c, &mut r).unwrap();
        assert_eq!(ages(&s)[3], Some((0, 1)));
        qlru_access(&mut s, Tag(1), &c, &mut r).unwrap();
        assert_eq!(ages(&s)[2], Some((1, 1)));
        // Filling the set triggers the first U0 update: every line reaches 3.
        qlru_access(&mut s, Tag(2), &c, &mut r).unwrap();
        qlru_access(&mut s, Tag(3), &c, &mut r).unwrap();
        assert_eq!(
            ages(&s),
            vec![Some((3, 3)), Some((2, 3)), Some((1, 3)), Some((0, 3))]
        );
    }

    #[test]
    fn hit_on_age3_line_with_h00_resets_age() {
        let c = cfg(0, 0, 1, QlruReplace::R1, QlruUpdate::U0, false);
        let mut s = QlruState::new(2);
        s.slots[0] = Some(QlruLine { tag: Tag(0), age: 3 });
        s.slots[1] = Some(QlruLine { tag: Tag(1), age: 3 });
        let mut r = rng();
        assert_eq!(qlru_access(&mut s, Tag(0), &c, &mut r).unwrap(), AccessOutcome::Hit);
        assert_eq!(ages(&s)[0], Some((0, 0)));
    }

    #[test]
    fn r0_undefined_state_is_an_error() {
        // Hand-built full set with no age-3 line: R0 replacement has no
        // defined victim.
        let c = cfg(0, 0, 1, QlruReplace::R0, QlruUpdate::U0, true);
        let mut s = QlruState::new(2);
        s.slots[0] = Some(QlruLine { tag: Tag(0), age: 1 });
        s.slots[1] = Some(QlruLine { tag: Tag(1), age: 2 });
        let mut r = rng();
        // UMO normalization runs first and repairs the state, so use the
        // non-UMO path where the previous access is assumed to have
        // normalized already; corrupt state reaches the victim scan.
        let c_non_umo = cfg(0, 0, 1, QlruReplace::R0, QlruUpdate::U0, false);
        let err = qlru_access(&mut s, Tag(9), &c_non_umo, &mut r);
        assert!(err.is_err());
        let _ = c;
    }

    #[test]
    fn r1_falls_back_to_leftmost() {
        // Hand-built full set with no age-3 line: R1 replaces the leftmost
        // line unconditionally.
        let c = cfg(0, 0, 1, QlruReplace::R1, QlruUpdate::U0, false);
        let mut s = QlruState::new(2);
        s.slots[0] = Some(QlruLine { tag: Tag(0), age: 1 });
        s.slots[1] = Some(QlruLine { tag: Tag(1), age: 2 });
        let mut r = rng();
        assert_eq!(qlru_access(&mut s, Tag(9), &c, &mut r).unwrap(), AccessOutcome::Miss);
        assert!(s.contains(Tag(9)));
        assert!(!s.contains(Tag(0)));
        assert!(s.contains(Tag(1)));
    }

    #[test]
    fn umo_normalization_repairs_before_victim_selection() {
        let c = cfg(0, 0, 1, QlruReplace::R0, QlruUpdate::U0, true);
        let mut s = QlruState::new(2);
        s.slots[0] = Some(QlruLine { tag: Tag(0), age: 1 });
        s.slots[1] = Some(QlruLine { tag: Tag(1), age: 2 });
        let mut r = rng();
        // U0 lifts the max-age line to 3 before the victim scan, so R0 finds
        // a victim (tag 1) instead of hitting the undefined case.
        assert_eq!(qlru_access(&mut s, Tag(9), &c, &mut r).unwrap(), AccessOutcome::Miss);
        assert!(s.contains(Tag(9)));
        assert!(s.contains(Tag(0)));
        assert!(!s.contains(Tag(1)));
    }

    #[test]
    fn u0_restores_an_age3_line_after_every_access() {
        // U0 jumps the maximum-age lines to 3, so full R0/U0 sets always
        // have a victim and the undefined R0 state is unreachable.
        use rand::Rng;
        let mut r = rng();
        let mut trace_rng = ChaCha12Rng::seed_from_u64(42);
        for (hit_x, hit_y) in [(0, 0), (1, 1), (2, 1)] {
            for m in 0..=3 {
                let c = cfg(hit_x, hit_y, m, QlruReplace::R0, QlruUpdate::U0, false);
                let mut s = QlruState::new(4);
                for _ in 0..2000 {
                    let t = trace_rng.gen_range(0..8u64);
                    qlru_access(&mut s, Tag(t), &c, &mut r).unwrap();
                    if s.is_full() {
                        assert!(s.has_age3(), "no age-3 line after access under {c:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn single_step_updates_keep_u2_distinct_from_u0() {
        // H11/M1: promotions and insertions leave ages at 1, so a U2 update
        // raises them one step while U0 jumps them to 3. The policies are
        // observably different, as the published per-generation results
        // require.
        use rand::Rng;
        let u0 = cfg(1, 1, 1, QlruReplace::R1, QlruUpdate::U0, false);
        let u2 = cfg(1, 1, 1, QlruReplace::R1, QlruUpdate::U2, false);
        let mut trace_rng = ChaCha12Rng::seed_from_u64(9);
        let mut diverged = false;
        for _ in 0..200 {
            let trace: Vec<u64> = (0..60).map(|_| trace_rng.gen_range(0..8u64)).collect();
            let run = |c: &QlruConfig| -> Vec<AccessOutcome> {
                let mut s = QlruState::new(4);
                let mut r = rng();
                trace.iter().map(|&t| qlru_access(&mut s, Tag(t), c, &mut r).unwrap()).collect()
            };
            if run(&u0) != run(&u2) {
                diverged = true;
                break;
            }
        }
        assert!(diverged, "U0 and U2 must be distinguishable");
    }
}
