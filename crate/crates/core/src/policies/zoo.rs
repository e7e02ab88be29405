//! The candidate zoo used by policy identification: the classic policies
//! plus every meaningful deterministic QLRU variant.

use super::qlru::{validate_qlru_config, InsertionAge, QlruConfig, QlruReplace, QlruUpdate};
use super::PolicySpec;

/// All deterministic policies applicable at this associativity, in a stable
/// order. QLRU variants are enumerated over the full parameter space with
/// the invalid `R0`+`U2`/`U3` combinations removed (480 configurations).
pub fn policy_zoo(associativity: usize) -> Vec<PolicySpec> {
    let mut zoo = vec![PolicySpec::Lru, PolicySpec::Fifo];
    if associativity.is_power_of_two() {
        zoo.push(PolicySpec::Plru);
    }
    zoo.push(PolicySpec::Mru);
    zoo.push(PolicySpec::MruStar);
    zoo.push(PolicySpec::Nru);
    if associativity == 12 {
        zoo.push(PolicySpec::Lru3Plru4);
    }
    for hit_x in 0..=2 {
        for hit_y in 0..=1 {
            for m in 0..=3 {
                for replace in [QlruReplace::R0, QlruReplace::R1, QlruReplace::R2] {
                    for update in [QlruUpdate::U0, QlruUpdate::U1, QlruUpdate::U2, QlruUpdate::U3] {
                        for umo in [false, true] {
                            let cfg = QlruConfig {
                                hit_x,
                                hit_y,
                                insertion: InsertionAge::Fixed(m),
                                replace,
                                update,
                                umo,
                            };
                            if validate_qlru_config(&cfg).is_ok() {
                                zoo.push(PolicySpec::Qlru(cfg));
                            }
                        }
                    }
                }
            }
        }
    }
    zoo
}
