//! Permutation-policy inference by eviction-order probing.
//!
//! The canonical order of a full set is recovered by measuring eviction
//! times: re-establish the state, let `k` fresh blocks stream in, and probe
//! one resident block per experiment. The block that survives longest sits
//! at position 0, the first evicted at the victim end. Doing this once for
//! the established base state and once after triggering each event (a hit at
//! every position, and one miss) yields the full permutation table.

use std::collections::HashMap;

use super::{InferenceError, SeqOracle};
use crate::policies::permutation::{permutation_access, PermutationSetState};
use crate::policies::{PermutationVectors, Tag};
use crate::seqlang::{AccessSeq, SeqToken};


#[derive(Debug, Clone)]
pub struct InferPermConfig {
    pub seed: u64,
    /// Maximum number of fresh blocks per eviction probe; blocks still
    /// resident after this many are treated as never evicted. Defaults to
    /// four times the associativity.
    pub probe_depth: Option<usize>,
    /// Random sequences replayed against the recovered vectors.
    pub validation_seqs: usize,
    pub set_index: Option<usize>,
}

impl Default for InferPermConfig {
    fn default() -> Self {
        InferPermConfig {
            seed: 0,
            probe_depth: None,
            validation_seqs: 200,
            set_index: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PermutationInference {
    Vectors(PermutationVectors),
    /// The oracle answered consistently but its behavior does not fit any
    /// permutation policy.
    NotPermutation { reason: String },
}

struct Prober<'a> {
    oracle: &'a dyn SeqOracle,
    assoc: usize,
    set: usize,
    depth: usize,
    base_names: Vec<String>,
    trial: std::cell::Cell<u64>,
}

impl<'a> Prober<'a> {
    /// One experiment: establish, trigger, stream `k` fresh blocks, probe a
    /// single element. Returns whether the element still hit.
    fn survives(&self, trigger: Option<&str>, element: &str, k: usize) -> Result<bool, InferenceError> {
        let mut tokens = Vec::with_capacity(self.assoc + k + 3);
        tokens.push(SeqToken::Wbinvd);
        for name in &self.base_names {
            tokens.push(SeqToken::access(name.clone()));
        }
        if let Some(t) = trigger {
            tokens.push(SeqToken::access(t));
        }
        for i in 0..k {
            tokens.push(SeqToken::access(format!("F{i}")));
        }
        tokens.push(SeqToken::measured(element));
        let seq = AccessSeq::new(tokens).with_sets(vec![self.set]);
        let trial = self.trial.get();
        self.trial.set(trial + 1);
        let counts = self.oracle.evaluate(&seq, trial)?;
        Ok(counts.hits == 1)
    }

    /// Eviction time of `element` after `trigger`: the smallest k for which
    /// it no longer hits. Checks that survival is monotone in k and repeats
    /// the sweep to catch nondeterministic oracles.
    fn death_time(&self, trigger: Option<&str>, element: &str) -> Result<Result<Option<usize>, String>, InferenceError> {
        let mut death: Option<usize> = None;
        for k in 0..=self.depth {
            let alive = self.survives(trigger, element, k)?;
            let again = self.survives(trigger, element, k)?;
            if alive != again {
                return Err(InferenceError::InconsistentOracle {
                    detail: format!("probe of {element} with {k} fresh blocks flipped between repetitions"),
                });
            }
            match (death, alive) {
                (None, false) => death = Some(k),
                (Some(_), true) => {
                    return Ok(Err(format!("{element} reappeared after being evicted")));
                }
                _ => {}
            }
        }
        Ok(Ok(death))
    }

    /// Recover the total order after `trigger`: element names from position 0
    /// (evicted last) to the victim end (evicted first).
    fn recover_order(&self, trigger: Option<&str>, elements: &[String]) -> Result<Result<Vec<String>, String>, InferenceError> {
        let mut deaths: Vec<(usize, &String)> = Vec::with_capacity(elements.len());
        for element in elements {
            match self.death_time(trigger, element)? {
                Ok(Some(k)) => deaths.push((k, element)),
                Ok(None) => {
                    return Ok(Err(format!("{element} still resident after {} fresh blocks", self.depth)));
                }
                Err(reason) => return Ok(Err(reason)),
            }
        }
        deaths.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        for pair in deaths.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Ok(Err(format!(
                    "{} and {} evicted by the same fresh block",
                    pair[0].1, pair[1].1
                )));
            }
        }
        Ok(Ok(deaths.into_iter().map(|(_, name)| name.clone()).collect()))
    }
}

/// Infer the permutation vectors of the oracle's policy, or report that its
/// behavior is not a permutation policy.
pub fn infer_permutation_policy(
    oracle: &dyn SeqOracle,
    cfg: &InferPermConfig,
) -> Result<PermutationInference, InferenceError> {
    let assoc = oracle.associativity();
    let set = cfg.set_index.unwrap_or_else(|| *oracle.probe_sets().first().unwrap_or(&0));
    let prober = Prober {
        oracle,
        assoc,
        set,
        depth: cfg.probe_depth.unwrap_or(4 * assoc),
        base_names: (0..assoc).map(|i| format!("L{i}")).collect(),
        trial: std::cell::Cell::new(cfg.seed),
    };

    macro_rules! try_order {
        ($expr:expr) => {
            match $expr? {
                Ok(v) => v,
                Err(reason) => return Ok(PermutationInference::NotPermutation { reason }),
            }
        };
    }

    // Canonical order of the established base state.
    let base = try_order!(prober.recover_order(None, &prober.base_names));
    let base_pos: HashMap<&str, usize> = base.iter().enumerate().map(|(p, n)| (n.as_str(), p)).collect();

    // One hit event per position.
    let mut hit_vectors = Vec::with_capacity(assoc);
    for trigger in &base {
        let order = try_order!(prober.recover_order(Some(trigger), &prober.base_names));
        let vector: Vec<u8> = order.iter().map(|name| base_pos[name.as_str()] as u8).collect();
        hit_vectors.push(vector);
    }

    // The miss event: a fresh block replaces the victim.
    let miss_name = "M0".to_owned();
    let mut elements = prober.base_names.clone();
    elements.push(miss_name.clone());
    let mut survivors = Vec::with_capacity(assoc);
    let mut evicted = None;
    for element in &elements {
        if prober.survives(Some(&miss_name), element, 0)? {
            survivors.push(element.clone());
        } else if element == &miss_name {
            return Ok(PermutationInference::NotPermutation {
                reason: "freshly inserted block missed immediately".to_owned(),
            });
        } else {
            evicted = Some(element.clone());
        }
    }
    match &evicted {
        Some(victim) if *victim == base[assoc - 1] => {}
        Some(victim) => {
            return Ok(PermutationInference::NotPermutation {
                reason: format!("miss evicted {victim}, not the order minimum {}", base[assoc - 1]),
            });
        }
        None => {
            return Ok(PermutationInference::NotPermutation {
                reason: "miss on a full set evicted nothing".to_owned(),
            });
        }
    }
    let order = try_order!(prober.recover_order(Some(&miss_name), &survivors));
    let miss_vector: Vec<u8> = order
        .iter()
        .map(|name| {
            if name == &miss_name {
                (assoc - 1) as u8
            } else {
                base_pos[name.as_str()] as u8
            }
        })
        .collect();

    let vectors = PermutationVectors::new(hit_vectors, miss_vector);
    if vectors.validate(assoc).is_err() {
        return Ok(PermutationInference::NotPermutation {
            reason: "recovered orders do not form permutations".to_owned(),
        });
    }

    // Replay validation: starting from the recovered base-order
    // correspondence, the vectors must reproduce the oracle's hits on
    // random full-set traffic. The vectors describe the policy's full-set
    // dynamics; the oracle's own establishment behavior (which blocks land
    // where during the fill) is captured by the recovered base order, not
    // by the vectors.
    if !replay_matches(oracle, set, &base, &vectors, cfg)? {
        return Ok(PermutationInference::NotPermutation {
            reason: "replay validation failed: recovered vectors do not reproduce the oracle".to_owned(),
        });
    }
    Ok(PermutationInference::Vectors(vectors))
}

/// Compare oracle and induced-vector behavior on `cfg.validation_seqs`
/// random full-set suffixes after the canonical establishment.
fn replay_matches(
    oracle: &dyn SeqOracle,
    set: usize,
    base: &[String],
    vectors: &PermutationVectors,
    cfg: &InferPermConfig,
) -> Result<bool, InferenceError> {
    use rand::Rng;

    let assoc = base.len();
    let mut pool: Vec<String> = base.to_vec();
    pool.extend((0..assoc + 4).map(|i| format!("M{}", i + 1)));
    let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(cfg.seed ^ 0xA5A5_5A5A);

    for _ in 0..cfg.validation_seqs {
        let suffix: Vec<usize> = (0..4 * assoc).map(|_| rng.gen_range(0..pool.len())).collect();

        // Oracle side: establish, then run the suffix measured.
        let mut tokens = Vec::with_capacity(assoc + suffix.len() + 1);
        tokens.push(SeqToken::Wbinvd);
        for i in 0..assoc {
            tokens.push(SeqToken::access(format!("L{i}")));
        }
        for &p in &suffix {
            tokens.push(SeqToken::measured(pool[p].clone()));
        }
        let oracle_hits = oracle
            .evaluate(&AccessSeq::new(tokens).with_sets(vec![set]), 0)?
            .hits;

        // Induced side: seed the order with the recovered base state (pool
        // index as tag) and replay the suffix on the vectors directly.
        let base_tags: Vec<Tag> = base
            .iter()
            .map(|name| Tag(pool.iter().position(|p| p == name).expect("base name in pool") as u64))
            .collect();
        let mut state = PermutationSetState::with_order(assoc, &base_tags);
        let mut induced_hits = 0u64;
        for &p in &suffix {
            if permutation_access(&mut state, Tag(p as u64), vectors) == crate::geometry::AccessOutcome::Hit {
                induced_hits += 1;
            }
        }
        if oracle_hits != induced_hits {
            return Ok(false);
        }
    }
    Ok(true)
}
