//! Dueling-set detection: classify every cache set as running a fixed
//! policy or following the duel.
//!
//! The scan first searches, in simulation, for a probe sequence whose hit
//! count separates the two candidate policies. Each set is then probed under
//! three conditions: the reset state, after a preconditioning workload that
//! drives heavy misses into the suspected policy-A leader sets (pushing the
//! selector toward policy B), and after the mirror-image workload into the
//! suspected policy-B leaders. Sets that answer like the same policy under
//! both drives are fixed; sets that flip with the drive are followers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::{gen_random_sequence, mix_seed, InferenceError, SeqOracle};
use crate::geometry::CacheGeometry;
use crate::policies::{format_policy_name, PolicySpec};
use crate::seqlang::{eval_sequence, AccessSeq, SeqToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetClass {
    FixedPolicyA,
    FixedPolicyB,
    Follower,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SetClassification {
    pub class: SetClass,
    /// Mean probe hits after driving the selector low (followers on A).
    pub low_mean: f64,
    /// Mean probe hits after driving the selector high (followers on B).
    pub high_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DuelScanResult {
    pub per_set: BTreeMap<usize, SetClassification>,
    /// The distinguishing probe, as sequence text.
    pub probe: String,
    pub expected_hits_a: f64,
    pub expected_hits_b: f64,
}

impl DuelScanResult {
    pub fn sets_with(&self, class: SetClass) -> Vec<usize> {
        self.per_set
            .iter()
            .filter(|(_, c)| c.class == class)
            .map(|(&s, _)| s)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("set,class,low_mean,high_mean\n");
        for (set, c) in &self.per_set {
            let _ = writeln!(out, "{set},{:?},{},{}", c.class, c.low_mean, c.high_mean);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct DuelScanConfig {
    pub seed: u64,
    /// Random probe candidates examined during the search.
    pub probe_candidates: usize,
    pub probe_len: usize,
    /// Simulation trials per candidate and policy during the search.
    pub probe_trials: u32,
    /// Oracle trials per set and drive during classification.
    pub classify_trials: u32,
    /// Minimum hit-count gap a usable probe must show between the policies.
    pub min_gap: f64,
    /// Fresh blocks per suspected leader set in the preconditioning
    /// workload. Defaults to four times the associativity.
    pub thrash_blocks: Option<usize>,
}

impl Default for DuelScanConfig {
    fn default() -> Self {
        DuelScanConfig {
            seed: 0,
            probe_candidates: 48,
            probe_len: 50,
            probe_trials: 32,
            classify_trials: 4,
            min_gap: 3.0,
            thrash_blocks: None,
        }
    }
}

fn mean_hits_in_simulation(
    tokens: &[SeqToken],
    policy: &PolicySpec,
    assoc: usize,
    trials: u32,
    seed: u64,
) -> Result<f64, InferenceError> {
    let geometry = CacheGeometry::single_set(assoc);
    let trials = if policy.is_deterministic() { 1 } else { trials.max(1) };
    let mut sum = 0u64;
    for t in 0..trials {
        let seq = AccessSeq::new(tokens.to_vec());
        sum += eval_sequence(&seq, policy, &geometry, mix_seed(seed, t.into()))
            .map_err(super::OracleError::Eval)?
            .hits;
    }
    Ok(sum as f64 / f64::from(trials))
}

/// Search for a probe whose hit counts separate the two policies, trying a
/// few structured working-set scans and then random sequences.
fn find_distinguishing_probe(
    policy_a: &PolicySpec,
    policy_b: &PolicySpec,
    assoc: usize,
    cfg: &DuelScanConfig,
) -> Result<(Vec<SeqToken>, f64, f64), InferenceError> {
    // Working-set scans first (fill A blocks, stream a scan, re-probe the
    // working set): these separate insertion-age and thrash-resistance
    // differences well. Random sequences cover the rest.
    let mut candidates: Vec<Vec<SeqToken>> = Vec::new();
    for scan_len in [assoc / 2, assoc, 2 * assoc, 4 * assoc, 8 * assoc] {
        let mut tokens = vec![SeqToken::Wbinvd];
        for i in 0..assoc {
            tokens.push(SeqToken::access(format!("W{i}")));
        }
        for i in 0..scan_len {
            tokens.push(SeqToken::access(format!("S{i}")));
        }
        for i in 0..assoc {
            tokens.push(SeqToken::measured(format!("W{i}")));
        }
        candidates.push(tokens);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.probe_candidates {
        candidates.push(gen_random_sequence(cfg.probe_len, 0.5, &mut rng));
    }

    // Exact counts need no statistical margin, so a deterministic pair gets
    // a lower gap floor.
    let min_gap = if policy_a.is_deterministic() && policy_b.is_deterministic() {
        cfg.min_gap.min(1.0)
    } else {
        cfg.min_gap
    };

    let mut best: Option<(Vec<SeqToken>, f64, f64)> = None;
    let mut best_gap = 0.0f64;
    for (idx, tokens) in candidates.into_iter().enumerate() {
        let seed = mix_seed(cfg.seed, idx as u64);
        let a = mean_hits_in_simulation(&tokens, policy_a, assoc, cfg.probe_trials, seed)?;
        let b = mean_hits_in_simulation(&tokens, policy_b, assoc, cfg.probe_trials, seed ^ 1)?;
        let gap = (a - b).abs();
        if gap > best_gap {
            best_gap = gap;
            best = Some((tokens, a, b));
        }
    }
    match best {
        Some(found) if best_gap >= min_gap => Ok(found),
        _ => Err(InferenceError::ProbeUndistinguishing {
            policy_a: format_policy_name(policy_a),
            policy_b: format_policy_name(policy_b),
            best_gap,
        }),
    }
}

/// Mean probe hits in `set`, optionally after a preconditioning part that
/// thrashes `precondition_sets`. Each trial is an independent program from
/// the oracle's reset state.
fn probe_set(
    oracle: &dyn SeqOracle,
    probe: &[SeqToken],
    set: usize,
    precondition_sets: &[usize],
    thrash_blocks: usize,
    trials: u32,
    seed: u64,
) -> Result<f64, InferenceError> {
    let mut program = Vec::with_capacity(2);
    if !precondition_sets.is_empty() {
        let tokens: Vec<SeqToken> = (0..thrash_blocks)
            .map(|i| SeqToken::access(format!("T{i}")))
            .collect();
        program.push(AccessSeq::new(tokens).with_sets(precondition_sets.to_vec()));
    }
    program.push(AccessSeq::new(probe.to_vec()).with_sets(vec![set]));
    let mut sum = 0u64;
    for t in 0..trials.max(1) {
        let counts = oracle.evaluate_program(&program, mix_seed(seed, t.into()))?;
        sum += counts.last().expect("probe part").hits;
    }
    Ok(sum as f64 / f64::from(trials.max(1)))
}

fn label(mean: f64, expected_a: f64, expected_b: f64) -> Option<bool> {
    let gap = (expected_a - expected_b).abs();
    let dist_a = (mean - expected_a).abs();
    let dist_b = (mean - expected_b).abs();
    if dist_a.min(dist_b) > 0.45 * gap {
        return None;
    }
    Some(dist_a <= dist_b) // true = looks like policy A
}

/// Classify every probed set as fixed-A, fixed-B, follower, or unknown.
pub fn detect_dueling(
    oracle: &dyn SeqOracle,
    policy_a: &PolicySpec,
    policy_b: &PolicySpec,
    sets: &[usize],
    cfg: &DuelScanConfig,
) -> Result<DuelScanResult, InferenceError> {
    let assoc = oracle.associativity();
    let thrash_blocks = cfg.thrash_blocks.unwrap_or(4 * assoc);
    let (probe, expected_a, expected_b) = find_distinguishing_probe(policy_a, policy_b, assoc, cfg)?;

    // Initial scan from the reset state builds the leader suspicions.
    let mut suspected_a = Vec::new();
    let mut suspected_b = Vec::new();
    for (idx, &set) in sets.iter().enumerate() {
        let mean = probe_set(oracle, &probe, set, &[], 0, cfg.classify_trials, mix_seed(cfg.seed, idx as u64))?;
        match label(mean, expected_a, expected_b) {
            Some(true) => suspected_a.push(set),
            Some(false) => suspected_b.push(set),
            None => {}
        }
    }

    // Drive the duel both ways and re-probe every set.
    const HIGH_SALT: u64 = 0x4869_6768_5363_616E;
    const LOW_SALT: u64 = 0x4C6F_7753_6361_6E5F;
    let mut per_set = BTreeMap::new();
    for (idx, &set) in sets.iter().enumerate() {
        let high_mean = probe_set(
            oracle,
            &probe,
            set,
            &suspected_a,
            thrash_blocks,
            cfg.classify_trials,
            mix_seed(cfg.seed ^ HIGH_SALT, idx as u64),
        )?;
        let low_mean = probe_set(
            oracle,
            &probe,
            set,
            &suspected_b,
            thrash_blocks,
            cfg.classify_trials,
            mix_seed(cfg.seed ^ LOW_SALT, idx as u64),
        )?;
        let class = match (
            label(low_mean, expected_a, expected_b),
            label(high_mean, expected_a, expected_b),
        ) {
            (Some(true), Some(true)) => SetClass::FixedPolicyA,
            (Some(false), Some(false)) => SetClass::FixedPolicyB,
            (Some(true), Some(false)) => SetClass::Follower,
            _ => SetClass::Unknown,
        };
        per_set.insert(
            set,
            SetClassification {
                class,
                low_mean,
                high_mean,
            },
        );
    }

    Ok(DuelScanResult {
        per_set,
        probe: crate::seqlang::format_sequence(&probe),
        expected_hits_a: expected_a,
        expected_hits_b: expected_b,
    })
}
