//! Replacement-policy identification: run random access sequences on the
//! oracle and compare its measured hit counts against simulations of every
//! candidate policy. A sequence whose counts disagree is a counterexample
//! against that candidate; candidates without counterexamples survive.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::{gen_random_sequence, mix_seed, OracleError, SeqOracle};
use crate::policies::{access_set, format_policy_name, PolicySpec, SetState, Tag};
use crate::seqlang::{format_sequence, AccessSeq, SeqToken};

#[derive(Debug, Clone)]
pub struct IdentifyConfig {
    /// Number of random sequences to evaluate.
    pub n_seq: usize,
    /// Accesses per sequence.
    pub len: usize,
    /// Probability of a fresh block at each position.
    pub p_fresh: f64,
    /// Trials used to estimate mean hit counts when either side is
    /// probabilistic.
    pub trials_per_seq: u32,
    /// Mean-hit tolerance for probabilistic comparisons; deterministic
    /// against deterministic is compared exactly.
    pub tolerance: f64,
    pub seed: u64,
    /// Stop simulating a candidate after this many counterexamples
    /// (`None` counts them all).
    pub max_counterexamples: Option<u32>,
}

impl Default for IdentifyConfig {
    fn default() -> Self {
        IdentifyConfig {
            n_seq: 250,
            len: 50,
            p_fresh: 0.5,
            trials_per_seq: 64,
            tolerance: 0.5,
            seed: 0,
            max_counterexamples: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub sequence: String,
    /// Hits the candidate's simulation produced.
    pub expected: f64,
    /// Hits the oracle reported.
    pub observed: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    pub name: String,
    pub counterexample_count: u32,
    pub first_counterexample: Option<Counterexample>,
    /// True when counting stopped at the configured cap.
    pub truncated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentificationReport {
    pub candidates: Vec<CandidateReport>,
    pub sequences_evaluated: usize,
}

impl IdentificationReport {
    /// Candidates whose simulation matched the oracle on every sequence.
    pub fn survivors(&self) -> Vec<&CandidateReport> {
        self.candidates.iter().filter(|c| c.counterexample_count == 0).collect()
    }
}

/// Access-id form of a generated sequence: a fresh single set plus one
/// interned access per position.
fn compile_tokens(tokens: &[SeqToken]) -> Vec<Tag> {
    let mut ids: HashMap<&str, u64> = HashMap::new();
    let mut compiled = Vec::with_capacity(tokens.len());
    for token in tokens {
        match token {
            SeqToken::Access { name, .. } => {
                let next = ids.len() as u64;
                compiled.push(Tag(*ids.entry(name.as_str()).or_insert(next)));
            }
            SeqToken::Wbinvd => {} // generated sequences start invalidated
            SeqToken::Flush { .. } => unreachable!("generated sequences have no flushes"),
        }
    }
    compiled
}

/// Hits of one candidate simulation over a compiled sequence, or `None`
/// when the candidate reaches an undefined state (e.g. an R0 replacement
/// with no age-3 line). An undefined candidate cannot reproduce any
/// observation, so callers score that as a mismatch.
fn run_candidate(policy: &PolicySpec, assoc: usize, trace: &[Tag], seed: u64) -> Option<u64> {
    let mut state = SetState::fresh(policy, assoc);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut hits = 0;
    for &tag in trace {
        match access_set(&mut state, policy, tag, &mut rng) {
            Ok(outcome) => hits += u64::from(outcome.is_hit()),
            Err(_) => return None,
        }
    }
    Some(hits)
}

fn mean_candidate_hits(policy: &PolicySpec, assoc: usize, trace: &[Tag], trials: u32, seed: u64) -> Option<f64> {
    let trials = trials.max(1);
    let mut sum = 0u64;
    for t in 0..trials {
        sum += run_candidate(policy, assoc, trace, mix_seed(seed, t.into()))?;
    }
    Some(sum as f64 / f64::from(trials))
}

fn mean_oracle_hits(oracle: &dyn SeqOracle, seq: &AccessSeq, trials: u32) -> Result<f64, OracleError> {
    let trials = if oracle.is_deterministic() { 1 } else { trials.max(1) };
    let mut sum = 0u64;
    for t in 0..trials {
        sum += oracle.evaluate(seq, t.into())?.hits;
    }
    Ok(sum as f64 / f64::from(trials))
}

/// Identify the oracle's policy among `candidates`.
pub fn identify_policy(
    oracle: &dyn SeqOracle,
    candidates: &[PolicySpec],
    cfg: &IdentifyConfig,
) -> Result<IdentificationReport, OracleError> {
    let assoc = oracle.associativity();
    let probe_set = *oracle.probe_sets().first().unwrap_or(&0);

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let sequences: Vec<Vec<SeqToken>> = (0..cfg.n_seq)
        .map(|_| gen_random_sequence(cfg.len, cfg.p_fresh, &mut rng))
        .collect();
    let compiled: Vec<Vec<Tag>> = sequences.iter().map(|t| compile_tokens(t)).collect();

    // Oracle counts, one pass.
    let mut oracle_hits = Vec::with_capacity(sequences.len());
    for tokens in &sequences {
        let seq = AccessSeq::new(tokens.clone()).with_sets(vec![probe_set]);
        oracle_hits.push(mean_oracle_hits(oracle, &seq, cfg.trials_per_seq)?);
    }

    let oracle_det = oracle.is_deterministic();
    let mut reports = Vec::with_capacity(candidates.len());
    for (cand_idx, policy) in candidates.iter().enumerate() {
        let cand_det = policy.is_deterministic();
        let mut count = 0u32;
        let mut first = None;
        let mut truncated = false;
        for (seq_idx, (trace, &observed)) in compiled.iter().zip(&oracle_hits).enumerate() {
            if let Some(cap) = cfg.max_counterexamples {
                if count >= cap {
                    truncated = true;
                    break;
                }
            }
            let trials = if cand_det { 1 } else { cfg.trials_per_seq };
            let expected = mean_candidate_hits(policy, assoc, trace, trials, mix_seed(cfg.seed, cand_idx as u64));
            let mismatch = match expected {
                Some(expected) if cand_det && oracle_det => expected != observed,
                Some(expected) => (expected - observed).abs() > cfg.tolerance,
                None => true, // undefined state: cannot match the oracle
            };
            if mismatch {
                count += 1;
                if first.is_none() {
                    first = Some(Counterexample {
                        sequence: format_sequence(&sequences[seq_idx]),
                        expected: expected.unwrap_or(f64::NAN),
                        observed,
                    });
                }
            }
        }
        reports.push(CandidateReport {
            name: format_policy_name(policy),
            counterexample_count: count,
            first_counterexample: first,
            truncated,
        });
    }
    Ok(IdentificationReport {
        candidates: reports,
        sequences_evaluated: sequences.len(),
    })
}

/// Group policies into observational-equivalence classes by their hit-count
/// signatures over an independent battery of random sequences. Probabilistic
/// policies are grouped only by configuration equality.
pub fn equivalence_classes(
    policies: &[PolicySpec],
    assoc: usize,
    seed: u64,
    n_probe: usize,
    len: usize,
) -> Vec<Vec<usize>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let battery: Vec<Vec<Tag>> = (0..n_probe)
        .map(|_| compile_tokens(&gen_random_sequence(len, 0.5, &mut rng)))
        .collect();

    let mut signatures: Vec<Option<Vec<u64>>> = Vec::with_capacity(policies.len());
    for policy in policies {
        if policy.is_deterministic() {
            // Undefined states count as a distinct signature value.
            let sig = battery
                .iter()
                .map(|trace| run_candidate(policy, assoc, trace, 0).unwrap_or(u64::MAX))
                .collect();
            signatures.push(Some(sig));
        } else {
            signatures.push(None);
        }
    }

    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (idx, policy) in policies.iter().enumerate() {
        let mut placed = false;
        for class in &mut classes {
            let rep = class[0];
            let same = match (&signatures[idx], &signatures[rep]) {
                (Some(a), Some(b)) => a == b,
                (None, None) => policies[rep] == *policy,
                _ => false,
            };
            if same {
                class.push(idx);
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(vec![idx]);
        }
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::SimOracle;
    use crate::policies::parse_policy_name;

    #[test]
    fn self_test_has_zero_counterexamples() {
        let oracle = SimOracle::single_set(PolicySpec::Plru, 8, 3);
        let cfg = IdentifyConfig {
            n_seq: 40,
            ..IdentifyConfig::default()
        };
        let report = identify_policy(&oracle, &[PolicySpec::Plru], &cfg).unwrap();
        assert_eq!(report.candidates[0].counterexample_count, 0);
    }

    #[test]
    fn distinguishes_lru_from_fifo_and_plru() {
        let oracle = SimOracle::single_set(PolicySpec::Lru, 8, 3);
        let cfg = IdentifyConfig {
            n_seq: 60,
            ..IdentifyConfig::default()
        };
        let report =
            identify_policy(&oracle, &[PolicySpec::Lru, PolicySpec::Fifo, PolicySpec::Plru], &cfg).unwrap();
        assert_eq!(report.candidates[0].counterexample_count, 0);
        assert!(report.candidates[1].counterexample_count >= 2, "FIFO must fail");
        assert!(report.candidates[2].counterexample_count >= 2, "PLRU must fail");
        assert_eq!(report.survivors().len(), 1);
    }

    #[test]
    fn r0_u0_and_r1_u0_are_observationally_equivalent() {
        let a = parse_policy_name("QLRU_H11_M1_R0_U0").unwrap();
        let b = parse_policy_name("QLRU_H11_M1_R1_U0").unwrap();
        let oracle = SimOracle::single_set(a, 8, 3);
        let cfg = IdentifyConfig {
            n_seq: 100,
            ..IdentifyConfig::default()
        };
        let report = identify_policy(&oracle, &[b], &cfg).unwrap();
        assert_eq!(report.candidates[0].counterexample_count, 0);
    }

    #[test]
    fn counterexample_records_first_mismatching_sequence() {
        let oracle = SimOracle::single_set(PolicySpec::Lru, 4, 3);
        let cfg = IdentifyConfig {
            n_seq: 30,
            ..IdentifyConfig::default()
        };
        let report = identify_policy(&oracle, &[PolicySpec::Fifo], &cfg).unwrap();
        let first = report.candidates[0].first_counterexample.as_ref().unwrap();
        assert!(first.sequence.starts_with("<wbinvd>"));
        assert_ne!(first.expected, first.observed);
    }

    #[test]
    fn classes_separate_inequivalent_policies() {
        let a = parse_policy_name("QLRU_H11_M1_R0_U0").unwrap();
        let b = parse_policy_name("QLRU_H11_M1_R1_U0").unwrap();
        let classes = equivalence_classes(
            &[PolicySpec::Lru, PolicySpec::Fifo, a, b],
            8,
            7,
            40,
            50,
        );
        assert_eq!(classes.len(), 3);
        // The two QLRU variants share a class.
        assert!(classes.iter().any(|c| c.len() == 2 && c.contains(&2) && c.contains(&3)));
    }
}
