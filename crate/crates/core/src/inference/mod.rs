//! Characterization procedures over an abstract hit/miss oracle.
//!
//! Every procedure here talks to a [`SeqOracle`]: something that can run an
//! access-sequence program and report measured hit/miss counts. The bundled
//! [`SimOracle`] answers from the simulator; a hardware-backed oracle can be
//! substituted without touching the procedures.

mod agegraph;
mod dueling;
mod identify;
mod permutation;
mod randseq;

use thiserror::Error;

pub use agegraph::{age_graph, curve_offset, AgeGraph};
pub use dueling::{detect_dueling, DuelScanConfig, DuelScanResult, SetClass, SetClassification};
pub use identify::{
    equivalence_classes, identify_policy, CandidateReport, Counterexample, IdentificationReport, IdentifyConfig,
};
pub use permutation::{infer_permutation_policy, InferPermConfig, PermutationInference};
pub use randseq::gen_random_sequence;

use crate::geometry::CacheGeometry;
use crate::policies::PolicySpec;
use crate::seqlang::{eval_program, AccessSeq, EvalError, MeasuredCounts};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("oracle backend failure: {0}")]
    Backend(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum InferenceError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("oracle answered inconsistently across repeated probes: {detail}")]
    InconsistentOracle { detail: String },
    #[error("no probe found that separates {policy_a} from {policy_b} (best gap {best_gap:.2} hits)")]
    ProbeUndistinguishing {
        policy_a: String,
        policy_b: String,
        best_gap: f64,
    },
}

/// A system that can evaluate access-sequence programs and report measured
/// counts.
///
/// Queries are stateless: each program runs from the system's reset state,
/// and `trial` selects an independent randomness stream so that repeated
/// trials of probabilistic systems are meaningful. Deterministic systems
/// return identical counts for every trial.
pub trait SeqOracle {
    fn associativity(&self) -> usize;

    /// Sets this oracle can probe.
    fn probe_sets(&self) -> Vec<usize>;

    /// Whether repeated evaluation is guaranteed to reproduce counts.
    fn is_deterministic(&self) -> bool;

    /// Run the parts of `program` in order on one fresh instance, without
    /// resets in between, and return the measured counts of each part.
    fn evaluate_program(&self, program: &[AccessSeq], trial: u64) -> Result<Vec<MeasuredCounts>, OracleError>;

    fn evaluate(&self, seq: &AccessSeq, trial: u64) -> Result<MeasuredCounts, OracleError> {
        let mut results = self.evaluate_program(std::slice::from_ref(seq), trial)?;
        Ok(results.pop().expect("one result per program part"))
    }
}

/// Simulator-backed oracle.
pub struct SimOracle {
    policy: PolicySpec,
    geometry: CacheGeometry,
    base_seed: u64,
}

impl SimOracle {
    pub fn new(policy: PolicySpec, geometry: CacheGeometry, base_seed: u64) -> Self {
        SimOracle {
            policy,
            geometry,
            base_seed,
        }
    }

    /// Single-set oracle, the common shape for per-set experiments.
    pub fn single_set(policy: PolicySpec, associativity: usize, base_seed: u64) -> Self {
        SimOracle::new(policy, CacheGeometry::single_set(associativity), base_seed)
    }

    pub fn policy(&self) -> &PolicySpec {
        &self.policy
    }
}

impl SeqOracle for SimOracle {
    fn associativity(&self) -> usize {
        self.geometry.associativity
    }

    fn probe_sets(&self) -> Vec<usize> {
        (0..self.geometry.num_sets).collect()
    }

    fn is_deterministic(&self) -> bool {
        self.policy.is_deterministic()
    }

    fn evaluate_program(&self, program: &[AccessSeq], trial: u64) -> Result<Vec<MeasuredCounts>, OracleError> {
        let seed = mix_seed(self.base_seed, trial);
        Ok(eval_program(program, &self.policy, &self.geometry, seed)?)
    }
}

/// SplitMix64-style mixing of a base seed with a trial index.
pub(crate) fn mix_seed(base: u64, trial: u64) -> u64 {
    let mut z = base ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqlang::parse_sequence;

    #[test]
    fn deterministic_oracle_reproduces_counts_across_trials() {
        let oracle = SimOracle::single_set(PolicySpec::Lru, 4, 1);
        let seq = AccessSeq::new(parse_sequence("<wbinvd> A B C D E A? B?").unwrap());
        let a = oracle.evaluate(&seq, 0).unwrap();
        let b = oracle.evaluate(&seq, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.hits, a.misses), (0, 2));
    }

    #[test]
    fn program_parts_share_state() {
        let oracle = SimOracle::single_set(PolicySpec::Lru, 4, 1);
        let fill = AccessSeq::new(parse_sequence("A B").unwrap());
        let probe = AccessSeq::new(parse_sequence("A? B?").unwrap());
        let counts = oracle.evaluate_program(&[fill, probe], 0).unwrap();
        assert_eq!(counts[1].hits, 2);
    }
}
