use thiserror::Error;

use super::{AccessSeq, MeasuredCounts, SeqToken};
use crate::geometry::{AccessOutcome, CacheGeometry};
use crate::policies::{PolicySpec, Tag};
use crate::simulator::{CacheSimulator, PolicyStateError, SimulatorError};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("loop_count must be at least 1 for evaluation")]
    ZeroLoopCount,
    #[error("no target sets given")]
    NoTargetSets,
    #[error("target set {0} out of range for {1} sets")]
    SetOutOfRange(usize, usize),
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
    #[error(transparent)]
    Policy(#[from] PolicyStateError),
}

enum CompiledOp {
    Access { tag: Tag, measured: bool },
    Flush(Tag),
    Wbinvd,
}

fn compile(tokens: &[SeqToken], sim: &mut CacheSimulator) -> Vec<CompiledOp> {
    tokens
        .iter()
        .map(|token| match token {
            SeqToken::Access { name, measured } => CompiledOp::Access {
                tag: sim.intern(name),
                measured: *measured,
            },
            SeqToken::Flush { name } => CompiledOp::Flush(sim.intern(name)),
            SeqToken::Wbinvd => CompiledOp::Wbinvd,
        })
        .collect()
}

fn validate(seq: &AccessSeq, sim: &CacheSimulator) -> Result<(), EvalError> {
    if seq.loop_count == 0 {
        return Err(EvalError::ZeroLoopCount);
    }
    if seq.target_sets.is_empty() {
        return Err(EvalError::NoTargetSets);
    }
    let num_sets = sim.geometry().num_sets;
    for &s in &seq.target_sets {
        if s >= num_sets {
            return Err(EvalError::SetOutOfRange(s, num_sets));
        }
    }
    Ok(())
}

fn run_ops(
    sim: &mut CacheSimulator,
    ops: &[CompiledOp],
    set: usize,
    counts: &mut MeasuredCounts,
    trace: Option<&mut Vec<AccessOutcome>>,
) -> Result<(), EvalError> {
    let mut trace = trace;
    for op in ops {
        match op {
            CompiledOp::Access { tag, measured } => {
                let outcome = sim.access_raw(set, *tag)?;
                if *measured {
                    counts.record(set, outcome.is_hit());
                }
                if let Some(trace) = trace.as_deref_mut() {
                    trace.push(outcome);
                }
            }
            CompiledOp::Flush(tag) => sim.flush_raw(set, *tag),
            CompiledOp::Wbinvd => sim.wbinvd(),
        }
    }
    Ok(())
}

/// Evaluate one sequence on an existing simulator, continuing its state.
///
/// The init sequence runs once and the main sequence `loop_count` times, in
/// every target set in ascending set order. Only measured accesses
/// contribute to the counts.
pub fn eval_on_simulator(sim: &mut CacheSimulator, seq: &AccessSeq) -> Result<MeasuredCounts, EvalError> {
    validate(seq, sim)?;
    let init = compile(&seq.init, sim);
    let main = compile(&seq.main, sim);
    let mut counts = MeasuredCounts::default();
    let mut sets = seq.target_sets.clone();
    sets.sort_unstable();
    sets.dedup();
    for &set in &sets {
        run_ops(sim, &init, set, &mut counts, None)?;
        for _ in 0..seq.loop_count {
            run_ops(sim, &main, set, &mut counts, None)?;
        }
    }
    Ok(counts)
}

/// Evaluate one sequence on a fresh simulator seeded with `seed`.
pub fn eval_sequence(
    seq: &AccessSeq,
    policy: &PolicySpec,
    geometry: &CacheGeometry,
    seed: u64,
) -> Result<MeasuredCounts, EvalError> {
    let mut sim = CacheSimulator::new(geometry.clone(), policy.clone(), seed)?;
    eval_on_simulator(&mut sim, seq)
}

/// Evaluate an ordered program of sequences on one fresh simulator, without
/// resets between parts, returning the counts of each part.
pub fn eval_program(
    parts: &[AccessSeq],
    policy: &PolicySpec,
    geometry: &CacheGeometry,
    seed: u64,
) -> Result<Vec<MeasuredCounts>, EvalError> {
    let mut sim = CacheSimulator::new(geometry.clone(), policy.clone(), seed)?;
    parts.iter().map(|part| eval_on_simulator(&mut sim, part)).collect()
}

/// Like [`eval_sequence`], but also returns the outcome of every executed
/// access (measured or not), in execution order.
pub fn eval_sequence_trace(
    seq: &AccessSeq,
    policy: &PolicySpec,
    geometry: &CacheGeometry,
    seed: u64,
) -> Result<(MeasuredCounts, Vec<AccessOutcome>), EvalError> {
    let mut sim = CacheSimulator::new(geometry.clone(), policy.clone(), seed)?;
    validate(seq, &sim)?;
    let init = compile(&seq.init, &mut sim);
    let main = compile(&seq.main, &mut sim);
    let mut counts = MeasuredCounts::default();
    let mut trace = Vec::new();
    let mut sets = seq.target_sets.clone();
    sets.sort_unstable();
    sets.dedup();
    for &set in &sets {
        run_ops(&mut sim, &init, set, &mut counts, Some(&mut trace))?;
        for _ in 0..seq.loop_count {
            run_ops(&mut sim, &main, set, &mut counts, Some(&mut trace))?;
        }
    }
    Ok((counts, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqlang::parse_sequence;

    fn lru4() -> (PolicySpec, CacheGeometry) {
        (PolicySpec::Lru, CacheGeometry::single_set(4))
    }

    fn eval_text(text: &str) -> MeasuredCounts {
        let (policy, geometry) = lru4();
        let seq = AccessSeq::new(parse_sequence(text).unwrap());
        eval_sequence(&seq, &policy, &geometry, 0).unwrap()
    }

    #[test]
    fn working_set_fits() {
        let counts = eval_text("<wbinvd> A B C D A?");
        assert_eq!((counts.hits, counts.misses), (1, 0));
    }

    #[test]
    fn eviction_counts_as_miss() {
        let counts = eval_text("<wbinvd> A B C D E A?");
        assert_eq!((counts.hits, counts.misses), (0, 1));
    }

    #[test]
    fn no_measured_tokens_no_counts() {
        let counts = eval_text("<wbinvd> A B C D E A");
        assert_eq!((counts.hits, counts.misses), (0, 0));
        assert!(counts.per_set.is_empty());
    }

    #[test]
    fn flush_token_evicts() {
        let counts = eval_text("<wbinvd> A B A! A?");
        assert_eq!((counts.hits, counts.misses), (0, 1));
    }

    #[test]
    fn counts_balance_measured_accesses() {
        let counts = eval_text("<wbinvd> A? B? A? C? <wbinvd> A?");
        assert_eq!(counts.total(), 5);
        assert_eq!((counts.hits, counts.misses), (1, 4));
    }

    #[test]
    fn loop_count_zero_is_rejected() {
        let (policy, geometry) = lru4();
        let seq = AccessSeq::new(parse_sequence("A?").unwrap()).with_loop_count(0);
        assert_eq!(eval_sequence(&seq, &policy, &geometry, 0), Err(EvalError::ZeroLoopCount));
    }

    #[test]
    fn target_set_bounds_are_checked() {
        let (policy, geometry) = lru4();
        let seq = AccessSeq::new(parse_sequence("A?").unwrap()).with_sets(vec![3]);
        assert_eq!(
            eval_sequence(&seq, &policy, &geometry, 0),
            Err(EvalError::SetOutOfRange(3, 1))
        );
    }

    #[test]
    fn init_runs_once_main_loops() {
        let (policy, geometry) = lru4();
        let seq = AccessSeq::new(parse_sequence("A?").unwrap())
            .with_init(parse_sequence("<wbinvd> A").unwrap())
            .with_loop_count(3);
        let counts = eval_sequence(&seq, &policy, &geometry, 0).unwrap();
        // A is loaded by init, so every looped access hits.
        assert_eq!((counts.hits, counts.misses), (3, 0));
    }

    #[test]
    fn same_name_is_a_distinct_block_per_set() {
        let policy = PolicySpec::Lru;
        let geometry = CacheGeometry::new(2, 2, 64, "two-sets").unwrap();
        let seq = AccessSeq::new(parse_sequence("A? A?").unwrap()).with_sets(vec![0, 1]);
        let counts = eval_sequence(&seq, &policy, &geometry, 0).unwrap();
        // First access misses in each set independently, second hits.
        assert_eq!(counts.per_set[&0], (1, 1));
        assert_eq!(counts.per_set[&1], (1, 1));
    }

    #[test]
    fn per_set_results_match_single_set_runs() {
        // Per-set independence, including for a probabilistic policy: the
        // multi-set evaluation must equal two single-set evaluations.
        let policy = crate::policies::parse_policy_name("QLRU_H11_MR16-1_R1_U2").unwrap();
        let geometry = CacheGeometry::new(8, 4, 64, "multi").unwrap();
        let tokens = parse_sequence("<wbinvd> A B C D E A? B? C? D? E?").unwrap();
        let multi = AccessSeq::new(tokens.clone()).with_sets(vec![2, 5]);
        let counts = eval_sequence(&multi, &policy, &geometry, 42).unwrap();
        for set in [2usize, 5] {
            let single = AccessSeq::new(tokens.clone()).with_sets(vec![set]);
            let c = eval_sequence(&single, &policy, &geometry, 42).unwrap();
            assert_eq!(c.per_set[&set], counts.per_set[&set]);
        }
    }

    #[test]
    fn loop_additivity_on_continuing_state() {
        let (policy, geometry) = lru4();
        let tokens = parse_sequence("A? B? E C?").unwrap();
        let looped = AccessSeq::new(tokens.clone()).with_loop_count(4);
        let counts = eval_sequence(&looped, &policy, &geometry, 0).unwrap();

        let mut sim = CacheSimulator::new(geometry.clone(), policy.clone(), 0).unwrap();
        let single = AccessSeq::new(tokens);
        let mut hits = 0;
        let mut misses = 0;
        for _ in 0..4 {
            let c = eval_on_simulator(&mut sim, &single).unwrap();
            hits += c.hits;
            misses += c.misses;
        }
        assert_eq!((counts.hits, counts.misses), (hits, misses));
    }

    #[test]
    fn measurement_markers_are_observation_only() {
        // Toggling `?` markers must not change any outcome.
        let policy = crate::policies::parse_policy_name("QLRU_H11_MR16-1_R1_U2").unwrap();
        let geometry = CacheGeometry::single_set(4);
        let text = "<wbinvd> A B C D E A B F G A";
        let unmeasured = AccessSeq::new(parse_sequence(text).unwrap());
        let measured = AccessSeq::new(
            parse_sequence(text)
                .unwrap()
                .into_iter()
                .map(|t| match t {
                    SeqToken::Access { name, .. } => SeqToken::measured(name),
                    other => other,
                })
                .collect(),
        );
        let (c0, t0) = eval_sequence_trace(&unmeasured, &policy, &geometry, 7).unwrap();
        let (c1, t1) = eval_sequence_trace(&measured, &policy, &geometry, 7).unwrap();
        assert_eq!(t0, t1);
        assert_eq!(c0.total(), 0);
        assert_eq!(c1.total(), t1.len() as u64);
    }
}
