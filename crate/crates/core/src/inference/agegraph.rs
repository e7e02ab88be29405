//! Age graphs: for every block of a sequence, the probability that it still
//! hits after the sequence plus `n` fresh accesses, as a function of `n`.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::{mix_seed, OracleError, SeqOracle};
use crate::seqlang::{AccessSeq, SeqToken};

#[derive(Debug, Clone, PartialEq)]
pub struct AgeGraph {
    /// Distinct block names of the sequence, in first-appearance order.
    pub blocks: Vec<String>,
    pub n_max: usize,
    pub trials: u32,
    /// `rows[n][b]` = fraction of trials in which block `b` hit after `n`
    /// fresh accesses.
    pub rows: Vec<Vec<f64>>,
}

impl AgeGraph {
    pub fn curve(&self, block: usize) -> Vec<f64> {
        self.rows.iter().map(|row| row[block]).collect()
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b == name)
    }

    /// CSV with a header row (`n` plus one column per block) and one row per
    /// fresh-block count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for block in &self.blocks {
            let _ = write!(out, ",{block}");
        }
        out.push('\n');
        for (n, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{n}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn distinct_access_names(tokens: &[SeqToken]) -> Vec<String> {
    let mut names = Vec::new();
    for token in tokens {
        if let SeqToken::Access { name, .. } = token {
            if !names.contains(name) {
                names.push(name.clone());
            }
        }
    }
    names
}

/// A fresh-name prefix colliding with nothing in `used`.
fn fresh_prefix(used: &[String]) -> String {
    let used: HashSet<&str> = used.iter().map(String::as_str).collect();
    let mut prefix = String::from("f_");
    while used.iter().any(|name| name.starts_with(&prefix)) {
        prefix.push('_');
    }
    prefix
}

/// Build the age graph of `sequence` on the oracle.
///
/// Cell (B, n) runs: the sequence (unmeasured), `n` fresh unmeasured
/// accesses, then one measured access to B; repeated `trials` times with
/// independent randomness.
pub fn age_graph(
    oracle: &dyn SeqOracle,
    sequence: &[SeqToken],
    n_max: usize,
    trials: u32,
    seed: u64,
) -> Result<AgeGraph, OracleError> {
    assert!(trials >= 1);
    let blocks = distinct_access_names(sequence);
    let prefix = fresh_prefix(&blocks);
    let set = *oracle.probe_sets().first().unwrap_or(&0);
    let base: Vec<SeqToken> = sequence
        .iter()
        .map(|t| match t {
            SeqToken::Access { name, .. } => SeqToken::access(name.clone()),
            other => other.clone(),
        })
        .collect();
    let trials_used = if oracle.is_deterministic() { 1 } else { trials };

    let mut rows = vec![vec![0.0f64; blocks.len()]; n_max + 1];
    for (b, block) in blocks.iter().enumerate() {
        for (n, row) in rows.iter_mut().enumerate() {
            let mut tokens = base.clone();
            for i in 0..n {
                tokens.push(SeqToken::access(format!("{prefix}{i}")));
            }
            tokens.push(SeqToken::measured(block.clone()));
            let seq = AccessSeq::new(tokens).with_sets(vec![set]);
            let mut hits = 0u64;
            for t in 0..trials_used {
                let trial = mix_seed(seed, (b as u64) << 40 | (n as u64) << 20 | u64::from(t));
                hits += oracle.evaluate(&seq, trial)?.hits;
            }
            row[b] = hits as f64 / f64::from(trials_used);
        }
    }
    Ok(AgeGraph {
        blocks,
        n_max,
        trials: trials_used,
        rows,
    })
}

/// Horizontal offset between two survival curves: the shift `s` minimizing
/// the mean squared difference between `a(n)` and `b(n + s)`.
pub fn curve_offset(a: &[f64], b: &[f64], max_shift: usize) -> usize {
    let mut best = (f64::INFINITY, 0usize);
    for s in 0..=max_shift.min(b.len().saturating_sub(1)) {
        let overlap = a.len().min(b.len() - s);
        if overlap == 0 {
            break;
        }
        let score: f64 = (0..overlap).map(|n| (a[n] - b[n + s]).powi(2)).sum::<f64>() / overlap as f64;
        if score < best.0 {
            best = (score, s);
        }
    }
    best.1
}
