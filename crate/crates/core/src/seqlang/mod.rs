//! The access-sequence language.
//!
//! A sequence is whitespace-separated block names. A trailing `?` marks the
//! access as measured, a trailing `!` turns it into a flush, and the literal
//! `<wbinvd>` invalidates the whole cache. Sequences run in every target set
//! independently: the same name denotes a different block in each set.

mod eval;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::{eval_on_simulator, eval_program, eval_sequence, eval_sequence_trace, EvalError};
pub use parse::{parse_sequence, SeqParseError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeqToken {
    Access { name: String, measured: bool },
    Flush { name: String },
    Wbinvd,
}

impl SeqToken {
    pub fn access(name: impl Into<String>) -> Self {
        SeqToken::Access {
            name: name.into(),
            measured: false,
        }
    }

    pub fn measured(name: impl Into<String>) -> Self {
        SeqToken::Access {
            name: name.into(),
            measured: true,
        }
    }

    pub fn flush(name: impl Into<String>) -> Self {
        SeqToken::Flush { name: name.into() }
    }
}

impl fmt::Display for SeqToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqToken::Access { name, measured: false } => write!(f, "{name}"),
            SeqToken::Access { name, measured: true } => write!(f, "{name}?"),
            SeqToken::Flush { name } => write!(f, "{name}!"),
            SeqToken::Wbinvd => write!(f, "<wbinvd>"),
        }
    }
}

/// Render a token list back to sequence text.
pub fn format_sequence(tokens: &[SeqToken]) -> String {
    tokens
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// A runnable access-sequence program: an optional init sequence executed
/// once, a main sequence executed `loop_count` times, over a set of target
/// sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessSeq {
    pub init: Vec<SeqToken>,
    pub main: Vec<SeqToken>,
    pub loop_count: u32,
    pub target_sets: Vec<usize>,
}

impl AccessSeq {
    /// Main sequence only, single iteration, targeting set 0.
    pub fn new(main: Vec<SeqToken>) -> Self {
        AccessSeq {
            init: Vec::new(),
            main,
            loop_count: 1,
            target_sets: vec![0],
        }
    }

    pub fn with_sets(mut self, sets: Vec<usize>) -> Self {
        self.target_sets = sets;
        self
    }

    pub fn with_init(mut self, init: Vec<SeqToken>) -> Self {
        self.init = init;
        self
    }

    pub fn with_loop_count(mut self, loop_count: u32) -> Self {
        self.loop_count = loop_count;
        self
    }
}

/// Hit/miss counts over the measured accesses only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasuredCounts {
    pub hits: u64,
    pub misses: u64,
    /// Per-set (hits, misses) breakdown.
    pub per_set: BTreeMap<usize, (u64, u64)>,
}

impl MeasuredCounts {
    pub fn total(&self) -> u64 {
        self.hits + self.misses
    }

    fn record(&mut self, set: usize, hit: bool) {
        let entry = self.per_set.entry(set).or_insert((0, 0));
        if hit {
            self.hits += 1;
            entry.0 += 1;
        } else {
            self.misses += 1;
            entry.1 += 1;
        }
    }
}

/// Generator of block names guaranteed fresh within one evaluator instance.
#[derive(Debug, Default)]
pub struct NameGen {
    counter: u64,
}

impl NameGen {
    pub fn new() -> Self {
        NameGen::default()
    }

    pub fn fresh(&mut self, prefix: &str, count: usize) -> Vec<String> {
        (0..count)
            .map(|_| {
                let name = format!("{prefix}{}", self.counter);
                self.counter += 1;
                name
            })
            .collect()
    }
}
