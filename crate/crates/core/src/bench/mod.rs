//! Microbenchmark run semantics over an abstract counter backend.
//!
//! A backend executes one generated-code invocation — `loop_count` iterations
//! of `local_unroll_count` copies of the benchmark — and returns the raw
//! counter delta per requested event. The runner pairs two invocations per
//! measurement (the configured unroll count against twice it, or against
//! zero), normalizes their difference, discards warm-up measurements, and
//! aggregates.

mod aggregate;
mod events;
mod runner;
mod synthetic;

use thiserror::Error;

pub use aggregate::{aggregate, Aggregate};
pub use events::{parse_event_config, Event, EventConfig, EventConfigError};
pub use runner::{run_benchmark, BenchConfig, BenchResult, UnrollMode};
pub use synthetic::SyntheticBackend;

/// One counter reading source. Implementations model the generated
/// benchmark code; `execute` returns, for each requested event, the raw
/// counter difference over one invocation with the given loop and local
/// unroll counts.
pub trait CounterBackend {
    /// Number of events measurable in one run; longer event lists are
    /// executed in chunks.
    fn counter_capacity(&self) -> usize;

    fn execute(
        &mut self,
        loop_count: u32,
        local_unroll_count: u32,
        events: &[Event],
    ) -> Result<Vec<f64>, BackendError>;
}

#[derive(Debug, Error, PartialEq)]
#[error("backend failure: {message}")]
pub struct BackendError {
    pub message: String,
}

impl BackendError {
    pub fn new(message: impl Into<String>) -> Self {
        BackendError {
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("n_measurements must be at least 1")]
    NoMeasurements,
    #[error("unroll_count must be at least 1")]
    ZeroUnroll,
    #[error("cannot aggregate an empty value list")]
    EmptyInput,
    #[error("backend failed on event chunk {chunk}: {source}")]
    Backend {
        chunk: usize,
        source: BackendError,
    },
}
