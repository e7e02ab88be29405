use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{aggregate, Aggregate, BenchError, CounterBackend, EventConfig};

/// Which pair of invocations a measurement compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnrollMode {
    /// Baseline at `unroll_count`, measured run at `2 * unroll_count`.
    TwoUnroll,
    /// Baseline at local unroll 0 (nothing between the counter reads),
    /// measured run at `unroll_count`.
    ZeroUnroll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub warm_up_count: u32,
    pub n_measurements: u32,
    pub loop_count: u32,
    pub unroll_count: u32,
    pub agg: Aggregate,
    pub mode: UnrollMode,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            warm_up_count: 0,
            n_measurements: 10,
            loop_count: 0,
            unroll_count: 100,
            agg: Aggregate::Min,
            mode: UnrollMode::TwoUnroll,
        }
    }
}

/// Aggregated, normalized per-event results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub values: BTreeMap<String, f64>,
}

impl BenchResult {
    /// Render as `Name: value` lines with two decimals.
    pub fn render(&self, order: &EventConfig) -> String {
        let mut out = String::new();
        for event in &order.events {
            if let Some(v) = self.values.get(&event.name) {
                out.push_str(&format!("{}: {:.2}\n", event.name, v));
            }
        }
        out
    }
}

/// Run one benchmark: for every chunk of events that fits the backend's
/// counters and every measurement index in `[-warm_up, n_measurements)`,
/// execute the two unroll variants, record the normalized difference
/// `(m2 - m1) / (max(1, loop_count) * unroll_count)` per event, drop the
/// warm-up measurements, and aggregate the rest.
pub fn run_benchmark(
    backend: &mut dyn CounterBackend,
    bench_cfg: &BenchConfig,
    event_cfg: &EventConfig,
) -> Result<BenchResult, BenchError> {
    if bench_cfg.n_measurements == 0 {
        return Err(BenchError::NoMeasurements);
    }
    if bench_cfg.unroll_count == 0 {
        return Err(BenchError::ZeroUnroll);
    }
    let (u1, u2) = match bench_cfg.mode {
        UnrollMode::TwoUnroll => (bench_cfg.unroll_count, 2 * bench_cfg.unroll_count),
        UnrollMode::ZeroUnroll => (0, bench_cfg.unroll_count),
    };
    let denom = u64::from(bench_cfg.loop_count.max(1)) as f64 * f64::from(bench_cfg.unroll_count);
    let capacity = backend.counter_capacity().max(1);

    let mut values = BTreeMap::new();
    for (chunk_idx, chunk) in event_cfg.events.chunks(capacity).enumerate() {
        let mut measurements: Vec<Vec<f64>> = vec![Vec::new(); chunk.len()];
        for i in -i64::from(bench_cfg.warm_up_count)..i64::from(bench_cfg.n_measurements) {
            let m1 = backend
                .execute(bench_cfg.loop_count, u1, chunk)
                .map_err(|source| BenchError::Backend {
                    chunk: chunk_idx,
                    source,
                })?;
            let m2 = backend
                .execute(bench_cfg.loop_count, u2, chunk)
                .map_err(|source| BenchError::Backend {
                    chunk: chunk_idx,
                    source,
                })?;
            if i >= 0 {
                for (event_idx, (a, b)) in m1.iter().zip(&m2).enumerate() {
                    measurements[event_idx].push((b - a) / denom);
                }
            }
        }
        for (event, series) in chunk.iter().zip(&measurements) {
            values.insert(event.name.clone(), aggregate(series, bench_cfg.agg)?);
        }
    }
    Ok(BenchResult { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{parse_event_config, BackendError, Event};

    /// Linear backend: m(u) = base + cost * u * max(1, loop), per event.
    struct Linear {
        base: f64,
        cost: f64,
        capacity: usize,
        calls: u32,
    }

    impl CounterBackend for Linear {
        fn counter_capacity(&self) -> usize {
            self.capacity
        }

        fn execute(&mut self, loop_count: u32, u: u32, events: &[Event]) -> Result<Vec<f64>, BackendError> {
            self.calls += 1;
            let reps = f64::from(loop_count.max(1)) * f64::from(u);
            Ok(events.iter().map(|_| self.base + self.cost * reps).collect())
        }
    }

    fn one_event() -> EventConfig {
        parse_event_config("cost").unwrap()
    }

    #[test]
    fn two_unroll_cancels_overhead() {
        // m(u) = 100 + 4u, unroll 100, loop 0: (900 - 500) / 100 = 4.
        let mut backend = Linear {
            base: 100.0,
            cost: 4.0,
            capacity: 4,
            calls: 0,
        };
        let cfg = BenchConfig {
            unroll_count: 100,
            loop_count: 0,
            n_measurements: 3,
            ..BenchConfig::default()
        };
        let result = run_benchmark(&mut backend, &cfg, &one_event()).unwrap();
        assert_eq!(result.values["cost"], 4.0);
    }

    #[test]
    fn zero_unroll_subtracts_the_empty_run() {
        // Same backend: (500 - 100) / 100 = 4.
        let mut backend = Linear {
            base: 100.0,
            cost: 4.0,
            capacity: 4,
            calls: 0,
        };
        let cfg = BenchConfig {
            unroll_count: 100,
            loop_count: 0,
            n_measurements: 3,
            mode: UnrollMode::ZeroUnroll,
            ..BenchConfig::default()
        };
        let result = run_benchmark(&mut backend, &cfg, &one_event()).unwrap();
        assert_eq!(result.values["cost"], 4.0);
    }

    /// Backend that returns garbage during the first `poisoned` invocations.
    struct WarmupSensitive {
        inner: Linear,
        poisoned: u32,
    }

    impl CounterBackend for WarmupSensitive {
        fn counter_capacity(&self) -> usize {
            self.inner.capacity
        }

        fn execute(&mut self, loop_count: u32, u: u32, events: &[Event]) -> Result<Vec<f64>, BackendError> {
            let clean = self.inner.execute(loop_count, u, events)?;
            if self.inner.calls <= self.poisoned {
                return Ok(clean.iter().map(|v| v + 1e9).collect());
            }
            Ok(clean)
        }
    }

    #[test]
    fn warm_up_runs_are_excluded() {
        // Two warm-up measurements = four backend invocations; poison exactly
        // those and check the result is unaffected.
        let mut backend = WarmupSensitive {
            inner: Linear {
                base: 7.0,
                cost: 2.0,
                capacity: 2,
                calls: 0,
            },
            poisoned: 4,
        };
        let cfg = BenchConfig {
            warm_up_count: 2,
            n_measurements: 5,
            unroll_count: 8,
            agg: Aggregate::TrimmedMean20,
            ..BenchConfig::default()
        };
        let result = run_benchmark(&mut backend, &cfg, &one_event()).unwrap();
        assert_eq!(result.values["cost"], 2.0);
    }

    #[test]
    fn chunking_is_transparent_for_independent_events() {
        let events = parse_event_config("E0\nE1\nE2\nE3\nE4").unwrap();
        let cfg = BenchConfig {
            n_measurements: 4,
            unroll_count: 16,
            ..BenchConfig::default()
        };
        let mut results = Vec::new();
        for capacity in [1usize, 2, 4, 8] {
            let mut backend = Linear {
                base: 3.0,
                cost: 1.5,
                capacity,
                calls: 0,
            };
            results.push(run_benchmark(&mut backend, &cfg, &events).unwrap());
        }
        for r in &results[1..] {
            assert_eq!(r, &results[0]);
        }
    }

    #[test]
    fn empty_event_config_yields_empty_result() {
        let mut backend = Linear {
            base: 0.0,
            cost: 1.0,
            capacity: 4,
            calls: 0,
        };
        let result = run_benchmark(&mut backend, &BenchConfig::default(), &EventConfig::default()).unwrap();
        assert!(result.values.is_empty());
    }

    #[test]
    fn rendering_uses_two_decimals_in_config_order() {
        let events = parse_event_config("B\nA").unwrap();
        let mut backend = Linear {
            base: 0.0,
            cost: 4.0,
            capacity: 4,
            calls: 0,
        };
        let result = run_benchmark(&mut backend, &BenchConfig::default(), &events).unwrap();
        assert_eq!(result.render(&events), "B: 4.00\nA: 4.00\n");
    }
}
