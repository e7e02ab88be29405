use serde::{Deserialize, Serialize};

use super::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregate {
    Min,
    Median,
    /// Arithmetic mean after dropping the top and bottom 20% of the values
    /// (floor(0.2 n) from each end; nothing is dropped below n = 5).
    TrimmedMean20,
}

pub fn aggregate(values: &[f64], agg: Aggregate) -> Result<f64, BenchError> {
    if values.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite measurement values"));
    Ok(match agg {
        Aggregate::Min => sorted[0],
        Aggregate::Median => {
            let n = sorted.len();
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
            }
        }
        Aggregate::TrimmedMean20 => {
            let n = sorted.len();
            let drop = n / 5;
            let kept = &sorted[drop..n - drop];
            kept.iter().sum::<f64>() / kept.len() as f64
        }
    })
}
