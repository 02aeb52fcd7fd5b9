//! Summary statistics and exact binomial confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Observations including censored ones.
    pub count: usize,
    pub censored: usize,
    pub censoring_rate: f64,
    /// The remaining fields describe uncensored observations only.
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
}

impl Summary {
    /// Summarizes `values`, where `None` marks a censored observation.
    pub fn from_observations<I>(values: I) -> Self
    where
        I: IntoIterator<Item = Option<f64>>,
    {
        let mut count = 0;
        let mut xs = Vec::new();
        for v in values {
            count += 1;
            if let Some(x) = v {
                xs.push(x);
            }
        }
        let censored = count - xs.len();
        let k = xs.len();
        let mean = if k > 0 { xs.iter().sum::<f64>() / k as f64 } else { f64::NAN };
        let stderr = if k > 1 {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            f64::NAN
        };
        xs.sort_by(f64::total_cmp);
        Self {
            count,
            censored,
            censoring_rate: if count > 0 { censored as f64 / count as f64 } else { 0.0 },
            mean,
            stderr,
            min: xs.first().copied().unwrap_or(f64::NAN),
            max: xs.last().copied().unwrap_or(f64::NAN),
            q05: quantile(&xs, 0.05),
            q25: quantile(&xs, 0.25),
            median: quantile(&xs, 0.5),
            q75: quantile(&xs, 0.75),
            q95: quantile(&xs, 0.95),
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            sorted[lo] + (sorted[hi] - sorted[lo]) * frac
        }
    }
}

/// Two-sided Clopper-Pearson interval for a binomial proportion.
pub fn clopper_pearson(hits: u64, trials: u64, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - confidence;
    let (k, n) = (hits as f64, trials as f64);
    let lower = if hits == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0)
            .map(|b| b.inverse_cdf(alpha / 2.0))
            .unwrap_or(0.0)
    };
    let upper = if hits == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .map(|b| b.inverse_cdf(1.0 - alpha / 2.0))
            .unwrap_or(1.0)
    };
    (lower, upper)
}
