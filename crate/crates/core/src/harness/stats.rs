use serde::{Deserialize, Serialize};

use crate::netgrowth::Z95;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    /// Sample standard deviation (0 for a single value).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// 95% normal-approximation halfwidth of the mean.
    pub ci95: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub stats: SummaryStats,
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Statistics of values tagged with their replicate index. Values are
/// sorted by index first, so completion order never matters.
pub fn aggregate(values: &[(usize, f64)]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::Empty("aggregate needs at least one value"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by_key(|&(i, _)| i);
    let n = sorted.len();
    let mean = neumaier_sum(sorted.iter().map(|&(_, v)| v)) / n as f64;
    let std = if n > 1 {
        (neumaier_sum(sorted.iter().map(|&(_, v)| (v - mean) * (v - mean))) / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let min = sorted.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let max = sorted.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    Ok(SummaryStats { mean, std, min, max, ci95: Z95 * std / (n as f64).sqrt(), n })
}

/// One-sample Kolmogorov-Smirnov statistic against uniform(0, 1).
pub fn ks_uniform_statistic(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of statistic `d` for sample size `n`, using the
/// Kolmogorov series with Stephens' small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
