//! Sample autocorrelation of a bitstream.

use serde::{Deserialize, Serialize};

use super::{StatsError, TestReport};
use crate::bits::BitStream;

/// Largest |ACF| tolerated at any lag.
pub const ACF_LIMIT: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfSeries {
    pub lags: Vec<usize>,
    pub coefficients: Vec<f64>,
}

impl AcfSeries {
    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// One report per lag, each bounded by the ACF limit.
    pub fn to_reports(&self, sample_bits: usize) -> Vec<TestReport> {
        self.lags
            .iter()
            .zip(&self.coefficients)
            .map(|(lag, c)| {
                TestReport::from_bounds(format!("ACF lag {lag}"), vec![*c], (-ACF_LIMIT, ACF_LIMIT), sample_bits)
            })
            .collect()
    }
}

/// Pearson correlation between `x[..n-k]` and `x[k..]` for `k` in
/// `1..=max_lag`. The coefficient is the same for the 0/1 and the ±1
/// mapping of the bits. Needs at least `10 * max_lag` bits.
pub fn acf(stream: &BitStream, max_lag: usize) -> Result<AcfSeries, StatsError> {
    let n = stream.len();
    if max_lag == 0 {
        return Err(StatsError::Parameter("max_lag must be at least 1".into()));
    }
    super::require_len("ACF", 10 * max_lag, n)?;
    // Prefix ones counts give the mean of any head/tail segment in O(1).
    let total = stream.count_ones();
    let mut lags = Vec::with_capacity(max_lag);
    let mut coefficients = Vec::with_capacity(max_lag);
    let mut head_drop = 0usize; // ones in x[n-k..]
    let mut tail_drop = 0usize; // ones in x[..k]
    for k in 1..=max_lag {
        head_drop += stream.get(n - k) as usize;
        tail_drop += stream.get(k - 1) as usize;
        let m = (n - k) as f64;
        let sa = (total - head_drop) as f64;
        let sb = (total - tail_drop) as f64;
        let differ = stream.xor_shift_count(0, n - k, k) as f64;
        // For 0/1 values, Σ a·b = (Σa + Σb − #differ) / 2.
        let sab = (sa + sb - differ) / 2.0;
        let cov = sab - sa * sb / m;
        let va = sa - sa * sa / m;
        let vb = sb - sb * sb / m;
        if va <= 0.0 || vb <= 0.0 {
            return Err(StatsError::Degenerate("ACF".into()));
        }
        lags.push(k);
        coefficients.push(cov / (va * vb).sqrt());
    }
    Ok(AcfSeries { lags, coefficients })
}
