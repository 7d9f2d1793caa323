//! Min-entropy estimators for binary sources, following the non-IID track
//! of SP 800-90B.

use serde::{Deserialize, Serialize};

use super::{require_len, StatsError, TestReport};
use crate::bits::BitStream;

/// Upper 99.5% normal quantile used by the confidence bounds.
const Z_995: f64 = 2.576;
const MARKOV_SEQ_LEN: i32 = 128;

pub const MCV_MIN_BITS: usize = 4096;
pub const COLLISION_MIN_BITS: usize = 20_000;
pub const MARKOV_MIN_BITS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Mcv,
    Collision,
    Markov,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Mcv, Estimator::Collision, Estimator::Markov];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Mcv => "MostCommonValue",
            Estimator::Collision => "Collision",
            Estimator::Markov => "Markov",
        }
    }

    /// Per-bit acceptance threshold used by the battery runner.
    pub fn threshold(self) -> f64 {
        match self {
            Estimator::Mcv => 0.97,
            Estimator::Collision | Estimator::Markov => 0.90,
        }
    }

    pub fn estimate(self, s: &BitStream) -> Result<MinEntropyEstimate, StatsError> {
        match self {
            Estimator::Mcv => mcv_estimate(s),
            Estimator::Collision => collision_estimate(s),
            Estimator::Markov => markov_estimate(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinEntropyEstimate {
    pub estimator: Estimator,
    /// Bound on the probability of the most likely outcome (per bit, or per
    /// 128-bit sequence for the Markov estimator).
    pub p_max: f64,
    /// Min-entropy per bit.
    pub h_min: f64,
}

impl MinEntropyEstimate {
    pub fn to_report(&self, sample_bits: usize) -> TestReport {
        TestReport::from_bounds(
            self.estimator.name(),
            vec![self.h_min],
            (self.estimator.threshold(), f64::MAX),
            sample_bits,
        )
        .with_note("statistic: min-entropy per bit")
    }
}

pub fn mcv_estimate(s: &BitStream) -> Result<MinEntropyEstimate, StatsError> {
    require_len("MostCommonValue", MCV_MIN_BITS, s.len())?;
    let l = s.len() as f64;
    let ones = s.count_ones() as f64;
    let p_hat = ones.max(l - ones) / l;
    let p_u = (p_hat + Z_995 * (p_hat * (1.0 - p_hat) / (l - 1.0)).sqrt()).min(1.0);
    Ok(MinEntropyEstimate {
        estimator: Estimator::Mcv,
        p_max: p_u,
        h_min: -p_u.log2(),
    })
}

/// Expected collision time of a binary source whose likelier symbol has
/// probability `p`, from the general F(q) expression with two symbols.
fn expected_collision_time(p: f64) -> f64 {
    let q = 1.0 - p;
    let z = 1.0 / q;
    // F(1/z) = Γ(3, z) z⁻³ eᶻ, with Γ(3, z) = 2e⁻ᶻ(1 + z + z²/2).
    let f = 2.0 * (1.0 + z + z * z / 2.0) / (z * z * z);
    let d = 1.0 / p - 1.0 / q;
    p / (q * q) * (1.0 + 0.5 * d) * f - p / q * 0.5 * d
}

pub fn collision_estimate(s: &BitStream) -> Result<MinEntropyEstimate, StatsError> {
    require_len("Collision", COLLISION_MIN_BITS, s.len())?;
    let n = s.len();
    let mut times: Vec<f64> = Vec::with_capacity(n / 2);
    let mut i = 0;
    while i + 1 < n {
        let t = if s.get(i) == s.get(i + 1) {
            2
        } else if i + 2 < n {
            3
        } else {
            break;
        };
        times.push(t as f64);
        i += t;
    }
    let v = times.len() as f64;
    let mean = times.iter().sum::<f64>() / v;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (v - 1.0);
    let lower = mean - Z_995 * var.sqrt() / v.sqrt();
    let p = if lower >= expected_collision_time(0.5) {
        0.5
    } else if lower <= 2.0 {
        1.0
    } else {
        let (mut lo, mut hi) = (0.5, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if expected_collision_time(mid) > lower {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(MinEntropyEstimate {
        estimator: Estimator::Collision,
        p_max: p,
        h_min: -p.log2(),
    })
}

pub fn markov_estimate(s: &BitStream) -> Result<MinEntropyEstimate, StatsError> {
    require_len("Markov", MARKOV_MIN_BITS, s.len())?;
    let n = s.len();
    let ones = s.count_ones();
    let p1 = ones as f64 / n as f64;
    let p0 = 1.0 - p1;
    // Transition counts over consecutive pairs.
    let changes = s.xor_shift_count(0, n - 1, 1);
    let ones_head = ones - s.get(n - 1) as usize;
    let zeros_head = n - 1 - ones_head;
    let c10 = (0..n - 1).filter(|&i| s.get(i) && !s.get(i + 1)).count();
    let c01 = changes - c10;
    let c11 = ones_head - c10;
    let c00 = zeros_head - c01;
    let ratio = |a: usize, total: usize| if total == 0 { 0.0 } else { a as f64 / total as f64 };
    let (t00, t01) = (ratio(c00, zeros_head), ratio(c01, zeros_head));
    let (t10, t11) = (ratio(c10, ones_head), ratio(c11, ones_head));
    let k = MARKOV_SEQ_LEN;
    let ln = |x: f64| x.ln();
    let half = k / 2;
    let candidates = [
        ln(p0) + (k - 1) as f64 * ln(t00),
        ln(p0) + half as f64 * ln(t01) + (half - 1) as f64 * ln(t10),
        ln(p0) + ln(t01) + (k - 2) as f64 * ln(t11),
        ln(p1) + ln(t10) + (k - 2) as f64 * ln(t00),
        ln(p1) + half as f64 * ln(t10) + (half - 1) as f64 * ln(t01),
        ln(p1) + (k - 1) as f64 * ln(t11),
    ];
    let ln_max = candidates
        .iter()
        .copied()
        .filter(|x| !x.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    let h = (-ln_max / std::f64::consts::LN_2 / k as f64).min(1.0);
    Ok(MinEntropyEstimate {
        estimator: Estimator::Markov,
        p_max: ln_max.exp(),
        h_min: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn biased(n: usize, p_one: f64, seed: u64) -> BitStream {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>() < p_one).collect()
    }

    #[test]
    fn mcv_of_exactly_balanced_stream() {
        let s: BitStream = (0..1_000_000).map(|i| i % 2 == 0).collect();
        let e = mcv_estimate(&s).unwrap();
        let pu = 0.5 + 2.576 * (0.25f64 / 999_999.0).sqrt();
        assert!((e.h_min + pu.log2()).abs() < 1e-12);
        assert!((e.h_min - 0.99629).abs() < 1e-5);
    }

    proptest! {
        // Binary collision time has mean 2 + 2p(1-p).
        #[test]
        fn collision_time_closed_form(p in 0.5f64..0.999) {
            let closed = 2.0 + 2.0 * p * (1.0 - p);
            prop_assert!((expected_collision_time(p) - closed).abs() < 1e-9);
        }
    }

    #[test]
    fn collision_inverts_closed_form() {
        let s = biased(200_000, 0.7, 4);
        let e = collision_estimate(&s).unwrap();
        // Recompute the bound and invert 2 + 2pq directly.
        let mut times = Vec::new();
        let mut i = 0;
        while i + 2 < s.len() {
            let t = if s.get(i) == s.get(i + 1) { 2.0 } else { 3.0 };
            times.push(t);
            i += t as usize;
        }
        let v = times.len() as f64;
        let m = times.iter().sum::<f64>() / v;
        let sd = (times.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (v - 1.0)).sqrt();
        let x = m - 2.576 * sd / v.sqrt();
        let p = (1.0 + (1.0 - 2.0 * (x - 2.0)).sqrt()) / 2.0;
        assert!((e.p_max - p).abs() < 1e-6, "{} vs {}", e.p_max, p);
        assert!(e.p_max > 0.7);
    }

    #[test]
    fn markov_on_alternating_stream_is_zero() {
        let s: BitStream = (0..1_000_000).map(|i| i % 2 == 1).collect();
        let e = markov_estimate(&s).unwrap();
        assert!(e.h_min < 0.01);
    }

    #[test]
    fn markov_matches_published_sequence_probability() {
        // Published (p, h) pairs agree to the three digits printed for p.
        for (p, h) in [(4.28e-39f64, 0.995748f64), (3.64e-39, 0.997594)] {
            let back = 2f64.powf(-128.0 * h);
            assert!((back / p - 1.0).abs() < 2e-3, "{back}");
        }
    }

    #[test]
    fn ideal_source_estimates() {
        let s = biased(1_000_000, 0.5, 17);
        assert!(mcv_estimate(&s).unwrap().h_min > 0.99);
        assert!(markov_estimate(&s).unwrap().h_min > 0.99);
        let c = collision_estimate(&s).unwrap().h_min;
        assert!(c > 0.8 && c <= 1.0);
    }

    #[test]
    fn constant_stream_has_no_entropy() {
        let s = BitStream::zeros(1_000_000);
        for est in Estimator::ALL {
            let e = est.estimate(&s).unwrap();
            assert!(e.h_min.abs() < 1e-9, "{:?} {}", est, e.h_min);
        }
    }

    #[test]
    fn minimum_lengths_enforced() {
        let s = biased(4000, 0.5, 1);
        for est in Estimator::ALL {
            assert!(matches!(est.estimate(&s), Err(StatsError::InsufficientData { .. })));
        }
    }
}
