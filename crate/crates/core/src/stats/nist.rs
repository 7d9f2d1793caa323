//! A subset of the NIST SP 800-22 battery.
//!
//! Each public test checks its minimum length and wraps an unchecked
//! statistic function, so the short worked examples from the reference
//! documentation can still be exercised directly.

use super::{require_len, StatsError, TestReport, ALPHA};
use crate::bits::BitStream;
use crate::special::{erfc, gamma_q, normal_cdf};

pub const MIN_BITS: usize = 100;
pub const DEFAULT_BLOCK_LEN: usize = 128;
pub const DEFAULT_APEN_M: usize = 2;
pub const DEFAULT_SERIAL_M: usize = 2;

/// Range of acceptable pass proportions over `k` sequences at the default
/// significance level.
pub fn proportion_interval(k: usize) -> (f64, f64) {
    let p = 1.0 - ALPHA;
    let half = 3.0 * (p * (1.0 - p) / k as f64).sqrt();
    (p - half, p + half)
}

fn frequency_p(s: &BitStream) -> (f64, f64) {
    let n = s.len() as f64;
    let sum = 2.0 * s.count_ones() as f64 - n;
    let s_obs = sum.abs() / n.sqrt();
    (s_obs, erfc(s_obs / std::f64::consts::SQRT_2))
}

pub fn nist_frequency(s: &BitStream) -> Result<TestReport, StatsError> {
    require_len("Frequency", MIN_BITS, s.len())?;
    let (stat, p) = frequency_p(s);
    Ok(TestReport::from_p_value("Frequency", vec![stat], p, s.len()))
}

fn block_frequency_p(s: &BitStream, m: usize) -> (f64, f64) {
    let blocks = s.len() / m;
    let chi2: f64 = (0..blocks)
        .map(|i| {
            let pi = s.count_ones_range(i * m, m) as f64 / m as f64;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    (chi2, gamma_q(blocks as f64 / 2.0, chi2 / 2.0))
}

pub fn nist_block_frequency(s: &BitStream, block_len: usize) -> Result<TestReport, StatsError> {
    if block_len < 2 {
        return Err(StatsError::Parameter("block length must be at least 2".into()));
    }
    require_len("BlockFrequency", MIN_BITS.max(block_len), s.len())?;
    let (stat, p) = block_frequency_p(s, block_len);
    Ok(TestReport::from_p_value("BlockFrequency", vec![stat], p, s.len()))
}

fn runs_p(s: &BitStream) -> (f64, f64) {
    let n = s.len() as f64;
    let pi = s.count_ones() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        // Frequency prerequisite failed.
        return (0.0, 0.0);
    }
    let v = 1 + s.xor_shift_count(0, s.len() - 1, 1);
    let v = v as f64;
    let q = pi * (1.0 - pi);
    let p = erfc((v - 2.0 * n * q).abs() / (2.0 * (2.0 * n).sqrt() * q));
    (v, p)
}

pub fn nist_runs(s: &BitStream) -> Result<TestReport, StatsError> {
    require_len("Runs", MIN_BITS, s.len())?;
    let (stat, p) = runs_p(s);
    let r = TestReport::from_p_value("Runs", vec![stat], p, s.len());
    Ok(if stat == 0.0 {
        r.with_note("frequency prerequisite not met")
    } else {
        r
    })
}

struct LongestRunTable {
    block: usize,
    /// Run length of the first and last class (the ends are open).
    first: u32,
    probs: &'static [f64],
}

const LR_8: LongestRunTable = LongestRunTable {
    block: 8,
    first: 1,
    probs: &[0.21484375, 0.3671875, 0.23046875, 0.1875],
};
const LR_128: LongestRunTable = LongestRunTable {
    block: 128,
    first: 4,
    probs: &[
        0.1174035788,
        0.242955959,
        0.249363483,
        0.17517706,
        0.102701071,
        0.112398847,
    ],
};
const LR_10K: LongestRunTable = LongestRunTable {
    block: 10_000,
    first: 10,
    probs: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
};

fn longest_run_p(s: &BitStream) -> (f64, f64) {
    let table = match s.len() {
        n if n < 6272 => &LR_8,
        n if n < 750_000 => &LR_128,
        _ => &LR_10K,
    };
    let m = table.block;
    let k = table.probs.len();
    let blocks = s.len() / m;
    let mut freq = vec![0u64; k];
    for b in 0..blocks {
        let (mut run, mut longest) = (0u32, 0u32);
        for i in b * m..(b + 1) * m {
            if s.get(i) {
                run += 1;
                longest = longest.max(run);
            } else {
                run = 0;
            }
        }
        let class = longest.clamp(table.first, table.first + k as u32 - 1) - table.first;
        freq[class as usize] += 1;
    }
    let nb = blocks as f64;
    let chi2: f64 = freq
        .iter()
        .zip(table.probs)
        .map(|(&f, &p)| (f as f64 - nb * p).powi(2) / (nb * p))
        .sum();
    (chi2, gamma_q((k - 1) as f64 / 2.0, chi2 / 2.0))
}

pub fn nist_longest_run(s: &BitStream) -> Result<TestReport, StatsError> {
    require_len("LongestRun", 128, s.len())?;
    let (stat, p) = longest_run_p(s);
    Ok(TestReport::from_p_value("LongestRun", vec![stat], p, s.len()))
}

fn cusum_p(s: &BitStream, reverse: bool) -> (f64, f64) {
    let n = s.len();
    let (mut sum, mut z) = (0i64, 0i64);
    for i in 0..n {
        let bit = s.get(if reverse { n - 1 - i } else { i });
        sum += if bit { 1 } else { -1 };
        z = z.max(sum.abs());
    }
    let (n, zf) = (n as i64, z as f64);
    let sqrt_n = (n as f64).sqrt();
    // Truncating integer division for the summation limits.
    let mut sum1 = 0.0;
    for k in (-n / z + 1) / 4..=(n / z - 1) / 4 {
        let k = k as f64;
        sum1 += normal_cdf((4.0 * k + 1.0) * zf / sqrt_n) - normal_cdf((4.0 * k - 1.0) * zf / sqrt_n);
    }
    let mut sum2 = 0.0;
    for k in (-n / z - 3) / 4..=(n / z - 1) / 4 {
        let k = k as f64;
        sum2 += normal_cdf((4.0 * k + 3.0) * zf / sqrt_n) - normal_cdf((4.0 * k + 1.0) * zf / sqrt_n);
    }
    (zf, 1.0 - sum1 + sum2)
}

/// Forward and reverse cumulative-sums reports.
pub fn nist_cusum(s: &BitStream) -> Result<Vec<TestReport>, StatsError> {
    require_len("CumulativeSums", MIN_BITS, s.len())?;
    Ok([("CumulativeSums/forward", false), ("CumulativeSums/reverse", true)]
        .into_iter()
        .map(|(name, rev)| {
            let (stat, p) = cusum_p(s, rev);
            TestReport::from_p_value(name, vec![stat], p, s.len())
        })
        .collect())
}

/// Counts of every overlapping `m`-bit pattern, wrapping around the end.
fn pattern_counts(s: &BitStream, m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << m];
    if m == 0 {
        counts[0] = s.len() as u64;
        return counts;
    }
    let n = s.len();
    let mask = (1usize << m) - 1;
    let mut v = 0usize;
    for i in 0..m - 1 {
        v = (v << 1) | s.get(i % n) as usize;
    }
    for i in m - 1..n + m - 1 {
        v = ((v << 1) | s.get(i % n) as usize) & mask;
        counts[v] += 1;
    }
    counts
}

fn phi(s: &BitStream, m: usize) -> f64 {
    let n = s.len() as f64;
    pattern_counts(s, m)
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum()
}

fn approx_entropy_p(s: &BitStream, m: usize) -> (f64, f64) {
    let n = s.len() as f64;
    let apen = phi(s, m) - phi(s, m + 1);
    let chi2 = 2.0 * n * (std::f64::consts::LN_2 - apen);
    (chi2, gamma_q(2f64.powi(m as i32 - 1), chi2 / 2.0))
}

pub fn nist_approx_entropy(s: &BitStream, m: usize) -> Result<TestReport, StatsError> {
    if m == 0 || m > 20 {
        return Err(StatsError::Parameter(format!("ApEn block length {m} not in 1..=20")));
    }
    require_len("ApproximateEntropy", MIN_BITS.max(1 << (m + 5)), s.len())?;
    let (stat, p) = approx_entropy_p(s, m);
    Ok(TestReport::from_p_value("ApproximateEntropy", vec![stat], p, s.len()))
}

fn psi_sq(s: &BitStream, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = s.len() as f64;
    let sq: f64 = pattern_counts(s, m).into_iter().map(|c| (c * c) as f64).sum();
    sq * 2f64.powi(m as i32) / n - n
}

fn serial_p(s: &BitStream, m: usize) -> ([f64; 2], [f64; 2]) {
    let p0 = psi_sq(s, m);
    let p1 = psi_sq(s, m - 1);
    let p2 = if m >= 2 { psi_sq(s, m - 2) } else { 0.0 };
    let d1 = p0 - p1;
    let d2 = p0 - 2.0 * p1 + p2;
    let pv1 = gamma_q(2f64.powi(m as i32 - 2), d1 / 2.0);
    let pv2 = gamma_q(2f64.powi(m as i32 - 3), d2 / 2.0);
    ([d1, d2], [pv1, pv2])
}

/// The two serial-test reports for block length `m`.
pub fn nist_serial(s: &BitStream, m: usize) -> Result<Vec<TestReport>, StatsError> {
    if !(2..=20).contains(&m) {
        return Err(StatsError::Parameter(format!("serial block length {m} not in 2..=20")));
    }
    require_len("Serial", MIN_BITS.max(1 << (m + 3)), s.len())?;
    let (stat, p) = serial_p(s, m);
    Ok(vec![
        TestReport::from_p_value("Serial/1", vec![stat[0]], p[0], s.len()),
        TestReport::from_p_value("Serial/2", vec![stat[1]], p[1], s.len()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    const EPS_100: &str =
        "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";
    const EPS_128: &str = "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100111001101101100010110010";

    fn bits(s: &str) -> BitStream {
        BitStream::from_ascii(s).unwrap()
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn frequency_examples() {
        close(frequency_p(&bits("1011010101")).1, 0.527089);
        close(frequency_p(&bits(EPS_100)).1, 0.109599);
        let r = nist_frequency(&bits(EPS_100)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn block_frequency_example() {
        close(block_frequency_p(&bits(EPS_100), 10).1, 0.706438);
    }

    #[test]
    fn runs_example() {
        close(runs_p(&bits(EPS_100)).1, 0.500798);
    }

    #[test]
    fn cusum_examples() {
        let r = nist_cusum(&bits(EPS_100)).unwrap();
        close(r[0].p_value.unwrap(), 0.219194);
        close(r[1].p_value.unwrap(), 0.114866);
    }

    #[test]
    fn approximate_entropy_examples() {
        close(approx_entropy_p(&bits(EPS_100), 2).1, 0.235301);
        close(approx_entropy_p(&bits("0100110101"), 3).1, 0.261961);
    }

    #[test]
    fn serial_example() {
        let (_, p) = serial_p(&bits("0011011101"), 3);
        close(p[0], 0.808792);
        close(p[1], 0.670320);
    }

    #[test]
    fn longest_run_example() {
        let (chi2, p) = longest_run_p(&bits(EPS_128));
        // The published statistic was computed with class probabilities
        // rounded to four places; the published p-value with exact ones.
        assert!((chi2 - 4.882605).abs() < 2e-4, "{chi2}");
        close(p, 0.180609);
    }

    #[test]
    fn class_probabilities_sum_to_one() {
        for t in [&LR_8, &LR_128, &LR_10K] {
            let s: f64 = t.probs.iter().sum();
            assert!((s - 1.0).abs() < 1e-3, "{s}");
        }
    }

    #[test]
    fn pattern_counts_marginalise() {
        let s = bits(EPS_100);
        let c3 = pattern_counts(&s, 3);
        let c2 = pattern_counts(&s, 2);
        for (i, c) in c2.iter().enumerate() {
            assert_eq!(*c, c3[2 * i] + c3[2 * i + 1]);
        }
    }

    #[test]
    fn proportion_interval_for_ten() {
        let (lo, hi) = proportion_interval(10);
        assert!((lo - (0.99 - 3.0 * (0.0099f64 / 10.0).sqrt())).abs() < 1e-15);
        assert!(lo > 0.8 && lo < 0.9 && hi > 1.0);
    }

    #[test]
    fn short_streams_rejected() {
        let s = bits("0101");
        assert!(nist_frequency(&s).is_err());
        assert!(nist_runs(&s).is_err());
        assert!(nist_longest_run(&bits(EPS_100)).is_err());
        assert!(nist_serial(&bits(EPS_100), 16).is_err());
        assert!(nist_approx_entropy(&bits(EPS_100), 10).is_err());
        assert!(nist_approx_entropy(&bits(EPS_100), DEFAULT_APEN_M).is_err());
        assert!(nist_serial(&bits(EPS_100), DEFAULT_SERIAL_M).is_ok());
    }

    #[test]
    fn alternating_stream_frequency_and_runs() {
        let s: BitStream = (0..1_000_000).map(|i| i % 2 == 0).collect();
        assert_eq!(nist_frequency(&s).unwrap().p_value, Some(1.0));
        assert!(!nist_runs(&s).unwrap().passed());
    }

    #[test]
    fn all_zero_frequency() {
        let p = nist_frequency(&BitStream::zeros(1_000_000)).unwrap().p_value.unwrap();
        assert!(p < 1e-100);
    }

    #[test]
    fn random_stream_passes_and_zeros_fail() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let s: BitStream = (0..1 << 18).map(|_| rng.random::<bool>()).collect();
        let mut all = vec![
            nist_frequency(&s).unwrap(),
            nist_block_frequency(&s, DEFAULT_BLOCK_LEN).unwrap(),
            nist_runs(&s).unwrap(),
            nist_longest_run(&s).unwrap(),
            nist_approx_entropy(&s, 8).unwrap(),
        ];
        all.extend(nist_cusum(&s).unwrap());
        all.extend(nist_serial(&s, 12).unwrap());
        for r in &all {
            assert!(r.passed(), "{} p={:?}", r.test_name, r.p_value);
        }
        let z = BitStream::zeros(1 << 12);
        assert!(!nist_frequency(&z).unwrap().passed());
        assert!(!nist_runs(&z).unwrap().passed());
    }
}
