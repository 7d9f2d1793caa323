//! AIS-31 procedure A tests T0–T5.
//!
//! T1–T5 consume successive 20000-bit blocks and a report passes only if
//! every block passes. T5 selects its shift on the first half of a block
//! and tests it on the second half.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{require_len, StatsError, TestReport};
use crate::bits::BitStream;

/// Reference constants of procedure A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ais31Bounds {
    pub block_bits: usize,
    pub t0_words: usize,
    pub t0_word_bits: usize,
    /// Exclusive bounds on the ones count of a block.
    pub monobit: (u32, u32),
    /// Exclusive bounds on the poker statistic.
    pub poker: (f64, f64),
    /// Inclusive bounds on the number of runs of length 1..5 and >= 6, for
    /// each bit value.
    pub runs: [(u32, u32); 6],
    /// A run of this length or longer fails T4.
    pub long_run: u32,
    /// Exclusive bounds on the shifted-XOR count.
    pub autocorr: (u32, u32),
    pub autocorr_max_shift: usize,
}

pub const AIS31_BOUNDS: Ais31Bounds = Ais31Bounds {
    block_bits: 20_000,
    t0_words: 1 << 16,
    t0_word_bits: 48,
    monobit: (9654, 10346),
    poker: (1.03, 57.4),
    runs: [(2267, 2733), (1079, 1421), (502, 748), (223, 402), (90, 223), (90, 223)],
    long_run: 34,
    autocorr: (2326, 2674),
    autocorr_max_shift: 5000,
};

fn blocks(test: &str, stream: &BitStream) -> Result<usize, StatsError> {
    require_len(test, AIS31_BOUNDS.block_bits, stream.len())?;
    Ok(stream.len() / AIS31_BOUNDS.block_bits)
}

/// T0: 2¹⁶ consecutive 48-bit words must be pairwise distinct.
pub fn disjointness_t0(stream: &BitStream) -> Result<TestReport, StatsError> {
    let b = &AIS31_BOUNDS;
    let needed = b.t0_words * b.t0_word_bits;
    require_len("T0 disjointness", needed, stream.len())?;
    let mask = (1u64 << b.t0_word_bits) - 1;
    let mut seen = HashSet::with_capacity(b.t0_words);
    let mut duplicates = 0usize;
    for i in 0..b.t0_words {
        if !seen.insert(stream.window(i * b.t0_word_bits) & mask) {
            duplicates += 1;
        }
    }
    Ok(
        TestReport::from_bounds("T0 disjointness", vec![duplicates as f64], (-0.5, 0.5), needed)
            .with_note("statistic: repeated 48-bit words"),
    )
}

/// T1: ones count per 20000-bit block.
pub fn monobit_t1(stream: &BitStream) -> Result<TestReport, StatsError> {
    let n = blocks("T1 monobit", stream)?;
    let bb = AIS31_BOUNDS.block_bits;
    let stat = (0..n).map(|k| stream.count_ones_range(k * bb, bb) as f64).collect();
    let (lo, hi) = AIS31_BOUNDS.monobit;
    Ok(TestReport::from_bounds(
        "T1 monobit",
        stat,
        (lo as f64, hi as f64),
        n * bb,
    ))
}

/// T2: χ²-type statistic over the 5000 nibbles of each block.
pub fn poker_t2(stream: &BitStream) -> Result<TestReport, StatsError> {
    let n = blocks("T2 poker", stream)?;
    let bb = AIS31_BOUNDS.block_bits;
    let nibbles = bb / 4;
    let stat = (0..n)
        .map(|k| {
            let mut counts = [0u64; 16];
            for j in 0..nibbles {
                let base = k * bb + 4 * j;
                let v = (0..4).fold(0usize, |acc, i| (acc << 1) | stream.get(base + i) as usize);
                counts[v] += 1;
            }
            let sq: u64 = counts.iter().map(|c| c * c).sum();
            16.0 / nibbles as f64 * sq as f64 - nibbles as f64
        })
        .collect();
    Ok(TestReport::from_bounds("T2 poker", stat, AIS31_BOUNDS.poker, n * bb))
}

/// Runs of each length class (1..=5, >=6) for zeros and ones, plus the
/// longest run, within `[start, start + len)`.
fn run_profile(stream: &BitStream, start: usize, len: usize) -> ([[u32; 6]; 2], u32) {
    let mut counts = [[0u32; 6]; 2];
    let mut longest = 0u32;
    let mut i = start;
    let end = start + len;
    while i < end {
        let bit = stream.get(i);
        let mut j = i + 1;
        while j < end && stream.get(j) == bit {
            j += 1;
        }
        let run = (j - i) as u32;
        counts[bit as usize][(run.min(6) - 1) as usize] += 1;
        longest = longest.max(run);
        i = j;
    }
    (counts, longest)
}

/// T3: run-length distribution of each block. The statistic is the number
/// of run-length classes outside their interval (must be zero).
pub fn runs_t3(stream: &BitStream) -> Result<TestReport, StatsError> {
    let n = blocks("T3 runs", stream)?;
    let bb = AIS31_BOUNDS.block_bits;
    let stat = (0..n)
        .map(|k| {
            let (counts, _) = run_profile(stream, k * bb, bb);
            counts
                .iter()
                .flat_map(|per_bit| per_bit.iter().zip(AIS31_BOUNDS.runs.iter()))
                .filter(|(c, (lo, hi))| **c < *lo || **c > *hi)
                .count() as f64
        })
        .collect();
    Ok(TestReport::from_bounds("T3 runs", stat, (-0.5, 0.5), n * bb)
        .with_note("statistic: run-length classes out of bounds per block"))
}

/// T4: longest run per block must be shorter than 34.
pub fn longrun_t4(stream: &BitStream) -> Result<TestReport, StatsError> {
    let n = blocks("T4 long run", stream)?;
    let bb = AIS31_BOUNDS.block_bits;
    let stat = (0..n).map(|k| run_profile(stream, k * bb, bb).1 as f64).collect();
    Ok(TestReport::from_bounds(
        "T4 long run",
        stat,
        (0.0, AIS31_BOUNDS.long_run as f64),
        n * bb,
    ))
}

/// T5: shifted-XOR count `Σ_{j<5000} b_j ⊕ b_{j+τ}`. The shift with the
/// largest deviation on the first 10000 bits of a block is re-tested on the
/// second 10000 bits.
pub fn autocorr_t5(stream: &BitStream) -> Result<TestReport, StatsError> {
    let n = blocks("T5 autocorrelation", stream)?;
    let bb = AIS31_BOUNDS.block_bits;
    let half = bb / 2;
    let window = AIS31_BOUNDS.autocorr_max_shift;
    let stat = (0..n)
        .map(|k| {
            let base = k * bb;
            let (mut best_tau, mut best_dev) = (1, -1i64);
            for tau in 1..=window {
                let z = stream.xor_shift_count(base, window, tau) as i64;
                let dev = (z - (window as i64) / 2).abs();
                if dev > best_dev {
                    best_dev = dev;
                    best_tau = tau;
                }
            }
            stream.xor_shift_count(base + half, window, best_tau) as f64
        })
        .collect();
    let (lo, hi) = AIS31_BOUNDS.autocorr;
    Ok(TestReport::from_bounds(
        "T5 autocorrelation",
        stat,
        (lo as f64, hi as f64),
        n * bb,
    ))
}
