//! Detection of deterministic repetition.

use crate::bits::BitStream;

/// Smallest `p <= max_period` such that the second half of `stream`
/// repeats with period `p` at least twice. The first half is treated as a
/// start-up transient.
pub fn detect_period(stream: &BitStream, max_period: usize) -> Option<usize> {
    let n = stream.len();
    let start = n / 2;
    (1..=max_period)
        .take_while(|&p| 2 * p <= n - start)
        .find(|&p| stream.xor_shift_count(start, n - start - p, p) == 0)
}
