//! Restart experiment: power the generator up repeatedly and compare the
//! first bits of each run.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use super::{StatsError, TestReport};
use crate::bits::BitStream;
use crate::circuit::{generate, CircuitConfig};

#[derive(Debug, Clone, Serialize)]
pub struct RestartOutcome {
    pub seeds: Vec<u64>,
    #[serde(serialize_with = "prefixes_as_hex")]
    pub prefixes: Vec<BitStream>,
    pub distinct: usize,
}

impl RestartOutcome {
    pub fn all_distinct(&self) -> bool {
        self.distinct == self.prefixes.len()
    }

    pub fn all_identical(&self) -> bool {
        self.distinct == 1
    }

    /// Passes iff every prefix is distinct.
    pub fn to_report(&self) -> TestReport {
        let bits = self.prefixes.iter().map(BitStream::len).sum();
        let dup = (self.prefixes.len() - self.distinct) as f64;
        TestReport::from_bounds("Restart", vec![dup], (-0.5, 0.5), bits)
            .with_note(format!("statistic: repeated prefixes among {}", self.prefixes.len()))
    }
}

/// Hex rendering of a prefix, first bit as the most significant bit of the
/// first nibble. Trailing partial nibbles are padded with zeros.
pub fn prefix_hex(prefix: &BitStream) -> String {
    let mut out = String::with_capacity(prefix.len().div_ceil(4));
    for start in (0..prefix.len()).step_by(4) {
        let nibble = (0..4).fold(0u32, |acc, i| {
            let idx = start + i;
            (acc << 1) | (idx < prefix.len() && prefix.get(idx)) as u32
        });
        out.push(char::from_digit(nibble, 16).expect("nibble"));
    }
    out
}

fn prefixes_as_hex<S: serde::Serializer>(p: &[BitStream], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(p.iter().map(prefix_hex))
}

/// Runs `trials` fresh simulations of `prefix_bits` bits each. Trial `i`
/// uses seed `config.seed + i`, or `config.seed` throughout when
/// `same_seed` is set.
pub fn restart_test(
    config: &CircuitConfig,
    trials: usize,
    prefix_bits: usize,
    same_seed: bool,
) -> Result<RestartOutcome, StatsError> {
    if trials < 2 {
        return Err(StatsError::Parameter("restart needs at least 2 trials".into()));
    }
    if prefix_bits < 8 {
        return Err(StatsError::Parameter("prefix must be at least 8 bits".into()));
    }
    let seeds: Vec<u64> = (0..trials as u64)
        .map(|i| {
            if same_seed {
                config.seed
            } else {
                config.seed.wrapping_add(i)
            }
        })
        .collect();
    let prefixes = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = CircuitConfig { seed, ..config.clone() };
            generate(&cfg, prefix_bits)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let distinct = prefixes.iter().collect::<HashSet<_>>().len();
    Ok(RestartOutcome {
        seeds,
        prefixes,
        distinct,
    })
}
