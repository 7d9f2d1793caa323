//! Statistical evaluation of bitstreams.
//!
//! Every test returns a [`TestReport`]. Tests refuse streams shorter than
//! their documented minimum with [`StatsError::InsufficientData`]; the
//! battery runner turns that into an explicit "not applicable" verdict.

pub mod acf;
pub mod ais;
pub mod battery;
pub mod entropy;
pub mod nist;
pub mod period;
pub mod restart;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use acf::{acf, AcfSeries, ACF_LIMIT};
pub use ais::{autocorr_t5, disjointness_t0, longrun_t4, monobit_t1, poker_t2, runs_t3, AIS31_BOUNDS};
pub use battery::{run_battery, Battery, BatteryResult};
pub use entropy::{collision_estimate, markov_estimate, mcv_estimate, Estimator, MinEntropyEstimate};
pub use nist::{
    nist_approx_entropy, nist_block_frequency, nist_cusum, nist_frequency, nist_longest_run, nist_runs, nist_serial,
    proportion_interval,
};
pub use period::detect_period;
pub use restart::{restart_test, RestartOutcome};

use crate::circuit::CircuitError;

/// Significance level for p-value based tests.
pub const ALPHA: f64 = 0.01;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("{test} needs at least {needed} bits, got {got}")]
    InsufficientData { test: String, needed: usize, got: usize },
    #[error("{0}: statistic undefined for a constant sequence")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Simulation(#[from] CircuitError),
}

pub(crate) fn require_len(test: &str, needed: usize, got: usize) -> Result<(), StatsError> {
    if got < needed {
        Err(StatsError::InsufficientData {
            test: test.to_string(),
            needed,
            got,
        })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not_applicable",
        })
    }
}

/// Result of one statistical test. Exactly one of `p_value` and `bounds`
/// is present, except for not-applicable reports which carry neither.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistic: Vec<f64>,
    pub p_value: Option<f64>,
    /// Open pass interval applied to every statistic value.
    pub bounds: Option<(f64, f64)>,
    pub verdict: Verdict,
    pub sample_bits: usize,
    /// `(passed, total)` blocks for block-wise tests.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub blocks: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl TestReport {
    pub fn from_p_value(name: impl Into<String>, statistic: Vec<f64>, p_value: f64, sample_bits: usize) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            test_name: name.into(),
            statistic,
            p_value: Some(p_value),
            bounds: None,
            verdict: if p_value >= ALPHA { Verdict::Pass } else { Verdict::Fail },
            sample_bits,
            blocks: None,
            note: None,
        }
    }

    pub fn from_bounds(name: impl Into<String>, statistic: Vec<f64>, bounds: (f64, f64), sample_bits: usize) -> Self {
        let inside = |v: &f64| *v > bounds.0 && *v < bounds.1;
        let passed = statistic.iter().filter(|v| inside(v)).count();
        let total = statistic.len();
        Self {
            test_name: name.into(),
            verdict: if passed == total { Verdict::Pass } else { Verdict::Fail },
            statistic,
            p_value: None,
            bounds: Some(bounds),
            sample_bits,
            blocks: Some((passed, total)),
            note: None,
        }
    }

    pub fn not_applicable(name: impl Into<String>, reason: impl Into<String>, sample_bits: usize) -> Self {
        Self {
            test_name: name.into(),
            statistic: Vec::new(),
            p_value: None,
            bounds: None,
            verdict: Verdict::NotApplicable,
            sample_bits,
            blocks: None,
            note: Some(reason.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Fraction of blocks inside the bounds (1 or 0 for single-shot tests).
    pub fn pass_rate(&self) -> f64 {
        match self.blocks {
            Some((p, t)) if t > 0 => p as f64 / t as f64,
            _ => f64::from(u8::from(self.passed())),
        }
    }
}

/// Mean of the p-values of a group of sub-test reports.
pub fn average_p_value(reports: &[TestReport]) -> Option<f64> {
    let ps: Vec<f64> = reports.iter().filter_map(|r| r.p_value).collect();
    if ps.is_empty() {
        None
    } else {
        Some(ps.iter().sum::<f64>() / ps.len() as f64)
    }
}
