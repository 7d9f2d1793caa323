//! Named groups of tests and a runner that collects their reports.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::entropy::Estimator;
use super::nist::{DEFAULT_APEN_M, DEFAULT_BLOCK_LEN, DEFAULT_SERIAL_M};
use super::{acf, ais, nist, StatsError, TestReport, Verdict};
use crate::analytic::bias_percent;
use crate::bits::BitStream;

pub const ACF_MAX_LAG: usize = 100;
/// Two-sided 99% normal quantile used for the bias bound.
const Z_99: f64 = 2.5758;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Battery {
    Ais,
    Nist,
    Entropy,
    Acf,
    Bias,
}

impl Battery {
    pub const ALL: [Battery; 5] = [
        Battery::Ais,
        Battery::Nist,
        Battery::Entropy,
        Battery::Acf,
        Battery::Bias,
    ];

    /// Parses a comma-separated list; `all` expands to every battery.
    pub fn parse_list(list: &str) -> Result<Vec<Battery>, StatsError> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item.eq_ignore_ascii_case("all") {
                out.extend(Battery::ALL);
            } else {
                out.push(item.parse()?);
            }
        }
        if out.is_empty() {
            return Err(StatsError::Parameter("empty battery list".into()));
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|b| seen.insert(*b));
        Ok(out)
    }
}

impl FromStr for Battery {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ais" | "ais31" => Ok(Battery::Ais),
            "nist" | "nist-subset" => Ok(Battery::Nist),
            "entropy" | "90b" => Ok(Battery::Entropy),
            "acf" => Ok(Battery::Acf),
            "bias" => Ok(Battery::Bias),
            other => Err(StatsError::Parameter(format!("unknown battery '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryResult {
    pub sample_bits: usize,
    pub reports: Vec<TestReport>,
    /// Batteries none of whose tests could run on a stream this short.
    pub undersized: Vec<Battery>,
}

impl BatteryResult {
    pub fn any_failed(&self) -> bool {
        self.reports.iter().any(|r| r.verdict == Verdict::Fail)
    }

    pub fn any_not_applicable(&self) -> bool {
        self.reports.iter().any(|r| r.verdict == Verdict::NotApplicable)
    }

    pub fn report(&self, name: &str) -> Option<&TestReport> {
        self.reports.iter().find(|r| r.test_name == name)
    }
}

/// Turns a too-short stream into a not-applicable report and a constant
/// stream into a failure; other errors propagate.
fn settle(name: &str, bits: usize, r: Result<Vec<TestReport>, StatsError>) -> Result<Vec<TestReport>, StatsError> {
    match r {
        Ok(v) => Ok(v),
        Err(e @ StatsError::InsufficientData { .. }) => Ok(vec![TestReport::not_applicable(name, e.to_string(), bits)]),
        Err(StatsError::Degenerate(msg)) => {
            let mut rep = TestReport::from_bounds(name, vec![f64::NAN], (0.0, 0.0), bits);
            rep.note = Some(format!("{msg}: statistic undefined for a constant sequence"));
            Ok(vec![rep])
        }
        Err(e) => Err(e),
    }
}

fn one(r: Result<TestReport, StatsError>) -> Result<Vec<TestReport>, StatsError> {
    r.map(|x| vec![x])
}

pub fn bias_report(s: &BitStream) -> Result<TestReport, StatsError> {
    let ones = s.count_ones() as u64;
    let zeros = s.len() as u64 - ones;
    let bias = bias_percent(ones, zeros).map_err(|e| StatsError::Parameter(e.to_string()))?;
    let limit = 100.0 * Z_99 / (s.len() as f64).sqrt();
    Ok(TestReport::from_bounds("Bias", vec![bias], (-1.0, limit), s.len()).with_note("statistic: bias in percent"))
}

pub fn run_battery(s: &BitStream, batteries: &[Battery]) -> Result<BatteryResult, StatsError> {
    let n = s.len();
    let mut reports = Vec::new();
    let mut undersized = Vec::new();
    for b in batteries {
        let first = reports.len();
        match b {
            Battery::Ais => {
                reports.extend(settle("T0 disjointness", n, one(ais::disjointness_t0(s)))?);
                reports.extend(settle("T1 monobit", n, one(ais::monobit_t1(s)))?);
                reports.extend(settle("T2 poker", n, one(ais::poker_t2(s)))?);
                reports.extend(settle("T3 runs", n, one(ais::runs_t3(s)))?);
                reports.extend(settle("T4 long run", n, one(ais::longrun_t4(s)))?);
                reports.extend(settle("T5 autocorrelation", n, one(ais::autocorr_t5(s)))?);
            }
            Battery::Nist => {
                reports.extend(settle("Frequency", n, one(nist::nist_frequency(s)))?);
                reports.extend(settle(
                    "BlockFrequency",
                    n,
                    one(nist::nist_block_frequency(s, DEFAULT_BLOCK_LEN)),
                )?);
                reports.extend(settle("Runs", n, one(nist::nist_runs(s)))?);
                reports.extend(settle("LongestRun", n, one(nist::nist_longest_run(s)))?);
                reports.extend(settle("CumulativeSums", n, nist::nist_cusum(s))?);
                reports.extend(settle(
                    "ApproximateEntropy",
                    n,
                    one(nist::nist_approx_entropy(s, DEFAULT_APEN_M)),
                )?);
                reports.extend(settle("Serial", n, nist::nist_serial(s, DEFAULT_SERIAL_M))?);
            }
            Battery::Entropy => {
                for est in Estimator::ALL {
                    let r = est.estimate(s).map(|e| e.to_report(n));
                    reports.extend(settle(est.name(), n, one(r))?);
                }
            }
            Battery::Acf => {
                let r = acf::acf(s, ACF_MAX_LAG).map(|a| a.to_reports(n));
                reports.extend(settle("ACF", n, r)?);
            }
            Battery::Bias => {
                if n == 0 {
                    reports.push(TestReport::not_applicable("Bias", "empty stream", 0));
                } else {
                    reports.push(bias_report(s)?);
                }
            }
        }
        if reports[first..].iter().all(|r| r.verdict == Verdict::NotApplicable) {
            undersized.push(*b);
        }
    }
    Ok(BatteryResult {
        sample_bits: n,
        reports,
        undersized,
    })
}
