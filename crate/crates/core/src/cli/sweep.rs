//! One-parameter sweeps.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::bias_percent;
use crate::circuit::{generate, CircuitConfig};
use crate::noise::PvtCondition;
use crate::stats::{acf, mcv_estimate, StatsError};

use super::CliError;

/// Bits needed for the MCV estimate and ACF over 100 lags.
pub const MIN_SWEEP_BITS: usize = 4096;
const SWEEP_ACF_LAGS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Temperature,
    Voltage,
    XorCount,
    Ro1Stages,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Temperature => "temperature",
            SweepAxis::Voltage => "voltage",
            SweepAxis::XorCount => "xor_count",
            SweepAxis::Ro1Stages => "ro1_stages",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepAxis::XorCount | SweepAxis::Ro1Stages)
    }

    /// `base` with this axis set to `value`. For `xor_count` the topology
    /// becomes an uncoupled array of that many hybrid units sharing the
    /// base noise, PVT, clock and seeds.
    pub fn apply(self, base: &CircuitConfig, value: f64) -> Result<CircuitConfig, CliError> {
        let mut cfg = base.clone();
        match self {
            SweepAxis::Temperature => cfg.pvt.temperature_c = value,
            SweepAxis::Voltage => cfg.pvt.voltage_v = value,
            SweepAxis::Ro1Stages => cfg.ro1_stages = value as usize,
            SweepAxis::XorCount => {
                cfg = CircuitConfig {
                    noise: base.noise,
                    pvt: base.pvt,
                    sample_clock_hz: base.sample_clock_hz,
                    seed: base.seed,
                    process_seed: base.process_seed,
                    ro1_stages: base.ro1_stages,
                    warmup_edges: base.warmup_edges,
                    ..CircuitConfig::hybrid_unit_array(value as usize)
                };
            }
        }
        if self.is_integer() && (value.fract() != 0.0 || value < 1.0) {
            return Err(CliError::Usage(format!(
                "{} value {value} must be a positive integer",
                self.name()
            )));
        }
        if matches!(self, SweepAxis::Temperature | SweepAxis::Voltage) {
            PvtCondition::new(cfg.pvt.temperature_c, cfg.pvt.voltage_v)
                .map_err(|e| CliError::Usage(format!("{} value {value}: {e}", self.name())))?;
        }
        cfg.validate()
            .map_err(|e| CliError::Usage(format!("{} value {value}: {e}", self.name())))?;
        Ok(cfg)
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "temperature" => Ok(SweepAxis::Temperature),
            "voltage" => Ok(SweepAxis::Voltage),
            "xor_count" => Ok(SweepAxis::XorCount),
            "ro1_stages" => Ok(SweepAxis::Ro1Stages),
            other => Err(CliError::Usage(format!("unknown sweep axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub repeats: usize,
}

impl SweepSpec {
    /// `values` is `a,b,c` or an inclusive integer range `a..b`.
    pub fn parse(axis: SweepAxis, values: &str, repeats: usize) -> Result<Self, CliError> {
        let values = if let Some((a, b)) = values.split_once("..") {
            let a: i64 = a
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad range start '{a}'")))?;
            let b: i64 = b
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad range end '{b}'")))?;
            if a <= b {
                (a..=b).map(|v| v as f64).collect()
            } else {
                (b..=a).rev().map(|v| v as f64).collect()
            }
        } else {
            values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| CliError::Usage(format!("bad sweep value '{v}'")))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        let spec = SweepSpec { axis, values, repeats };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.values.is_empty() {
            return Err(CliError::Usage("sweep needs at least one value".into()));
        }
        if self.repeats == 0 {
            return Err(CliError::Usage("repeats must be at least 1".into()));
        }
        let inc = self.values.windows(2).all(|w| w[0] < w[1]);
        let dec = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(inc || dec) {
            return Err(CliError::Usage("sweep values must be strictly monotone".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Usage("sweep values must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: &'static str,
    pub value: f64,
    pub repeat: usize,
    pub seed: u64,
    pub mcv_h_min: f64,
    pub bias_percent: f64,
    /// Absent when the stream is constant.
    pub max_abs_acf: Option<f64>,
}

/// Every (value, repeat) configuration, validated up front. Row `i` uses
/// seed `base.seed + i`.
pub fn plan(base: &CircuitConfig, spec: &SweepSpec) -> Result<Vec<(f64, usize, CircuitConfig)>, CliError> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.values.len() * spec.repeats);
    for &v in &spec.values {
        let cfg = spec.axis.apply(base, v)?;
        for r in 0..spec.repeats {
            let seed = base.seed.wrapping_add(out.len() as u64);
            out.push((v, r, CircuitConfig { seed, ..cfg.clone() }));
        }
    }
    Ok(out)
}

pub fn run_sweep(base: &CircuitConfig, spec: &SweepSpec, bits: usize) -> Result<Vec<SweepRow>, CliError> {
    if bits < MIN_SWEEP_BITS {
        return Err(StatsError::InsufficientData {
            test: "sweep".into(),
            needed: MIN_SWEEP_BITS,
            got: bits,
        }
        .into());
    }
    let jobs = plan(base, spec)?;
    let axis = spec.axis.name();
    jobs.par_iter()
        .map(|(value, repeat, cfg)| {
            let s = generate(cfg, bits)?;
            let ones = s.count_ones() as u64;
            let max_abs_acf = match acf(&s, SWEEP_ACF_LAGS) {
                Ok(a) => Some(a.max_abs()),
                Err(StatsError::Degenerate(_)) => None,
                Err(e) => return Err(e.into()),
            };
            Ok(SweepRow {
                axis,
                value: *value,
                repeat: *repeat,
                seed: cfg.seed,
                mcv_h_min: mcv_estimate(&s)?.h_min,
                bias_percent: bias_percent(ones, s.len() as u64 - ones)?,
                max_abs_acf,
            })
        })
        .collect()
}
