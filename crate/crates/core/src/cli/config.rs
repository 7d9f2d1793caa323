//! Flat `key=value` experiment files.
//!
//! ```text
//! # comment
//! circuit.ro1_stages = 3
//! noise.jitter_sigma = 2e-11
//! pvt.temperature_c = 80
//! experiment.tests = ais,nist
//! ```
//!
//! Unknown keys, duplicate keys and unparsable values are errors.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::circuit::CircuitConfig;
use crate::stats::Battery;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(CliError::Usage(format!("unknown report format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub circuit: CircuitConfig,
    pub tests: Vec<Battery>,
    pub streams: usize,
    pub bits_per_stream: usize,
    pub output_dir: PathBuf,
    pub report_format: ReportFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            circuit: CircuitConfig::default(),
            tests: Battery::ALL.to_vec(),
            streams: 1,
            bits_per_stream: 1_000_000,
            output_dir: PathBuf::from("."),
            report_format: ReportFormat::Json,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{raw}'")))
}

fn flag(key: &str, raw: &str) -> Result<bool, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected a boolean, got '{raw}'"))),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, raw) = (key.trim(), raw.trim());
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {}: duplicate key {key}", lineno + 1)));
            }
            cfg.set(key, raw)
                .map_err(|e| CliError::Config(format!("line {}: {}", lineno + 1, e.message())))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, raw: &str) -> Result<(), CliError> {
        let c = &mut self.circuit;
        match key {
            "circuit.coupling_sets" => c.coupling_sets = value(key, raw)?,
            "circuit.edge_rings_per_set" => c.edge_rings_per_set = value(key, raw)?,
            "circuit.central_rings_per_set" => c.central_rings_per_set = value(key, raw)?,
            "circuit.central_ring_xor_stages" => c.central_ring_xor_stages = value(key, raw)?,
            "circuit.entropy_units_per_set" => c.entropy_units_per_set = value(key, raw)?,
            "circuit.ro1_stages" => c.ro1_stages = value(key, raw)?,
            "circuit.edge_ring_stages" => c.edge_ring_stages = value(key, raw)?,
            "circuit.sample_clock_hz" => c.sample_clock_hz = value(key, raw)?,
            "circuit.seed" => c.seed = value(key, raw)?,
            "circuit.process_seed" => c.process_seed = value(key, raw)?,
            "circuit.feedback_enabled" => c.feedback_enabled = flag(key, raw)?,
            "circuit.coupling_enabled" => c.coupling_enabled = flag(key, raw)?,
            "circuit.warmup_edges" => c.warmup_edges = value(key, raw)?,
            "noise.delay_mean" => c.noise.delay_mean = value(key, raw)?,
            "noise.jitter_sigma" => c.noise.jitter_sigma = value(key, raw)?,
            "noise.meta_sigma" => c.noise.meta_sigma = value(key, raw)?,
            "noise.hold_bias" => c.noise.hold_bias = value(key, raw)?,
            "noise.mismatch_sigma" => c.noise.mismatch_sigma = value(key, raw)?,
            "pvt.temperature_c" => c.pvt.temperature_c = value(key, raw)?,
            "pvt.voltage_v" => c.pvt.voltage_v = value(key, raw)?,
            "experiment.tests" => self.tests = Battery::parse_list(raw).map_err(|e| CliError::Config(e.to_string()))?,
            "experiment.streams" => self.streams = value(key, raw)?,
            "experiment.bits_per_stream" => self.bits_per_stream = value(key, raw)?,
            "experiment.output_dir" => self.output_dir = PathBuf::from(raw),
            "experiment.report_format" => {
                self.report_format = raw.parse().map_err(|e: CliError| CliError::Config(e.message()))?
            }
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.streams == 0 {
            return Err(CliError::Config("experiment.streams must be at least 1".into()));
        }
        if self.bits_per_stream == 0 {
            return Err(CliError::Config("experiment.bits_per_stream must be at least 1".into()));
        }
        self.circuit.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}
