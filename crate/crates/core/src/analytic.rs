//! Closed-form models of the entropy source: ring-order phase noise, XOR
//! piling-up of biased bits, randomness coverage of cascaded hybrid units,
//! and the bias percentage of a bitstream.
//!
//! The n-input XOR expectation is the exact parity probability of
//! independent bits, `(1 - Π(1 - 2μᵢ)) / 2`, which reduces to the two-input
//! form `1/2 - 2(μ₁ - 1/2)(μ₂ - 1/2)`. A frequently printed variant,
//! `(1 + ((1 - 2μ₁)(1 - 2μ₂))^(n/2)) / 2`, yields the complement of that
//! probability at n = 2 and is not used here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for probability comparisons.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("{name} = {value} is outside [0, 1]")]
    NotProbability { name: String, value: f64 },
    #[error("{name} = {value} must be strictly positive")]
    NotPositive { name: String, value: f64 },
    #[error("{0}")]
    Domain(String),
}

fn probability(name: impl Into<String>, value: f64) -> Result<f64, AnalyticError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(AnalyticError::NotProbability {
            name: name.into(),
            value,
        })
    }
}

fn positive(name: &str, value: f64) -> Result<f64, AnalyticError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(AnalyticError::NotPositive {
            name: name.into(),
            value,
        })
    }
}

/// Device and operating constants of the ring phase-noise floor (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoiseParams {
    /// Ring order.
    pub stages: f64,
    /// Oscillation frequency, Hz.
    pub f0: f64,
    /// Offset frequency, Hz.
    pub delta_f: f64,
    /// Power consumption, W.
    pub power: f64,
    /// Boltzmann constant.
    pub k: f64,
    /// Temperature, K.
    pub temperature: f64,
    pub eta: f64,
    pub vdd: f64,
    pub v: f64,
    pub i: f64,
    pub r: f64,
}

impl Default for PhaseNoiseParams {
    fn default() -> Self {
        Self {
            stages: 3.0,
            f0: 1e9,
            delta_f: 1e6,
            power: 1e-3,
            k: 1.38e-23,
            temperature: 300.0,
            eta: 1.0,
            vdd: 1.0,
            v: 1.0,
            i: 1e-3,
            r: 1e3,
        }
    }
}

/// Minimum phase noise `(8N/3η)(KT/P)(V_DD/V + V_DD/(IR))(f₀/Δf)²`.
pub fn phase_noise_floor(p: &PhaseNoiseParams) -> Result<f64, AnalyticError> {
    for (name, v) in [
        ("N", p.stages),
        ("f0", p.f0),
        ("delta_f", p.delta_f),
        ("P", p.power),
        ("K", p.k),
        ("T", p.temperature),
        ("eta", p.eta),
        ("Vdd", p.vdd),
        ("V", p.v),
        ("I", p.i),
        ("R", p.r),
    ] {
        positive(name, v)?;
    }
    let ratio = p.f0 / p.delta_f;
    Ok(8.0 * p.stages / (3.0 * p.eta)
        * (p.k * p.temperature / p.power)
        * (p.vdd / p.v + p.vdd / (p.i * p.r))
        * ratio
        * ratio)
}

/// Probability that the XOR of two independent bits with means `mu1`,
/// `mu2` is one.
pub fn xor2_expectation(mu1: f64, mu2: f64) -> Result<f64, AnalyticError> {
    probability("mu1", mu1)?;
    probability("mu2", mu2)?;
    Ok(0.5 - 2.0 * (mu1 - 0.5) * (mu2 - 0.5))
}

/// Probability that the XOR of independent bits with the given means is one.
pub fn xor_n_expectation(mus: &[f64]) -> Result<f64, AnalyticError> {
    if mus.is_empty() {
        return Err(AnalyticError::Domain("at least one input mean is required".into()));
    }
    let mut prod = 1.0;
    for (i, &mu) in mus.iter().enumerate() {
        probability(format!("mu[{i}]"), mu)?;
        prod *= 1.0 - 2.0 * mu;
    }
    Ok((1.0 - prod) / 2.0)
}

/// Inputs of the randomness-coverage model of `n` cascaded hybrid units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageParams {
    /// Probability of a jitter event per edge of the free-running ring.
    pub a: f64,
    /// Jitter widths, seconds.
    pub w: Vec<f64>,
    /// Free-running ring periods, seconds.
    pub t_ro: Vec<f64>,
    /// Probability of sampling a subthreshold level in the hold region.
    pub tau: f64,
    /// Transition edge width in the oscillation region, seconds.
    pub epsilon: f64,
    /// Oscillation frequencies, Hz.
    pub f: Vec<f64>,
}

impl CoverageParams {
    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        let n = self.w.len();
        if n == 0 || self.t_ro.len() != n || self.f.len() != n {
            return Err(AnalyticError::Domain(format!(
                "w, t_ro and f must have the same non-zero length (got {}, {}, {})",
                n,
                self.t_ro.len(),
                self.f.len()
            )));
        }
        probability("a", self.a)?;
        probability("tau", self.tau)?;
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(AnalyticError::Domain(format!(
                "epsilon = {} must be non-negative",
                self.epsilon
            )));
        }
        for i in 0..n {
            positive(&format!("t_ro[{i}]"), self.t_ro[i])?;
            positive(&format!("f[{i}]"), self.f[i])?;
            if !(self.w[i].is_finite() && self.w[i] >= 0.0) {
                return Err(AnalyticError::Domain(format!(
                    "w[{i}] = {} must be non-negative",
                    self.w[i]
                )));
            }
        }
        Ok(())
    }
}

/// `1 - Π (1 - 2a·wᵢ/T_roᵢ)(1 - (τ + 2ε·fᵢ))`.
pub fn randomness_coverage(p: &CoverageParams) -> Result<f64, AnalyticError> {
    p.validate()?;
    let mut prod = 1.0;
    for i in 0..p.n() {
        let jitter = probability(format!("2a*w[{i}]/t_ro[{i}]"), 2.0 * p.a * p.w[i] / p.t_ro[i])?;
        let hold = probability(format!("tau+2*epsilon*f[{i}]"), p.tau + 2.0 * p.epsilon * p.f[i])?;
        prod *= (1.0 - jitter) * (1.0 - hold);
    }
    Ok(1.0 - prod)
}

/// `|N₁ - N₀| / (N₁ + N₀) × 100`.
pub fn bias_percent(n_ones: u64, n_zeros: u64) -> Result<f64, AnalyticError> {
    let total = n_ones + n_zeros;
    if total == 0 {
        return Err(AnalyticError::Domain("bias of an empty sequence".into()));
    }
    Ok(n_ones.abs_diff(n_zeros) as f64 / total as f64 * 100.0)
}
