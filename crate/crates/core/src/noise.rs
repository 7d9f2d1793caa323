//! Stochastic device models shared by every circuit element: Gaussian gate
//! delay jitter, flip-flop metastability resolution, and first-order PVT
//! scaling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special;

/// Random source owned by one circuit element.
pub type NoiseRng = ChaCha8Rng;

/// Sampling edges farther than this many `meta_sigma` from any data
/// transition capture the settled level.
pub const META_WINDOW_SIGMAS: f64 = 6.0;

/// Nominal operating point at which [`apply_pvt`] is the identity.
pub const NOMINAL_TEMPERATURE_C: f64 = 20.0;
pub const NOMINAL_VOLTAGE_V: f64 = 1.0;

/// Lower bound on any PVT scale factor.
const MIN_PVT_SCALE: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("invalid noise parameter {name}: {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("input must be finite, got {0}")]
    NonFinite(f64),
    #[error("operating condition out of range: {0}")]
    Pvt(String),
}

/// Physical noise parameters. Times are in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Mean propagation delay of one gate.
    pub delay_mean: f64,
    /// Standard deviation of the per-transition Gaussian delay perturbation.
    pub jitter_sigma: f64,
    /// Scale of the flip-flop setup/hold window.
    pub meta_sigma: f64,
    /// Probability that a hold-loop latch resolves to 1 when it captures a
    /// transition.
    pub hold_bias: f64,
    /// Relative standard deviation of the static per-gate delay mismatch
    /// (process variation). Drawn once per gate from the process seed.
    pub mismatch_sigma: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            delay_mean: 4.0e-10,
            jitter_sigma: 2.0e-11,
            meta_sigma: 1.0e-11,
            hold_bias: 0.5,
            mismatch_sigma: 0.05,
        }
    }
}

impl NoiseParams {
    /// Every randomness source switched off. Used for negative controls.
    pub fn noiseless(delay_mean: f64) -> Self {
        Self {
            delay_mean,
            jitter_sigma: 0.0,
            meta_sigma: 0.0,
            hold_bias: 0.0,
            mismatch_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        let bad = |name, value| Err(NoiseError::InvalidParam { name, value });
        if !(self.delay_mean.is_finite() && self.delay_mean > 0.0) {
            return bad("delay_mean", self.delay_mean);
        }
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return bad("jitter_sigma", self.jitter_sigma);
        }
        if !(self.meta_sigma.is_finite() && self.meta_sigma >= 0.0) {
            return bad("meta_sigma", self.meta_sigma);
        }
        if !(0.0..=1.0).contains(&self.hold_bias) {
            return bad("hold_bias", self.hold_bias);
        }
        if !(self.mismatch_sigma.is_finite() && (0.0..0.5).contains(&self.mismatch_sigma)) {
            return bad("mismatch_sigma", self.mismatch_sigma);
        }
        Ok(())
    }

    /// Half-width of the metastability window in seconds.
    pub fn meta_window(&self) -> f64 {
        META_WINDOW_SIGMAS * self.meta_sigma
    }
}

/// Operating temperature and supply voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvtCondition {
    pub temperature_c: f64,
    pub voltage_v: f64,
}

impl Default for PvtCondition {
    fn default() -> Self {
        Self::nominal()
    }
}

impl PvtCondition {
    pub fn nominal() -> Self {
        Self {
            temperature_c: NOMINAL_TEMPERATURE_C,
            voltage_v: NOMINAL_VOLTAGE_V,
        }
    }

    pub fn new(temperature_c: f64, voltage_v: f64) -> Result<Self, NoiseError> {
        let cond = Self {
            temperature_c,
            voltage_v,
        };
        cond.validate()?;
        Ok(cond)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(-55.0..=125.0).contains(&self.temperature_c) {
            return Err(NoiseError::Pvt(format!(
                "temperature {} C outside [-55, 125]",
                self.temperature_c
            )));
        }
        if !(self.voltage_v.is_finite() && self.voltage_v > 0.0) {
            return Err(NoiseError::Pvt(format!(
                "voltage {} V must be positive",
                self.voltage_v
            )));
        }
        Ok(())
    }
}

/// Linear PVT sensitivities, relative to the nominal condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvtCoefficients {
    /// Fractional change of `delay_mean` per degree Celsius.
    pub delay_per_c: f64,
    /// Fractional change of `jitter_sigma` per degree Celsius.
    pub jitter_per_c: f64,
    /// Fractional change of `delay_mean` per volt.
    pub delay_per_v: f64,
}

impl Default for PvtCoefficients {
    fn default() -> Self {
        Self {
            delay_per_c: 0.002,
            jitter_per_c: 0.003,
            delay_per_v: -1.5,
        }
    }
}

/// Scales `params` to the operating condition using the default coefficients.
pub fn apply_pvt(params: NoiseParams, cond: PvtCondition) -> NoiseParams {
    apply_pvt_with(params, cond, PvtCoefficients::default())
}

pub fn apply_pvt_with(params: NoiseParams, cond: PvtCondition, coef: PvtCoefficients) -> NoiseParams {
    let dt = cond.temperature_c - NOMINAL_TEMPERATURE_C;
    let dv = cond.voltage_v - NOMINAL_VOLTAGE_V;
    let scale = |s: f64| s.max(MIN_PVT_SCALE);
    NoiseParams {
        delay_mean: params.delay_mean * scale(1.0 + coef.delay_per_c * dt) * scale(1.0 + coef.delay_per_v * dv),
        jitter_sigma: params.jitter_sigma * scale(1.0 + coef.jitter_per_c * dt),
        ..params
    }
}

/// Independent deterministic substream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> NoiseRng {
    let mut rng = NoiseRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `max(mean / 100, mean + N(0, sigma²))`.
pub fn sample_delay<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return mean;
    }
    let z: f64 = rng.sample(StandardNormal);
    (mean + sigma * z).max(mean / 100.0)
}

/// One gate propagation delay in seconds; always strictly positive.
pub fn sample_gate_delay<R: Rng + ?Sized>(params: &NoiseParams, rng: &mut R) -> f64 {
    sample_delay(params.delay_mean, params.jitter_sigma, rng)
}

/// Gaussian upper-tail probability `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> Result<f64, NoiseError> {
    if !x.is_finite() {
        return Err(NoiseError::NonFinite(x));
    }
    Ok(0.5 * special::erfc(x / std::f64::consts::SQRT_2))
}

/// Direction of the data transition nearest to a sampling edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Rising,
    Falling,
}

/// Probability that a flip-flop captures 1 when the nearest data transition
/// is `delta` seconds after the sampling edge (negative: before it).
pub fn capture_one_probability(delta: f64, transition: Transition, params: &NoiseParams) -> f64 {
    let sigma = params.meta_sigma;
    // Rising: 1 only once the transition has happened.
    let p_rising = if sigma == 0.0 || delta.abs() > META_WINDOW_SIGMAS * sigma {
        if delta <= 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        0.5 * special::erfc(delta / sigma / std::f64::consts::SQRT_2)
    };
    match transition {
        Transition::Rising => p_rising,
        Transition::Falling => 1.0 - p_rising,
    }
}

/// Resolves a flip-flop capture near a data transition.
pub fn metastable_resolve<R: Rng + ?Sized>(
    delta: f64,
    transition: Transition,
    params: &NoiseParams,
    rng: &mut R,
) -> bool {
    let p = capture_one_probability(delta, transition, params);
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.random::<f64>() < p
    }
}
