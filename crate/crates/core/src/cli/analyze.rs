use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};

use crate::analytic::{
    bias_percent, phase_noise_floor, randomness_coverage, xor2_expectation, xor_n_expectation, CoverageParams,
    PhaseNoiseParams,
};
use crate::noise::NoiseRng;

use super::{CliError, Outcome};

const DEFAULT_TRIALS: u64 = 100_000;
const DEFAULT_SEED: u64 = 1;
/// Monte-Carlo estimates further than this many standard errors from the
/// closed form count as disagreement.
const MC_SIGMAS: f64 = 4.0;

struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    fn parse(raw: &[String]) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for p in raw {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("parameter '{p}' is not key=value")))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("parameter '{k}' given twice")));
            }
        }
        Ok(Params { map })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.take(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("{key}: cannot parse '{v}'")))
            })
            .transpose()
    }

    fn req_f64(&mut self, key: &str) -> Result<f64, CliError> {
        self.f64(key)?
            .ok_or_else(|| CliError::Usage(format!("missing parameter {key}")))
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self
            .take(key)
            .ok_or_else(|| CliError::Usage(format!("missing parameter {key}")))?;
        raw.split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{key}: cannot parse '{v}'")))
            })
            .collect()
    }

    fn u64(&mut self, key: &str) -> Result<Option<u64>, CliError> {
        self.take(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("{key}: cannot parse '{v}'")))
            })
            .transpose()
    }

    fn finish(self) -> Result<(), CliError> {
        match self.map.keys().next() {
            Some(k) => Err(CliError::Usage(format!("unknown parameter '{k}'"))),
            None => Ok(()),
        }
    }
}

/// Fraction of `trials` draws in which the XOR of independent
/// Bernoulli(`mus`) bits is one.
fn monte_carlo_xor(mus: &[f64], trials: u64, seed: u64) -> f64 {
    let mut rng = NoiseRng::seed_from_u64(seed);
    let ones = (0..trials)
        .filter(|_| mus.iter().fold(false, |acc, &mu| acc ^ (rng.random::<f64>() < mu)))
        .count();
    ones as f64 / trials as f64
}

fn report_xor(mus: &[f64], value: f64, trials: u64, seed: u64) -> Outcome {
    println!("value {value}");
    let est = monte_carlo_xor(mus, trials, seed);
    let se = (value * (1.0 - value) / trials as f64).sqrt();
    let z = if se > 0.0 {
        (est - value) / se
    } else if est == value {
        0.0
    } else {
        f64::INFINITY
    };
    let agree = z.abs() <= MC_SIGMAS;
    println!("monte_carlo {est} trials {trials} seed {seed} std_error {se:.3e} z {z:.3}");
    println!("agreement {}", if agree { "within 4 sigma" } else { "outside 4 sigma" });
    if agree {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

pub fn analyze(formula: &str, raw: &[String], seed: Option<u64>) -> Result<Outcome, CliError> {
    let mut p = Params::parse(raw)?;
    let seed = seed.unwrap_or(DEFAULT_SEED);
    println!("formula {formula}");
    let outcome = match formula {
        "xor2" => {
            let (mu1, mu2) = (p.req_f64("mu1")?, p.req_f64("mu2")?);
            let trials = p.u64("trials")?.unwrap_or(DEFAULT_TRIALS);
            p.finish()?;
            let v = xor2_expectation(mu1, mu2)?;
            report_xor(&[mu1, mu2], v, trials, seed)
        }
        "xorn" => {
            let mus = p.list("mus")?;
            let trials = p.u64("trials")?.unwrap_or(DEFAULT_TRIALS);
            p.finish()?;
            let v = xor_n_expectation(&mus)?;
            report_xor(&mus, v, trials, seed)
        }
        "coverage" => {
            let a = p.req_f64("a")?;
            let tau = p.req_f64("tau")?;
            let epsilon = p.req_f64("epsilon")?;
            let (mut w, mut t_ro, mut f) = (p.list("w")?, p.list("t_ro")?, p.list("f")?);
            p.finish()?;
            // Single values broadcast over the unit count.
            let n = w.len().max(t_ro.len()).max(f.len());
            for v in [&mut w, &mut t_ro, &mut f] {
                if v.len() == 1 {
                    *v = vec![v[0]; n];
                }
            }
            let params = CoverageParams {
                a,
                w,
                t_ro,
                tau,
                epsilon,
                f,
            };
            println!("units {n}");
            println!("value {}", randomness_coverage(&params)?);
            Outcome::Pass
        }
        "phasenoise" => {
            let d = PhaseNoiseParams::default();
            let params = PhaseNoiseParams {
                stages: p.f64("stages")?.unwrap_or(d.stages),
                f0: p.f64("f0")?.unwrap_or(d.f0),
                delta_f: p.f64("delta_f")?.unwrap_or(d.delta_f),
                power: p.f64("power")?.unwrap_or(d.power),
                k: p.f64("k")?.unwrap_or(d.k),
                temperature: p.f64("temperature")?.unwrap_or(d.temperature),
                eta: p.f64("eta")?.unwrap_or(d.eta),
                vdd: p.f64("vdd")?.unwrap_or(d.vdd),
                v: p.f64("v")?.unwrap_or(d.v),
                i: p.f64("i")?.unwrap_or(d.i),
                r: p.f64("r")?.unwrap_or(d.r),
            };
            p.finish()?;
            println!("value {:e}", phase_noise_floor(&params)?);
            Outcome::Pass
        }
        "bias" => {
            let ones = p
                .u64("ones")?
                .ok_or_else(|| CliError::Usage("missing parameter ones".into()))?;
            let zeros = p
                .u64("zeros")?
                .ok_or_else(|| CliError::Usage("missing parameter zeros".into()))?;
            p.finish()?;
            println!("value {}", bias_percent(ones, zeros)?);
            Outcome::Pass
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown formula '{other}' (expected xor2, xorn, coverage, phasenoise or bias)"
            )))
        }
    };
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monte_carlo_is_close_to_closed_form() {
        let est = monte_carlo_xor(&[0.6, 0.7], 200_000, 3);
        assert!((est - 0.46).abs() < 4.0 * (0.46f64 * 0.54 / 200_000.0).sqrt());
    }

    #[test]
    fn params_reject_unknown_and_duplicates() {
        let raw = vec!["a=1".to_string(), "a=2".to_string()];
        assert!(Params::parse(&raw).is_err());
        let mut p = Params::parse(&["mu1=0.5".to_string(), "zz=1".to_string()]).unwrap();
        p.req_f64("mu1").unwrap();
        assert!(p.finish().is_err());
    }
}
