use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use crate::bits::{BitFormat, BitStream};
use crate::circuit::{generate as simulate, CircuitConfig};
use crate::stats::restart::prefix_hex;
use crate::stats::{restart_test, run_battery, Battery, Verdict};

use super::config::{ExperimentConfig, ReportFormat};
use super::image::render_pgm;
use super::report::{self, StreamResult};
use super::sweep::{run_sweep, SweepAxis, SweepSpec};
use super::{CliError, Common, Outcome, SEED_ENV};

/// Config file (or defaults), then `DHTRNG_SEED`, then `--seed`.
fn resolve(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Ok(raw) = std::env::var(SEED_ENV) {
        cfg.circuit.seed = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}='{raw}' is not an unsigned integer")))?;
    }
    if let Some(seed) = common.seed {
        cfg.circuit.seed = seed;
    }
    if common.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Writes through `f` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match out {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush().map_err(|e| CliError::Io {
                path: p.to_path_buf(),
                source: e,
            })
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}

pub fn generate(
    common: &Common,
    bits: Option<usize>,
    out: &Path,
    format: Option<BitFormat>,
) -> Result<Outcome, CliError> {
    let cfg = resolve(common)?;
    let n = bits.unwrap_or(cfg.bits_per_stream);
    if n == 0 {
        return Err(CliError::Usage("--bits must be at least 1".into()));
    }
    let format = format.unwrap_or_else(|| BitFormat::from_path(out));
    let start = Instant::now();
    let stream = simulate(&cfg.circuit, n)?;
    let secs = start.elapsed().as_secs_f64();
    stream.write_file(out, format).map_err(|e| match e {
        crate::bits::BitsError::Io(source) => CliError::Io {
            path: out.to_path_buf(),
            source,
        },
        other => other.into(),
    })?;
    eprintln!(
        "wrote {n} bits to {} (seed {}); simulation rate {:.0} bits/s",
        out.display(),
        cfg.circuit.seed,
        n as f64 / secs.max(1e-9)
    );
    Ok(Outcome::Pass)
}

fn outcome_of(v: Verdict) -> Outcome {
    match v {
        Verdict::Pass => Outcome::Pass,
        Verdict::Fail => Outcome::Fail,
        Verdict::NotApplicable => Outcome::NotApplicable,
    }
}

pub fn test(
    stream: Option<&Path>,
    common: &Common,
    battery: Option<&str>,
    bits: Option<usize>,
    report: Option<ReportFormat>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let cfg = resolve(common)?;
    let batteries = match battery {
        Some(list) => Battery::parse_list(list).map_err(|e| CliError::Usage(e.to_string()))?,
        None => cfg.tests.clone(),
    };
    let format = report.unwrap_or(cfg.report_format);
    let results: Vec<StreamResult> = match stream {
        Some(path) => {
            let s = BitStream::read_file(path).map_err(|e| match e {
                crate::bits::BitsError::Io(source) => CliError::Io {
                    path: path.to_path_buf(),
                    source,
                },
                other => other.into(),
            })?;
            vec![StreamResult {
                stream: 0,
                seed: None,
                source: path.display().to_string(),
                result: run_battery(&s, &batteries)?,
            }]
        }
        None => {
            let n = bits.unwrap_or(cfg.bits_per_stream);
            if n == 0 {
                return Err(CliError::Usage("--bits must be at least 1".into()));
            }
            let base = cfg.circuit.seed;
            pool(common.jobs)?.install(|| {
                (0..cfg.streams)
                    .into_par_iter()
                    .map(|i| {
                        let seed = base.wrapping_add(i as u64);
                        let circuit = CircuitConfig {
                            seed,
                            ..cfg.circuit.clone()
                        };
                        let s = simulate(&circuit, n)?;
                        Ok(StreamResult {
                            stream: i,
                            seed: Some(seed),
                            source: "simulated".into(),
                            result: run_battery(&s, &batteries)?,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })?
        }
    };
    let props = report::proportions(&results);
    let verdict = report::overall(&results, &props);
    emit(out, |w| report::write_test_report(w, format, &results, &props))?;
    if out.is_some() {
        for p in &props {
            println!("{:28} {:>4}/{:<4} {}", p.test_name, p.passed, p.applicable, p.verdict);
        }
        println!("overall: {verdict}");
    }
    Ok(outcome_of(verdict))
}

pub fn sweep(
    common: &Common,
    axis: SweepAxis,
    values: &str,
    repeats: usize,
    bits: Option<usize>,
    report: Option<ReportFormat>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let cfg = resolve(common)?;
    let spec = SweepSpec::parse(axis, values, repeats)?;
    let n = bits.unwrap_or(cfg.bits_per_stream);
    let rows = pool(common.jobs)?.install(|| run_sweep(&cfg.circuit, &spec, n))?;
    let format = report.unwrap_or(ReportFormat::Csv);
    emit(out, |w| report::write_rows(w, format, "sweep", &rows))?;
    Ok(Outcome::Pass)
}

pub fn restart(
    common: &Common,
    trials: usize,
    prefix_bits: usize,
    same_seed: bool,
    report: Option<ReportFormat>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let cfg = resolve(common)?;
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let (seeds, prefixes, verdict) = if trials == 1 {
        // A single run cannot collide with anything.
        let s = simulate(&cfg.circuit, prefix_bits.max(1))?;
        (vec![cfg.circuit.seed], vec![s], Verdict::Pass)
    } else {
        let o = pool(common.jobs)?.install(|| restart_test(&cfg.circuit, trials, prefix_bits, same_seed))?;
        let v = o.to_report().verdict;
        (o.seeds, o.prefixes, v)
    };
    let hex: Vec<String> = prefixes.iter().map(prefix_hex).collect();
    let distinct = hex.iter().collect::<std::collections::HashSet<_>>().len();
    for (i, (seed, h)) in seeds.iter().zip(&hex).enumerate() {
        println!("trial {i} seed {seed} prefix 0x{}", h.to_uppercase());
    }
    println!("distinct {distinct}/{trials}: {verdict}");
    if let Some(path) = out {
        let format = report.unwrap_or(cfg.report_format);
        let rows: Vec<_> = seeds
            .iter()
            .zip(&hex)
            .enumerate()
            .map(|(i, (s, h))| json!({ "trial": i, "seed": s, "prefix_hex": h }))
            .collect();
        match format {
            ReportFormat::Json => {
                let doc = json!({
                    "schema_version": report::SCHEMA_VERSION,
                    "command": "restart",
                    "prefix_bits": prefix_bits,
                    "same_seed": same_seed,
                    "trials": rows,
                    "distinct": distinct,
                    "verdict": verdict,
                });
                emit(Some(path), |w| report::write_json(w, &doc))?;
            }
            ReportFormat::Csv => {
                #[derive(serde::Serialize)]
                struct Row<'a> {
                    trial: usize,
                    seed: u64,
                    prefix_hex: &'a str,
                }
                let rows: Vec<Row> = seeds
                    .iter()
                    .zip(&hex)
                    .enumerate()
                    .map(|(trial, (&seed, h))| Row {
                        trial,
                        seed,
                        prefix_hex: h,
                    })
                    .collect();
                emit(Some(path), |w| {
                    report::write_rows(w, ReportFormat::Csv, "restart", &rows)
                })?;
            }
        }
    }
    Ok(outcome_of(verdict))
}

pub fn image(stream: &Path, width: usize, height: usize, out: &Path, invert: bool) -> Result<Outcome, CliError> {
    let s = BitStream::read_file(stream).map_err(|e| match e {
        crate::bits::BitsError::Io(source) => CliError::Io {
            path: stream.to_path_buf(),
            source,
        },
        other => other.into(),
    })?;
    let pgm = render_pgm(&s, width, height, invert)?;
    std::fs::write(out, pgm).map_err(|e| CliError::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    Ok(Outcome::Pass)
}
