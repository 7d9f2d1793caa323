//! JSON and CSV report writers.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::stats::{proportion_interval, BatteryResult, TestReport, Verdict};

use super::config::ReportFormat;
use super::CliError;

pub const SCHEMA_VERSION: &str = "1";

/// Battery results of one stream, with where it came from.
#[derive(Debug, Clone, Serialize)]
pub struct StreamResult {
    pub stream: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub source: String,
    #[serde(flatten)]
    pub result: BatteryResult,
}

/// Pass count of one test over several streams.
#[derive(Debug, Clone, Serialize)]
pub struct Proportion {
    pub test_name: String,
    pub passed: usize,
    pub applicable: usize,
    pub minimum_rate: f64,
    pub verdict: Verdict,
}

/// Per-test pass proportions. A single stream must pass every test; with
/// several streams the pass rate must reach the lower end of the
/// acceptance interval.
pub fn proportions(streams: &[StreamResult]) -> Vec<Proportion> {
    let mut names: Vec<&str> = Vec::new();
    for s in streams {
        for r in &s.result.reports {
            if !names.contains(&r.test_name.as_str()) {
                names.push(&r.test_name);
            }
        }
    }
    names
        .into_iter()
        .map(|name| {
            let verdicts: Vec<Verdict> = streams
                .iter()
                .filter_map(|s| s.result.report(name).map(|r| r.verdict))
                .filter(|v| *v != Verdict::NotApplicable)
                .collect();
            let applicable = verdicts.len();
            let passed = verdicts.iter().filter(|v| **v == Verdict::Pass).count();
            let minimum_rate = if streams.len() > 1 {
                proportion_interval(applicable.max(1)).0
            } else {
                1.0
            };
            let verdict = if applicable == 0 {
                Verdict::NotApplicable
            } else if passed as f64 >= minimum_rate * applicable as f64 - 1e-12 {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            Proportion {
                test_name: name.to_string(),
                passed,
                applicable,
                minimum_rate,
                verdict,
            }
        })
        .collect()
}

/// Any failing test fails the run. Otherwise the run is not applicable
/// when some selected battery could not run at all on some stream; single
/// tests needing more data than the rest of their battery (AIS T0 on a
/// 1 Mbit stream) are reported but do not decide the outcome.
pub fn overall(streams: &[StreamResult], props: &[Proportion]) -> Verdict {
    if props.iter().any(|p| p.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if props.iter().all(|p| p.verdict == Verdict::NotApplicable)
        || streams.iter().any(|s| !s.result.undersized.is_empty())
    {
        Verdict::NotApplicable
    } else {
        Verdict::Pass
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn stat_cell(r: &TestReport) -> String {
    r.statistic.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

pub fn write_test_report<W: Write>(
    out: W,
    format: ReportFormat,
    streams: &[StreamResult],
    props: &[Proportion],
) -> Result<(), CliError> {
    match format {
        ReportFormat::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "test",
                "streams": streams,
                "proportions": props,
                "verdict": overall(streams, props),
            });
            write_json(out, &doc)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "stream",
                "seed",
                "source",
                "test_name",
                "statistic",
                "p_value",
                "bound_low",
                "bound_high",
                "verdict",
                "sample_bits",
                "blocks_passed",
                "blocks_total",
                "note",
            ])?;
            for s in streams {
                for r in &s.result.reports {
                    let (lo, hi) = r.bounds.map_or((None, None), |(a, b)| (Some(a), Some(b)));
                    let (bp, bt) = r
                        .blocks
                        .map_or((String::new(), String::new()), |(p, t)| (p.to_string(), t.to_string()));
                    w.write_record([
                        s.stream.to_string(),
                        s.seed.map(|x| x.to_string()).unwrap_or_default(),
                        s.source.clone(),
                        r.test_name.clone(),
                        stat_cell(r),
                        fmt_opt(r.p_value),
                        fmt_opt(lo),
                        fmt_opt(hi),
                        r.verdict.to_string(),
                        r.sample_bits.to_string(),
                        bp,
                        bt,
                        r.note.clone().unwrap_or_default(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

pub fn write_json<W: Write>(mut out: W, doc: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, doc).map_err(|e| CliError::Usage(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes `rows` (already in final order) as CSV or as a JSON object with
/// a `rows` array.
pub fn write_rows<W: Write, T: Serialize>(
    out: W,
    format: ReportFormat,
    command: &str,
    rows: &[T],
) -> Result<(), CliError> {
    match format {
        ReportFormat::Json => {
            let doc = json!({ "schema_version": SCHEMA_VERSION, "command": command, "rows": rows });
            write_json(out, &doc)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(i: usize, verdicts: &[Verdict]) -> StreamResult {
        let reports = verdicts
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let mut r = TestReport::from_p_value(format!("t{k}"), vec![], 0.5, 10);
                r.verdict = *v;
                r
            })
            .collect();
        StreamResult {
            stream: i,
            seed: Some(i as u64),
            source: "mem".into(),
            result: BatteryResult {
                sample_bits: 10,
                reports,
                undersized: vec![],
            },
        }
    }

    #[test]
    fn nine_of_ten_is_enough() {
        let mut streams: Vec<_> = (0..9).map(|i| stream(i, &[Verdict::Pass])).collect();
        streams.push(stream(9, &[Verdict::Fail]));
        let p = proportions(&streams);
        assert_eq!(p[0].verdict, Verdict::Pass);
        streams[0] = stream(0, &[Verdict::Fail]);
        assert_eq!(proportions(&streams)[0].verdict, Verdict::Fail);
    }

    #[test]
    fn not_applicable_only_when_a_battery_cannot_run() {
        let s = [stream(0, &[Verdict::Pass, Verdict::NotApplicable])];
        assert_eq!(overall(&s, &proportions(&s)), Verdict::Pass);
        let mut short = s.clone();
        short[0].result.undersized.push(crate::stats::Battery::Ais);
        assert_eq!(overall(&short, &proportions(&short)), Verdict::NotApplicable);
        let s = [stream(0, &[Verdict::NotApplicable])];
        assert_eq!(overall(&s, &proportions(&s)), Verdict::NotApplicable);
        let s = [stream(0, &[Verdict::Fail, Verdict::NotApplicable])];
        assert_eq!(overall(&s, &proportions(&s)), Verdict::Fail);
    }

    #[test]
    fn csv_report_is_parseable() {
        let mut buf = Vec::new();
        let s = [stream(0, &[Verdict::Pass, Verdict::Fail])];
        write_test_report(&mut buf, ReportFormat::Csv, &s, &proportions(&s)).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(rdr.records().count(), 2);
    }
}
