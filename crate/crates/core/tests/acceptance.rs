//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints one `criterion N: PASS` or `criterion N: FAIL` line with
//! the measured quantities; the process exits nonzero if any criterion
//! fails or panics.

use std::panic::catch_unwind;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use dhtrng::analytic::xor_n_expectation;
use dhtrng::bits::BitStream;
use dhtrng::cli::sweep::run_sweep;
use dhtrng::cli::{SweepAxis, SweepSpec};
use dhtrng::noise::{metastable_resolve, q_function, NoiseParams, NoiseRng, PvtCondition, Transition};
use dhtrng::stats::{
    acf, autocorr_t5, collision_estimate, detect_period, disjointness_t0, longrun_t4, mcv_estimate, monobit_t1,
    nist_approx_entropy, nist_block_frequency, nist_cusum, nist_frequency, nist_longest_run, nist_runs, nist_serial,
    poker_t2, restart_test, runs_t3, TestReport, Verdict,
};
use dhtrng::{generate, CircuitConfig};

const STREAMS: u64 = 10;
const STREAM_BITS: usize = 1_000_000;
const AIS_BITS: usize = 7_200_000;

const XOR_ORACLE_TOL: f64 = 1e-12;
const XOR_ORACLE_BUDGET: Duration = Duration::from_secs(10);
const Q_QUADRATURE_TOL: f64 = 1e-10;
const META_TRIALS: u64 = 100_000;
const META_SIGMAS: f64 = 4.0;
const NEGATIVE_CONTROL_BITS: usize = 1 << 16;
const NEGATIVE_CONTROL_MAX_PERIOD: usize = 1 << 14;
const NEGATIVE_CONTROL_BUDGET: Duration = Duration::from_secs(60);
const MCV_FLOOR: f64 = 0.97;
const COLLISION_FLOOR: f64 = 0.90;
const ENTROPY_BUDGET: Duration = Duration::from_secs(600);
const NIST_MIN_PASSES: usize = 9;
const BIAS_CEILING_PERCENT: f64 = 0.2;
const ACF_CEILING: f64 = 0.05;
const ACF_LAGS: usize = 100;
const RESTART_TRIALS: usize = 6;
const RESTART_PREFIX: usize = 32;
const TREND_REPEATS: usize = 3;
const PVT_REPEATS: u64 = 3;
const PVT_FLOOR: f64 = 0.90;
const PVT_SE_MULTIPLE: f64 = 3.0;
const FREQUENCY_EXAMPLE_P: f64 = 0.109599;
const FREQUENCY_EXAMPLE_TOL: f64 = 1e-6;

fn record(criterion: u32, ok: bool, detail: impl std::fmt::Display) -> bool {
    println!("criterion {criterion}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    ok
}

struct Corpus {
    streams: Vec<BitStream>,
    first_stream_time: Duration,
}

/// Ten default-configuration streams, seeds 1..=10.
fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut first_stream_time = Duration::ZERO;
        let streams = (1..=STREAMS)
            .map(|seed| {
                let start = Instant::now();
                let s = generate(
                    &CircuitConfig {
                        seed,
                        ..CircuitConfig::default()
                    },
                    STREAM_BITS,
                )
                .unwrap();
                if seed == 1 {
                    first_stream_time = start.elapsed();
                }
                s
            })
            .collect();
        Corpus {
            streams,
            first_stream_time,
        }
    })
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Parity-one probability summed over all 2ⁿ outcomes.
fn xor_by_enumeration(mus: &[f64]) -> f64 {
    (0u32..1 << mus.len())
        .filter(|x| x.count_ones() % 2 == 1)
        .map(|x| {
            mus.iter()
                .enumerate()
                .map(|(i, &mu)| if x >> i & 1 == 1 { mu } else { 1.0 - mu })
                .product::<f64>()
        })
        .sum()
}

fn criterion_01_xor_expectation_matches_enumeration() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 1..=12 {
        for _ in 0..200 {
            let mus: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let err = (xor_n_expectation(&mus).unwrap() - xor_by_enumeration(&mus)).abs();
            worst = worst.max(err);
            cases += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = worst <= XOR_ORACLE_TOL && elapsed < XOR_ORACLE_BUDGET;
    record(1, ok, format!("{cases} vectors, max error {worst:.2e}, {elapsed:.2?}"))
}

/// Composite Simpson estimate of the standard normal upper tail from `x`
/// to 40.
fn q_by_simpson(x: f64) -> f64 {
    let (a, b) = (x, 40.0);
    let n = 400_000;
    let h = (b - a) / n as f64;
    let pdf = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = pdf(a) + pdf(b);
    for i in 1..n {
        sum += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

fn criterion_02_metastability_matches_gaussian_tail() -> bool {
    let mut worst_rel = 0.0f64;
    for i in 0..=64 {
        let x = -8.0 + 0.25 * i as f64;
        let q = q_function(x).unwrap();
        let oracle = q_by_simpson(x);
        worst_rel = worst_rel.max((q - oracle).abs() / oracle);
    }
    let params = NoiseParams::default();
    let sigma = params.meta_sigma;
    let mut worst_z = 0.0f64;
    let mut rng = NoiseRng::seed_from_u64(2);
    for k in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let ones = (0..META_TRIALS)
            .filter(|_| metastable_resolve(k * sigma, Transition::Rising, &params, &mut rng))
            .count() as f64;
        let p = q_function(k).unwrap();
        let se = (p * (1.0 - p) / META_TRIALS as f64).sqrt();
        worst_z = worst_z.max((ones / META_TRIALS as f64 - p).abs() / se);
    }
    let ok = worst_rel <= Q_QUADRATURE_TOL && worst_z <= META_SIGMAS;
    record(
        2,
        ok,
        format!("quadrature max rel error {worst_rel:.2e}, resolve max |z| {worst_z:.2} over {META_TRIALS} trials"),
    )
}

fn criterion_03_noiseless_circuit_is_caught() -> bool {
    let start = Instant::now();
    let cfg = CircuitConfig {
        noise: NoiseParams::noiseless(NoiseParams::default().delay_mean),
        ..CircuitConfig::default()
    };
    let s = generate(&cfg, NEGATIVE_CONTROL_BITS).unwrap();
    let period = detect_period(&s, NEGATIVE_CONTROL_MAX_PERIOD);
    let t1 = monobit_t1(&s).unwrap();
    let freq = nist_frequency(&s).unwrap();
    let p = freq.p_value.unwrap();
    let elapsed = start.elapsed();
    let ok = period.is_some() && t1.verdict == Verdict::Fail && p < 0.01 && elapsed < NEGATIVE_CONTROL_BUDGET;
    record(
        3,
        ok,
        format!(
            "period {period:?}, T1 {}, frequency p {p:.3e}, {elapsed:.2?}",
            t1.verdict
        ),
    )
}

fn criterion_04_min_entropy_of_default_stream() -> bool {
    let c = corpus();
    let start = Instant::now();
    let s = &c.streams[0];
    let mcv = mcv_estimate(s).unwrap().h_min;
    let collision = collision_estimate(s).unwrap().h_min;
    let elapsed = c.first_stream_time + start.elapsed();
    let ok = mcv > MCV_FLOOR && collision > COLLISION_FLOOR && elapsed < ENTROPY_BUDGET;
    record(
        4,
        ok,
        format!("MCV {mcv:.4}, collision {collision:.4}, {elapsed:.2?} including simulation"),
    )
}

fn nist_reports(s: &BitStream) -> Vec<TestReport> {
    let mut v = vec![
        nist_frequency(s).unwrap(),
        nist_block_frequency(s, 128).unwrap(),
        nist_runs(s).unwrap(),
        nist_longest_run(s).unwrap(),
        nist_approx_entropy(s, 2).unwrap(),
    ];
    v.extend(nist_cusum(s).unwrap());
    v.extend(nist_serial(s, 2).unwrap());
    v
}

fn criterion_05_nist_subset_pass_proportion() -> bool {
    let per_stream: Vec<Vec<TestReport>> = corpus().streams.iter().map(nist_reports).collect();
    let mut worst = (String::new(), usize::MAX);
    let mut summary = Vec::new();
    for (i, r) in per_stream[0].iter().enumerate() {
        let passed = per_stream.iter().filter(|s| s[i].verdict == Verdict::Pass).count();
        summary.push(format!("{} {passed}/{STREAMS}", r.test_name));
        if passed < worst.1 {
            worst = (r.test_name.clone(), passed);
        }
    }
    let ok = worst.1 >= NIST_MIN_PASSES;
    println!("  {}", summary.join(", "));
    record(5, ok, format!("lowest {} at {}/{STREAMS}", worst.0, worst.1))
}

fn criterion_06_ais_subset_on_concatenated_streams() -> bool {
    let mut all = BitStream::with_capacity(AIS_BITS);
    for s in &corpus().streams {
        all.extend_from(s);
    }
    let sample = all.slice(0, AIS_BITS);
    let reports = [
        disjointness_t0(&sample).unwrap(),
        monobit_t1(&sample).unwrap(),
        poker_t2(&sample).unwrap(),
        runs_t3(&sample).unwrap(),
        longrun_t4(&sample).unwrap(),
        autocorr_t5(&sample).unwrap(),
    ];
    let summary: Vec<String> = reports
        .iter()
        .map(|r| match r.blocks {
            Some((p, t)) => format!("{} {p}/{t}", r.test_name),
            None => format!("{} {}", r.test_name, r.verdict),
        })
        .collect();
    let ok = reports.iter().all(|r| r.verdict == Verdict::Pass);
    record(6, ok, format!("{AIS_BITS} bits: {}", summary.join(", ")))
}

fn criterion_07_mean_bias() -> bool {
    let biases: Vec<f64> = corpus()
        .streams
        .iter()
        .map(|s| {
            let ones = s.count_ones() as f64;
            (2.0 * ones - s.len() as f64).abs() / s.len() as f64 * 100.0
        })
        .collect();
    let (mean, _) = mean_and_se(&biases);
    let ok = mean < BIAS_CEILING_PERCENT;
    record(7, ok, format!("mean bias {mean:.4}% over {STREAMS} streams"))
}

fn criterion_08_autocorrelation() -> bool {
    let series = acf(&corpus().streams[0], ACF_LAGS).unwrap();
    let max = series.max_abs();
    let ok = max < ACF_CEILING;
    record(8, ok, format!("max |rho| over lags 1..{ACF_LAGS} = {max:.4}"))
}

fn criterion_09_restart() -> bool {
    let cfg = CircuitConfig::default();
    let fresh = restart_test(&cfg, RESTART_TRIALS, RESTART_PREFIX, false).unwrap();
    let control = restart_test(&cfg, RESTART_TRIALS, RESTART_PREFIX, true).unwrap();
    let mut seeds = fresh.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let ok = seeds.len() == RESTART_TRIALS && fresh.all_distinct() && control.all_identical();
    record(
        9,
        ok,
        format!(
            "{} distinct seeds, fresh prefixes distinct: {}, same-seed prefixes identical: {}",
            seeds.len(),
            fresh.all_distinct(),
            control.all_identical()
        ),
    )
}

fn criterion_10_more_units_raise_min_entropy() -> bool {
    let spec = SweepSpec::parse(SweepAxis::XorCount, "9,18", TREND_REPEATS).unwrap();
    let rows = run_sweep(&CircuitConfig::default(), &spec, STREAM_BITS).unwrap();
    let at = |v: f64| {
        rows.iter()
            .filter(|r| r.value == v)
            .map(|r| r.mcv_h_min)
            .collect::<Vec<_>>()
    };
    let (m9, se9) = mean_and_se(&at(9.0));
    let (m18, se18) = mean_and_se(&at(18.0));
    let ok = m18 > m9;
    record(
        10,
        ok,
        format!("MCV mean at 9 units {m9:.5} (se {se9:.5}), at 18 units {m18:.5} (se {se18:.5})"),
    )
}

fn criterion_11_pvt_corners() -> bool {
    let point = |t: f64, v: f64| -> Vec<f64> {
        (1..=PVT_REPEATS)
            .map(|seed| {
                let cfg = CircuitConfig {
                    seed,
                    pvt: PvtCondition::new(t, v).unwrap(),
                    ..CircuitConfig::default()
                };
                mcv_estimate(&generate(&cfg, STREAM_BITS).unwrap()).unwrap().h_min
            })
            .collect()
    };
    let nominal = point(20.0, 1.0);
    let (m_nom, se_nom) = mean_and_se(&nominal);
    let mut lowest = f64::INFINITY;
    let mut best_corner = (f64::NEG_INFINITY, 0.0, (0.0, 0.0));
    let mut detail = vec![format!("nominal {m_nom:.5}")];
    for t in [-20.0, 80.0] {
        for v in [0.8, 1.2] {
            let hs = point(t, v);
            lowest = hs.iter().copied().fold(lowest, f64::min);
            let (m, se) = mean_and_se(&hs);
            detail.push(format!("({t}C, {v}V) {m:.5}"));
            if m > best_corner.0 {
                best_corner = (m, se, (t, v));
            }
        }
    }
    let slack = PVT_SE_MULTIPLE * (se_nom.powi(2) + best_corner.1.powi(2)).sqrt();
    let ok = lowest > PVT_FLOOR && m_nom >= best_corner.0 - slack;
    record(
        11,
        ok,
        format!(
            "{}; lowest corner run {lowest:.5}, nominal within {slack:.5} of best",
            detail.join(", ")
        ),
    )
}

fn criterion_12_frequency_worked_example() -> bool {
    const EPSILON: &str =
        "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";
    let p = nist_frequency(&BitStream::from_ascii(EPSILON).unwrap())
        .unwrap()
        .p_value
        .unwrap();
    let ok = (p - FREQUENCY_EXAMPLE_P).abs() < FREQUENCY_EXAMPLE_TOL;
    record(12, ok, format!("p = {p:.6}"))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> bool); 12] = [
        (1, criterion_01_xor_expectation_matches_enumeration),
        (2, criterion_02_metastability_matches_gaussian_tail),
        (3, criterion_03_noiseless_circuit_is_caught),
        (4, criterion_04_min_entropy_of_default_stream),
        (5, criterion_05_nist_subset_pass_proportion),
        (6, criterion_06_ais_subset_on_concatenated_streams),
        (7, criterion_07_mean_bias),
        (8, criterion_08_autocorrelation),
        (9, criterion_09_restart),
        (10, criterion_10_more_units_raise_min_entropy),
        (11, criterion_11_pvt_corners),
        (12, criterion_12_frequency_worked_example),
    ];
    let mut failed = Vec::new();
    for (n, check) in criteria {
        let ok = catch_unwind(check).unwrap_or_else(|_| record(n, false, "panicked"));
        if !ok {
            failed.push(n);
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
