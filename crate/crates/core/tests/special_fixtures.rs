//! Special functions against tables produced by an arbitrary-precision
//! library (see fixtures/gen_special.py).

use dhtrng::noise::q_function;
use dhtrng::special::{erfc, gamma_q, ln_gamma};
use dhtrng::stats::ais::Ais31Bounds;
use dhtrng::stats::AIS31_BOUNDS;
use serde_json::Value;

const REL_TOL: f64 = 1e-10;

fn fixture() -> Value {
    let text = include_str!("fixtures/special_functions.json");
    serde_json::from_str(text).unwrap()
}

fn rows(v: &Value, key: &str) -> Vec<Vec<f64>> {
    v[key]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect()
}

fn check(name: &str, args: &[f64], got: f64, want: f64) {
    let err = (got - want).abs();
    let scale = want.abs().max(f64::MIN_POSITIVE);
    assert!(
        err <= REL_TOL * scale || err < 1e-300,
        "{name}{args:?}: got {got:e}, want {want:e}, rel err {:e}",
        err / scale
    );
}

#[test]
fn erfc_matches_reference() {
    for r in rows(&fixture(), "erfc") {
        check("erfc", &r[..1], erfc(r[0]), r[1]);
    }
}

#[test]
fn q_function_matches_reference() {
    for r in rows(&fixture(), "q_function") {
        check("Q", &r[..1], q_function(r[0]).unwrap(), r[1]);
    }
}

#[test]
fn gamma_q_matches_reference() {
    let rows = rows(&fixture(), "gamma_q");
    assert!(rows.len() > 100);
    for r in rows {
        check("gamma_q", &r[..2], gamma_q(r[0], r[1]), r[2]);
    }
}

#[test]
fn ln_gamma_matches_reference() {
    for r in rows(&fixture(), "ln_gamma") {
        let (got, want) = (ln_gamma(r[0]), r[1]);
        // Near the zeros of ln Γ (x = 1, 2) compare absolutely.
        assert!(
            (got - want).abs() <= REL_TOL * want.abs().max(1.0),
            "ln_gamma({}) = {got}, want {want}",
            r[0]
        );
    }
}

#[test]
fn ais31_bounds_match_fixture() {
    let text = include_str!("fixtures/ais31_bounds.json");
    let fixture: Ais31Bounds = serde_json::from_str(text).unwrap();
    assert_eq!(fixture, AIS31_BOUNDS);
}
