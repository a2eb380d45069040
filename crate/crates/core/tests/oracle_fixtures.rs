//! Checks against reference values produced by `tests/fixtures/generate.py`.

use std::f64::consts::FRAC_PI_4;

use fockbench_core::homodyne::{
    braunstein_sup_error, collapse_distance, conditional_kernel, kernel_total_cutoff_required,
    limit_kernel, outcome_distribution,
};
use fockbench_core::teleport::{epr_cutoff, ideal_bell_measure, teleport_fidelity};
use fockbench_core::{coherent_state, tensor, CoherentParams, FockState};
use num_complex::Complex64;
use serde_json::Value;

fn fixture(name: &str) -> Value {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap()
}

fn coh(alpha: Complex64, cutoff: usize) -> FockState {
    coherent_state(CoherentParams::new(alpha).unwrap(), cutoff).unwrap().into_inner()
}

#[test]
fn distribution_sup_error_matches_skellam_oracle() {
    let fx = fixture("distribution.json");
    for p in fx["points"].as_array().unwrap() {
        let (mag, beta) = (f(p, "alpha_mag"), f(p, "beta"));
        let t = 200;
        let s = tensor(&coh(Complex64::new(beta, 0.0), t + 1), &coh(Complex64::new(mag, 0.0), t + 1), t);
        let d = outcome_distribution(&s.into_inner()).unwrap();
        let alpha = CoherentParams::real(mag).unwrap();
        let got = braunstein_sup_error(&d, alpha, Complex64::new(beta, 0.0)).unwrap();
        assert!((got - f(p, "sup_abs_err")).abs() < 1e-10, "|α| {mag}, β {beta}: {got}");
    }
}

#[test]
fn kernel_distance_matches_binomial_oracle() {
    let fx = fixture("kernel.json");
    let dim = fx["dim"].as_u64().unwrap() as usize;
    for p in fx["points"].as_array().unwrap() {
        let (mag, theta, l) = (f(p, "alpha_mag"), f(p, "theta"), p["l"].as_i64().unwrap());
        let alpha = CoherentParams::from_polar(mag, theta).unwrap();
        let k = conditional_kernel(l, alpha, dim, kernel_total_cutoff_required(mag, dim)).unwrap();
        let lim = limit_kernel(theta, l as f64 / mag, dim).unwrap();
        let got = (k.matrix() - lim.matrix()).norm();
        assert!((got - f(p, "frobenius")).abs() < 1e-8, "θ {theta}, l {l}: {got}");
    }
    assert!(fx["points"].as_array().unwrap().iter().any(|p| f(p, "theta") == FRAC_PI_4));
}

#[test]
fn collapse_distance_matches_eigh_oracle() {
    let fx = fixture("collapse.json");
    let t = fx["total_cutoff"].as_u64().unwrap() as usize;
    for p in fx["points"].as_array().unwrap() {
        let mag = f(p, "alpha_mag");
        let got = collapse_distance(
            Complex64::new(f(&fx, "beta"), 0.0),
            CoherentParams::real(mag).unwrap(),
            f(&fx, "a"),
            f(&fx, "b"),
            t,
        )
        .unwrap();
        assert!((got - f(p, "distance")).abs() < 1e-8, "|α| {mag}: {got}");
    }
}

#[test]
fn ideal_teleport_matches_closed_form() {
    let fx = fixture("teleport.json");
    let psi = coh(Complex64::new(f(&fx, "beta"), 0.0), 30);
    let fid = |q: f64| {
        let cut = epr_cutoff(q, 1e-12).unwrap().min(60);
        let out = ideal_bell_measure(&psi, q, 0.0, 0.0, cut).unwrap();
        teleport_fidelity(&out, &psi, Complex64::new(0.0, 0.0)).unwrap()
    };
    for (key, want) in fx["fidelity"].as_object().unwrap() {
        let q: f64 = key.parse().unwrap();
        assert!((fid(q) - want.as_f64().unwrap()).abs() < 1e-12, "q {q}");
    }
    let margin = fid(0.99) - fid(0.8);
    assert!((margin - f(&fx, "margin_over_q08")).abs() < 1e-12);
}

#[test]
fn mainprop_series_matches_extended_precision() {
    let fx = fixture("mainprop.json");
    let u = Complex64::new(f(&fx, "u"), 0.0);
    for p in fx["points"].as_array().unwrap() {
        let r = fockbench_core::asymptotics::mainprop_factor_check(u, f(&fx, "phi"), f(&fx, "theta"), f(&fx, "x"), f(p, "alpha_mag"))
            .unwrap();
        let want = Complex64::new(f(p, "value_re"), f(p, "value_im"));
        assert!((r.value - want).norm() < 1e-12, "{} vs {want}", r.value);
        assert!((r.abs_error - f(p, "abs_error")).abs() < 1e-12);
    }
}
