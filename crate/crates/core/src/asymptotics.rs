//! Scalar limit checks behind the kernel convergence argument.
//!
//! Every quantity with astronomically large intermediate factors (`|α|^{2j}/j!` for
//! `j ≈ 10⁴`) is carried as a log-magnitude and a phase and exponentiated once per term.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure_finite, FockError, Result};
use crate::numeric::{ln_factorial, poisson_ln_cdf, poisson_upper_tail, ComplexSum};

/// Poisson means above this are rejected by [`poisson_tail`].
pub const MAX_POISSON_MEAN: f64 = 1e12;

/// Terms below `SERIES_RELATIVE_CUTOFF × max term` for this many consecutive
/// indices end a series.
pub const SERIES_QUIET_RUN: usize = 50;
pub const SERIES_RELATIVE_CUTOFF: f64 = 1e-18;
const SERIES_MAX_TERMS: usize = 10_000_000;

/// A computed value next to the limit it should approach.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCheckResult {
    pub value: Complex64,
    pub target: Complex64,
    pub abs_error: f64,
    pub params: BTreeMap<String, f64>,
}

impl LimitCheckResult {
    fn new(value: Complex64, target: Complex64, params: &[(&str, f64)]) -> Self {
        Self {
            value,
            target,
            abs_error: (value - target).norm(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

/// Sum of `e^{ln_mag} e^{i phase}` terms with the quiet-run stopping rule.
struct LogSeries {
    acc: ComplexSum,
    max_ln: f64,
    quiet: usize,
    terms: usize,
}

impl LogSeries {
    fn new() -> Self {
        Self { acc: ComplexSum::default(), max_ln: f64::NEG_INFINITY, quiet: 0, terms: 0 }
    }

    /// Adds a term; returns `true` once the series should stop.
    fn push(&mut self, ln_mag: f64, phase: f64) -> Result<bool> {
        if ln_mag.is_nan() || ln_mag == f64::INFINITY || !phase.is_finite() {
            return Err(FockError::Precision {
                loss: f64::INFINITY,
                budget: 0.0,
                required_cutoff: self.terms,
            });
        }
        self.terms += 1;
        if ln_mag > self.max_ln {
            self.max_ln = ln_mag;
        }
        if ln_mag < self.max_ln + SERIES_RELATIVE_CUTOFF.ln() {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        if ln_mag > f64::NEG_INFINITY {
            self.acc.add(Complex64::from_polar(ln_mag.exp(), phase));
        }
        if self.terms >= SERIES_MAX_TERMS {
            return Err(FockError::Resource(format!("series did not settle in {SERIES_MAX_TERMS} terms")));
        }
        Ok(self.quiet >= SERIES_QUIET_RUN)
    }
}

/// Two-sided Poisson tail `Σ_{j ≤ m−λ√m} + Σ_{j ≥ m+λ√m}` of `e^{−m} mʲ/j!`, with the
/// Chebyshev bound `1/λ²`.
pub fn poisson_tail(m: f64, lambda: f64) -> Result<(f64, f64)> {
    ensure_finite("m", m)?;
    ensure_finite("λ", lambda)?;
    if m <= 0.0 || lambda <= 0.0 {
        return Err(FockError::InvalidParameter(format!("need m > 0 and λ > 0, got m = {m}, λ = {lambda}")));
    }
    if m > MAX_POISSON_MEAN {
        return Err(FockError::Resource(format!("mean {m} exceeds {MAX_POISSON_MEAN:e}")));
    }
    let spread = lambda * m.sqrt();
    let lo = m - spread;
    let lower = if lo >= 0.0 { poisson_ln_cdf(m, lo.floor() as usize).exp() } else { 0.0 };
    let upper = poisson_upper_tail(m, (m + spread).ceil() as usize);
    Ok((lower + upper, 1.0 / (lambda * lambda)))
}

/// `ln(e^{−M} Σ_{j ≤ θM} Mʲ/j!)`.
pub fn poisson_head_ln(big_m: f64, theta_frac: f64) -> Result<f64> {
    ensure_finite("M", big_m)?;
    ensure_finite("θ", theta_frac)?;
    if big_m <= 0.0 || !(0.0 < theta_frac && theta_frac < 1.0) {
        return Err(FockError::InvalidParameter(format!(
            "need M > 0 and 0 < θ < 1, got M = {big_m}, θ = {theta_frac}"
        )));
    }
    Ok(poisson_ln_cdf(big_m, (theta_frac * big_m).floor() as usize))
}

/// `e^{−M} Σ_{j ≤ θM} Mʲ/j!`.
pub fn poisson_head(big_m: f64, theta_frac: f64) -> Result<f64> {
    poisson_head_ln(big_m, theta_frac).map(f64::exp)
}

/// `(|α|/√(2π)) ∫_{a−π}^{a+π} g(φ) e^{(cos(φ−a)−1)|α|²} dφ` by the trapezoid rule.
pub fn dirac_sequence(g: impl Fn(f64) -> Complex64, a: f64, alpha_mag: f64, nodes: usize) -> Result<Complex64> {
    ensure_finite("a", a)?;
    ensure_finite("|α|", alpha_mag)?;
    if nodes < 1024 {
        return Err(FockError::InvalidParameter(format!("need at least 1024 nodes, got {nodes}")));
    }
    let a2 = alpha_mag * alpha_mag;
    // Periodic integrand: the trapezoid rule reduces to an equal-weight sum.
    let h = 2.0 * PI / nodes as f64;
    let sum: Complex64 = (0..nodes)
        .map(|k| {
            let t = -PI + h * k as f64;
            g(a + t) * ((t.cos() - 1.0) * a2).exp()
        })
        .collect::<ComplexSum>()
        .value();
    Ok(sum * h * alpha_mag / (2.0 * PI).sqrt())
}

/// Lower and upper bounds on the kernel mass `dirac_sequence(1, ·)` from the Gaussian
/// sandwich `e^{−φ²|α|²/2} ≤ e^{(cos φ−1)|α|²} ≤ e^{δ⁴|α|²/24} e^{−φ²|α|²/2}` on
/// `|φ| ≤ δ = |α|^{−3/4}`, plus the tail estimate outside it.
pub fn dirac_mass_bounds(alpha_mag: f64) -> Result<(f64, f64)> {
    ensure_finite("|α|", alpha_mag)?;
    if alpha_mag < 1.0 {
        return Err(FockError::InvalidParameter("need |α| ≥ 1 so that δ ≤ π/2".into()));
    }
    let a2 = alpha_mag * alpha_mag;
    let delta = alpha_mag.powf(-0.75);
    let centre = statrs::function::erf::erf(delta * alpha_mag / 2f64.sqrt());
    let lift = (delta.powi(4) * a2 / 24.0).exp();
    let tails = 2.0 * lift * (-delta * delta * a2 / 2.0).exp() * (PI - delta) * alpha_mag / (2.0 * PI).sqrt();
    Ok((centre, lift * centre + tails))
}

/// `j!/√((j+h)!(j−h)!)` against `e^{−x²/4μ}` with `h = ⌊x√(2m)/2⌋ + eps_l` and
/// `j = ⌊μm⌋ + delta_j`. `params` carries `ratio_le_one` as 1 or 0.
pub fn stirling_ratio_error(m: f64, x: f64, mu: f64, eps_l: u8, delta_j: u8) -> Result<LimitCheckResult> {
    for (n, v) in [("m", m), ("x", x), ("μ", mu)] {
        ensure_finite(n, v)?;
    }
    if m <= 0.0 || mu <= 0.0 || x < 0.0 || eps_l > 1 || delta_j > 1 {
        return Err(FockError::InvalidParameter(format!(
            "need m, μ > 0, x ≥ 0, offsets in {{0, 1}}; got m = {m}, x = {x}, μ = {mu}, ε = {eps_l}, δ = {delta_j}"
        )));
    }
    let h = (x * (2.0 * m).sqrt() / 2.0).floor() as usize + eps_l as usize;
    let j = (mu * m).floor() as usize + delta_j as usize;
    if j < h {
        return Err(FockError::Domain(format!("j = {j} is below l/2 = {h}")));
    }
    let lf = ln_factorial(j);
    let ratio = (lf - 0.5 * ln_factorial(j + h) - 0.5 * ln_factorial(j - h)).exp();
    let target = (-x * x / (4.0 * mu)).exp();
    Ok(LimitCheckResult::new(
        Complex64::new(ratio, 0.0),
        Complex64::new(target, 0.0),
        &[
            ("m", m),
            ("x", x),
            ("mu", mu),
            ("half_l", h as f64),
            ("j", j as f64),
            ("ratio_le_one", if ratio <= 1.0 { 1.0 } else { 0.0 }),
        ],
    ))
}

fn even_half(x: f64, alpha_mag: f64) -> Result<u64> {
    let l = x * alpha_mag;
    let r = l.round();
    if (l - r).abs() > 1e-9 * r.abs().max(1.0) || r < 2.0 || r % 2.0 != 0.0 {
        return Err(FockError::InvalidParameter(format!(
            "x·|α| = {l} must be a positive even integer"
        )));
    }
    Ok(r as u64 / 2)
}

/// `|(ū+ᾱ)^{l/2}/(−ū+ᾱ)^{l/2} − e^{x e^{iθ} ū}|` at `ū = u`, `α = |α|e^{iθ}`, `l = x|α|`.
pub fn poly_exp_error(u: Complex64, theta: f64, x: f64, alpha_mag: f64) -> Result<f64> {
    ensure_finite("θ", theta)?;
    let half = even_half(x, alpha_mag)? as f64;
    let abar = Complex64::from_polar(alpha_mag, -theta);
    let num = u + abar;
    let den = abar - u;
    if den == Complex64::new(0.0, 0.0) {
        return Err(FockError::Domain("pole at ū = ᾱ".into()));
    }
    let target = (Complex64::from_polar(x, theta) * u).exp();
    let value = if num == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 0.0)
    } else {
        // Principal-branch slips are multiples of 2πi and vanish under the integer power.
        let ln = num.ln() - den.ln();
        (ln * half).exp()
    };
    Ok((value - target).norm())
}

/// `log(1+w) − w` without cancellation for small `w`.
fn log1p_minus_id(w: Complex64) -> Complex64 {
    if w.norm() < 0.1 {
        let mut acc = ComplexSum::default();
        let mut p = w * w;
        for k in 2..200 {
            let t = p / k as f64;
            let t = if k % 2 == 0 { -t } else { t };
            acc.add(t);
            if t.norm() < 1e-18 * acc.value().norm() {
                break;
            }
            p *= w;
        }
        acc.value()
    } else {
        (Complex64::new(1.0, 0.0) + w).ln() - w
    }
}

/// `|m a log(1+z/m) − z a|` on the principal branch; requires `|z| < m`.
pub fn power_log_error(z: Complex64, a: Complex64, m: f64) -> Result<f64> {
    ensure_finite("m", m)?;
    if !(z.norm() < m) {
        return Err(FockError::Domain(format!("need |z| < m, got |z| = {}, m = {m}", z.norm())));
    }
    Ok(a.norm() * (m * log1p_minus_id(z / m).norm()))
}

/// `|e^{−|α|²/2} Σ_{j=0}^{l/2} e^{ijφ} (−ū²+ᾱ²)ʲ/(2ʲ j!)|` with `l/2 = ⌊x|α|/2⌋`.
pub fn head_truncation_error(u: Complex64, phi: f64, theta: f64, x: f64, alpha_mag: f64) -> Result<f64> {
    for (n, v) in [("φ", phi), ("θ", theta), ("x", x), ("|α|", alpha_mag)] {
        ensure_finite(n, v)?;
    }
    if x <= 0.0 {
        return Err(FockError::InvalidParameter(format!("need x > 0, got {x}")));
    }
    let half = (x * alpha_mag / 2.0).floor() as usize;
    let abar = Complex64::from_polar(alpha_mag, -theta);
    let w = abar * abar - u * u;
    let (lnw, argw) = (w.norm().ln(), w.arg());
    let a2 = alpha_mag * alpha_mag;
    let mut acc = ComplexSum::default();
    for j in 0..=half {
        let jf = j as f64;
        let ln_mag = if j == 0 { 0.0 } else { jf * lnw } - jf * 2f64.ln() - ln_factorial(j) - a2 / 2.0;
        acc.add(Complex64::from_polar(ln_mag.exp(), jf * (phi + argw)));
    }
    Ok(acc.value().norm())
}

/// Exact `e^{ilφ/2} ⟨α|φ,l⟩` at `ū = u` from the series
/// `e^{−|α|²/2} Σ_j e^{ijφ} √(j!)/√(2^|l|(|l|+j)!) (±ū+ᾱ)^{|l|} (−ū²+ᾱ²)ʲ/(2ʲ j!)`
/// against `e^{x e^{iθ}ū} e^{−e^{iφ}ū²/2} e^{−x²/4} e^{(cos(φ−2θ)−1)|α|²/2} e^{i sin(φ−2θ)|α|²/2}`,
/// where `l = round(x|α|)` and the target uses `x = l/|α|` so that `l = x|α|` holds exactly.
pub fn mainprop_factor_check(
    u: Complex64,
    phi: f64,
    theta: f64,
    x: f64,
    alpha_mag: f64,
) -> Result<LimitCheckResult> {
    for (n, v) in [("φ", phi), ("θ", theta), ("x", x), ("|α|", alpha_mag)] {
        ensure_finite(n, v)?;
    }
    if alpha_mag <= 0.0 {
        return Err(FockError::InvalidParameter("need |α| > 0".into()));
    }
    let l = (x * alpha_mag).round() as i64;
    let abs_l = l.unsigned_abs() as usize;
    let x_eff = l as f64 / alpha_mag;
    let abar = Complex64::from_polar(alpha_mag, -theta);
    let lin = if l >= 0 { abar + u } else { abar - u };
    let w = abar * abar - u * u;
    let a2 = alpha_mag * alpha_mag;
    let ln2 = 2f64.ln();

    let (ln_lin, arg_lin) = (lin.norm().ln(), lin.arg());
    let (ln_w, arg_w) = (w.norm().ln(), w.arg());
    let base_ln = if abs_l == 0 { 0.0 } else { abs_l as f64 * ln_lin } - 0.5 * abs_l as f64 * ln2 - a2 / 2.0;
    let base_phase = abs_l as f64 * arg_lin + l as f64 * phi / 2.0;

    let mut series = LogSeries::new();
    for j in 0.. {
        let jf = j as f64;
        let ln_mag = base_ln + if j == 0 { 0.0 } else { jf * ln_w } - jf * ln2 - 0.5 * ln_factorial(j)
            - 0.5 * ln_factorial(abs_l + j);
        let ln_mag = if lin.norm() == 0.0 && abs_l > 0 { f64::NEG_INFINITY } else { ln_mag };
        if series.push(ln_mag, base_phase + jf * (phi + arg_w))? {
            break;
        }
    }
    let value = series.acc.value();

    let eith = Complex64::from_polar(1.0, theta);
    let eiphi = Complex64::from_polar(1.0, phi);
    let d = phi - 2.0 * theta;
    let target = (eith * u * x_eff - eiphi * u * u / 2.0 - x_eff * x_eff / 4.0
        + Complex64::new((d.cos() - 1.0) * a2 / 2.0, d.sin() * a2 / 2.0))
    .exp();
    Ok(LimitCheckResult::new(
        value,
        target,
        &[
            ("u_re", u.re),
            ("u_im", u.im),
            ("phi", phi),
            ("theta", theta),
            ("x", x),
            ("x_eff", x_eff),
            ("alpha_mag", alpha_mag),
            ("l", l as f64),
            ("terms", series.terms as f64),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, contract_mode, CoherentParams};
    use crate::homodyne::phi_l_state;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `e^{−A} I_k(A)` from the power series in log form.
    fn scaled_bessel_i(k: usize, a: f64) -> f64 {
        (0..4000usize)
            .map(|n| {
                ((2 * n + k) as f64 * (a / 2.0).ln() - ln_factorial(n) - ln_factorial(n + k) - a).exp()
            })
            .sum()
    }

    #[test]
    fn chebyshev_grid() {
        for m in [10.0, 1e2, 1e3, 1e4] {
            for lambda in [1.0, 2.0, 4.0, 8.0] {
                let (tail, bound) = poisson_tail(m, lambda).unwrap();
                assert!(tail <= bound, "m {m} λ {lambda}: {tail} > {bound}");
                assert!(tail >= 0.0);
            }
        }
    }

    #[test]
    fn chebyshev_direct_sum() {
        let (tail, bound) = poisson_tail(100.0, 2.0).unwrap();
        assert_eq!(bound, 0.25);
        let direct: f64 = (0..300usize)
            .filter(|&j| j <= 80 || j >= 120)
            .map(|j| crate::numeric::poisson_ln_pmf(100.0, j).exp())
            .sum();
        assert!((tail - direct).abs() < 1e-14);
        assert!(poisson_tail(1e13, 2.0).is_err());
        assert!(poisson_tail(10.0, 1e-9).unwrap().1 > 1e17);
    }

    #[test]
    fn poisson_head_examples() {
        let h = poisson_head(10.0, 0.5).unwrap();
        assert!(h > 0.0 && h < 1.0);
        let big = poisson_head_ln(1000.0, 0.5).unwrap();
        assert!(big < -50.0 * 10f64.ln());
        assert!(poisson_head(2000.0, 0.5).unwrap() < poisson_head(1000.0, 0.5).unwrap());
        assert!(poisson_head(10.0, 1.0).is_err());
    }

    #[test]
    fn dirac_mass_matches_bessel_form() {
        for mag in [5.0f64, 10.0, 20.0] {
            let got = dirac_sequence(|_| c(1.0, 0.0), 0.0, mag, 4096).unwrap();
            let want = (2.0 * PI).sqrt() * mag * scaled_bessel_i(0, mag * mag);
            assert!((got.re - want).abs() < 1e-12, "|α| {mag}");
            let (lo, hi) = dirac_mass_bounds(mag).unwrap();
            assert!(lo <= got.re && got.re <= hi, "|α| {mag}: {lo} {} {hi}", got.re);
        }
        // The mass is 1 + 1/(8|α|²) + O(|α|⁻⁴), so |α| = 5 sits about 5e-3 above 1.
        let m5 = dirac_sequence(|_| c(1.0, 0.0), 0.0, 5.0, 4096).unwrap().re;
        assert!((m5 - 1.0 - 1.0 / 200.0).abs() < 2e-4);
    }

    #[test]
    fn dirac_cosine() {
        let e5 = (dirac_sequence(|p| c(p.cos(), 0.0), 0.0, 5.0, 4096).unwrap() - 1.0).norm();
        let e20 = (dirac_sequence(|p| c(p.cos(), 0.0), 0.0, 20.0, 4096).unwrap() - 1.0).norm();
        assert!(e20 < 1e-2);
        assert!(e20 < e5);
        let shifted = dirac_sequence(|p| c(p.cos(), p.sin()), 1.2, 20.0, 4096).unwrap();
        assert!((shifted - Complex64::from_polar(1.0, 1.2)).norm() < 1e-2);
        assert!(dirac_sequence(|_| c(1.0, 0.0), 0.0, 5.0, 512).is_err());
    }

    #[test]
    fn stirling_examples() {
        let r = stirling_ratio_error(1e3, 0.0, 1.0, 0, 0).unwrap();
        assert_eq!(r.value.re, 1.0);
        assert_eq!(r.target.re, 1.0);
        assert!(stirling_ratio_error(1e4, 1.0, 1.0, 0, 0).unwrap().abs_error < 1e-2);
        for m in [1e2, 1e3, 1e4] {
            for x in [0.5, 1.0, 2.0] {
                for mu in [0.9, 1.0, 1.1] {
                    for e in 0..2 {
                        for d in 0..2 {
                            let r = stirling_ratio_error(m, x, mu, e, d).unwrap();
                            assert!(r.value.re <= 1.0);
                            assert_eq!(r.params["ratio_le_one"], 1.0);
                        }
                    }
                }
            }
        }
        assert!(matches!(stirling_ratio_error(4.0, 10.0, 0.1, 0, 0), Err(FockError::Domain(_))));
    }

    #[test]
    fn stirling_error_shrinks() {
        // m = 2k² keeps x√(2m)/2 integral; otherwise the floor adds O(1/√m) jitter.
        let errs: Vec<f64> = [5000.0, 20000.0, 80000.0]
            .iter()
            .map(|&m| stirling_ratio_error(m, 1.0, 1.0, 0, 0).unwrap().abs_error)
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn poly_exp_examples() {
        assert_eq!(poly_exp_error(c(0.0, 0.0), 0.4, 1.0, 10.0).unwrap(), 0.0);
        assert!(poly_exp_error(c(1.0, 0.0), 0.0, 1.0, 100.0).unwrap() < 1e-2);
        let errs: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&a| poly_exp_error(c(1.0, 0.5), 0.3, 1.0, a).unwrap())
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        assert!(poly_exp_error(c(1.0, 0.0), 0.0, 1.0, 9.0).is_err());
        assert!(matches!(poly_exp_error(c(2.0, 0.0), 0.0, 1.0, 2.0), Err(FockError::Domain(_))));
    }

    #[test]
    fn poly_exp_odd_choice_diverges() {
        // Rounding l/2 down or up instead of using the even split blows up or vanishes.
        let (u, mag) = (c(1.0, 0.0), 400.0);
        let abar = c(mag, 0.0);
        let l = 401.0;
        let down = ((u + abar).ln() * l - (abar * abar - u * u).ln() * 200.0).exp().norm();
        let up = ((u + abar).ln() * l - (abar * abar - u * u).ln() * 201.0).exp().norm();
        assert!(down > 100.0 && up < 1e-2);
        assert!(((down * up).sqrt() - (l / mag * u.re).exp()).abs() < 1e-2);
    }

    #[test]
    fn power_log_examples() {
        assert_eq!(power_log_error(c(0.0, 0.0), c(1.0, 0.0), 10.0).unwrap(), 0.0);
        let e = power_log_error(c(1.0, 0.0), c(1.0, 0.0), 1e6).unwrap();
        assert!(e > 2.5e-7 && e < 1e-6);
        let base = power_log_error(c(0.7, -0.2), c(1.0, 0.0), 50.0).unwrap();
        assert_eq!(power_log_error(c(0.7, -0.2), c(3.5, 0.0), 50.0).unwrap(), 3.5 * base);
        let errs: Vec<f64> =
            [100.0, 200.0, 400.0].iter().map(|&m| power_log_error(c(2.0, 1.0), c(0.5, 1.0), m).unwrap()).collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1]);
        assert!(power_log_error(c(3.0, 0.0), c(1.0, 0.0), 2.0).is_err());
    }

    #[test]
    fn head_truncation_examples() {
        let single = head_truncation_error(c(1.0, 0.0), 0.3, 0.0, 1.0, 1.5).unwrap();
        assert!((single - (-1.125f64).exp()).abs() < 1e-15);
        let errs: Vec<f64> = [10.0, 20.0, 30.0]
            .iter()
            .map(|&a| head_truncation_error(c(1.0, 0.0), 0.3, 0.0, 1.0, a).unwrap())
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1]);
        assert!(errs[2] < 1e-10);
        for (&a, &e) in [10.0, 20.0, 30.0].iter().zip(&errs) {
            let mu = 0.5;
            let big_m = mu + a * a / 2.0;
            let bound = (mu + poisson_head_ln(big_m, 0.5).unwrap()).exp();
            assert!(e <= bound, "|α| {a}: {e} > {bound}");
        }
    }

    #[test]
    fn mainprop_at_zero_outcome_is_exact() {
        let r = mainprop_factor_check(c(0.4, -0.3), 0.7, 0.2, 0.0, 6.0).unwrap();
        assert!(r.abs_error < 1e-13 * r.target.norm().max(1e-300), "{r:?}");
    }

    #[test]
    fn mainprop_value_matches_bargmann_overlap() {
        // ⟨α|φ,l⟩ contracted in Fock space, evaluated at ū = u.
        let (mag, theta, phi, l) = (3.0, 0.4, 0.9, 3i64);
        let t = 90;
        let s = phi_l_state(phi, l, t).unwrap();
        let alpha = CoherentParams::from_polar(mag, theta).unwrap();
        let bra = coherent_state(alpha, t + 1).unwrap().into_inner();
        let f = contract_mode(&s, 1, &bra).unwrap().into_single().unwrap();
        let u = c(0.5, 0.2);
        let got = crate::fock::bargmann_eval(&f, u).unwrap() * Complex64::from_polar(1.0, l as f64 * phi / 2.0);
        let r = mainprop_factor_check(u, phi, theta, l as f64 / mag, mag).unwrap();
        assert!((got - r.value).norm() < 1e-12 * got.norm().max(1.0), "{got} vs {}", r.value);

        let s = phi_l_state(phi, -2, t).unwrap();
        let f = contract_mode(&s, 1, &bra).unwrap().into_single().unwrap();
        let got = crate::fock::bargmann_eval(&f, u).unwrap() * Complex64::from_polar(1.0, -phi);
        let r = mainprop_factor_check(u, phi, theta, -2.0 / mag, mag).unwrap();
        assert!((got - r.value).norm() < 1e-12 * got.norm().max(1.0));
    }

    #[test]
    fn mainprop_error_shrinks() {
        let e6 = mainprop_factor_check(c(0.5, 0.0), 0.0, 0.0, 1.0, 6.0).unwrap();
        let e12 = mainprop_factor_check(c(0.5, 0.0), 0.0, 0.0, 1.0, 12.0).unwrap();
        assert!(e12.abs_error < e6.abs_error, "{} vs {}", e12.abs_error, e6.abs_error);
        assert_eq!(e6.params["l"], 6.0);
    }
}
