//! Scalar helpers shared by every module: log-factorials, compensated sums,
//! Poisson tails and the normalized Hermite recurrence.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

const LN_FACT_TABLE: usize = 1 << 15;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = NeumaierSum::default();
        t.push(0.0);
        for k in 1..LN_FACT_TABLE {
            acc.add((k as f64).ln());
            t.push(acc.value());
        }
        t
    })
}

/// `ln(n!)`. Tabulated below 32768, Stirling series above (relative error < 1e-16 there).
pub fn ln_factorial(n: usize) -> f64 {
    if n < LN_FACT_TABLE {
        return ln_fact_table()[n];
    }
    let x = n as f64;
    let x2 = x * x;
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Componentwise Neumaier sum of complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = ComplexSum::default();
        for z in iter {
            s.add(z);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// `ln Σ exp(x_i)`; returns `-inf` for an empty input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + compensated_sum(xs.iter().map(|x| (x - m).exp())).ln()
}

/// `ln(e^{-λ} λ^k / k!)`.
pub fn poisson_ln_pmf(lambda: f64, k: usize) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -lambda + k as f64 * lambda.ln() - ln_factorial(k)
}

const MAX_SERIES_TERMS: usize = 50_000_000;

/// `ln P(X <= k)` for X ~ Poisson(λ), summed downward from `k` in log form.
/// Accurate far into the lower tail where the probability underflows.
pub fn poisson_ln_cdf(lambda: f64, k: usize) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    if k as f64 >= lambda {
        let upper = poisson_upper_tail(lambda, k + 1);
        return (-upper).ln_1p();
    }
    // Terms t_{n-1} = t_n * n / λ decrease below the mode.
    let mut acc = NeumaierSum::default();
    let mut ratio = 1.0;
    let mut n = k;
    loop {
        acc.add(ratio);
        if n == 0 {
            break;
        }
        ratio *= n as f64 / lambda;
        n -= 1;
        if ratio < 1e-20 * acc.value() {
            break;
        }
    }
    poisson_ln_pmf(lambda, k) + acc.value().ln()
}

/// `P(X >= k)` for X ~ Poisson(λ), summed directly over the tail when `k > λ`.
pub fn poisson_upper_tail(lambda: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if lambda == 0.0 {
        return 0.0;
    }
    if (k as f64) <= lambda {
        return -poisson_ln_cdf(lambda, k - 1).exp_m1();
    }
    let mut acc = NeumaierSum::default();
    let mut ratio = 1.0;
    let mut n = k;
    for _ in 0..MAX_SERIES_TERMS {
        acc.add(ratio);
        n += 1;
        ratio *= lambda / n as f64;
        if ratio < 1e-20 * acc.value() {
            break;
        }
    }
    (poisson_ln_pmf(lambda, k) + acc.value().ln()).exp()
}

/// Truncation loss `1 - Σ_{n<cutoff} |⟨n|α⟩|²` of a coherent state with `|α|² = mean`.
pub fn coherent_truncation_loss(mean: f64, cutoff: usize) -> f64 {
    poisson_upper_tail(mean, cutoff)
}

/// Smallest cutoff whose coherent truncation loss is below `budget`.
pub fn required_cutoff(mean: f64, budget: f64) -> usize {
    let mut c = (mean.floor() as usize).max(1);
    if coherent_truncation_loss(mean, c) < budget {
        while c > 1 && coherent_truncation_loss(mean, c - 1) < budget {
            c -= 1;
        }
        return c;
    }
    // Double then bisect.
    let mut hi = c.max(1) * 2;
    while coherent_truncation_loss(mean, hi) >= budget {
        hi *= 2;
    }
    let mut lo = c;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if coherent_truncation_loss(mean, mid) < budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `e^{-r²/4} He_n(r) / √(n!)` for n = 0..len, by the normalized three-term recurrence
/// `h_{n+1} = (r h_n − √n h_{n−1}) / √(n+1)`. Never forms `He_n` or `n!` separately.
pub fn hermite_functions(r: f64, len: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(len);
    if len == 0 {
        return h;
    }
    h.push((-r * r / 4.0).exp());
    if len == 1 {
        return h;
    }
    h.push(r * h[0]);
    for n in 1..len - 1 {
        let nf = n as f64;
        let next = (r * h[n] - nf.sqrt() * h[n - 1]) / (nf + 1.0).sqrt();
        h.push(next);
    }
    h
}

/// Trapezoid nodes and weights on `[a, b]` with `nodes >= 2` points.
pub fn trapezoid(a: f64, b: f64, nodes: usize) -> Vec<(f64, f64)> {
    assert!(nodes >= 2, "trapezoid needs at least two nodes");
    let h = (b - a) / (nodes - 1) as f64;
    (0..nodes)
        .map(|i| {
            let x = if i == nodes - 1 { b } else { a + h * i as f64 };
            let w = if i == 0 || i == nodes - 1 { h / 2.0 } else { h };
            (x, w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert_relative_eq!(ln_factorial(5), 120f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(ln_factorial(20), 2432902008176640000f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn ln_factorial_matches_ln_gamma() {
        for &n in &[100usize, 1000, 10_000, 32_767, 32_768, 100_000] {
            let want = statrs::function::gamma::ln_gamma(n as f64 + 1.0);
            assert_relative_eq!(ln_factorial(n), want, max_relative = 1e-13);
        }
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let s = compensated_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }

    #[test]
    fn log_sum_exp_basic() {
        assert_relative_eq!(log_sum_exp(&[0.0, 0.0]), 2f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + 2f64.ln(), max_relative = 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn poisson_tails_are_complementary() {
        for &lam in &[0.3, 4.0, 64.0] {
            for k in [1usize, 3, 10, 70, 100] {
                let upper = poisson_upper_tail(lam, k);
                let lower = poisson_ln_cdf(lam, k - 1).exp();
                assert!((upper + lower - 1.0).abs() < 1e-13, "lam {lam} k {k}");
            }
        }
    }

    #[test]
    fn poisson_tail_against_direct_sum() {
        // 64 photons on average, cutoff 160: tail is tiny but representable.
        let direct: f64 = (160..400).map(|n| poisson_ln_pmf(64.0, n).exp()).sum();
        let tail = poisson_upper_tail(64.0, 160);
        assert_relative_eq!(tail, direct, max_relative = 1e-12);
        assert!(tail < 1e-10);
    }

    #[test]
    fn required_cutoff_is_minimal() {
        for &mean in &[0.25, 1.0, 16.0, 64.0] {
            let c = required_cutoff(mean, 1e-8);
            assert!(coherent_truncation_loss(mean, c) < 1e-8);
            assert!(c == 1 || coherent_truncation_loss(mean, c - 1) >= 1e-8);
        }
        assert_eq!(required_cutoff(0.0, 1e-8), 1);
    }

    #[test]
    fn hermite_functions_low_orders() {
        let r: f64 = 0.7;
        let h = hermite_functions(r, 4);
        let g = (-r * r / 4.0).exp();
        assert_relative_eq!(h[0], g, max_relative = 1e-15);
        assert_relative_eq!(h[1], r * g, max_relative = 1e-15);
        assert_relative_eq!(h[2], (r * r - 1.0) / 2f64.sqrt() * g, max_relative = 1e-14);
        assert_relative_eq!(h[3], (r.powi(3) - 3.0 * r) / 6f64.sqrt() * g, max_relative = 1e-14);
    }

    #[test]
    fn hermite_functions_stay_finite_at_high_order() {
        let h = hermite_functions(3.0, 5000);
        assert!(h.iter().all(|v| v.is_finite()));
        assert!(h[4999].abs() < 1.0);
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let s: f64 = trapezoid(-1.0, 3.0, 9).iter().map(|(x, w)| w * (2.0 * x + 1.0)).sum();
        assert_relative_eq!(s, 12.0, max_relative = 1e-14);
    }
}
