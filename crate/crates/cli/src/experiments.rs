//! One function per experiment. Each returns a [`Report`] and writes nothing.

use std::f64::consts::FRAC_PI_4;

use fockbench_core::asymptotics::{
    dirac_mass_bounds, dirac_sequence, head_truncation_error, mainprop_factor_check, poisson_head,
    poisson_tail, poly_exp_error, power_log_error, stirling_ratio_error,
};
use fockbench_core::homodyne::{
    braunstein_density, braunstein_sup_error, collapse_distance, conditional_kernel, kernel_total_cutoff_required,
    limit_kernel, outcome_distribution, outcome_for, phase_integral_defect, phi_zero_overlap_defect, projector_l,
    xi_operator, OutcomeDistribution, Rounding, QUADRATURE, TRUNCATION_BUDGET,
};
use fockbench_core::numeric::{coherent_truncation_loss, poisson_ln_pmf};
use fockbench_core::operators::{beamsplitter, BlockOperator};
use fockbench_core::teleport::{
    density_fidelity, epr_cutoff, homodyne_bell_measure, ideal_bell_measure, outcome_to_quadratures,
    quadratures_to_outcome, teleport_fidelity, TeleportCutoffs,
};
use fockbench_core::{coherent_state, tensor, CoherentParams, FockError, FockState, MultiModeState};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::report::{Cell, Check, Report, Table};

type Result<T> = std::result::Result<T, FockError>;

/// Options shared by every experiment that are not part of the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub rounding: Rounding,
}

/// Single-mode cutoff `⌈m² + 8m + 16⌉` for a coherent amplitude of modulus `m`.
pub fn default_single_cutoff(mag: f64) -> usize {
    (mag * mag + 8.0 * mag + 16.0).ceil() as usize
}

/// Two-mode total cutoff: the oscillator's single-mode cutoff plus the signal's.
pub fn default_total_cutoff(lo_mag: f64, signal_mag: f64) -> usize {
    default_single_cutoff(lo_mag) + default_single_cutoff(signal_mag)
}

/// Weight of `|β⟩⊗|α⟩` above total photon number `total`.
pub fn product_loss(alpha2: f64, beta2: f64, total: usize) -> f64 {
    let mut loss = coherent_truncation_loss(beta2, total + 1);
    for m in 0..=total {
        let p = poisson_ln_pmf(beta2, m).exp();
        if p == 0.0 {
            continue;
        }
        loss += p * coherent_truncation_loss(alpha2, total - m + 1);
    }
    loss
}

/// Rejects `total` when the product loss exceeds the budget, naming the smallest
/// total cutoff that passes.
pub fn check_product_budget(alpha2: f64, beta2: f64, total: usize) -> Result<f64> {
    let loss = product_loss(alpha2, beta2, total);
    if loss <= TRUNCATION_BUDGET {
        return Ok(loss);
    }
    let mut need = total + 1;
    while product_loss(alpha2, beta2, need) > TRUNCATION_BUDGET {
        need += 1;
    }
    Err(FockError::Precision { loss, budget: TRUNCATION_BUDGET, required_cutoff: need })
}

fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    items.par_iter().map(f).collect()
}

fn coh(alpha: Complex64, cutoff: usize) -> Result<FockState> {
    Ok(coherent_state(CoherentParams::new(alpha)?, cutoff)?.into_inner())
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn or<T: Clone>(v: &Option<Vec<T>>, default: &[T]) -> Vec<T> {
    v.clone().unwrap_or_else(|| default.to_vec())
}

/// Values of `key` grouped by `group`, ordered by `key` within each group.
fn series(points: &[(f64, f64, f64)]) -> Vec<(f64, Vec<f64>)> {
    let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for &(g, k, v) in points {
        match groups.iter_mut().find(|(x, _)| *x == g) {
            Some((_, list)) => list.push((k, v)),
            None => groups.push((g, vec![(k, v)])),
        }
    }
    groups
        .into_iter()
        .map(|(g, mut list)| {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            (g, list.into_iter().map(|p| p.1).collect())
        })
        .collect()
}

pub const PHASE_TOTAL_CUTOFF: usize = 16;
const BEAMSPLITTER_ANGLES: [f64; 3] = [0.3, FRAC_PI_4, 1.1];
const GROUP_PAIRS: [(f64, f64); 3] = [(0.3, 0.5), (FRAC_PI_4, FRAC_PI_4), (1.1, -0.4)];

struct StructuralPoint {
    completeness: f64,
    orthogonality: f64,
    hermiticity: f64,
    spectral: f64,
    unitarity: f64,
    group_law: f64,
}

fn structural_point(n: usize) -> Result<StructuralPoint> {
    let n_i = n as i64;
    let projectors: Vec<BlockOperator> = (-n_i..=n_i).map(|l| projector_l(l, n)).collect::<Result<_>>()?;
    let mut sum = BlockOperator::zeros(n);
    let mut weighted = BlockOperator::zeros(n);
    let mut hermiticity = 0.0f64;
    for (p, l) in projectors.iter().zip(-n_i..) {
        sum = sum.add(p)?;
        weighted = weighted.add(&p.scaled(real(l as f64)))?;
        hermiticity = hermiticity.max(p.dagger().max_abs_diff(p)?);
    }
    let orthogonality = projectors
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let mut worst = 0.0f64;
            for (j, b) in projectors.iter().enumerate() {
                let prod = a.compose(b)?;
                let want = if i == j { a.clone() } else { BlockOperator::zeros(n) };
                worst = worst.max(prod.max_abs_diff(&want)?);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut unitarity = 0.0f64;
    for th in BEAMSPLITTER_ANGLES {
        unitarity = unitarity.max(beamsplitter(th, n)?.unitarity_defect());
    }
    let mut group_law = 0.0f64;
    for (a, b) in GROUP_PAIRS {
        let lhs = beamsplitter(a, n)?.compose(&beamsplitter(b, n)?)?;
        group_law = group_law.max(lhs.max_abs_diff(&beamsplitter(a + b, n)?)?);
    }
    Ok(StructuralPoint {
        completeness: sum.max_abs_diff(&BlockOperator::identity(n))?,
        orthogonality,
        hermiticity,
        spectral: weighted.max_abs_diff(&xi_operator(n))?,
        unitarity,
        group_law,
    })
}

pub fn structural(cfg: &ExperimentConfig, _opts: RunOptions) -> Result<Report> {
    let tol = &cfg.tolerance;
    let n_tot = or(&cfg.sweep.n_tot, &[24]);
    let points = par_map(&n_tot, |&n| structural_point(n))?;
    let mut t = Table::new(
        "structural.csv",
        &[
            ("total_cutoff", "largest total photon number N_tot"),
            ("check", "identity being tested"),
            ("param", "outcome l or angle, when the check has one"),
            ("deviation", "largest entrywise deviation from the identity"),
            ("tolerance", "allowed deviation"),
            ("pass", "deviation <= tolerance"),
        ],
    );
    let mut report = Report::default();
    let mut row = |report: &mut Report, n: usize, name: &str, param: Cell, dev: f64, tolv: f64| {
        let c = Check::within(format!("{name} (N_tot={n})"), dev, tolv);
        t.push(vec![n.into(), name.into(), param, dev.into(), tolv.into(), c.pass.into()]);
        report.checks.push(c);
    };
    for (&n, p) in n_tot.iter().zip(&points) {
        row(&mut report, n, "sum_l projector = identity", "".into(), p.completeness, tol.projector());
        row(&mut report, n, "projector products = delta projector", "".into(), p.orthogonality, tol.projector());
        row(&mut report, n, "projector hermitian", "".into(), p.hermiticity, tol.projector());
        row(&mut report, n, "sum_l l projector = xi", "".into(), p.spectral, tol.projector());
        row(&mut report, n, "beamsplitter unitary", "".into(), p.unitarity, tol.unitary());
        row(&mut report, n, "beamsplitter group law", "".into(), p.group_law, tol.group_law());
    }
    let ls = or(&cfg.sweep.l, &[0, 1, 2, 5]);
    let phase = par_map(&ls, |&l| phase_integral_defect(l, PHASE_TOTAL_CUTOFF, QUADRATURE.phase_nodes))?;
    for (&l, &d) in ls.iter().zip(&phase) {
        row(&mut report, PHASE_TOTAL_CUTOFF, "phase integral = projector", l.into(), d, tol.phase_integral());
    }
    for phi in [0.0, 0.4, -2.1] {
        let d = phi_zero_overlap_defect(real(2.0), phi, 60, 16)?;
        row(&mut report, 60, "phi=0 overlap closed form", phi.into(), d, tol.closed_form());
    }
    report.tables.push(t);
    Ok(report)
}

pub fn distribution(cfg: &ExperimentConfig, _opts: RunOptions) -> Result<Report> {
    let alphas = or(&cfg.sweep.alpha_mag, &[2.0, 4.0, 8.0]);
    let betas = or(&cfg.sweep.beta, &[0.0]);
    let points: Vec<(f64, f64)> = betas.iter().flat_map(|&b| alphas.iter().map(move |&a| (b, a))).collect();
    let results = par_map(&points, |&(beta, mag)| {
        let total = cfg.sweep.cutoff.unwrap_or_else(|| default_total_cutoff(mag, beta.abs()));
        let loss = check_product_budget(mag * mag, beta * beta, total)?;
        let s = tensor(&coh(real(beta), total + 1)?, &coh(real(mag), total + 1)?, total).into_inner();
        let d = outcome_distribution(&s)?;
        let alpha = CoherentParams::real(mag)?;
        let sup = braunstein_sup_error(&d, alpha, real(beta))?;
        Ok((total, loss, d, sup))
    })?;

    let mut detail = Table::new(
        "distribution.csv",
        &[
            ("alpha_mag", "oscillator amplitude |alpha|"),
            ("beta", "signal amplitude"),
            ("l", "count difference outcome"),
            ("x", "l/|alpha|"),
            ("prob", "exact P(l)"),
            ("gauss_density", "Gaussian limit density at x"),
            ("abs_err", "||alpha| P(l) - gauss_density|"),
        ],
    );
    let mut summary = Table::new(
        "distribution_summary.csv",
        &[
            ("alpha_mag", "oscillator amplitude |alpha|"),
            ("beta", "signal amplitude"),
            ("total_cutoff", "total photon-number cutoff"),
            ("truncation_loss", "discarded probability"),
            ("sup_abs_err", "max over l of abs_err"),
        ],
    );
    let mut sups = Vec::new();
    for (&(beta, mag), (total, loss, d, sup)) in points.iter().zip(&results) {
        let alpha = CoherentParams::real(mag)?;
        for (&l, &p) in d.probs() {
            let x = l as f64 / mag;
            let g = braunstein_density(x, alpha, real(beta))?;
            detail.push(vec![mag.into(), beta.into(), l.into(), x.into(), p.into(), g.into(), (mag * p - g).abs().into()]);
        }
        summary.push(vec![mag.into(), beta.into(), (*total).into(), (*loss).into(), (*sup).into()]);
        sups.push((beta, mag, *sup));
    }
    let mut report = Report { tables: vec![detail, summary], ..Default::default() };
    for (beta, values) in series(&sups) {
        report.checks.push(Check::monotone(format!("sup error decreasing in |alpha| (beta={beta})"), &values, true));
    }
    report.fixtures.push("crates/core/tests/fixtures/distribution.json".into());
    Ok(report)
}

pub fn collapse(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Report> {
    let alphas = or(&cfg.sweep.alpha_mag, &[2.0, 4.0, 6.0, 8.0]);
    let xs = or(&cfg.sweep.x, &[0.0, 0.5, 1.0]);
    let thetas = or(&cfg.sweep.theta, &[0.0, FRAC_PI_4]);
    let dim = cfg.sweep.kernel_dim.unwrap_or(6);
    let mut points = Vec::new();
    for &th in &thetas {
        for &x in &xs {
            for &a in &alphas {
                points.push((th, x, a));
            }
        }
    }
    let results = par_map(&points, |&(th, x, mag)| {
        let l = outcome_for(x, mag, opts.rounding);
        let total = cfg.sweep.cutoff.unwrap_or_else(|| kernel_total_cutoff_required(mag, dim));
        let k = conditional_kernel(l, CoherentParams::from_polar(mag, th)?, dim, total)?;
        let lim = limit_kernel(th, l as f64 / mag, dim)?;
        Ok((l, total, (k.matrix() - lim.matrix()).norm()))
    })?;
    let mut t = Table::new(
        "collapse.csv",
        &[
            ("alpha_mag", "oscillator amplitude |alpha|"),
            ("theta", "oscillator phase"),
            ("x", "requested quadrature value"),
            ("l", "count difference used"),
            ("kernel_dim", "signal levels kept"),
            ("total_cutoff", "total photon-number cutoff"),
            ("frobenius", "Frobenius distance to the rank-one limit at x = l/|alpha|"),
        ],
    );
    let mut dists = Vec::new();
    for (i, (&(th, x, mag), &(l, total, d))) in points.iter().zip(&results).enumerate() {
        t.push(vec![mag.into(), th.into(), x.into(), l.into(), dim.into(), total.into(), d.into()]);
        dists.push(((i / alphas.len()) as f64, mag, d));
    }
    let mut report = Report { tables: vec![t], ..Default::default() };
    for (g, values) in series(&dists) {
        let (th, x, _) = points[g as usize * alphas.len()];
        report.checks.push(Check::monotone(
            format!("kernel distance decreasing in |alpha| (theta={th}, x={x})"),
            &values,
            true,
        ));
    }
    report.fixtures.push("crates/core/tests/fixtures/kernel.json".into());
    Ok(report)
}

pub fn pitop(cfg: &ExperimentConfig, _opts: RunOptions) -> Result<Report> {
    let alphas = or(&cfg.sweep.alpha_mag, &[2.0, 4.0, 8.0]);
    let betas = or(&cfg.sweep.beta, &[0.0]);
    let [a, b] = cfg.sweep.interval.unwrap_or([-1.0, 1.0]);
    let points: Vec<(f64, f64)> = betas.iter().flat_map(|&be| alphas.iter().map(move |&m| (be, m))).collect();
    let results = par_map(&points, |&(beta, mag)| {
        let total = cfg.sweep.cutoff.unwrap_or_else(|| default_total_cutoff(mag, beta.abs()));
        Ok((total, collapse_distance(real(beta), CoherentParams::real(mag)?, a, b, total)?))
    })?;
    let mut t = Table::new(
        "pitop.csv",
        &[
            ("alpha_mag", "oscillator amplitude |alpha|"),
            ("beta", "signal amplitude"),
            ("a", "interval lower end (open)"),
            ("b", "interval upper end (closed)"),
            ("total_cutoff", "total photon-number cutoff"),
            ("distance", "squared norm of count-interval collapse minus quadrature-interval collapse"),
        ],
    );
    let mut dists = Vec::new();
    for (&(beta, mag), &(total, d)) in points.iter().zip(&results) {
        t.push(vec![mag.into(), beta.into(), a.into(), b.into(), total.into(), d.into()]);
        dists.push((beta, mag, d));
    }
    let mut report = Report { tables: vec![t], ..Default::default() };
    for (beta, values) in series(&dists) {
        report.checks.push(Check::monotone(format!("collapse distance decreasing in |alpha| (beta={beta})"), &values, true));
    }
    report.fixtures.push("crates/core/tests/fixtures/collapse.json".into());
    Ok(report)
}

struct AsymRow {
    check: &'static str,
    label: String,
    value: f64,
    target: f64,
    abs_error: f64,
}

fn row(check: &'static str, label: String, value: f64, target: f64, abs_error: f64) -> AsymRow {
    AsymRow { check, label, value, target, abs_error }
}

/// The fixed grids of the limit-lemma checks. Each entry of the returned vector
/// is a table row; checks are derived from them.
pub fn asymptotics(_cfg: &ExperimentConfig, _opts: RunOptions) -> Result<Report> {
    let mut rows = Vec::new();
    let mut report = Report::default();
    let c = |re: f64, im: f64| Complex64::new(re, im);

    let mut cheb_ok = true;
    for m in [10.0, 1e2, 1e3, 1e4] {
        for lambda in [1.0, 2.0, 4.0, 8.0] {
            let (tail, bound) = poisson_tail(m, lambda)?;
            cheb_ok &= tail <= bound;
            rows.push(row("chebyshev", format!("m={m};lambda={lambda}"), tail, bound, (bound - tail).max(0.0)));
        }
    }
    report.checks.push(Check {
        name: "Poisson tail <= 1/lambda^2 on the grid".into(),
        pass: cheb_ok,
        value: if cheb_ok { 0.0 } else { 1.0 },
        tolerance: None,
        detail: "m in {10,1e2,1e3,1e4}, lambda in {1,2,4,8}".into(),
    });

    let mut ratio_ok = true;
    for m in [1e2, 1e3, 1e4] {
        for x in [0.5, 1.0, 2.0] {
            for mu in [0.9, 1.0, 1.1] {
                for e in 0..2u8 {
                    for d in 0..2u8 {
                        let r = stirling_ratio_error(m, x, mu, e, d)?;
                        ratio_ok &= r.value.re <= 1.0;
                        rows.push(row(
                            "stirling_ratio",
                            format!("m={m};x={x};mu={mu};eps_l={e};delta_j={d}"),
                            r.value.re,
                            r.target.re,
                            r.abs_error,
                        ));
                    }
                }
            }
        }
    }
    report.checks.push(Check {
        name: "Stirling ratio <= 1 on the grid".into(),
        pass: ratio_ok,
        value: if ratio_ok { 0.0 } else { 1.0 },
        tolerance: None,
        detail: "m in {1e2,1e3,1e4}, x in {0.5,1,2}, mu in {0.9,1,1.1}, both offsets".into(),
    });
    let s = stirling_ratio_error(1e4, 1.0, 1.0, 0, 0)?;
    report.checks.push(Check::within("Stirling error at m=1e4, x=1, mu=1", s.abs_error, 1e-2));
    let mut errs = Vec::new();
    for m in [5000.0, 20000.0, 80000.0] {
        let r = stirling_ratio_error(m, 1.0, 1.0, 0, 0)?;
        rows.push(row("stirling_sweep", format!("m={m};x=1;mu=1"), r.value.re, r.target.re, r.abs_error));
        errs.push(r.abs_error);
    }
    report.checks.push(Check::monotone("Stirling error decreasing over m = 2k^2", &errs, true));

    let mut errs = Vec::new();
    for mag in [5.0, 10.0, 20.0] {
        let v = dirac_sequence(|p| c(p.cos(), 0.0), 0.0, mag, QUADRATURE.dirac_nodes)?;
        let e = (v - 1.0).norm();
        rows.push(row("dirac_cos", format!("alpha_mag={mag}"), v.re, 1.0, e));
        errs.push(e);
        let mass = dirac_sequence(|_| c(1.0, 0.0), 0.0, mag, QUADRATURE.dirac_nodes)?.re;
        let (lo, hi) = dirac_mass_bounds(mag)?;
        rows.push(row("dirac_mass", format!("alpha_mag={mag};lower={lo:.17e};upper={hi:.17e}"), mass, 1.0, (mass - 1.0).abs()));
        report.checks.push(Check {
            name: format!("Dirac kernel mass inside Gaussian sandwich (|alpha|={mag})"),
            pass: lo <= mass && mass <= hi,
            value: mass,
            tolerance: None,
            detail: format!("[{lo:.6e}, {hi:.6e}]"),
        });
    }
    report.checks.push(Check::monotone("Dirac sequence error decreasing (g = cos)", &errs, true));
    report.checks.push(Check::within("Dirac sequence error at |alpha|=20 (g = cos)", errs[2], 1e-2));

    let mut errs = Vec::new();
    for mag in [250.0, 500.0, 1000.0] {
        let e = poly_exp_error(c(1.0, 0.5), 0.3, 1.0, mag)?;
        rows.push(row("poly_exp", format!("u=1+0.5i;theta=0.3;x=1;alpha_mag={mag}"), f64::NAN, f64::NAN, e));
        errs.push(e);
    }
    report.checks.push(Check::monotone("polynomial-exponential error decreasing (|alpha| doubling)", &errs, true));

    let mut errs = Vec::new();
    for m in [100.0, 200.0, 400.0] {
        let e = power_log_error(c(2.0, 1.0), c(0.5, 1.0), m)?;
        rows.push(row("power_log", format!("z=2+i;a=0.5+i;m={m}"), f64::NAN, f64::NAN, e));
        errs.push(e);
    }
    report.checks.push(Check::monotone("power-log error decreasing (m doubling)", &errs, true));

    let mut errs = Vec::new();
    for mag in [10.0, 20.0, 30.0] {
        let e = head_truncation_error(c(1.0, 0.0), 0.3, 0.0, 1.0, mag)?;
        rows.push(row("head_truncation", format!("u=1;phi=0.3;theta=0;x=1;alpha_mag={mag}"), e, 0.0, e));
        errs.push(e);
    }
    report.checks.push(Check::monotone("head truncation decreasing", &errs, true));
    report.checks.push(Check::within("head truncation at |alpha|=30", errs[2], 1e-10));

    let heads = [poisson_head(1000.0, 0.5)?, poisson_head(2000.0, 0.5)?];
    for (m, h) in [1000.0, 2000.0].iter().zip(heads) {
        rows.push(row("poisson_head", format!("M={m};theta=0.5"), h, 0.0, h));
    }
    report.checks.push(Check::monotone("Poisson head decreasing in M", &heads, true));

    let mut errs = Vec::new();
    for mag in [6.0, 12.0] {
        let r = mainprop_factor_check(c(0.5, 0.0), 0.0, 0.0, 1.0, mag)?;
        rows.push(row("mainprop", format!("u=0.5;phi=0;theta=0;x=1;alpha_mag={mag}"), r.value.re, r.target.re, r.abs_error));
        errs.push(r.abs_error);
    }
    report.checks.push(Check::monotone("factored overlap error decreasing", &errs, true));
    report.fixtures.push("crates/core/tests/fixtures/mainprop.json".into());

    let mut t = Table::new(
        "asymptotics.csv",
        &[
            ("check", "limit statement"),
            ("label", "parameters as key=value pairs"),
            ("value", "computed quantity (NaN when only the error is defined)"),
            ("target", "limit or bound"),
            ("abs_error", "distance to target, or bound slack for inequalities"),
        ],
    );
    for r in rows {
        t.push(vec![r.check.into(), r.label.into(), r.value.into(), r.target.into(), r.abs_error.into()]);
    }
    report.tables.push(t);
    Ok(report)
}

/// Channel cutoff for the ideal pipeline: the EPR budget cutoff, capped where the
/// displaced input has no weight left.
pub fn ideal_channel_cutoff(q: f64, psi_mag: f64, shift_mag: f64) -> Result<usize> {
    Ok(epr_cutoff(q, TRUNCATION_BUDGET)?.min(default_single_cutoff(psi_mag + shift_mag)))
}

pub fn teleport(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Report> {
    let qs = or(&cfg.sweep.q, &[0.8, 0.9, 0.95, 0.99]);
    let beta = cfg.sweep.beta.as_ref().map_or(0.3, |b| b[0]);
    let [xm, pp] = cfg.sweep.outcome.unwrap_or([0.0, 0.0]);
    let los = or(&cfg.sweep.lo_mag, &[3.0, 6.0, 9.0]);
    let hq = cfg.sweep.homodyne_q.unwrap_or(0.9);
    let psi_cut = default_single_cutoff(beta.abs());
    let psi = coh(real(beta), psi_cut)?;
    let corr = Complex64::new(xm, pp);

    let ideal = par_map(&qs, |&q| {
        let cut = cfg.sweep.channel_cutoff.map_or_else(|| ideal_channel_cutoff(q, beta.abs(), corr.norm()), Ok)?;
        let out = ideal_bell_measure(&psi, q, xm, pp, cut)?;
        Ok((cut, teleport_fidelity(&out, &psi, corr)?))
    })?;
    let mut ti = Table::new(
        "teleport_ideal.csv",
        &[
            ("q", "channel parameter"),
            ("beta", "input coherent amplitude"),
            ("x_minus", "measured x quadrature"),
            ("p_plus", "measured p quadrature"),
            ("channel_cutoff", "levels kept in the channel"),
            ("fidelity", "fidelity of the output to the displaced input"),
        ],
    );
    let mut fids = Vec::new();
    for (&q, &(cut, f)) in qs.iter().zip(&ideal) {
        ti.push(vec![q.into(), beta.into(), xm.into(), pp.into(), cut.into(), f.into()]);
        fids.push((0.0, q, f));
    }

    let channel = cfg.sweep.channel_cutoff.map_or_else(|| epr_cutoff(hq, TRUNCATION_BUDGET), Ok)?;
    let homodyne = par_map(&los, |&lo| {
        let (l, k) = quadratures_to_outcome(xm, pp, lo, opts.rounding);
        let (x_eff, p_eff) = outcome_to_quadratures(l, k, lo);
        let h = homodyne_bell_measure(
            &psi,
            hq,
            lo,
            l,
            k,
            TeleportCutoffs { channel, kernel_total: cfg.sweep.cutoff },
        )?;
        let target = ideal_bell_measure(&psi, hq, x_eff, p_eff, channel)?;
        Ok((l, k, x_eff, p_eff, density_fidelity(&h.density, &target)?, h.purity))
    })?;
    let mut th = Table::new(
        "teleport_homodyne.csv",
        &[
            ("q", "channel parameter"),
            ("lo_mag", "oscillator amplitude for both homodynes"),
            ("l", "x-homodyne count difference"),
            ("k", "p-homodyne count difference"),
            ("x_minus", "l/(sqrt2 lo_mag)"),
            ("p_plus", "k/(sqrt2 lo_mag)"),
            ("channel_cutoff", "levels kept in the channel"),
            ("fidelity_to_ideal", "<t|rho|t>/(tr rho |t|^2) against the ideal output at the same quadratures"),
            ("purity", "tr rho^2/(tr rho)^2 of the conditional output"),
        ],
    );
    let mut hf = Vec::new();
    for (&lo, &(l, k, x, p, f, pur)) in los.iter().zip(&homodyne) {
        th.push(vec![hq.into(), lo.into(), l.into(), k.into(), x.into(), p.into(), channel.into(), f.into(), pur.into()]);
        hf.push((0.0, lo, f));
    }
    let mut report = Report { tables: vec![ti, th], ..Default::default() };
    let ideal_series = &series(&fids)[0].1;
    report.checks.push(Check::monotone("ideal fidelity increasing in q", ideal_series, false));
    report.checks.push(Check::monotone("homodyne fidelity to ideal increasing in lo_mag", &series(&hf)[0].1, false));
    report.fixtures.push("crates/core/tests/fixtures/teleport.json".into());
    Ok(report)
}

/// Distribution of `|β⟩⊗|α⟩` for a sampling run, with its truncation checked.
pub fn sampling_distribution(beta: f64, mag: f64, cutoff: Option<usize>) -> Result<OutcomeDistribution> {
    let total = cutoff.unwrap_or_else(|| default_total_cutoff(mag, beta.abs()));
    check_product_budget(mag * mag, beta * beta, total)?;
    let s: MultiModeState = tensor(&coh(real(beta), total + 1)?, &coh(real(mag), total + 1)?, total).into_inner();
    outcome_distribution(&s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cutoffs() {
        assert_eq!(default_single_cutoff(0.0), 16);
        assert_eq!(default_single_cutoff(2.0), 36);
        assert_eq!(default_total_cutoff(8.0, 0.5), 144 + 21);
        assert!(product_loss(64.0, 0.25, default_total_cutoff(8.0, 0.5)) < TRUNCATION_BUDGET);
    }

    #[test]
    fn budget_error_names_a_passing_cutoff() {
        match check_product_budget(64.0, 0.0, 80) {
            Err(FockError::Precision { required_cutoff, .. }) => {
                assert!(product_loss(64.0, 0.0, required_cutoff) <= TRUNCATION_BUDGET);
                assert!(product_loss(64.0, 0.0, required_cutoff - 1) > TRUNCATION_BUDGET);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn series_groups_and_sorts() {
        let s = series(&[(0.0, 4.0, 1.0), (0.5, 2.0, 9.0), (0.0, 2.0, 3.0)]);
        assert_eq!(s, vec![(0.0, vec![3.0, 1.0]), (0.5, vec![9.0])]);
    }
}
