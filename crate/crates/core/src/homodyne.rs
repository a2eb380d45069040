//! Balanced homodyne measurement on two modes.
//!
//! Mode 0 is the signal and mode 1 the local oscillator. The count-difference
//! observable `Ξ = a₁†a₀ + a₀†a₁` has eigenvectors `U(π/4)|p, q⟩` with eigenvalue
//! `p − q`; within the total-photon block `N` the eigenvalue `l` occurs at most once,
//! so every projector `Π^l` is a sum of rank-one block projectors. Nothing here
//! materializes the full two-mode space as a dense matrix.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{ensure_finite, FockError, Result};
use crate::fock::{block_offset, coherent_state, CoherentParams, FockState, MultiModeState};
use crate::numeric::{required_cutoff, trapezoid, ComplexSum, NeumaierSum};
use crate::operators::{
    quad_eigenstate, xi_eigenbasis, xi_eigenvector, BlockOperator, DenseOperator, MAX_BLOCK_TOTAL,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fixed quadrature settings shared by every experiment, so results are reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Trapezoid nodes per unit length for interval projectors.
    pub interval_nodes_per_unit: usize,
    /// Uniform grid for completeness checks of quadrature eigenstates.
    pub completeness_nodes: usize,
    pub completeness_half_width: f64,
    /// Trapezoid nodes over one period for phase integrals.
    pub phase_nodes: usize,
    /// Trapezoid nodes for the Dirac-sequence integral.
    pub dirac_nodes: usize,
}

pub const QUADRATURE: QuadratureConfig = QuadratureConfig {
    interval_nodes_per_unit: 256,
    completeness_nodes: 2048,
    completeness_half_width: 12.0,
    phase_nodes: 512,
    dirac_nodes: 4096,
};

/// Largest allowed truncation loss for coherent local oscillators.
pub const TRUNCATION_BUDGET: f64 = 1e-8;

/// How a continuous outcome `x` becomes the integer count difference `l ≈ x|α|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Nearest integer, halves away from zero.
    #[default]
    Nearest,
    /// Integer part, `⌊x|α|⌋`.
    Floor,
}

pub fn outcome_for(x: f64, alpha_mag: f64, rounding: Rounding) -> i64 {
    let v = x * alpha_mag;
    match rounding {
        Rounding::Nearest => v.round() as i64,
        Rounding::Floor => v.floor() as i64,
    }
}

/// Probabilities of the count difference `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probs: BTreeMap<i64, f64>,
    total: f64,
}

impl OutcomeDistribution {
    pub fn from_map(probs: BTreeMap<i64, f64>) -> Self {
        let total = probs.values().copied().collect::<NeumaierSum>().value();
        Self { probs, total }
    }

    pub fn probs(&self) -> &BTreeMap<i64, f64> {
        &self.probs
    }

    pub fn prob(&self, l: i64) -> f64 {
        self.probs.get(&l).copied().unwrap_or(0.0)
    }

    /// `Σ P(l)`; falls short of one by the truncation loss.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().map(|(&l, &p)| l as f64 * p).collect::<NeumaierSum>().value() / self.total
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs
            .iter()
            .map(|(&l, &p)| (l as f64 - m).powi(2) * p)
            .collect::<NeumaierSum>()
            .value()
            / self.total
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.probs
            .keys()
            .chain(other.probs.keys())
            .map(|&l| (self.prob(l) - other.prob(l)).abs())
            .fold(0.0, f64::max)
    }
}

/// `|α| ⟨α|₁ Π^l |α⟩₁` as an operator on the signal mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseKernel {
    pub alpha: CoherentParams,
    pub l: i64,
    pub operator: DenseOperator,
}

impl CollapseKernel {
    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        self.operator.matrix()
    }
}

fn check_two_mode(s: &MultiModeState) -> Result<()> {
    if s.modes() != 2 {
        return Err(FockError::Shape(format!("expected a two-mode state, got {} modes", s.modes())));
    }
    if s.total_cutoff() > MAX_BLOCK_TOTAL {
        return Err(FockError::Resource(format!(
            "total cutoff {} exceeds the supported maximum {MAX_BLOCK_TOTAL}",
            s.total_cutoff()
        )));
    }
    Ok(())
}

/// `Ξ` restricted to total photon number ≤ `total_cutoff`; block `N` is tridiagonal with
/// off-diagonal `√((a+1)(N−a))`.
pub fn xi_operator(total_cutoff: usize) -> BlockOperator {
    let blocks = (0..=total_cutoff)
        .map(|n| {
            DMatrix::from_fn(n + 1, n + 1, |i, j| {
                let a = i.min(j);
                if i.abs_diff(j) == 1 {
                    Complex64::new((((a + 1) * (n - a)) as f64).sqrt(), 0.0)
                } else {
                    ZERO
                }
            })
        })
        .collect();
    BlockOperator::from_blocks(blocks).expect("block shapes are consistent")
}

/// Eigenbasis column spanning the eigenvalue-`l` space of block `N`, if any.
pub fn projector_column(l: i64, n: usize) -> Option<Vec<f64>> {
    let abs = l.unsigned_abs() as usize;
    if abs > n || (n - abs) % 2 != 0 {
        return None;
    }
    let m = (n as i64 + l) / 2;
    Some(xi_eigenvector(n, m as usize))
}

/// `Π^l = U(π/4) P_l U(π/4)†`, where `P_l` keeps occupation pairs with `p − q = l`.
/// Zero when `|l| > total_cutoff`.
pub fn projector_l(l: i64, total_cutoff: usize) -> Result<BlockOperator> {
    if total_cutoff > MAX_BLOCK_TOTAL {
        return Err(FockError::Resource(format!("total cutoff {total_cutoff} too large")));
    }
    let blocks = (0..=total_cutoff)
        .map(|n| match projector_column(l, n) {
            Some(b) => {
                let v = DVector::from_vec(b).map(|x| Complex64::new(x, 0.0));
                &v * v.transpose()
            }
            None => DMatrix::zeros(n + 1, n + 1),
        })
        .collect();
    BlockOperator::from_blocks(blocks)
}

/// `Π^l |s⟩` computed block by block.
pub fn apply_projector(s: &MultiModeState, l: i64) -> Result<MultiModeState> {
    apply_projectors(s, |k| k == l)
}

fn apply_projectors(s: &MultiModeState, keep: impl Fn(i64) -> bool) -> Result<MultiModeState> {
    check_two_mode(s)?;
    let mut out = MultiModeState::zeros(2, s.total_cutoff())?;
    for n in 0..=s.total_cutoff() {
        let o = block_offset(n);
        let block = &s.amps()[o..o + n + 1];
        let mut acc = vec![ZERO; n + 1];
        for m in 0..=n {
            if !keep(2 * m as i64 - n as i64) {
                continue;
            }
            let b = xi_eigenvector(n, m);
            let c: Complex64 = b.iter().zip(block).map(|(x, z)| z * x).collect::<ComplexSum>().value();
            for (slot, x) in acc.iter_mut().zip(&b) {
                *slot += c * x;
            }
        }
        out.amps_mut()[o..o + n + 1].copy_from_slice(&acc);
    }
    Ok(out)
}

/// `|φ, l⟩ = Σ_j e^{ijφ} |l+j, j⟩` (or `|j, j+|l|⟩` for `l < 0`) in the `Ξ` eigenbasis,
/// keeping the terms with total photon number ≤ `total_cutoff`.
pub fn phi_l_state(phi: f64, l: i64, total_cutoff: usize) -> Result<MultiModeState> {
    ensure_finite("φ", phi)?;
    let abs = l.unsigned_abs() as usize;
    if abs > total_cutoff {
        return Err(FockError::InvalidParameter(format!(
            "|l| = {abs} exceeds total cutoff {total_cutoff}"
        )));
    }
    let mut s = MultiModeState::zeros(2, total_cutoff)?;
    for j in 0..=(total_cutoff - abs) / 2 {
        let n = abs + 2 * j;
        let b = projector_column(l, n).expect("parity matches by construction");
        let ph = Complex64::from_polar(1.0, j as f64 * phi);
        let o = block_offset(n);
        for (a, x) in b.iter().enumerate() {
            s.amps_mut()[o + a] = ph * x;
        }
    }
    Ok(s)
}

/// Largest entry of `(1/2π)∫|φ,l⟩⟨φ,l| dφ − Π^l`, the integral taken by the periodic
/// trapezoid rule with `nodes` points.
pub fn phase_integral_defect(l: i64, total_cutoff: usize, nodes: usize) -> Result<f64> {
    if nodes == 0 {
        return Err(FockError::InvalidParameter("nodes must be at least 1".into()));
    }
    let p = projector_l(l, total_cutoff)?.to_dense();
    let dim = p.nrows();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..nodes {
        let phi = -PI + 2.0 * PI * k as f64 / nodes as f64;
        let v = DVector::from_column_slice(phi_l_state(phi, l, total_cutoff)?.amps());
        acc += &v * v.adjoint();
    }
    acc /= Complex64::new(nodes as f64, 0.0);
    Ok((acc - p).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Largest coefficient gap between `⟨α|₁|φ,0⟩` and the closed form
/// `e^{−|α|²/2} e^{e^{iφ}(−ū² + ᾱ²)/2}` over `ū⁰ … ū^{coeffs−1}`.
pub fn phi_zero_overlap_defect(alpha: Complex64, phi: f64, total_cutoff: usize, coeffs: usize) -> Result<f64> {
    ensure_finite("φ", phi)?;
    if coeffs > total_cutoff + 1 {
        return Err(FockError::Shape(format!("{coeffs} coefficients exceed total cutoff {total_cutoff}")));
    }
    let s = phi_l_state(phi, 0, total_cutoff)?;
    let bra = coherent_state(CoherentParams::new(alpha)?, total_cutoff + 1)?.into_inner();
    let f = crate::fock::contract_mode(&s, 1, &bra)?.into_single()?;
    let e = Complex64::from_polar(1.0, phi);
    let pre = (-alpha.norm_sqr() / 2.0 + e * alpha.conj() * alpha.conj() / 2.0).exp();
    let mut worst = 0.0f64;
    for n in 0..coeffs {
        let want = if n % 2 == 0 {
            let k = n / 2;
            let ln = 0.5 * crate::numeric::ln_factorial(n) - crate::numeric::ln_factorial(k);
            pre * (-e / 2.0).powu(k as u32) * ln.exp()
        } else {
            ZERO
        };
        worst = worst.max((f.amp(n) - want).norm());
    }
    Ok(worst)
}

/// `P(l) = ⟨s|Π^l|s⟩`; the total is `‖s‖²`.
pub fn outcome_distribution(s: &MultiModeState) -> Result<OutcomeDistribution> {
    check_two_mode(s)?;
    let mut acc: BTreeMap<i64, NeumaierSum> = BTreeMap::new();
    for n in 0..=s.total_cutoff() {
        let o = block_offset(n);
        let v = DVector::from_column_slice(&s.amps()[o..o + n + 1]);
        let w = xi_eigenbasis(n).map(|x| Complex64::new(x, 0.0));
        let c = w.transpose() * v;
        for (m, z) in c.iter().enumerate() {
            acc.entry(2 * m as i64 - n as i64).or_default().add(z.norm_sqr());
        }
    }
    Ok(OutcomeDistribution::from_map(acc.into_iter().map(|(l, v)| (l, v.value())).collect()))
}

/// Distribution of `n₁ − n₀` measured directly in the number basis.
pub fn number_difference_distribution(s: &MultiModeState) -> Result<OutcomeDistribution> {
    check_two_mode(s)?;
    let mut acc: BTreeMap<i64, NeumaierSum> = BTreeMap::new();
    for (occ, z) in s.iter() {
        acc.entry(occ[1] as i64 - occ[0] as i64).or_default().add(z.norm_sqr());
    }
    Ok(OutcomeDistribution::from_map(acc.into_iter().map(|(l, v)| (l, v.value())).collect()))
}

/// Keeps the number-basis components with `n₁ − n₀ = l`.
pub fn number_difference_project(s: &MultiModeState, l: i64) -> Result<MultiModeState> {
    check_two_mode(s)?;
    MultiModeState::from_fn(2, s.total_cutoff(), |o| {
        if o[1] as i64 - o[0] as i64 == l {
            s.get(o)
        } else {
            ZERO
        }
    })
}

/// Gaussian approximation `(1/√(2π)) e^{−(x − (ᾱβ + αβ̄)/|α|)²/2}` to `|α| P(x|α|)`.
pub fn braunstein_density(x: f64, alpha: CoherentParams, beta: Complex64) -> Result<f64> {
    ensure_finite("x", x)?;
    let mag = alpha.magnitude();
    if mag == 0.0 {
        return Err(FockError::InvalidParameter("|α| must be positive".into()));
    }
    let a = alpha.alpha();
    let centre = (a.conj() * beta + a * beta.conj()).re / mag;
    Ok((-(x - centre).powi(2) / 2.0).exp() / (2.0 * PI).sqrt())
}

/// `sup_l ||α| P(l) − braunstein_density(l/|α|)|` over the outcomes present in `dist`.
pub fn braunstein_sup_error(dist: &OutcomeDistribution, alpha: CoherentParams, beta: Complex64) -> Result<f64> {
    let mag = alpha.magnitude();
    let mut sup = 0.0f64;
    for (&l, &p) in dist.probs() {
        let g = braunstein_density(l as f64 / mag, alpha, beta)?;
        sup = sup.max((mag * p - g).abs());
    }
    Ok(sup)
}

/// `scale · ⟨(|m⟩⊗|lo⟩), Π^l (|n⟩⊗|lo⟩)⟩` for `m, n < mode1_cutoff`, for an arbitrary
/// oscillator state. Block `N` contributes the Gram term of the overlaps
/// `c_{n,N} = b_N[n] · lo[N−n]` with the eigenbasis column `b_N`.
pub fn oscillator_kernel(
    l: i64,
    lo: &FockState,
    scale: f64,
    mode1_cutoff: usize,
    total_cutoff: usize,
) -> Result<DenseOperator> {
    if mode1_cutoff == 0 {
        return Err(FockError::InvalidParameter("mode1_cutoff must be at least 1".into()));
    }
    if mode1_cutoff > total_cutoff + 1 {
        return Err(FockError::Shape(format!(
            "mode1_cutoff {mode1_cutoff} exceeds total cutoff {total_cutoff} + 1"
        )));
    }
    if total_cutoff > MAX_BLOCK_TOTAL {
        return Err(FockError::Resource(format!("total cutoff {total_cutoff} too large")));
    }
    let d = mode1_cutoff;
    let mut k = DMatrix::<Complex64>::zeros(d, d);
    let mut c = vec![ZERO; d];
    for n in 0..=total_cutoff {
        let Some(b) = projector_column(l, n) else { continue };
        let top = d.min(n + 1);
        for (i, slot) in c.iter_mut().enumerate().take(top) {
            *slot = lo.amp(n - i) * b[i];
        }
        for j in 0..top {
            if c[j] == ZERO {
                continue;
            }
            for i in 0..top {
                k[(i, j)] += c[i].conj() * c[j];
            }
        }
    }
    DenseOperator::new(k * Complex64::new(scale, 0.0))
}

/// Total cutoff needed for a coherent oscillator `|α|` against a signal of dimension `d`.
pub fn kernel_total_cutoff_required(alpha_mag: f64, mode1_cutoff: usize) -> usize {
    (required_cutoff(alpha_mag * alpha_mag, TRUNCATION_BUDGET) + mode1_cutoff).saturating_sub(2)
}

/// Conditional collapse kernel `|α| ⟨α|₁ Π^l |α⟩₁` on the signal mode.
///
/// The oscillator amplitudes up to `total_cutoff − mode1_cutoff + 1` enter every
/// entry, so that Poisson tail must stay below [`TRUNCATION_BUDGET`].
pub fn conditional_kernel(
    l: i64,
    alpha: CoherentParams,
    mode1_cutoff: usize,
    total_cutoff: usize,
) -> Result<CollapseKernel> {
    let mag = alpha.magnitude();
    let needed = kernel_total_cutoff_required(mag, mode1_cutoff).max(mode1_cutoff.saturating_sub(1));
    if total_cutoff < needed {
        let kept = (total_cutoff + 2).saturating_sub(mode1_cutoff);
        return Err(FockError::Precision {
            loss: crate::numeric::coherent_truncation_loss(mag * mag, kept),
            budget: TRUNCATION_BUDGET,
            required_cutoff: needed,
        });
    }
    let lo = coherent_state(alpha, total_cutoff + 1)?;
    let operator = oscillator_kernel(l, &lo, mag, mode1_cutoff, total_cutoff)?;
    Ok(CollapseKernel { alpha, l, operator })
}

/// `(1/√(2π)) |θ;x⟩⟨θ;x|` on the first `mode1_cutoff` levels.
pub fn limit_kernel(theta: f64, x: f64, mode1_cutoff: usize) -> Result<DenseOperator> {
    let v = quad_eigenstate(theta, x, mode1_cutoff)?.state;
    DenseOperator::outer(v.amps(), v.amps(), Complex64::new(1.0 / (2.0 * PI).sqrt(), 0.0))
}

/// Integers `l` with `a|α| < l ≤ b|α|`, evaluated in floating point as written.
pub fn interval_outcomes(a: f64, b: f64, alpha_mag: f64) -> std::ops::RangeInclusive<i64> {
    let lo = (a * alpha_mag).floor() as i64 + 1;
    let hi = (b * alpha_mag).floor() as i64;
    lo..=hi
}

/// `Π^{(a,b]|α|} |s⟩ = Σ_{a|α| < l ≤ b|α|} Π^l |s⟩`.
pub fn interval_project(s: &MultiModeState, a: f64, b: f64, alpha_mag: f64) -> Result<MultiModeState> {
    ensure_finite("a", a)?;
    ensure_finite("b", b)?;
    if a >= b {
        return Err(FockError::InvalidParameter(format!("need a < b, got ({a}, {b}]")));
    }
    let range = interval_outcomes(a, b, alpha_mag);
    apply_projectors(s, |l| range.contains(&l))
}

/// `P^{(a,b]} = (1/√(2π)) ∫_a^b |θ;r⟩⟨θ;r| dr` by the trapezoid rule with
/// [`QuadratureConfig::interval_nodes_per_unit`] nodes per unit length.
pub fn quadrature_interval_projector(theta: f64, a: f64, b: f64, cutoff: usize) -> Result<DenseOperator> {
    ensure_finite("a", a)?;
    ensure_finite("b", b)?;
    if a >= b {
        return Err(FockError::InvalidParameter(format!("need a < b, got ({a}, {b}]")));
    }
    let nodes = ((b - a) * QUADRATURE.interval_nodes_per_unit as f64).ceil() as usize + 1;
    let grid = trapezoid(a, b, nodes.max(2));
    let mut v = DMatrix::<Complex64>::zeros(cutoff, grid.len());
    for (k, &(r, w)) in grid.iter().enumerate() {
        let s = quad_eigenstate(theta, r, cutoff)?.state;
        let sw = w.sqrt();
        for (n, z) in s.amps().iter().enumerate() {
            v[(n, k)] = z * sw;
        }
    }
    let p = &v * v.adjoint() * Complex64::new(1.0 / (2.0 * PI).sqrt(), 0.0);
    DenseOperator::new(p)
}

/// Largest truncation loss tolerated by [`collapse_distance`].
pub const COLLAPSE_LOSS_BUDGET: f64 = 1e-6;

/// `‖Π^{(a,b]|α|}|ψ⟩ − (P^{(a,b]} ⊗ I)|ψ⟩‖²` for `|ψ⟩ = |β⟩₀ ⊗ |α⟩₁`, with both
/// vectors restricted to total photon number ≤ `total_cutoff`. The quadrature
/// projector acts on the signal mode with dimension `total_cutoff + 1`.
pub fn collapse_distance(
    beta: Complex64,
    alpha: CoherentParams,
    a: f64,
    b: f64,
    total_cutoff: usize,
) -> Result<f64> {
    let d = total_cutoff + 1;
    let sig = coherent_state(CoherentParams::new(beta)?, d)?;
    let lo = coherent_state(alpha, d)?;
    for (mean, loss) in [(beta.norm_sqr(), sig.loss), (alpha.magnitude().powi(2), lo.loss)] {
        if loss > COLLAPSE_LOSS_BUDGET {
            return Err(FockError::Precision {
                loss,
                budget: COLLAPSE_LOSS_BUDGET,
                required_cutoff: required_cutoff(mean, COLLAPSE_LOSS_BUDGET).saturating_sub(1),
            });
        }
    }
    let psi = crate::fock::tensor(&sig, &lo, total_cutoff).into_inner();
    let collapsed = interval_project(&psi, a, b, alpha.magnitude())?;
    let p = quadrature_interval_projector(alpha.phase(), a, b, d)?;
    let pb = crate::operators::Apply::apply(&p, &sig.value)?;
    let approx = crate::fock::tensor(&pb, &lo, total_cutoff).into_inner();
    Ok(collapsed.sub(&approx)?.norm_sqr())
}
