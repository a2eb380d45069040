//! Continuous-variable teleportation through the EPR channel `Σ qⁿ|n,n⟩`.
//!
//! Mode 0 holds the input, modes 1 and 2 the channel. The Bell measurement mixes
//! modes 0 and 1 on `U(π/4)` and reads `x₀`, `p₁`. In the homodyne realization each
//! quadrature is read by a count-difference measurement against its own coherent
//! oscillator; since the oscillators sit on disjoint mode pairs, their effect reduces
//! exactly to the mode-local kernels `|α|⟨α|Π^l|α⟩` acting on modes 0 and 1.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure_finite, FockError, Result};
use crate::fock::{CoherentParams, FockState, MultiModeState};
use crate::homodyne::{conditional_kernel, kernel_total_cutoff_required, oscillator_kernel, projector_l};
use crate::numeric::NeumaierSum;
use crate::operators::{balanced_beamsplitter, displacement, DenseOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest total photon number for an explicit three-mode state (about 1.1e7 amplitudes).
pub const MAX_THREE_MODE_TOTAL: usize = 400;

/// Truncated two-mode channel `Σ_{n<cutoff} qⁿ|n⟩₁|n⟩₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct EprChannel {
    pub q: f64,
    pub cutoff: usize,
    pub state: MultiModeState,
    /// Discarded weight `q^{2·cutoff}/(1−q²)`.
    pub loss: f64,
}

pub fn epr_channel(q: f64, cutoff: usize) -> Result<EprChannel> {
    ensure_finite("q", q)?;
    if q.abs() >= 1.0 {
        return Err(FockError::InvalidParameter(format!("need |q| < 1, got {q}")));
    }
    if cutoff == 0 {
        return Err(FockError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let state = MultiModeState::from_fn(2, 2 * (cutoff - 1), |o| {
        if o[0] == o[1] {
            Complex64::new(q.powi(o[0] as i32), 0.0)
        } else {
            ZERO
        }
    })?;
    let loss = q.abs().powf(2.0 * cutoff as f64) / (1.0 - q * q);
    Ok(EprChannel { q, cutoff, state, loss })
}

/// Smallest channel cutoff whose relative discarded weight `q^{2·cutoff}` is below `budget`.
pub fn epr_cutoff(q: f64, budget: f64) -> Result<usize> {
    ensure_finite("q", q)?;
    if q.abs() >= 1.0 || !(0.0 < budget && budget < 1.0) {
        return Err(FockError::InvalidParameter(format!("need |q| < 1 and 0 < budget < 1, got {q}, {budget}")));
    }
    if q == 0.0 {
        return Ok(1);
    }
    let c = (budget.ln() / (2.0 * q.abs().ln())).ceil().max(1.0) as usize;
    Ok(c)
}

/// `π^{−1/2} Σ_n (D(α)|n⟩₀) ⊗ |n⟩₁` restricted to total photon number ≤ `total_cutoff`.
pub fn bell_state_vector(alpha_c: Complex64, total_cutoff: usize) -> Result<MultiModeState> {
    let d = displacement(alpha_c, total_cutoff + 1)?;
    let s = PI.sqrt().recip();
    MultiModeState::from_fn(2, total_cutoff, |o| d.get(o[0], o[1]) * s)
}

/// `(x₋, p₊) = (l, k)/(√2 |α|)`; the quadratures are `ξ(θ)/√2`.
pub fn outcome_to_quadratures(l: i64, k: i64, lo_mag: f64) -> (f64, f64) {
    (l as f64 / (SQRT_2 * lo_mag), k as f64 / (SQRT_2 * lo_mag))
}

/// Inverse of [`outcome_to_quadratures`] with the given rounding.
pub fn quadratures_to_outcome(
    x_minus: f64,
    p_plus: f64,
    lo_mag: f64,
    rounding: crate::homodyne::Rounding,
) -> (i64, i64) {
    (
        crate::homodyne::outcome_for(SQRT_2 * x_minus, lo_mag, rounding),
        crate::homodyne::outcome_for(SQRT_2 * p_plus, lo_mag, rounding),
    )
}

/// `D(α)*` as a matrix large enough for both the input and the requested output.
fn displaced_dagger(alpha_c: Complex64, dim: usize) -> Result<DenseOperator> {
    Ok(displacement(alpha_c, dim)?.dagger())
}

/// `Σ_k qᵏ ⟨k|D(α)*|ψ⟩ |k⟩` for `k < channel_cutoff`, `α = x₋ + i p₊`.
pub fn ideal_bell_measure(
    psi0: &FockState,
    q: f64,
    x_minus: f64,
    p_plus: f64,
    channel_cutoff: usize,
) -> Result<FockState> {
    ensure_finite("q", q)?;
    if q.abs() >= 1.0 {
        return Err(FockError::InvalidParameter(format!("need |q| < 1, got {q}")));
    }
    ensure_finite("x₋", x_minus)?;
    ensure_finite("p₊", p_plus)?;
    let alpha = Complex64::new(x_minus, p_plus);
    let dim = psi0.cutoff().max(channel_cutoff);
    let dd = displaced_dagger(alpha, dim)?;
    let amps = (0..channel_cutoff)
        .map(|k| {
            let mut acc = crate::numeric::ComplexSum::default();
            for (n, a) in psi0.amps().iter().enumerate() {
                acc.add(dd.get(k, n) * a);
            }
            acc.value() * q.powi(k as i32)
        })
        .collect();
    FockState::new(amps)
}

/// `D(α)*|ψ⟩` on the first `cutoff` levels.
pub fn teleport_target(psi0: &FockState, alpha_c: Complex64, cutoff: usize) -> Result<FockState> {
    let dim = psi0.cutoff().max(cutoff);
    let dd = displaced_dagger(alpha_c, dim)?;
    let padded = psi0.resized(dim)?;
    let full = crate::operators::Apply::apply(&dd, &padded)?;
    full.resized(cutoff)
}

/// `|⟨D(α)*ψ, output⟩|² / (‖D(α)*ψ‖² ‖output‖²)`, with the target truncated to the
/// output's cutoff.
pub fn teleport_fidelity(output: &FockState, psi0: &FockState, alpha_c: Complex64) -> Result<f64> {
    let t = teleport_target(psi0, alpha_c, output.cutoff())?;
    state_fidelity(output, &t)
}

/// `|⟨a, b⟩|²/(‖a‖²‖b‖²)`.
pub fn state_fidelity(a: &FockState, b: &FockState) -> Result<f64> {
    if a.cutoff() != b.cutoff() {
        return Err(FockError::Shape(format!("cutoffs {} and {}", a.cutoff(), b.cutoff())));
    }
    let (na, nb) = (a.norm_sqr(), b.norm_sqr());
    if na == 0.0 || nb == 0.0 {
        return Err(FockError::ZeroNorm);
    }
    Ok((a.dot(b).norm_sqr() / (na * nb)).min(1.0))
}

/// `⟨t|ρ|t⟩ / (Tr ρ ‖t‖²)`.
pub fn density_fidelity(rho: &DenseOperator, t: &FockState) -> Result<f64> {
    if rho.dim() != t.cutoff() {
        return Err(FockError::Shape(format!("density dimension {} vs state cutoff {}", rho.dim(), t.cutoff())));
    }
    let tr = rho.trace().re;
    let nt = t.norm_sqr();
    if tr <= 0.0 || nt == 0.0 {
        return Err(FockError::ZeroNorm);
    }
    Ok(rho.expectation(t)?.re / (tr * nt))
}

/// Measured quadratures and the resulting mode-2 state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportOutcome {
    pub x_minus: f64,
    pub p_plus: f64,
    /// Unnormalized; for a homodyne readout this is the dominant component of the
    /// conditional mode-2 density scaled by the square root of its weight.
    pub collapsed: FockState,
    /// `x₋ + i p₊`.
    pub correction_alpha: Complex64,
}

impl TeleportOutcome {
    pub fn new(x_minus: f64, p_plus: f64, collapsed: FockState) -> Self {
        Self { x_minus, p_plus, collapsed, correction_alpha: Complex64::new(x_minus, p_plus) }
    }
}

/// Homodyne Bell measurement result: the oscillators leave mode 2 mixed at finite `|α|`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneTeleport {
    pub outcome: TeleportOutcome,
    /// Unnormalized conditional density of mode 2.
    pub density: DenseOperator,
    /// `Tr ρ² / (Tr ρ)²`.
    pub purity: f64,
    /// Relative weight dropped by the channel truncation.
    pub channel_loss: f64,
}

/// Cutoffs for the homodyne pipeline. `kernel_total` defaults to the smallest total
/// cutoff that keeps the oscillator loss under budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TeleportCutoffs {
    pub channel: usize,
    pub kernel_total: Option<usize>,
}

/// Slices `X_c[a][b] = χ(a, b, c)` of a three-mode state; `a < d0`, `b < d1`, `c < out`.
/// Nonzero amplitudes outside that box are a shape error.
pub fn mode_slices(chi: &MultiModeState, d0: usize, d1: usize, out: usize) -> Result<Vec<DMatrix<Complex64>>> {
    if chi.modes() != 3 {
        return Err(FockError::Shape(format!("expected three modes, got {}", chi.modes())));
    }
    let mut xs = vec![DMatrix::<Complex64>::zeros(d0, d1); out];
    for (o, z) in chi.iter() {
        if z == ZERO {
            continue;
        }
        if o[0] >= d0 || o[1] >= d1 || o[2] >= out {
            return Err(FockError::Shape(format!(
                "amplitude at ({}, {}, {}) outside the {d0}×{d1}×{out} box",
                o[0], o[1], o[2]
            )));
        }
        xs[o[2]][(o[0], o[1])] = z;
    }
    Ok(xs)
}

/// `ρ[c][c'] = Σ_{a,b} conj(X_{c'}[a][b]) (K₀ X_c K₁ᵀ)[a][b]`, i.e. the mode-2 state
/// left after sandwiching modes 0 and 1 with the kernels and tracing them out.
pub fn kernel_reduced_density(xs: &[DMatrix<Complex64>], k0: &DenseOperator, k1: &DenseOperator) -> Result<DenseOperator> {
    let out = xs.len();
    let ys: Vec<DMatrix<Complex64>> = xs
        .iter()
        .map(|x| {
            if x.nrows() != k0.dim() || x.ncols() != k1.dim() {
                return Err(FockError::Shape(format!(
                    "slice {}×{} vs kernels {} and {}",
                    x.nrows(),
                    x.ncols(),
                    k0.dim(),
                    k1.dim()
                )));
            }
            Ok(k0.matrix() * x * k1.matrix().transpose())
        })
        .collect::<Result<_>>()?;
    let rho = DMatrix::from_fn(out, out, |c, cp| xs[cp].dotc(&ys[c]));
    // Symmetrize away rounding; ρ is Hermitian by construction.
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DenseOperator::new(rho)
}

/// Largest-eigenvalue eigenvector scaled by `√λ`, phased so its largest entry is real positive.
pub fn principal_component(rho: &DenseOperator) -> Result<FockState> {
    let eig = rho.matrix().clone().symmetric_eigen();
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(FockError::ZeroNorm)?;
    if lambda <= 0.0 {
        return Err(FockError::ZeroNorm);
    }
    let v = eig.eigenvectors.column(idx);
    let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(ZERO);
    let phase = if pivot == ZERO { Complex64::new(1.0, 0.0) } else { pivot.conj() / pivot.norm() };
    FockState::new(v.iter().map(|z| z * phase * lambda.sqrt()).collect())
}

/// `Tr ρ² / (Tr ρ)²`.
pub fn purity(rho: &DenseOperator) -> Result<f64> {
    let tr = rho.trace().re;
    if tr <= 0.0 {
        return Err(FockError::ZeroNorm);
    }
    let sq: NeumaierSum = rho.matrix().iter().map(|z| z.norm_sqr()).collect();
    Ok(sq.value() / (tr * tr))
}

/// `U(π/4)` on modes (0, 1) of `|ψ⟩₀ ⊗ EPR₁₂`, with no truncation beyond the inputs'.
pub fn bell_rotated_state(psi0: &FockState, epr: &EprChannel) -> Result<MultiModeState> {
    let c0 = psi0.cutoff();
    let e = epr.cutoff;
    let total = (c0 - 1) + 2 * (e - 1);
    if total > MAX_THREE_MODE_TOTAL {
        return Err(FockError::Resource(format!(
            "three-mode total {total} exceeds {MAX_THREE_MODE_TOTAL}; lower the channel cutoff"
        )));
    }
    let joint = MultiModeState::from_fn(3, total, |o| {
        if o[1] == o[2] && o[1] < e && o[0] < c0 {
            psi0.amp(o[0]) * epr.q.powi(o[1] as i32)
        } else {
            ZERO
        }
    })?;
    let pair_total = (c0 - 1) + (e - 1);
    let u = balanced_beamsplitter(total.max(pair_total))?;
    u.apply_to_modes(&joint, (0, 1))
}

/// Homodyne realization of the Bell measurement with outcome `(l, k)`: oscillator
/// `|lo_mag⟩` against mode 0 (reads `x₀`) and `|i·lo_mag⟩` against mode 1 (reads `p₁`).
pub fn homodyne_bell_measure(
    psi0: &FockState,
    q: f64,
    lo_mag: f64,
    l: i64,
    k: i64,
    cutoffs: TeleportCutoffs,
) -> Result<HomodyneTeleport> {
    ensure_finite("|α|", lo_mag)?;
    if lo_mag <= 0.0 {
        return Err(FockError::InvalidParameter(format!("need lo_mag > 0, got {lo_mag}")));
    }
    let epr = epr_channel(q, cutoffs.channel)?;
    let chi = bell_rotated_state(psi0, &epr)?;
    let d = psi0.cutoff() + epr.cutoff - 1;
    let kt = cutoffs.kernel_total.unwrap_or_else(|| kernel_total_cutoff_required(lo_mag, d));
    let k0 = conditional_kernel(l, CoherentParams::from_polar(lo_mag, 0.0)?, d, kt)?;
    let k1 = conditional_kernel(k, CoherentParams::from_polar(lo_mag, FRAC_PI_2)?, d, kt)?;
    let xs = mode_slices(&chi, d, d, epr.cutoff)?;
    let density = kernel_reduced_density(&xs, &k0.operator, &k1.operator)?;
    let collapsed = principal_component(&density)?;
    let purity = purity(&density)?;
    let (x_minus, p_plus) = outcome_to_quadratures(l, k, lo_mag);
    Ok(HomodyneTeleport {
        outcome: TeleportOutcome::new(x_minus, p_plus, collapsed),
        density,
        purity,
        channel_loss: q.abs().powf(2.0 * epr.cutoff as f64),
    })
}

/// Largest entry gap between two routes to the mode-2 state left by one homodyne
/// measurement of `signal` (modes 0 and 2) against the oscillator `lo` (mode 1):
/// applying `Π^l` on modes (0, 1) of the explicit three-mode state and tracing, versus
/// the kernel reduction. Everything must fit under `total` photons.
pub fn single_homodyne_reduction_gap(signal: &MultiModeState, lo: &FockState, l: i64, total: usize) -> Result<f64> {
    if signal.modes() != 2 {
        return Err(FockError::Shape("signal must be a two-mode state".into()));
    }
    let ts = signal.total_cutoff();
    if ts + lo.cutoff() - 1 > total {
        return Err(FockError::Shape(format!(
            "signal total {ts} plus oscillator cutoff {} does not fit under {total}",
            lo.cutoff()
        )));
    }
    let s3 = MultiModeState::from_fn(3, total, |o| {
        if o[0] + o[2] <= ts && o[1] < lo.cutoff() {
            signal.get(&[o[0], o[2]]) * lo.amp(o[1])
        } else {
            ZERO
        }
    })?;
    let projected = projector_l(l, total)?.apply_to_modes(&s3, (0, 1))?;
    let out = ts + 1;
    let mut brute = DMatrix::<Complex64>::zeros(out, out);
    for (o, z) in projected.iter() {
        if o[2] >= out {
            continue;
        }
        for cp in 0..out {
            let w = s3.get(&[o[0], o[1], cp]);
            brute[(o[2], cp)] += w.conj() * z;
        }
    }

    let k0 = oscillator_kernel(l, lo, 1.0, ts + 1, total)?;
    let xs: Vec<DMatrix<Complex64>> = (0..out)
        .map(|c| DMatrix::from_fn(ts + 1, 1, |a, _| if a + c <= ts { signal.get(&[a, c]) } else { ZERO }))
        .collect();
    let reduced = kernel_reduced_density(&xs, &k0, &DenseOperator::identity(1))?;
    Ok((reduced.matrix() - brute).iter().map(|z| z.norm()).fold(0.0, f64::max))
}
