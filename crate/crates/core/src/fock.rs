//! Single- and multi-mode states in the truncated number basis.
//!
//! Amplitudes are coefficients in the orthonormal basis `|n⟩ ↔ ūⁿ/√(n!)` of the
//! Bargmann space, so the amplitude of `|n⟩` is `√(n!)` times the coefficient of
//! `ūⁿ` in the holomorphic function. Multi-mode states are truncated by total
//! photon number and stored block by block: all tuples with total 0, then total 1,
//! and so on. Two states with different total cutoffs therefore share a common
//! prefix of their storage.

use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, FockError, Result};
use crate::numeric::{coherent_truncation_loss, ln_factorial, ComplexSum, NeumaierSum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A value together with the probability weight discarded while truncating it.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncated<T> {
    pub value: T,
    pub loss: f64,
}

impl<T> Truncated<T> {
    pub fn into_inner(self) -> T {
        self.value
    }
}

impl<T> Deref for Truncated<T> {
    type Target = T;

    fn deref(&self) -> &T {
        &self.value
    }
}

/// Coherent amplitude `α = |α| e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParams {
    alpha: Complex64,
}

impl CoherentParams {
    pub fn new(alpha: Complex64) -> Result<Self> {
        ensure_finite("Re α", alpha.re)?;
        ensure_finite("Im α", alpha.im)?;
        Ok(Self { alpha })
    }

    pub fn real(alpha: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0))
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Result<Self> {
        ensure_finite("|α|", magnitude)?;
        ensure_finite("θ", phase)?;
        if magnitude < 0.0 {
            return Err(FockError::InvalidParameter(format!(
                "|α| must be non-negative, got {magnitude}"
            )));
        }
        Self::new(Complex64::from_polar(magnitude, phase))
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn magnitude(&self) -> f64 {
        self.alpha.norm()
    }

    /// Phase in `(−π, π]`; zero for `α = 0`.
    pub fn phase(&self) -> f64 {
        if self.alpha == ZERO {
            0.0
        } else {
            let p = self.alpha.arg();
            if p == -std::f64::consts::PI {
                std::f64::consts::PI
            } else {
                p
            }
        }
    }
}

/// Single-mode state `Σ_{n<cutoff} amps[n] |n⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FockStateRecord", into = "FockStateRecord")]
pub struct FockState {
    amps: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct FockStateRecord {
    cutoff: usize,
    amps: Vec<[f64; 2]>,
}

impl From<FockState> for FockStateRecord {
    fn from(s: FockState) -> Self {
        Self {
            cutoff: s.cutoff(),
            amps: s.amps.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<FockStateRecord> for FockState {
    type Error = FockError;

    fn try_from(r: FockStateRecord) -> Result<Self> {
        if r.amps.len() != r.cutoff {
            return Err(FockError::Shape(format!(
                "cutoff {} but {} amplitudes",
                r.cutoff,
                r.amps.len()
            )));
        }
        FockState::new(r.amps.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl FockState {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(FockError::InvalidParameter("cutoff must be at least 1".into()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FockError::InvalidParameter("amplitudes must be finite".into()));
        }
        Ok(Self { amps })
    }

    pub fn zeros(cutoff: usize) -> Result<Self> {
        Self::new(vec![ZERO; cutoff])
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        number_state(0, cutoff)
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    /// Amplitude of `|n⟩`, zero beyond the cutoff.
    pub fn amp(&self, n: usize) -> Complex64 {
        self.amps.get(n).copied().unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).collect::<NeumaierSum>().value()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`; the shorter vector is zero-padded.
    pub fn dot(&self, other: &FockState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .collect::<ComplexSum>()
            .value()
    }

    pub fn scaled(&self, c: Complex64) -> FockState {
        FockState { amps: self.amps.iter().map(|z| z * c).collect() }
    }

    pub fn normalized(&self) -> Result<FockState> {
        let n = self.norm();
        if n == 0.0 {
            return Err(FockError::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Pads with zeros or drops the top amplitudes.
    pub fn resized(&self, cutoff: usize) -> Result<FockState> {
        let mut amps = self.amps.clone();
        amps.resize(cutoff, ZERO);
        FockState::new(amps)
    }

    /// Maximum amplitude difference, zero-padding the shorter state.
    pub fn max_abs_diff(&self, other: &FockState) -> f64 {
        let n = self.cutoff().max(other.cutoff());
        (0..n).map(|i| (self.amp(i) - other.amp(i)).norm()).fold(0.0, f64::max)
    }
}

/// Two- or three-mode state truncated by total photon number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MultiModeRecord", into = "MultiModeRecord")]
pub struct MultiModeState {
    modes: usize,
    total_cutoff: usize,
    amps: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MultiModeRecord {
    modes: usize,
    total_cutoff: usize,
    amps: Vec<[f64; 2]>,
}

impl From<MultiModeState> for MultiModeRecord {
    fn from(s: MultiModeState) -> Self {
        Self {
            modes: s.modes,
            total_cutoff: s.total_cutoff,
            amps: s.amps.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MultiModeRecord> for MultiModeState {
    type Error = FockError;

    fn try_from(r: MultiModeRecord) -> Result<Self> {
        MultiModeState::from_amps(
            r.modes,
            r.total_cutoff,
            r.amps.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        )
    }
}

/// Occupation tuple; entries past the mode count are zero.
pub type Occupation = [usize; 3];

/// Number of stored amplitudes for `modes` modes with total photon number ≤ `total`.
pub fn multimode_len(modes: usize, total: usize) -> usize {
    match modes {
        2 => (total + 1) * (total + 2) / 2,
        3 => (total + 1) * (total + 2) * (total + 3) / 6,
        _ => 0,
    }
}

/// Storage offset of the two-mode block with total `n`.
pub fn block_offset(n: usize) -> usize {
    n * (n + 1) / 2
}

fn check_modes(modes: usize) -> Result<()> {
    if modes == 2 || modes == 3 {
        Ok(())
    } else {
        Err(FockError::Shape(format!("only 2 or 3 modes are supported, got {modes}")))
    }
}

impl MultiModeState {
    pub fn zeros(modes: usize, total_cutoff: usize) -> Result<Self> {
        check_modes(modes)?;
        Ok(Self { modes, total_cutoff, amps: vec![ZERO; multimode_len(modes, total_cutoff)] })
    }

    pub fn from_amps(modes: usize, total_cutoff: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_modes(modes)?;
        let want = multimode_len(modes, total_cutoff);
        if amps.len() != want {
            return Err(FockError::Shape(format!(
                "{modes}-mode state with total cutoff {total_cutoff} needs {want} amplitudes, got {}",
                amps.len()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FockError::InvalidParameter("amplitudes must be finite".into()));
        }
        Ok(Self { modes, total_cutoff, amps })
    }

    /// Builds a state from a function of the occupation tuple.
    pub fn from_fn(
        modes: usize,
        total_cutoff: usize,
        mut f: impl FnMut(&[usize]) -> Complex64,
    ) -> Result<Self> {
        check_modes(modes)?;
        let amps = occupations(modes, total_cutoff).map(|occ| f(&occ[..modes])).collect();
        Self::from_amps(modes, total_cutoff, amps)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn total_cutoff(&self) -> usize {
        self.total_cutoff
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Storage index of an occupation tuple, `None` if it exceeds the total cutoff.
    pub fn index(&self, occ: &[usize]) -> Option<usize> {
        if occ.len() != self.modes {
            return None;
        }
        let total: usize = occ.iter().sum();
        if total > self.total_cutoff {
            return None;
        }
        Some(match self.modes {
            2 => block_offset(total) + occ[0],
            _ => index3(occ[0], occ[1], total),
        })
    }

    /// Amplitude of an occupation tuple, zero when not stored.
    pub fn get(&self, occ: &[usize]) -> Complex64 {
        self.index(occ).map(|i| self.amps[i]).unwrap_or(ZERO)
    }

    /// Occupation tuples in storage order, paired with their amplitudes.
    pub fn iter(&self) -> impl Iterator<Item = (Occupation, Complex64)> + '_ {
        occupations(self.modes, self.total_cutoff).zip(self.amps.iter().copied())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).collect::<NeumaierSum>().value()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> MultiModeState {
        MultiModeState {
            modes: self.modes,
            total_cutoff: self.total_cutoff,
            amps: self.amps.iter().map(|z| z * c).collect(),
        }
    }

    /// Elementwise sum; both states must have the same shape.
    pub fn add(&self, other: &MultiModeState) -> Result<MultiModeState> {
        self.same_shape(other)?;
        Ok(MultiModeState {
            modes: self.modes,
            total_cutoff: self.total_cutoff,
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &MultiModeState) -> Result<MultiModeState> {
        self.add(&other.scaled(-ONE))
    }

    /// Pads or truncates to a new total cutoff, keeping shared tuples.
    pub fn with_total_cutoff(&self, total_cutoff: usize) -> MultiModeState {
        let mut amps = self.amps.clone();
        amps.resize(multimode_len(self.modes, total_cutoff), ZERO);
        MultiModeState { modes: self.modes, total_cutoff, amps }
    }

    pub fn max_abs_diff(&self, other: &MultiModeState) -> Result<f64> {
        if self.modes != other.modes {
            return Err(FockError::Shape("mode counts differ".into()));
        }
        let n = self.amps.len().max(other.amps.len());
        Ok((0..n)
            .map(|i| {
                let a = self.amps.get(i).copied().unwrap_or(ZERO);
                let b = other.amps.get(i).copied().unwrap_or(ZERO);
                (a - b).norm()
            })
            .fold(0.0, f64::max))
    }

    fn same_shape(&self, other: &MultiModeState) -> Result<()> {
        if self.modes != other.modes || self.total_cutoff != other.total_cutoff {
            return Err(FockError::Shape(format!(
                "({} modes, total {}) vs ({} modes, total {})",
                self.modes, self.total_cutoff, other.modes, other.total_cutoff
            )));
        }
        Ok(())
    }
}

fn tetrahedral(s: usize) -> usize {
    s * (s + 1) * (s + 2) / 6
}

/// Three-mode layout: by total `s`, then `n0`, then `n1`.
fn index3(n0: usize, n1: usize, s: usize) -> usize {
    tetrahedral(s) + n0 * (s + 1) - n0 * n0.saturating_sub(1) / 2 + n1
}

/// All occupation tuples in storage order.
pub fn occupations(modes: usize, total: usize) -> impl Iterator<Item = Occupation> {
    (0..=total).flat_map(move |s| {
        let two: Box<dyn Iterator<Item = Occupation>> = if modes == 2 {
            Box::new((0..=s).map(move |a| [a, s - a, 0]))
        } else {
            Box::new((0..=s).flat_map(move |n0| (0..=s - n0).map(move |n1| [n0, n1, s - n0 - n1])))
        };
        two
    })
}

/// `|α⟩` truncated to `cutoff` levels, not renormalized; the loss is the Poisson tail.
pub fn coherent_state(p: CoherentParams, cutoff: usize) -> Result<Truncated<FockState>> {
    if cutoff == 0 {
        return Err(FockError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let mag = p.magnitude();
    let phase = p.alpha().arg();
    let amps: Vec<Complex64> = (0..cutoff)
        .map(|n| {
            if mag == 0.0 {
                return if n == 0 { ONE } else { ZERO };
            }
            let ln_mag = -mag * mag / 2.0 + n as f64 * mag.ln() - 0.5 * ln_factorial(n);
            Complex64::from_polar(ln_mag.exp(), n as f64 * phase)
        })
        .collect();
    Ok(Truncated {
        value: FockState::new(amps)?,
        loss: coherent_truncation_loss(mag * mag, cutoff),
    })
}

pub fn number_state(n: usize, cutoff: usize) -> Result<FockState> {
    if n >= cutoff {
        return Err(FockError::OutOfRange { index: n, cutoff });
    }
    let mut amps = vec![ZERO; cutoff];
    amps[n] = ONE;
    FockState::new(amps)
}

/// Types with a well-defined inner product.
pub trait InnerProduct {
    fn inner(&self, other: &Self) -> Result<Complex64>;
}

impl InnerProduct for FockState {
    fn inner(&self, other: &Self) -> Result<Complex64> {
        Ok(self.dot(other))
    }
}

impl InnerProduct for MultiModeState {
    fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.modes != other.modes {
            return Err(FockError::Shape(format!(
                "inner product of {}-mode and {}-mode states",
                self.modes, other.modes
            )));
        }
        // Storage is ordered by total photon number, so shared tuples form a common prefix.
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .collect::<ComplexSum>()
            .value())
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner<S: InnerProduct>(a: &S, b: &S) -> Result<Complex64> {
    a.inner(b)
}

/// Bargmann function `f(w) = Σ amps[n] wⁿ/√(n!)`.
pub fn bargmann_eval(s: &FockState, w: Complex64) -> Result<Complex64> {
    ensure_finite("Re w", w.re)?;
    ensure_finite("Im w", w.im)?;
    let mut term = ONE;
    let mut acc = ComplexSum::default();
    for (n, a) in s.amps.iter().enumerate() {
        if n > 0 {
            term *= w / (n as f64).sqrt();
        }
        acc.add(a * term);
    }
    Ok(acc.value())
}

/// `a ⊗ b` restricted to total photon number ≤ `total_cutoff`; `loss` is the discarded weight.
pub fn tensor(a: &FockState, b: &FockState, total_cutoff: usize) -> Truncated<MultiModeState> {
    let value = MultiModeState::from_fn(2, total_cutoff, |occ| a.amp(occ[0]) * b.amp(occ[1]))
        .expect("two-mode shape is valid");
    let mut loss = NeumaierSum::default();
    for (m, am) in a.amps.iter().enumerate() {
        let wa = am.norm_sqr();
        if wa == 0.0 {
            continue;
        }
        let first_dropped = if m <= total_cutoff { total_cutoff - m + 1 } else { 0 };
        for bn in b.amps.iter().skip(first_dropped) {
            loss.add(wa * bn.norm_sqr());
        }
    }
    Truncated { value, loss: loss.value() }
}

/// Result of contracting one mode of a multi-mode state.
#[derive(Debug, Clone, PartialEq)]
pub enum Reduced {
    Single(FockState),
    Multi(MultiModeState),
}

impl Reduced {
    pub fn into_single(self) -> Result<FockState> {
        match self {
            Reduced::Single(s) => Ok(s),
            Reduced::Multi(_) => Err(FockError::Shape("expected a single-mode result".into())),
        }
    }

    pub fn into_multi(self) -> Result<MultiModeState> {
        match self {
            Reduced::Multi(s) => Ok(s),
            Reduced::Single(_) => Err(FockError::Shape("expected a multi-mode result".into())),
        }
    }
}

/// Applies `⟨bra|` to mode `mode` (zero-based): `Σ_n conj(bra[n]) s[…, n, …]`.
pub fn contract_mode(s: &MultiModeState, mode: usize, bra: &FockState) -> Result<Reduced> {
    if mode >= s.modes {
        return Err(FockError::OutOfRange { index: mode, cutoff: s.modes });
    }
    let t = s.total_cutoff;
    if s.modes == 2 {
        let mut out = vec![ComplexSum::default(); t + 1];
        for (occ, z) in s.iter() {
            let (n, other) = if mode == 0 { (occ[0], occ[1]) } else { (occ[1], occ[0]) };
            if n < bra.cutoff() {
                out[other].add(bra.amps[n].conj() * z);
            }
        }
        Ok(Reduced::Single(FockState::new(out.iter().map(ComplexSum::value).collect())?))
    } else {
        let mut out = MultiModeState::zeros(2, t)?;
        let mut acc = vec![ComplexSum::default(); out.amps.len()];
        for (occ, z) in s.iter() {
            let n = occ[mode];
            if n >= bra.cutoff() {
                continue;
            }
            let rest: [usize; 2] = match mode {
                0 => [occ[1], occ[2]],
                1 => [occ[0], occ[2]],
                _ => [occ[0], occ[1]],
            };
            let i = out.index(&rest).expect("reduced tuple fits the cutoff");
            acc[i].add(bra.amps[n].conj() * z);
        }
        for (slot, a) in out.amps.iter_mut().zip(&acc) {
            *slot = a.value();
        }
        Ok(Reduced::Multi(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn coh(alpha: Complex64, cutoff: usize) -> FockState {
        coherent_state(CoherentParams::new(alpha).unwrap(), cutoff).unwrap().into_inner()
    }

    #[test]
    fn vacuum_coherent_state() {
        let s = coherent_state(CoherentParams::real(0.0).unwrap(), 4).unwrap();
        assert_eq!(s.amps(), &[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.loss, 0.0);
    }

    #[test]
    fn coherent_one_low_amplitudes() {
        let s = coherent_state(CoherentParams::real(1.0).unwrap(), 32).unwrap();
        let e = (-0.5f64).exp();
        assert_relative_eq!(s.amp(0).re, e, max_relative = 1e-15);
        assert_relative_eq!(s.amp(1).re, e, max_relative = 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_eight_truncation_loss() {
        let s = coherent_state(CoherentParams::real(8.0).unwrap(), 160).unwrap();
        assert!(s.loss < 1e-10);
        assert!(s.loss > 0.0);
        assert!((1.0 - s.norm_sqr() - s.loss).abs() < 1e-13);
    }

    #[test]
    fn non_finite_alpha_rejected() {
        assert!(matches!(
            CoherentParams::new(c(f64::NAN, 0.0)),
            Err(FockError::InvalidParameter(_))
        ));
        assert!(CoherentParams::from_polar(-1.0, 0.0).is_err());
    }

    #[test]
    fn phase_range() {
        let p = CoherentParams::new(c(-2.0, 0.0)).unwrap();
        assert_eq!(p.phase(), std::f64::consts::PI);
        assert_eq!(p.magnitude(), 2.0);
        let p = CoherentParams::from_polar(1.5, -0.3).unwrap();
        assert_relative_eq!(p.phase(), -0.3, max_relative = 1e-14);
    }

    #[test]
    fn coherent_overlaps() {
        let a = coh(c(1.0, 0.0), 64);
        assert!((inner(&a, &a).unwrap() - ONE).norm() < 1e-12);
        let v = coh(c(0.0, 0.0), 64);
        let b = coh(c(2.0, 0.0), 64);
        assert_relative_eq!(inner(&v, &b).unwrap().re, (-2f64).exp(), max_relative = 1e-13);
    }

    #[test]
    fn bargmann_examples() {
        let v = FockState::vacuum(4).unwrap();
        assert_eq!(bargmann_eval(&v, c(5.0, 0.0)).unwrap(), ONE);
        let one = number_state(1, 4).unwrap();
        assert_eq!(bargmann_eval(&one, c(2.0, 1.0)).unwrap(), c(2.0, 1.0));
        let s = coh(c(1.0, 0.0), 64);
        let want = (-0.5f64).exp() * 1f64.exp();
        assert_relative_eq!(bargmann_eval(&s, ONE).unwrap().re, want, max_relative = 1e-14);
    }

    #[test]
    fn number_states() {
        assert_eq!(number_state(0, 3).unwrap(), FockState::vacuum(3).unwrap());
        let s = number_state(3, 8).unwrap();
        assert_eq!(s.amp(3), ONE);
        assert_eq!(s.norm_sqr(), 1.0);
        let a = number_state(2, 8).unwrap();
        assert_eq!(inner(&a, &s).unwrap(), ZERO);
        assert_eq!(number_state(4, 4), Err(FockError::OutOfRange { index: 4, cutoff: 4 }));
    }

    #[test]
    fn inner_zero_pads_shorter_state() {
        let a = number_state(1, 2).unwrap();
        let b = coh(c(0.5, 0.2), 30);
        assert_eq!(inner(&a, &b).unwrap(), b.amp(1));
    }

    #[test]
    fn multimode_index_roundtrip() {
        for modes in [2, 3] {
            let s = MultiModeState::zeros(modes, 7).unwrap();
            for (i, (occ, _)) in s.iter().enumerate() {
                assert_eq!(s.index(&occ[..modes]), Some(i));
            }
            assert_eq!(s.amps().len(), multimode_len(modes, 7));
        }
    }

    #[test]
    fn multimode_rejects_bad_shapes() {
        assert!(matches!(MultiModeState::zeros(4, 3), Err(FockError::Shape(_))));
        let a = MultiModeState::zeros(2, 3).unwrap();
        let b = MultiModeState::zeros(3, 3).unwrap();
        assert!(matches!(inner(&a, &b), Err(FockError::Shape(_))));
    }

    #[test]
    fn tensor_examples() {
        let v = FockState::vacuum(3).unwrap();
        let t = tensor(&v, &v, 4);
        assert_eq!(t.get(&[0, 0]), ONE);
        assert_eq!(t.loss, 0.0);

        let one = number_state(1, 3).unwrap();
        let t = tensor(&one, &one, 1);
        assert_eq!(t.norm_sqr(), 0.0);
        assert_eq!(t.loss, 1.0);

        let a = coh(c(0.5, 0.0), 41);
        let t = tensor(&a, &a, 40);
        assert!((t.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tensor_loss_complements_norm() {
        let a = coh(c(1.2, -0.3), 12);
        let b = coh(c(0.4, 0.9), 9);
        let t = tensor(&a, &b, 10);
        assert!((t.norm_sqr() + t.loss - a.norm_sqr() * b.norm_sqr()).abs() < 1e-14);
    }

    #[test]
    fn contract_vacuum() {
        let v = FockState::vacuum(3).unwrap();
        let t = tensor(&v, &v, 2).into_inner();
        let r = contract_mode(&t, 1, &v).unwrap().into_single().unwrap();
        assert_eq!(r.amp(0), ONE);
        assert_eq!(r.norm_sqr(), 1.0);
    }

    #[test]
    fn contract_diagonal_state() {
        let q: f64 = 0.5;
        let s = MultiModeState::from_fn(2, 38, |o| {
            if o[0] == o[1] {
                c(q.powi(o[0] as i32), 0.0)
            } else {
                ZERO
            }
        })
        .unwrap();
        let bra = number_state(3, 20).unwrap();
        let r = contract_mode(&s, 1, &bra).unwrap().into_single().unwrap();
        assert_eq!(r.amp(3), c(0.125, 0.0));
        assert_eq!(r.norm_sqr(), 0.125 * 0.125);
    }

    #[test]
    fn contraction_over_all_modes_is_inner() {
        let a = coh(c(0.7, 0.1), 20);
        let b = coh(c(-0.3, 0.5), 20);
        let s = tensor(&a, &b, 25).into_inner();
        let first = contract_mode(&s, 1, &b).unwrap().into_single().unwrap();
        let full = inner(&a, &first).unwrap();
        let both = tensor(&a, &b, 25).into_inner();
        assert!((full - inner(&both, &s).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn contract_three_modes() {
        let s = MultiModeState::from_fn(3, 4, |o| c(o[0] as f64 + 10.0 * o[1] as f64, o[2] as f64))
            .unwrap();
        let bra = number_state(1, 5).unwrap();
        let r = contract_mode(&s, 2, &bra).unwrap().into_multi().unwrap();
        assert_eq!(r.get(&[2, 1]), s.get(&[2, 1, 1]));
        let r = contract_mode(&s, 0, &bra).unwrap().into_multi().unwrap();
        assert_eq!(r.get(&[0, 3]), s.get(&[1, 0, 3]));
        assert!(contract_mode(&s, 3, &bra).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let s = coh(c(0.3, -0.2), 5);
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.starts_with("{\"cutoff\":5,\"amps\":[["));
        let back: FockState = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<FockState>("{\"cutoff\":2,\"amps\":[[1,0]]}").is_err());

        let m = tensor(&s, &s, 3).into_inner();
        let back: MultiModeState = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
