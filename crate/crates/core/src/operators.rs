//! Ladder, quadrature, displacement and beamsplitter operators.
//!
//! Single-mode operators are dense `dim × dim` matrices in the number basis.
//! Two-mode operators that conserve total photon number are stored as one
//! `(N+1) × (N+1)` block per total `N`, in the basis `|a, N−a⟩` ordered by
//! increasing first-mode occupation `a`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{ensure_finite, FockError, Result};
use crate::fock::{block_offset, FockState, MultiModeState};
use crate::numeric::{hermite_functions, ln_factorial, ComplexSum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn cplx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense single-mode operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(FockError::Shape(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FockError::InvalidParameter("operator entries must be finite".into()));
        }
        Ok(Self { matrix })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: DMatrix::zeros(dim, dim) }
    }

    /// `|u⟩⟨v|` scaled by `c`.
    pub fn outer(u: &[Complex64], v: &[Complex64], c: Complex64) -> Result<Self> {
        if u.len() != v.len() {
            return Err(FockError::Shape("outer product of unequal lengths".into()));
        }
        Self::from_fn(u.len(), |i, j| c * u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn dagger(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn compose(&self, other: &DenseOperator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(FockError::Shape(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(Self { matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(FockError::Shape(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(Self { matrix: &self.matrix + &other.matrix })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { matrix: &self.matrix * c }
    }

    /// Top-left `k × k` block.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.dim());
        Self { matrix: self.matrix.view((0, 0), (k, k)).into_owned() }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |A − B|` entrywise.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(FockError::Shape(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `max |A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger()).expect("same dimension")
    }

    /// `max |A†A − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.matrix.adjoint() * &self.matrix;
        DenseOperator { matrix: p }
            .max_abs_diff(&DenseOperator::identity(self.dim()))
            .expect("same dimension")
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * cplx(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Expectation `⟨s|A|s⟩`.
    pub fn expectation(&self, s: &FockState) -> Result<Complex64> {
        let v = self.apply(s)?;
        Ok(s.dot(&v))
    }
}

/// Two-mode operator block-diagonal in total photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    blocks: Vec<DMatrix<Complex64>>,
}

impl BlockOperator {
    pub fn from_blocks(blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(FockError::Shape("need at least the N = 0 block".into()));
        }
        for (n, b) in blocks.iter().enumerate() {
            if b.nrows() != n + 1 || b.ncols() != n + 1 {
                return Err(FockError::Shape(format!(
                    "block {n} must be {}x{}, got {}x{}",
                    n + 1,
                    n + 1,
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { blocks })
    }

    pub fn identity(total_cutoff: usize) -> Self {
        Self { blocks: (0..=total_cutoff).map(|n| DMatrix::identity(n + 1, n + 1)).collect() }
    }

    pub fn zeros(total_cutoff: usize) -> Self {
        Self { blocks: (0..=total_cutoff).map(|n| DMatrix::zeros(n + 1, n + 1)).collect() }
    }

    pub fn total_cutoff(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, n: usize) -> &DMatrix<Complex64> {
        &self.blocks[n]
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub fn dagger(&self) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    fn zip_with(
        &self,
        other: &BlockOperator,
        f: impl Fn(&DMatrix<Complex64>, &DMatrix<Complex64>) -> DMatrix<Complex64>,
    ) -> Result<Self> {
        if self.total_cutoff() != other.total_cutoff() {
            return Err(FockError::Shape(format!(
                "total cutoffs {} vs {}",
                self.total_cutoff(),
                other.total_cutoff()
            )));
        }
        Ok(Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect() })
    }

    /// `self · other`.
    pub fn compose(&self, other: &BlockOperator) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &BlockOperator) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b * c).collect() }
    }

    /// Largest entrywise difference over all blocks.
    pub fn max_abs_diff(&self, other: &BlockOperator) -> Result<f64> {
        if self.total_cutoff() != other.total_cutoff() {
            return Err(FockError::Shape("total cutoffs differ".into()));
        }
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max))
    }

    /// Largest `max |B_N†B_N − I|` over blocks.
    pub fn unitarity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let p = b.adjoint() * b;
                let n = b.nrows();
                p.iter()
                    .enumerate()
                    .map(|(k, z)| {
                        let (i, j) = (k % n, k / n);
                        (z - if i == j { ONE } else { ZERO }).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Dense matrix over the whole truncated two-mode space, in state storage order.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let t = self.total_cutoff();
        let dim = block_offset(t + 1);
        let mut m = DMatrix::zeros(dim, dim);
        for (n, b) in self.blocks.iter().enumerate() {
            let o = block_offset(n);
            m.view_mut((o, o), (n + 1, n + 1)).copy_from(b);
        }
        m
    }

    /// Applies the operator to modes `pair = (i, j)` of a three-mode state;
    /// the block basis index is the occupation of mode `i`.
    pub fn apply_to_modes(&self, s: &MultiModeState, pair: (usize, usize)) -> Result<MultiModeState> {
        let (i, j) = pair;
        if s.modes() != 3 || i == j || i > 2 || j > 2 {
            return Err(FockError::Shape(format!(
                "mode pair ({i}, {j}) on a {}-mode state",
                s.modes()
            )));
        }
        let t = s.total_cutoff();
        if t > self.total_cutoff() {
            return Err(FockError::Shape(format!(
                "state total cutoff {t} exceeds operator total cutoff {}",
                self.total_cutoff()
            )));
        }
        let k = 3 - i - j;
        let mut out = MultiModeState::zeros(3, t)?;
        let mut occ = [0usize; 3];
        for c in 0..=t {
            occ[k] = c;
            for n in 0..=t - c {
                let mut v = nalgebra::DVector::zeros(n + 1);
                for a in 0..=n {
                    occ[i] = a;
                    occ[j] = n - a;
                    v[a] = s.get(&occ);
                }
                let w = &self.blocks[n] * v;
                for a in 0..=n {
                    occ[i] = a;
                    occ[j] = n - a;
                    let idx = out.index(&occ).expect("tuple within cutoff");
                    out.amps_mut()[idx] = w[a];
                }
            }
        }
        Ok(out)
    }
}

/// Matrix–vector action of an operator on a state of matching shape.
pub trait Apply<S> {
    fn apply(&self, s: &S) -> Result<S>;
}

impl Apply<FockState> for DenseOperator {
    fn apply(&self, s: &FockState) -> Result<FockState> {
        if s.cutoff() != self.dim() {
            return Err(FockError::Shape(format!(
                "operator dimension {} vs state cutoff {}",
                self.dim(),
                s.cutoff()
            )));
        }
        let amps = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| self.matrix[(i, j)] * s.amps()[j])
                    .collect::<ComplexSum>()
                    .value()
            })
            .collect();
        FockState::new(amps)
    }
}

impl Apply<MultiModeState> for BlockOperator {
    fn apply(&self, s: &MultiModeState) -> Result<MultiModeState> {
        if s.modes() != 2 {
            return Err(FockError::Shape(format!(
                "block operator on a {}-mode state; use apply_to_modes",
                s.modes()
            )));
        }
        let t = s.total_cutoff();
        if t > self.total_cutoff() {
            return Err(FockError::Shape(format!(
                "state total cutoff {t} exceeds operator total cutoff {}",
                self.total_cutoff()
            )));
        }
        let mut out = s.clone();
        for n in 0..=t {
            let o = block_offset(n);
            let v = nalgebra::DVector::from_column_slice(&s.amps()[o..o + n + 1]);
            let w = &self.blocks[n] * v;
            out.amps_mut()[o..o + n + 1].copy_from_slice(w.as_slice());
        }
        Ok(out)
    }
}

pub fn apply<O: Apply<S>, S>(op: &O, s: &S) -> Result<S> {
    op.apply(s)
}

/// Annihilation and creation operators truncated to `cutoff` levels.
/// The commutator `[a, a†]` equals the identity except for the last diagonal entry,
/// which is `1 − cutoff`.
pub fn ladder(cutoff: usize) -> Result<(DenseOperator, DenseOperator)> {
    if cutoff == 0 {
        return Err(FockError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let a = DenseOperator::from_fn(cutoff, |i, j| if j == i + 1 { cplx((j as f64).sqrt()) } else { ZERO })?;
    let ad = a.dagger();
    Ok((a, ad))
}

pub fn number_operator(cutoff: usize) -> Result<DenseOperator> {
    if cutoff == 0 {
        return Err(FockError::InvalidParameter("cutoff must be at least 1".into()));
    }
    DenseOperator::from_fn(cutoff, |i, j| if i == j { cplx(i as f64) } else { ZERO })
}

/// `ξ(θ) = e^{−iθ} a + e^{iθ} a†`.
pub fn quadrature_op(theta: f64, cutoff: usize) -> Result<DenseOperator> {
    ensure_finite("θ", theta)?;
    if cutoff == 0 {
        return Err(FockError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let up = Complex64::from_polar(1.0, theta);
    DenseOperator::from_fn(cutoff, |i, j| {
        if j == i + 1 {
            up.conj() * (j as f64).sqrt()
        } else if i == j + 1 {
            up * (i as f64).sqrt()
        } else {
            ZERO
        }
    })
}

/// Truncated generalized eigenvector of `ξ(θ)` with eigenvalue `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadEigenstate {
    pub theta: f64,
    pub r: f64,
    pub state: FockState,
}

/// `amps[n] = e^{inθ} e^{−r²/4} He_n(r)/√(n!)`; not normalizable, never renormalized.
pub fn quad_eigenstate(theta: f64, r: f64, cutoff: usize) -> Result<QuadEigenstate> {
    ensure_finite("θ", theta)?;
    ensure_finite("r", r)?;
    if cutoff == 0 {
        return Err(FockError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let h = hermite_functions(r, cutoff);
    let amps = h
        .iter()
        .enumerate()
        .map(|(n, &v)| Complex64::from_polar(1.0, n as f64 * theta) * v)
        .collect();
    Ok(QuadEigenstate { theta, r, state: FockState::new(amps)? })
}

/// `D(α)` from the normal-ordered product `e^{−|α|²/2} e^{αa†} e^{−ᾱa}`.
///
/// Entries are the finite sums
/// `D[m][n] = e^{−|α|²/2} Σ_{k ≤ min(m,n)} √(m! n!)/k! · α^{m−k}/(m−k)! · (−ᾱ)^{n−k}/(n−k)!`,
/// which coincide with the matrix elements of the untruncated operator. Terms
/// alternate in sign, so accuracy degrades once `|α|² · cutoff` is large.
pub fn displacement(alpha: Complex64, cutoff: usize) -> Result<DenseOperator> {
    ensure_finite("Re α", alpha.re)?;
    ensure_finite("Im α", alpha.im)?;
    if cutoff == 0 {
        return Err(FockError::InvalidParameter("cutoff must be at least 1".into()));
    }
    let mag = alpha.norm();
    let phase = alpha.arg();
    if mag == 0.0 {
        return Ok(DenseOperator::identity(cutoff));
    }
    let ln_mag = mag.ln();
    let pre = -mag * mag / 2.0;
    DenseOperator::from_fn(cutoff, |m, n| {
        let mut acc = ComplexSum::default();
        for k in 0..=m.min(n) {
            let (p, q) = (m - k, n - k);
            let ln_t = pre + 0.5 * (ln_factorial(m) + ln_factorial(n)) - ln_factorial(k)
                - ln_factorial(p)
                - ln_factorial(q)
                + (p + q) as f64 * ln_mag;
            // α^p (−ᾱ)^q = |α|^{p+q} e^{i(p−q)θ} (−1)^q
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(Complex64::from_polar(sign * ln_t.exp(), (p as f64 - q as f64) * phase));
        }
        acc.value()
    })
}

/// Largest total photon number for which the eigenbasis edge values stay representable.
pub const MAX_BLOCK_TOTAL: usize = 1800;

/// Eigenvector of block `N` of `Ξ = a₀†a₁ + a₁†a₀` with eigenvalue `2m − N`,
/// i.e. column `m` of block `N` of `U(π/4)`:
/// `(ū₀ + ū₁)^m (−ū₀ + ū₁)^{N−m} / √(2^N m! (N−m)!)` in the number basis.
///
/// Both edge entries are known in closed form (`√(C(N,m)/2^N)` at `a = 0` and
/// `(−1)^{N−m}` times that at `a = N`), so the three-term eigen-recurrence is run
/// inward from each edge and the halves meet in the middle. Inward is the
/// growing direction on both sides, which keeps the result accurate to a few ulps
/// times `N`, unlike outward recurrences or alternating binomial sums.
pub(crate) fn xi_eigenvector(n: usize, m: usize) -> Vec<f64> {
    debug_assert!(m <= n && n <= MAX_BLOCK_TOTAL);
    let mut v = vec![0.0; n + 1];
    let edge = (0.5 * (crate::numeric::ln_binomial(n, m) - n as f64 * std::f64::consts::LN_2)).exp();
    if n == 0 {
        v[0] = 1.0;
        return v;
    }
    let lam = 2.0 * m as f64 - n as f64;
    let off = |a: usize| (((a + 1) * (n - a)) as f64).sqrt();
    let half = n / 2;
    v[0] = edge;
    // Row a: off(a−1) v[a−1] + off(a) v[a+1] = λ v[a]
    for a in 0..half {
        let below = if a > 0 { off(a - 1) * v[a - 1] } else { 0.0 };
        v[a + 1] = (lam * v[a] - below) / off(a);
    }
    let mut w = vec![0.0; n + 1];
    w[n] = if (n - m) % 2 == 0 { edge } else { -edge };
    for a in (half + 2..=n).rev() {
        let above = if a < n { off(a) * w[a + 1] } else { 0.0 };
        w[a - 1] = (lam * w[a] - above) / off(a - 1);
    }
    v[half + 1..].copy_from_slice(&w[half + 1..]);
    v
}

/// All eigenvectors of block `N` of `Ξ` as columns (block `N` of `U(π/4)`).
pub(crate) fn xi_eigenbasis(n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(n + 1, n + 1);
    for m in 0..=n {
        w.set_column(m, &nalgebra::DVector::from_vec(xi_eigenvector(n, m)));
    }
    w
}

fn check_block_total(total_cutoff: usize) -> Result<()> {
    if total_cutoff > MAX_BLOCK_TOTAL {
        return Err(FockError::Resource(format!(
            "total cutoff {total_cutoff} exceeds the supported maximum {MAX_BLOCK_TOTAL}"
        )));
    }
    Ok(())
}

/// Photon-number-preserving beamsplitter
/// `U(θ) f(ū₀, ū₁) = f(ū₀ cosθ + ū₁ sinθ, −ū₀ sinθ + ū₁ cosθ)` on two modes.
///
/// The generator `G = −a₀†a₁ + a₁†a₀` satisfies `G = i P Ξ P†` with
/// `P = diag(i^a)`, so block `N` is `P W e^{iθΛ} Wᵀ P†` where `W` holds the
/// eigenvectors of `Ξ` and `Λ = diag(2m − N)`. The result is real.
pub fn beamsplitter(theta: f64, total_cutoff: usize) -> Result<BlockOperator> {
    ensure_finite("θ", theta)?;
    check_block_total(total_cutoff)?;
    let blocks = (0..=total_cutoff)
        .map(|n| {
            let w = xi_eigenbasis(n);
            let (mut wc, mut ws) = (w.clone(), w.clone());
            for m in 0..=n {
                let (s, c) = (theta * (2.0 * m as f64 - n as f64)).sin_cos();
                wc.column_mut(m).scale_mut(c);
                ws.column_mut(m).scale_mut(s);
            }
            let re = &wc * w.transpose();
            let im = &ws * w.transpose();
            // Entry (a, b) picks up i^{a−b}; only the real part survives.
            DMatrix::from_fn(n + 1, n + 1, |a, b| {
                let v = match (a + 4 * (n + 1) - b) % 4 {
                    0 => re[(a, b)],
                    1 => -im[(a, b)],
                    2 => -re[(a, b)],
                    _ => im[(a, b)],
                };
                cplx(v)
            })
        })
        .collect();
    BlockOperator::from_blocks(blocks)
}

/// `U(π/4)`, built directly from the eigenbasis columns.
pub fn balanced_beamsplitter(total_cutoff: usize) -> Result<BlockOperator> {
    check_block_total(total_cutoff)?;
    BlockOperator::from_blocks((0..=total_cutoff).map(|n| xi_eigenbasis(n).map(cplx)).collect())
}
