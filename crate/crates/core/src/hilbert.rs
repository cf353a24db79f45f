//! Product-basis bookkeeping and the dense kernels everything else builds on:
//! embedding local operators, partial traces and von Neumann entropy.

use std::ops::{Index, IndexMut};

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::{linalg, CMat, Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenvalues of a density matrix below this contribute nothing to the entropy.
pub const ENTROPY_CLIP: f64 = 1e-12;

/// Tolerance on `‖M − M†‖_max` for Hamiltonians and density matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Tolerance on the Euclidean norm of a [`StateVector`].
pub const NORM_TOL: f64 = 1e-10;

/// Local Hilbert space of one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalSpace {
    /// Qubit with basis `{|0⟩, |1⟩}`.
    SpinHalf,
    /// Spin-1 with basis `{|−⟩, |0⟩, |+⟩}`.
    SpinOne,
}

impl LocalSpace {
    pub fn from_dim(local_dim: usize) -> Result<Self> {
        match local_dim {
            2 => Ok(Self::SpinHalf),
            3 => Ok(Self::SpinOne),
            d => Err(Error::InvalidConfig(format!("local_dim must be 2 or 3, got {d}"))),
        }
    }

    pub const fn dim(self) -> usize {
        match self {
            Self::SpinHalf => 2,
            Self::SpinOne => 3,
        }
    }

    /// Digit of the `Z = +1` level of the transfer qubit (`|0⟩` or `|+⟩`).
    pub const fn up(self) -> usize {
        match self {
            Self::SpinHalf => 0,
            Self::SpinOne => 2,
        }
    }

    /// Digit of the `Z = −1` level of the transfer qubit (`|1⟩` or `|−⟩`).
    pub const fn down(self) -> usize {
        match self {
            Self::SpinHalf => 1,
            Self::SpinOne => 0,
        }
    }

    /// Eigenvalue of the (embedded) Pauli Z on a local digit. The spin-1
    /// `|0⟩` level is untouched and gives 0.
    pub fn z_value(self, digit: usize) -> f64 {
        if digit == self.up() {
            1.0
        } else if digit == self.down() {
            -1.0
        } else {
            0.0
        }
    }
}

/// Identity of an experiment: chain geometry, field, coupling scale and seed.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Number of sites `N`.
    pub n_sites: usize,
    /// Local dimension, 2 (spin-1/2) or 3 (spin-1).
    pub local_dim: usize,
    /// Longitudinal field `ω`.
    pub omega: f64,
    /// Coupling scale `λ`; times are measured in units of `1/λ`.
    pub lambda: f64,
    /// Root seed for every random draw.
    pub seed: u64,
}

impl ChainConfig {
    /// Largest Hilbert-space dimension accepted by [`validate`](Self::validate).
    pub const DEFAULT_MAX_DIM: usize = 1 << 16;

    pub fn new(n_sites: usize, local_dim: usize, omega: f64, lambda: f64, seed: u64) -> Result<Self> {
        let cfg = Self { n_sites, local_dim, omega, lambda, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn spin_half(n_sites: usize, omega: f64, lambda: f64, seed: u64) -> Result<Self> {
        Self::new(n_sites, 2, omega, lambda, seed)
    }

    pub fn spin_one(n_sites: usize, omega: f64, lambda: f64, seed: u64) -> Result<Self> {
        Self::new(n_sites, 3, omega, lambda, seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_limit(Self::DEFAULT_MAX_DIM)
    }

    pub fn validate_with_limit(&self, max_dim: usize) -> Result<()> {
        LocalSpace::from_dim(self.local_dim)?;
        if self.n_sites < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 sites, got {}", self.n_sites)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidConfig(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidConfig(format!("omega must be finite, got {}", self.omega)));
        }
        match checked_dim(self.local_dim, self.n_sites) {
            Some(dim) if dim <= max_dim => Ok(()),
            _ => Err(Error::InvalidConfig(format!(
                "{}^{} exceeds the Hilbert-space budget of {max_dim}",
                self.local_dim, self.n_sites
            ))),
        }
    }

    pub fn local_space(&self) -> LocalSpace {
        LocalSpace::from_dim(self.local_dim).expect("validated local_dim")
    }

    /// Total Hilbert-space dimension `local_dim^N`.
    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.n_sites as u32)
    }

    pub(crate) fn layout(&self) -> SiteLayout {
        SiteLayout::new(self.local_dim, self.n_sites)
    }

    pub(crate) fn require_local_dim(&self, local_dim: usize, what: &str) -> Result<()> {
        self.validate()?;
        if self.local_dim != local_dim {
            return Err(Error::ConfigMismatch(format!(
                "{what} needs local_dim = {local_dim}, got {}",
                self.local_dim
            )));
        }
        Ok(())
    }
}

fn checked_dim(local_dim: usize, n_sites: usize) -> Option<usize> {
    u32::try_from(n_sites).ok().and_then(|n| local_dim.checked_pow(n))
}

/// Index of a product basis state. Site 1 is the most significant digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(pub usize);

impl BasisIndex {
    pub fn from_digits(digits: &[usize], cfg: &ChainConfig) -> Result<Self> {
        if digits.len() != cfg.n_sites {
            return Err(Error::DimensionMismatch { expected: cfg.n_sites, found: digits.len() });
        }
        let mut index = 0usize;
        for &d in digits {
            if d >= cfg.local_dim {
                return Err(Error::InvalidArgument(format!(
                    "digit {d} out of range for local dimension {}",
                    cfg.local_dim
                )));
            }
            index = index * cfg.local_dim + d;
        }
        Ok(Self(index))
    }

    pub fn digits(self, cfg: &ChainConfig) -> Vec<usize> {
        let mut out = vec![0; cfg.n_sites];
        let mut rest = self.0;
        for slot in out.iter_mut().rev() {
            *slot = rest % cfg.local_dim;
            rest /= cfg.local_dim;
        }
        out
    }

    /// Digit at a 1-based site.
    pub fn digit(self, site: usize, cfg: &ChainConfig) -> usize {
        cfg.layout().digit(self.0, site - 1)
    }
}

/// Strides of the positional encoding (0-based sites).
#[derive(Clone, Debug)]
pub(crate) struct SiteLayout {
    pub(crate) local_dim: usize,
    pub(crate) strides: Vec<usize>,
}

impl SiteLayout {
    pub(crate) fn new(local_dim: usize, n_sites: usize) -> Self {
        let mut strides = vec![1; n_sites];
        for s in (0..n_sites.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * local_dim;
        }
        Self { local_dim, strides }
    }

    pub(crate) fn dim(&self) -> usize {
        self.strides.first().map_or(1, |s| s * self.local_dim)
    }

    #[inline]
    pub(crate) fn digit(&self, index: usize, site0: usize) -> usize {
        (index / self.strides[site0]) % self.local_dim
    }

    /// Basis index with every site set to `digit`.
    pub(crate) fn uniform(&self, digit: usize) -> usize {
        self.strides.iter().map(|s| s * digit).sum()
    }
}

/// Visits every nonzero entry of `local` embedded on `sites0` (0-based, the
/// first listed site is the most significant local digit), calling
/// `f(row, col, value)`.
pub(crate) fn for_each_embedded(
    local: MatRef<'_, C64>,
    sites0: &[usize],
    layout: &SiteLayout,
    mut f: impl FnMut(usize, usize, C64),
) {
    let d = layout.local_dim;
    let k = sites0.len();
    let ld = local.nrows();
    debug_assert_eq!(ld, d.pow(k as u32));
    // offset[c] = full-space displacement of local configuration c
    let offset: Vec<usize> = (0..ld)
        .map(|c| {
            let mut rest = c;
            let mut off = 0;
            for &s in sites0.iter().rev() {
                off += (rest % d) * layout.strides[s];
                rest /= d;
            }
            off
        })
        .collect();
    let nonzeros: Vec<Vec<(usize, C64)>> = (0..ld)
        .map(|c| (0..ld).filter(|&r| local[(r, c)] != ZERO).map(|r| (r, local[(r, c)])).collect())
        .collect();
    for i in 0..layout.dim() {
        let mut c = 0;
        for &s in sites0 {
            c = c * d + layout.digit(i, s);
        }
        let base = i - offset[c];
        for &(r, v) in &nonzeros[c] {
            f(base + offset[r], i, v);
        }
    }
}

fn checked_sites(sites: &[usize], n_sites: usize) -> Result<Vec<usize>> {
    if sites.is_empty() {
        return Err(Error::SiteRange("site set is empty".into()));
    }
    let mut seen = vec![false; n_sites];
    let mut out = Vec::with_capacity(sites.len());
    for &s in sites {
        if s == 0 || s > n_sites {
            return Err(Error::SiteRange(format!("site {s} outside 1..={n_sites}")));
        }
        if std::mem::replace(&mut seen[s - 1], true) {
            return Err(Error::SiteRange(format!("site {s} listed twice")));
        }
        out.push(s - 1);
    }
    Ok(out)
}

/// Square complex matrix on the full product space.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator(CMat);

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Mat::identity(dim, dim))
    }

    pub fn from_mat(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        Ok(Self(mat))
    }

    /// Diagonal operator.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(Mat::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> MatRef<'_, C64> {
        self.0.as_ref()
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    /// `max |M_ij − conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(self.0.as_ref())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(self.0.as_ref())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint().to_owned())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs.dim())?;
        Ok(Self(linalg::matmul(self.0.as_ref(), rhs.0.as_ref())))
    }

    /// `‖[self, other]‖_max`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(linalg::commutator_max_abs(self.0.as_ref(), other.0.as_ref()))
    }

    /// `‖self − other‖_max`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.dim())?;
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                worst = worst.max((self.0[(i, j)] - other.0[(i, j)]).norm());
            }
        }
        Ok(worst)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self(Mat::from_fn(self.dim(), self.dim(), |i, j| self.0[(i, j)] * factor))
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_dim(other.dim())?;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                self.0[(i, j)] += other.0[(i, j)];
            }
        }
        Ok(())
    }

    pub fn apply(&self, psi: &StateVector) -> Result<Vec<C64>> {
        self.check_dim(psi.dim())?;
        Ok(linalg::matvec(self.0.as_ref(), psi.amplitudes()))
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        let m_psi = self.apply(psi)?;
        Ok(psi.amplitudes().iter().zip(&m_psi).map(|(a, b)| a.conj() * b).sum())
    }

    /// Adds `scale · local` embedded on the given 1-based sites in place.
    pub fn add_local_term(
        &mut self,
        local: MatRef<'_, C64>,
        sites: &[usize],
        cfg: &ChainConfig,
        scale: f64,
    ) -> Result<()> {
        cfg.validate()?;
        self.check_dim(cfg.dim())?;
        let sites0 = checked_sites(sites, cfg.n_sites)?;
        check_local_dim(local, cfg.local_dim, sites0.len())?;
        let m = &mut self.0;
        for_each_embedded(local, &sites0, &cfg.layout(), |r, c, v| m[(r, c)] += v * scale);
        Ok(())
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseOperator {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for DenseOperator {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

fn check_local_dim(local: MatRef<'_, C64>, local_dim: usize, k: usize) -> Result<()> {
    let expected = local_dim.pow(k as u32);
    if local.nrows() != expected || local.ncols() != expected {
        return Err(Error::DimensionMismatch { expected, found: local.nrows().max(local.ncols()) });
    }
    Ok(())
}

/// Normalized complex amplitude vector over the product basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    /// Wraps amplitudes that must already be normalized.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(amplitudes))
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self(amplitudes))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self(amps)
    }

    /// Skips the norm check; for states produced by unitary evolution.
    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        Self(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }
}

pub(crate) fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Returns `𝕀 ⊗ … ⊗ local ⊗ … ⊗ 𝕀` with `local` acting on the contiguous
/// window starting at the 1-based `start_site`.
pub fn embed_local(local: MatRef<'_, C64>, start_site: usize, cfg: &ChainConfig) -> Result<DenseOperator> {
    cfg.validate()?;
    let d = cfg.local_dim;
    let k = (1..=cfg.n_sites)
        .find(|&k| d.pow(k as u32) == local.nrows())
        .ok_or_else(|| Error::InvalidArgument(format!("local operator of size {} is not a power of {d}", local.nrows())))?;
    if start_site == 0 || start_site + k - 1 > cfg.n_sites {
        return Err(Error::SiteRange(format!(
            "{k}-site window starting at site {start_site} does not fit in sites 1..={}",
            cfg.n_sites
        )));
    }
    let sites: Vec<usize> = (start_site..start_site + k).collect();
    embed_sites(local, &sites, cfg)
}

/// Embeds `local` on an arbitrary ordered list of distinct 1-based sites.
pub fn embed_sites(local: MatRef<'_, C64>, sites: &[usize], cfg: &ChainConfig) -> Result<DenseOperator> {
    let mut out = DenseOperator::zeros(cfg.dim());
    out.add_local_term(local, sites, cfg, 1.0)?;
    Ok(out)
}

/// States that can be reduced to a subset of sites.
pub trait PartialTrace {
    /// Density matrix on `keep_sites` (1-based, any order; the result uses
    /// ascending site order).
    fn partial_trace(&self, keep_sites: &[usize], cfg: &ChainConfig) -> Result<DenseOperator>;
}

/// Free-function form of [`PartialTrace::partial_trace`].
pub fn partial_trace<S: PartialTrace + ?Sized>(state: &S, keep_sites: &[usize], cfg: &ChainConfig) -> Result<DenseOperator> {
    state.partial_trace(keep_sites, cfg)
}

/// Kept/traced index of every full basis index.
fn split_indices(keep_sites: &[usize], cfg: &ChainConfig) -> Result<(usize, usize, Vec<(usize, usize)>)> {
    cfg.validate()?;
    let mut keep0 = checked_sites(keep_sites, cfg.n_sites)?;
    keep0.sort_unstable();
    let layout = cfg.layout();
    let d = cfg.local_dim;
    let mut is_kept = vec![false; cfg.n_sites];
    keep0.iter().for_each(|&s| is_kept[s] = true);
    let kept_dim = d.pow(keep0.len() as u32);
    let traced_dim = layout.dim() / kept_dim;
    let map = (0..layout.dim())
        .map(|i| {
            let (mut a, mut b) = (0, 0);
            for s in 0..cfg.n_sites {
                let digit = layout.digit(i, s);
                if is_kept[s] {
                    a = a * d + digit;
                } else {
                    b = b * d + digit;
                }
            }
            (a, b)
        })
        .collect();
    Ok((kept_dim, traced_dim, map))
}

impl PartialTrace for StateVector {
    fn partial_trace(&self, keep_sites: &[usize], cfg: &ChainConfig) -> Result<DenseOperator> {
        if self.dim() != cfg.dim() {
            return Err(Error::DimensionMismatch { expected: cfg.dim(), found: self.dim() });
        }
        let (kept_dim, traced_dim, map) = split_indices(keep_sites, cfg)?;
        let mut psi = Mat::<C64>::zeros(kept_dim, traced_dim);
        for (i, &(a, b)) in map.iter().enumerate() {
            psi[(a, b)] = self.0[i];
        }
        Ok(DenseOperator(linalg::matmul_adjoint_rhs(psi.as_ref(), psi.as_ref())))
    }
}

impl PartialTrace for DenseOperator {
    fn partial_trace(&self, keep_sites: &[usize], cfg: &ChainConfig) -> Result<DenseOperator> {
        self.check_dim(cfg.dim())?;
        let (kept_dim, traced_dim, map) = split_indices(keep_sites, cfg)?;
        // group full indices by traced configuration
        let mut by_traced = vec![Vec::with_capacity(kept_dim); traced_dim];
        for (i, &(a, b)) in map.iter().enumerate() {
            by_traced[b].push((a, i));
        }
        let mut out = Mat::<C64>::zeros(kept_dim, kept_dim);
        for group in &by_traced {
            for &(b_kept, j) in group {
                for &(a_kept, i) in group {
                    out[(a_kept, b_kept)] += self.0[(i, j)];
                }
            }
        }
        Ok(DenseOperator(out))
    }
}

/// `−Σ p ln p` over the eigenvalues of `rho` above [`ENTROPY_CLIP`].
pub fn von_neumann_entropy(rho: &DenseOperator) -> Result<f64> {
    let defect = rho.hermiticity_defect();
    if defect > HERMITICITY_TOL * rho.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let probs = linalg::hermitian_eigenvalues(rho.as_mat())?;
    Ok(entropy_of_spectrum(&probs))
}

/// Shannon entropy (natural log) of a probability spectrum, clipping tiny values.
pub fn entropy_of_spectrum(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > ENTROPY_CLIP).map(|&p| -p * p.ln()).sum()
}

/// Diagonal of `M = Σ_n Z_n` in the product basis.
pub fn magnetization_diagonal(cfg: &ChainConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let space = cfg.local_space();
    let layout = cfg.layout();
    Ok((0..layout.dim())
        .map(|i| (0..cfg.n_sites).map(|s| space.z_value(layout.digit(i, s))).sum())
        .collect())
}

/// Total magnetization `M = Σ_n Z_n` (with the embedded `Z⁽¹⁾` for spin-1).
pub fn magnetization_operator(cfg: &ChainConfig) -> Result<DenseOperator> {
    Ok(DenseOperator::from_diagonal(&magnetization_diagonal(cfg)?))
}

/// Compressed sparse row matrix; an internal fast path for matrix-vector
/// products in Krylov propagation.
#[derive(Clone, Debug)]
pub(crate) struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub(crate) fn from_dense(m: MatRef<'_, C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, values }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    /// `y += scale · A x`.
    pub(crate) fn apply_add(&self, x: &[C64], y: &mut [C64], scale: f64) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *yi += acc * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pauli_x() -> CMat {
        Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
    }

    fn pauli_z() -> CMat {
        Mat::from_fn(2, 2, |i, j| if i != j { ZERO } else if i == 0 { ONE } else { -ONE })
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::new(1, 2, 0.0, 1.0, 0).is_err());
        assert!(ChainConfig::new(4, 4, 0.0, 1.0, 0).is_err());
        assert!(ChainConfig::new(4, 2, 0.0, 0.0, 0).is_err());
        assert!(ChainConfig::new(17, 2, 0.0, 1.0, 0).is_err());
        assert!(ChainConfig::new(16, 2, 0.0, 1.0, 0).is_ok());
        assert!(ChainConfig::new(11, 3, 0.0, 1.0, 0).is_err());
        assert!(ChainConfig::new(4, 2, f64::NAN, 1.0, 0).is_err());
    }

    #[test]
    fn basis_digits_round_trip() {
        let cfg = ChainConfig::spin_one(4, 0.0, 1.0, 0).unwrap();
        for i in 0..cfg.dim() {
            let digits = BasisIndex(i).digits(&cfg);
            assert_eq!(BasisIndex::from_digits(&digits, &cfg).unwrap(), BasisIndex(i));
        }
        let idx = BasisIndex::from_digits(&[2, 0, 1, 0], &cfg).unwrap();
        assert_eq!(idx.0, 2 * 27 + 3);
        assert_eq!(idx.digit(1, &cfg), 2);
        assert_eq!(idx.digit(3, &cfg), 1);
    }

    #[test]
    fn embed_z_on_first_site() {
        let cfg = ChainConfig::spin_half(2, 0.0, 1.0, 0).unwrap();
        let z1 = embed_local(pauli_z().as_ref(), 1, &cfg).unwrap();
        assert_eq!(z1, DenseOperator::from_diagonal(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn embed_identity_is_identity() {
        let cfg = ChainConfig::spin_one(3, 0.0, 1.0, 0).unwrap();
        let id9: CMat = Mat::identity(9, 9);
        for start in 1..=2 {
            let e = embed_local(id9.as_ref(), start, &cfg).unwrap();
            assert_eq!(e, DenseOperator::identity(27));
        }
    }

    #[test]
    fn embed_x_on_second_site_flips_last_bit() {
        let cfg = ChainConfig::spin_half(2, 0.0, 1.0, 0).unwrap();
        let x2 = embed_local(pauli_x().as_ref(), 2, &cfg).unwrap();
        let out = x2.apply(&StateVector::basis(4, 0)).unwrap();
        assert_eq!(out, vec![ZERO, ONE, ZERO, ZERO]);
    }

    #[test]
    fn embed_window_outside_chain_is_rejected() {
        let cfg = ChainConfig::spin_half(3, 0.0, 1.0, 0).unwrap();
        let two_site: CMat = Mat::identity(4, 4);
        let err = embed_local(two_site.as_ref(), 3, &cfg).unwrap_err();
        assert!(err.to_string().contains("starting at site 3"), "{err}");
        assert!(embed_local(two_site.as_ref(), 0, &cfg).is_err());
    }

    #[test]
    fn non_contiguous_embedding_matches_swap_conjugation() {
        // Z ⊗ X on sites (3, 1) equals X on site 1 times Z on site 3
        let cfg = ChainConfig::spin_half(3, 0.0, 1.0, 0).unwrap();
        let zx = Mat::from_fn(4, 4, |i, j| {
            let (zi, xi) = (i / 2, i % 2);
            let (zj, xj) = (j / 2, j % 2);
            let z = if zi == zj { if zi == 0 { 1.0 } else { -1.0 } } else { 0.0 };
            let x = if xi != xj { 1.0 } else { 0.0 };
            c(z * x)
        });
        let a = embed_sites(zx.as_ref(), &[3, 1], &cfg).unwrap();
        let x1 = embed_local(pauli_x().as_ref(), 1, &cfg).unwrap();
        let z3 = embed_local(pauli_z().as_ref(), 3, &cfg).unwrap();
        assert_eq!(a.distance(&x1.matmul(&z3).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn product_state_partial_trace() {
        let cfg = ChainConfig::spin_half(2, 0.0, 1.0, 0).unwrap();
        let psi = StateVector::basis(4, 0b01);
        let rho = psi.partial_trace(&[2], &cfg).unwrap();
        assert_eq!(rho, DenseOperator::from_diagonal(&[0.0, 1.0]));
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-14);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let cfg = ChainConfig::spin_half(2, 0.0, 1.0, 0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![c(s), ZERO, ZERO, c(s)]).unwrap();
        let rho = bell.partial_trace(&[1], &cfg).unwrap();
        assert!(rho.distance(&DenseOperator::from_diagonal(&[0.5, 0.5])).unwrap() < 1e-15);
        assert!((von_neumann_entropy(&rho).unwrap() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn ghz_half_chain() {
        let cfg = ChainConfig::spin_half(4, 0.0, 1.0, 0).unwrap();
        let mut amps = vec![ZERO; 16];
        amps[0] = ONE;
        amps[15] = ONE;
        let ghz = StateVector::normalized(amps).unwrap();
        let rho = ghz.partial_trace(&[1, 2], &cfg).unwrap();
        let probs = linalg::hermitian_eigenvalues(rho.as_mat()).unwrap();
        assert_eq!(probs.iter().filter(|&&p| p > 1e-12).count(), 2);
        assert!((von_neumann_entropy(&rho).unwrap() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn density_matrix_partial_trace_agrees_with_pure_path() {
        let cfg = ChainConfig::spin_one(3, 0.0, 1.0, 0).unwrap();
        let amps: Vec<C64> = (0..27).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let psi = StateVector::normalized(amps).unwrap();
        let projector = DenseOperator::from_mat(linalg::matmul_adjoint_rhs(
            Mat::from_fn(27, 1, |i, _| psi.amplitudes()[i]).as_ref(),
            Mat::from_fn(27, 1, |i, _| psi.amplitudes()[i]).as_ref(),
        ))
        .unwrap();
        for keep in [&[1usize][..], &[3, 1], &[2, 3]] {
            let a = psi.partial_trace(keep, &cfg).unwrap();
            let b = projector.partial_trace(keep, &cfg).unwrap();
            assert!(a.distance(&b).unwrap() < 1e-14);
            assert!((a.trace() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_site_sets() {
        let cfg = ChainConfig::spin_half(3, 0.0, 1.0, 0).unwrap();
        let psi = StateVector::basis(8, 0);
        assert!(psi.partial_trace(&[], &cfg).is_err());
        assert!(psi.partial_trace(&[4], &cfg).is_err());
        assert!(psi.partial_trace(&[1, 1], &cfg).is_err());
    }

    #[test]
    fn entropy_reference_values() {
        let pure = DenseOperator::from_diagonal(&[1.0, 0.0, 0.0]);
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-15);
        let mixed = DenseOperator::from_diagonal(&[0.25; 4]);
        assert!((von_neumann_entropy(&mixed).unwrap() - 4f64.ln()).abs() < 1e-14);
        let rank2 = DenseOperator::from_diagonal(&[0.5, 0.5, 0.0]);
        assert!((von_neumann_entropy(&rank2).unwrap() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn entropy_rejects_non_hermitian() {
        let mut rho = DenseOperator::from_diagonal(&[0.5, 0.5]);
        rho[(0, 1)] = c(0.1);
        assert!(matches!(von_neumann_entropy(&rho), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn magnetization_spectrum() {
        let cfg = ChainConfig::spin_half(2, 0.0, 1.0, 0).unwrap();
        assert_eq!(magnetization_diagonal(&cfg).unwrap(), vec![2.0, 0.0, 0.0, -2.0]);
        let cfg = ChainConfig::spin_half(5, 0.0, 1.0, 0).unwrap();
        let m = magnetization_diagonal(&cfg).unwrap();
        assert_eq!(m[0], 5.0);
        for site in 1..=5 {
            assert_eq!(m[1 << (5 - site)], 3.0);
        }
        let cfg = ChainConfig::spin_one(2, 0.0, 1.0, 0).unwrap();
        // digits (−,0,+) contribute (−1,0,+1)
        assert_eq!(
            magnetization_diagonal(&cfg).unwrap(),
            vec![-2.0, -1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 2.0]
        );
    }

    #[test]
    fn csr_matches_dense() {
        let m = Mat::from_fn(5, 5, |i, j| if (i + 2 * j) % 3 == 0 { C64::new(i as f64, j as f64) } else { ZERO });
        let x: Vec<C64> = (0..5).map(|i| C64::new(1.0, i as f64)).collect();
        let dense = linalg::matvec(m.as_ref(), &x);
        let mut y = vec![ZERO; 5];
        CsrMatrix::from_dense(m.as_ref()).apply_add(&x, &mut y, 1.0);
        assert_eq!(dense, y);
    }
}
