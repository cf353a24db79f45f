//! Time evolution, initial states, the correction unitary and the transfer
//! fidelity.
//!
//! Evolution is spectral: one full diagonalization per Hamiltonian, then
//! `V e^{−iΛt} V†` applied at every requested time. For the perturbation
//! scans, where only one time is needed per Hamiltonian, a Lanczos propagator
//! on a sparse copy of `H` is provided as well.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::hilbert::{l2_norm, ChainConfig, CsrMatrix, DenseOperator, LocalSpace, StateVector, HERMITICITY_TOL, NORM_TOL};
use crate::models::Variant;
use crate::{linalg, CMat, Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Full eigendecomposition `H = V Λ V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns.
    pub eigenvectors: CMat,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_raw(self.eigenvectors.col(k).iter().copied().collect())
    }

    /// `‖HV − VΛ‖_max`.
    pub fn residual(&self, h: &DenseOperator) -> Result<f64> {
        if h.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: h.dim() });
        }
        let hv = linalg::matmul(h.as_mat(), self.eigenvectors.as_ref());
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max((hv[(i, j)] - self.eigenvectors[(i, j)] * self.eigenvalues[j]).norm());
            }
        }
        Ok(worst)
    }

    /// `‖V†V − 𝕀‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let mut gram = Mat::<C64>::zeros(n, n);
        faer::linalg::matmul::matmul(
            gram.as_mut(),
            faer::Accum::Replace,
            self.eigenvectors.adjoint(),
            self.eigenvectors.as_ref(),
            C64::new(1.0, 0.0),
            faer::Par::Seq,
        );
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `‖V Λ V† − H‖_max`.
    pub fn reconstruction_defect(&self, h: &DenseOperator) -> Result<f64> {
        if h.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: h.dim() });
        }
        let scaled = Mat::from_fn(self.dim(), self.dim(), |i, j| self.eigenvectors[(i, j)] * self.eigenvalues[j]);
        let rebuilt = linalg::matmul_adjoint_rhs(scaled.as_ref(), self.eigenvectors.as_ref());
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                worst = worst.max((rebuilt[(i, j)] - h[(i, j)]).norm());
            }
        }
        Ok(worst)
    }

    /// Coefficients `V† ψ` of a state in the eigenbasis.
    pub fn coefficients(&self, psi: &StateVector) -> Result<Vec<C64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        Ok(linalg::adjoint_matvec(self.eigenvectors.as_ref(), psi.amplitudes()))
    }
}

/// Diagonalizes a Hermitian operator.
///
/// Each eigenvector is rotated so that its largest-modulus component (the
/// first one, among ties) is real and positive, which makes the output
/// independent of the solver's arbitrary phases for non-degenerate levels.
pub fn diagonalize(h: &DenseOperator) -> Result<EigenSystem> {
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let (eigenvalues, mut vectors) = linalg::hermitian_eigen(h.as_mat())?;
    if eigenvalues.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numerical("eigensolver returned non-finite eigenvalues".into()));
    }
    let n = eigenvalues.len();
    for j in 0..n {
        let col = vectors.col(j);
        let peak = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = col
            .iter()
            .position(|z| z.norm() >= peak * (1.0 - 1e-9))
            .expect("eigenvector has a largest component");
        let z = col[pivot];
        let phase = z.conj() / z.norm();
        for i in 0..n {
            vectors[(i, j)] *= phase;
        }
    }
    Ok(EigenSystem { eigenvalues, eigenvectors: vectors })
}

/// `V e^{−iΛt} V† ψ₀`.
pub fn evolve(eig: &EigenSystem, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Ok(evolve_many(eig, psi0, &[t])?.pop().expect("one time requested"))
}

/// Evolves one initial state to many times with a single batched product.
pub fn evolve_many(eig: &EigenSystem, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    let coeffs = eig.coefficients(psi0)?;
    let phased = Mat::from_fn(eig.dim(), times.len(), |k, j| {
        coeffs[k] * C64::from_polar(1.0, -eig.eigenvalues[k] * times[j])
    });
    let evolved = linalg::matmul(eig.eigenvectors.as_ref(), phased.as_ref());
    Ok((0..times.len())
        .map(|j| StateVector::from_raw(evolved.col(j).iter().copied().collect()))
        .collect())
}

/// Single-site payload `α|0⟩ + β|1⟩` (spin-1: `α|+⟩ + β|−⟩`).
/// Amplitudes serialize as `[re, im]`.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Payload {
    #[cfg_attr(feature = "schema", schemars(with = "[f64; 2]"))]
    pub alpha: C64,
    #[cfg_attr(feature = "schema", schemars(with = "[f64; 2]"))]
    pub beta: C64,
}

impl Payload {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let p = Self { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus_x() -> Self {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { alpha: a, beta: a }
    }

    pub fn up() -> Self {
        Self { alpha: C64::new(1.0, 0.0), beta: ZERO }
    }

    pub fn down() -> Self {
        Self { alpha: ZERO, beta: C64::new(1.0, 0.0) }
    }

    pub fn validate(&self) -> Result<()> {
        let norm = (self.alpha.norm_sqr() + self.beta.norm_sqr()).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    /// The payload as a local state vector.
    pub fn local_vector(&self, space: LocalSpace) -> Vec<C64> {
        let mut v = vec![ZERO; space.dim()];
        v[space.up()] = self.alpha;
        v[space.down()] = self.beta;
        v
    }
}

/// State of sites `2..=N` at `t = 0`.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Background {
    /// `|0⟩^⊗(N−1)`, or `|+⟩^⊗(N−1)` for spin-1.
    #[default]
    #[serde(alias = "plus", alias = "up")]
    Zeros,
    /// `|1⟩^⊗(N−1)`, or `|−⟩^⊗(N−1)` for spin-1.
    #[serde(alias = "minus", alias = "down")]
    Ones,
}

impl Background {
    pub fn name(self) -> &'static str {
        match self {
            Self::Zeros => "zeros",
            Self::Ones => "ones",
        }
    }

    fn digit(self, space: LocalSpace) -> usize {
        match self {
            Self::Zeros => space.up(),
            Self::Ones => space.down(),
        }
    }
}

/// `τ_m = π(m − ½)/λ` for `m = 1..=m_max`.
pub fn transfer_times(cfg: &ChainConfig, m_max: usize) -> Vec<f64> {
    (1..=m_max).map(|m| PI * (m as f64 - 0.5) / cfg.lambda).collect()
}

/// `samples` uniform points on `[0, 3π/λ]`.
pub fn default_time_grid(cfg: &ChainConfig, samples: usize) -> Vec<f64> {
    uniform_grid(0.0, 3.0 * PI / cfg.lambda, samples)
}

pub fn uniform_grid(start: f64, stop: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..samples).map(|k| start + (stop - start) * k as f64 / (samples - 1) as f64).collect(),
    }
}

/// A fidelity measurement request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferJob {
    pub variant: Variant,
    pub payload: Payload,
    pub background: Background,
    pub times: Vec<f64>,
}

impl TransferJob {
    pub const DEFAULT_SAMPLES: usize = 400;

    /// `(|0⟩+|1⟩)/√2` over the zeros background on the default grid.
    pub fn new(cfg: &ChainConfig) -> Self {
        Self {
            variant: Variant::Pst,
            payload: Payload::plus_x(),
            background: Background::Zeros,
            times: default_time_grid(cfg, Self::DEFAULT_SAMPLES),
        }
    }

    /// Same job sampled only at `τ_1..τ_{m_max}`.
    pub fn at_transfer_times(cfg: &ChainConfig, m_max: usize) -> Self {
        Self { times: transfer_times(cfg, m_max), ..Self::new(cfg) }
    }

    pub fn with_background(mut self, background: Background) -> Self {
        self.background = background;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_payload(mut self, payload: Payload) -> Self {
        self.payload = payload;
        self
    }

    pub fn with_times(mut self, times: Vec<f64>) -> Self {
        self.times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.payload.validate()?;
        if self.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidArgument("times must be finite and nonnegative".into()));
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("times must be ascending".into()));
        }
        Ok(())
    }
}

/// `|ψ⟩ ⊗ background` on the whole chain.
pub fn prepare_initial(job: &TransferJob, cfg: &ChainConfig) -> Result<StateVector> {
    cfg.validate()?;
    job.payload.validate()?;
    let space = cfg.local_space();
    let layout = cfg.layout();
    let rest = job.background.digit(space);
    // background index with site 1 set to digit 0
    let base: usize = (1..cfg.n_sites).map(|s| rest * layout.strides[s]).sum();
    let mut amps = vec![ZERO; cfg.dim()];
    for (digit, amp) in job.payload.local_vector(space).into_iter().enumerate() {
        amps[base + digit * layout.strides[0]] += amp;
    }
    StateVector::new(amps)
}

/// Single-site correction `X(t)` so that `F = ⟨ψ|X† ρ_N X|ψ⟩`.
///
/// For the zeros background `X = exp{i t [λ(N−1) − ω] Z/2}`; for the ones
/// background (`conjugated`) `X = exp{−i t [λ(N−1) + ω] Z/2}`. The two are
/// mutual adjoints at ω = 0. Global phases are dropped since F does not
/// depend on them. Returns a 2×2 matrix in the `{|0⟩, |1⟩}` basis.
pub fn correction_unitary(cfg: &ChainConfig, t: f64, conjugated: bool) -> CMat {
    let chain = cfg.lambda * (cfg.n_sites as f64 - 1.0);
    let angle = if conjugated { -t * (chain + cfg.omega) } else { t * (chain - cfg.omega) };
    let mut v = Mat::<C64>::zeros(2, 2);
    v[(0, 0)] = C64::from_polar(1.0, angle / 2.0);
    v[(1, 1)] = C64::from_polar(1.0, -angle / 2.0);
    v
}

/// The 2×2 correction embedded in the local space (identity on `|0⟩` of a
/// spin-1 site).
pub fn local_correction(cfg: &ChainConfig, t: f64, conjugated: bool) -> CMat {
    let v = correction_unitary(cfg, t, conjugated);
    let space = cfg.local_space();
    let mut out = Mat::<C64>::identity(space.dim(), space.dim());
    let idx = [space.up(), space.down()];
    for (a, &ia) in idx.iter().enumerate() {
        for (b, &ib) in idx.iter().enumerate() {
            out[(ia, ib)] = v[(a, b)];
        }
    }
    out
}

/// Fidelity samples for one job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityTrace {
    pub variant: Variant,
    pub background: Background,
    pub payload: Payload,
    /// Times in units of `1/λ`.
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// `τ_m` that fall inside the sampled range.
    pub transfer_times: Vec<f64>,
}

impl FidelityTrace {
    /// Trapezoidal time average over `[start, stop]` restricted to samples.
    pub fn window_average(&self, start: f64, stop: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.fidelity)
            .filter(|(t, _)| **t >= start - 1e-12 && **t <= stop + 1e-12)
            .map(|(&t, &f)| (t, f))
            .collect();
        match pts.len() {
            0 => Err(Error::InsufficientData(format!("no samples in [{start}, {stop}]"))),
            1 => Ok(pts[0].1),
            _ => {
                let area: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
                Ok(area / (pts[pts.len() - 1].0 - pts[0].0))
            }
        }
    }

    pub fn max(&self) -> f64 {
        self.fidelity.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Reduced state of site N from a full state vector.
pub(crate) fn last_site_density(psi: &[C64], local_dim: usize) -> CMat {
    let mut rho = Mat::<C64>::zeros(local_dim, local_dim);
    for block in psi.chunks_exact(local_dim) {
        for a in 0..local_dim {
            for b in 0..local_dim {
                rho[(a, b)] += block[a] * block[b].conj();
            }
        }
    }
    rho
}

/// `⟨ψ|X† ρ X|ψ⟩` for a state already evolved to time `t`.
pub fn fidelity_of_state(psi_t: &[C64], job: &TransferJob, cfg: &ChainConfig, t: f64) -> Result<f64> {
    let space = cfg.local_space();
    let rho = last_site_density(psi_t, space.dim());
    let x = local_correction(cfg, t, job.background == Background::Ones);
    let target = linalg::matvec(x.as_ref(), &job.payload.local_vector(space));
    let rho_target = linalg::matvec(rho.as_ref(), &target);
    let f: C64 = target.iter().zip(&rho_target).map(|(a, b)| a.conj() * b).sum();
    if f.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!("fidelity has imaginary part {}", f.im)));
    }
    Ok(f.re)
}

/// `F(t)` at every time of the job.
pub fn transfer_fidelity(eig: &EigenSystem, job: &TransferJob, cfg: &ChainConfig) -> Result<FidelityTrace> {
    job.validate()?;
    if eig.dim() != cfg.dim() {
        return Err(Error::DimensionMismatch { expected: cfg.dim(), found: eig.dim() });
    }
    let psi0 = prepare_initial(job, cfg)?;
    // batches keep the dim × batch workspace small at the largest sizes
    const BATCH: usize = 64;
    let mut fidelity = Vec::with_capacity(job.times.len());
    for times in job.times.chunks(BATCH) {
        for (psi, &t) in evolve_many(eig, &psi0, times)?.iter().zip(times) {
            fidelity.push(fidelity_of_state(psi.amplitudes(), job, cfg, t)?);
        }
    }
    Ok(trace(job, cfg, fidelity))
}

fn trace(job: &TransferJob, cfg: &ChainConfig, fidelity: Vec<f64>) -> FidelityTrace {
    let horizon = job.times.last().copied().unwrap_or(0.0);
    let transfer_times = (1..)
        .map(|m| PI * (m as f64 - 0.5) / cfg.lambda)
        .take_while(|&tau| tau <= horizon + 1e-12)
        .collect();
    FidelityTrace {
        variant: job.variant,
        background: job.background,
        payload: job.payload,
        times: job.times.clone(),
        fidelity,
        transfer_times,
    }
}

/// `F(t)` at every time of the job, stepping the state along the grid with
/// Lanczos instead of diagonalizing.
pub fn transfer_fidelity_krylov(
    h: &SparseHamiltonian,
    job: &TransferJob,
    cfg: &ChainConfig,
    opts: &KrylovOptions,
) -> Result<FidelityTrace> {
    job.validate()?;
    if h.dim() != cfg.dim() {
        return Err(Error::DimensionMismatch { expected: cfg.dim(), found: h.dim() });
    }
    let mut psi = prepare_initial(job, cfg)?;
    let mut now = 0.0;
    let mut fidelity = Vec::with_capacity(job.times.len());
    for &t in &job.times {
        if t > now {
            psi = evolve_krylov(h, &psi, t - now, opts)?;
            now = t;
        }
        fidelity.push(fidelity_of_state(psi.amplitudes(), job, cfg, t)?);
    }
    Ok(trace(job, cfg, fidelity))
}

/// Lanczos propagation controls.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovOptions {
    /// Maximum Krylov subspace dimension per step.
    pub subspace_dim: usize,
    /// Allowed norm error per unit of evolution time.
    pub tolerance: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { subspace_dim: 30, tolerance: 1e-13 }
    }
}

/// Sparse Hermitian operator `Σ_i c_i A_i` held as CSR terms, for Krylov
/// propagation when a full diagonalization per Hamiltonian is too costly.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    terms: Vec<(CsrMatrix, f64)>,
}

impl SparseHamiltonian {
    pub fn from_dense(h: &DenseOperator) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect > HERMITICITY_TOL * h.max_abs().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self { terms: vec![(CsrMatrix::from_dense(h.as_mat()), 1.0)] })
    }

    /// Adds `scale · other` as a further term.
    pub fn plus(mut self, other: &DenseOperator, scale: f64) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let defect = other.hermiticity_defect();
        if defect > HERMITICITY_TOL * other.max_abs().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        self.terms.push((CsrMatrix::from_dense(other.as_mat()), scale));
        Ok(self)
    }

    /// Same operator with the scale of term `index` replaced.
    pub fn with_scale(&self, index: usize, scale: f64) -> Result<Self> {
        let mut out = self.clone();
        out.terms
            .get_mut(index)
            .ok_or_else(|| Error::InvalidArgument(format!("no term {index}")))?
            .1 = scale;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.terms[0].0.dim()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; x.len()];
        for (m, scale) in &self.terms {
            if *scale != 0.0 {
                m.apply_add(x, &mut y, *scale);
            }
        }
        y
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `e^{−iHt} ψ₀` by restarted Lanczos with a posteriori step control.
pub fn evolve_krylov(h: &SparseHamiltonian, psi0: &StateVector, t: f64, opts: &KrylovOptions) -> Result<StateVector> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.dim() });
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be finite and nonnegative, got {t}")));
    }
    if opts.subspace_dim < 2 || !(opts.tolerance > 0.0) {
        return Err(Error::InvalidArgument("Krylov subspace_dim >= 2 and tolerance > 0 required".into()));
    }
    let mut v = psi0.amplitudes().to_vec();
    let mut remaining = t;
    while remaining > 0.0 {
        let beta0 = l2_norm(&v);
        if beta0 == 0.0 {
            break;
        }
        let m = opts.subspace_dim.min(h.dim());
        let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|z| z / beta0).collect()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut next_beta = 0.0;
        for j in 0..m {
            let mut w = h.apply(&basis[j]);
            alpha.push(dot(&basis[j], &w).re);
            // two passes of full Gram–Schmidt
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let b = l2_norm(&w);
            if j + 1 == m || b <= 1e-12 * alpha.iter().map(|a| a.abs()).fold(1.0, f64::max) {
                next_beta = if j + 1 == m { b } else { 0.0 };
                break;
            }
            beta.push(b);
            basis.push(w.into_iter().map(|z| z / b).collect());
        }
        let k = alpha.len();
        let tri = Mat::<f64>::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let (theta, s) = linalg::symmetric_eigen(tri.as_ref())?;
        let propagate = |dt: f64| -> Vec<C64> {
            // e^{−iT dt} e₁ = S e^{−iΘ dt} Sᵀ e₁
            (0..k)
                .map(|i| (0..k).map(|l| s[(i, l)] * s[(0, l)] * C64::from_polar(1.0, -theta[l] * dt)).sum())
                .collect()
        };
        let mut dt = remaining;
        let mut y = propagate(dt);
        let mut halvings = 0;
        // y is only accurate to roundoff, which bounds the estimate from below
        let floor = 16.0 * k as f64 * f64::EPSILON * next_beta;
        while next_beta * y[k - 1].norm() > (opts.tolerance * dt).max(floor) {
            halvings += 1;
            if halvings > 60 {
                return Err(Error::Numerical("Krylov step size underflow".into()));
            }
            dt *= 0.5;
            y = propagate(dt);
        }
        let mut out = vec![ZERO; v.len()];
        for (q, c) in basis.iter().zip(&y) {
            let c = c * beta0;
            out.iter_mut().zip(q).for_each(|(o, qi)| *o += c * qi);
        }
        v = out;
        remaining = if dt >= remaining { 0.0 } else { remaining - dt };
    }
    let norm = l2_norm(&v);
    if (norm - psi0.norm()).abs() > 1e-8 {
        return Err(Error::Numerical(format!("Krylov propagation lost norm: {norm}")));
    }
    Ok(StateVector::from_raw(v))
}
