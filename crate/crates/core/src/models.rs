//! Hamiltonian and projector construction.
//!
//! Spin-1/2 chains carry the transfer Hamiltonian
//! `H_PST = (ω/2) Σ Z_n + ½ Σ λ_n (X_n X_{n+1} + Y_n Y_{n+1})`, optionally
//! plus three-site random terms on every window `(k, k+1, k+2)`, either bare
//! (thermal) or sandwiched between the window projector (scarred). Spin-1
//! chains use the same transfer term on the `{|−⟩, |+⟩}` qubit of every site
//! and two-site random terms on every unordered pair of sites.

use std::f64::consts::PI;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::hilbert::{ChainConfig, DenseOperator, LocalSpace};
use crate::{linalg, CMat, Error, Result, C64};

/// Engineered nearest-neighbour couplings `λ_n`, `n = 1..N−1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingProfile {
    pub lambdas: Vec<f64>,
}

impl CouplingProfile {
    /// `λ_n = λ √(n (N − n))`, the profile that yields perfect transfer.
    pub fn engineered(cfg: &ChainConfig) -> Self {
        let n_sites = cfg.n_sites;
        let lambdas = (1..n_sites).map(|n| cfg.lambda * ((n * (n_sites - n)) as f64).sqrt()).collect();
        Self { lambdas }
    }

    /// Every bond set to `λ`. Used as a known imperfect-transfer control.
    pub fn uniform(cfg: &ChainConfig) -> Self {
        Self { lambdas: vec![cfg.lambda; cfg.n_sites - 1] }
    }

    fn check(&self, cfg: &ChainConfig) -> Result<()> {
        if self.lambdas.len() + 1 != cfg.n_sites {
            return Err(Error::DimensionMismatch { expected: cfg.n_sites - 1, found: self.lambdas.len() });
        }
        Ok(())
    }
}

/// Which coupling profile a pipeline uses.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    #[default]
    Engineered,
    Uniform,
}

impl CouplingKind {
    pub fn profile(self, cfg: &ChainConfig) -> CouplingProfile {
        match self {
            Self::Engineered => CouplingProfile::engineered(cfg),
            Self::Uniform => CouplingProfile::uniform(cfg),
        }
    }
}

/// How the random interaction terms are drawn.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomInteractionSpec {
    /// Sites per term: 3 for the spin-1/2 windows, 2 for spin-1 pairs.
    pub window_size: usize,
    pub seed: u64,
    /// Reuse one draw for every window/pair instead of drawing afresh.
    pub homogeneous: bool,
    /// Pair terms are divided by `|n − n'|^decay_power`.
    pub decay_power: f64,
}

impl RandomInteractionSpec {
    /// Homogeneous three-site windows, no decay.
    pub fn spin_half(seed: u64) -> Self {
        Self { window_size: 3, seed, homogeneous: true, decay_power: 0.0 }
    }

    /// Independent two-site terms on every pair with `1/r³` decay.
    pub fn spin_one(seed: u64) -> Self {
        Self { window_size: 2, seed, homogeneous: false, decay_power: 3.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.window_size, 2 | 3) {
            return Err(Error::InvalidConfig(format!("window_size must be 2 or 3, got {}", self.window_size)));
        }
        if !(self.decay_power.is_finite() && self.decay_power >= 0.0) {
            return Err(Error::InvalidConfig(format!("decay_power must be >= 0, got {}", self.decay_power)));
        }
        Ok(())
    }
}

/// Local projectors used to protect the scar subspace.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectorSpec {
    /// Three-qubit projector removing `|000⟩, |001⟩, |010⟩, |100⟩`.
    SpinHalfPxxp,
    /// Two spin-1 projector removing `|++⟩, |−+⟩, |+−⟩`.
    SpinOneTwoBody,
    /// Two spin-1 projector that additionally removes `|−−⟩`, so that its
    /// kernel is the whole `{|−⟩, |+⟩}^⊗N` qubit space.
    SpinOneTrivial,
}

impl ProjectorSpec {
    /// Basis states (local indices) removed from the identity.
    fn removed(self) -> &'static [usize] {
        // spin-1 local index = 3·first + second with digits (−, 0, +) = (0, 1, 2)
        match self {
            Self::SpinHalfPxxp => &[0b000, 0b001, 0b010, 0b100],
            Self::SpinOneTwoBody => &[8, 2, 6],
            Self::SpinOneTrivial => &[8, 2, 6, 0],
        }
    }

    pub fn local_dim(self) -> usize {
        match self {
            Self::SpinHalfPxxp => 8,
            Self::SpinOneTwoBody | Self::SpinOneTrivial => 9,
        }
    }

    /// Diagonal of the projector.
    pub fn diagonal(self) -> Vec<f64> {
        let mut d = vec![1.0; self.local_dim()];
        self.removed().iter().for_each(|&i| d[i] = 0.0);
        d
    }
}

/// Local projector matrix.
pub fn build_projector(spec: ProjectorSpec) -> CMat {
    let d = spec.diagonal();
    Mat::from_fn(d.len(), d.len(), |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) })
}

/// Which interaction family a random term belongs to; part of the stream key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    SpinHalfWindow,
    SpinOnePair,
    /// Reference random-matrix samples.
    GueSample,
}

impl TermKind {
    fn tag(self) -> &'static [u8] {
        match self {
            Self::SpinHalfWindow => b"spin-half-window",
            Self::SpinOnePair => b"spin-one-pair",
            Self::GueSample => b"gue-sample",
        }
    }
}

/// Independent RNG stream for one interaction term.
///
/// The ChaCha20 key is `SHA-256(tag ‖ seed ‖ index)`, so every term's draw
/// depends only on the root seed and the term's identity, never on the order
/// in which terms are built.
pub fn term_rng(seed: u64, kind: TermKind, index: u64) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"scarchain/term/");
    hasher.update(kind.tag());
    hasher.update(seed.to_le_bytes());
    hasher.update(index.to_le_bytes());
    ChaCha20Rng::from_seed(hasher.finalize().into())
}

/// Two independent standard normals by the Box–Muller transform.
pub fn standard_normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // gen() is uniform on [0, 1); shift to (0, 1] so the log is finite
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * PI * u2;
    (radius * angle.cos(), radius * angle.sin())
}

/// `h = ½(A + A†)` where every entry of `A` has independent standard normal
/// real and imaginary parts (one Box–Muller pair per entry, row-major).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let mut a = Mat::<C64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let (re, im) = standard_normal_pair(rng);
            a[(i, j)] = C64::new(re, im);
        }
    }
    Mat::from_fn(dim, dim, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Transfer Hamiltonian on a spin-1/2 chain with engineered couplings.
pub fn build_h_pst(cfg: &ChainConfig) -> Result<DenseOperator> {
    cfg.require_local_dim(2, "build_h_pst")?;
    build_h_pst_with(cfg, &CouplingProfile::engineered(cfg))
}

/// Transfer Hamiltonian embedded in the `{|−⟩, |+⟩}` levels of a spin-1 chain.
pub fn build_h_pst_spin1(cfg: &ChainConfig) -> Result<DenseOperator> {
    cfg.require_local_dim(3, "build_h_pst_spin1")?;
    build_h_pst_with(cfg, &CouplingProfile::engineered(cfg))
}

/// Transfer Hamiltonian with an arbitrary coupling profile, for either local
/// dimension.
pub fn build_h_pst_with(cfg: &ChainConfig, profile: &CouplingProfile) -> Result<DenseOperator> {
    cfg.validate()?;
    profile.check(cfg)?;
    let space = cfg.local_space();
    let layout = cfg.layout();
    let (up, down) = (space.up(), space.down());
    let mut h = DenseOperator::zeros(layout.dim());
    for i in 0..layout.dim() {
        let z: f64 = (0..cfg.n_sites).map(|s| space.z_value(layout.digit(i, s))).sum();
        h[(i, i)] += C64::new(0.5 * cfg.omega * z, 0.0);
        for (bond, &lambda_n) in profile.lambdas.iter().enumerate() {
            let (a, b) = (layout.digit(i, bond), layout.digit(i, bond + 1));
            // ½λ(XX + YY) = λ(σ⁺σ⁻ + σ⁻σ⁺): flip-flop of an up/down pair
            if (a == up && b == down) || (a == down && b == up) {
                let j = i - a * layout.strides[bond] - b * layout.strides[bond + 1]
                    + b * layout.strides[bond]
                    + a * layout.strides[bond + 1];
                h[(j, i)] += C64::new(lambda_n, 0.0);
            }
        }
    }
    Ok(h)
}

/// One random 8×8 term per window `k = 1..N−2` (all identical when
/// homogeneous).
pub fn window_interactions(cfg: &ChainConfig, spec: &RandomInteractionSpec) -> Result<Vec<CMat>> {
    cfg.require_local_dim(2, "three-site window interactions")?;
    spec.validate()?;
    if spec.window_size != 3 {
        return Err(Error::ConfigMismatch(format!(
            "spin-1/2 interactions use 3-site windows, got window_size = {}",
            spec.window_size
        )));
    }
    if cfg.n_sites < 3 {
        return Err(Error::InvalidConfig(format!("three-site windows need N >= 3, got {}", cfg.n_sites)));
    }
    let windows = cfg.n_sites - 2;
    if spec.homogeneous {
        let h = random_hermitian(8, &mut term_rng(spec.seed, TermKind::SpinHalfWindow, 0));
        Ok(vec![h; windows])
    } else {
        Ok((0..windows)
            .map(|k| random_hermitian(8, &mut term_rng(spec.seed, TermKind::SpinHalfWindow, k as u64)))
            .collect())
    }
}

/// Two-site term acting on sites `(first, second)`, already scaled by the
/// distance decay.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTerm {
    /// 1-based sites with `first < second`.
    pub sites: (usize, usize),
    pub op: CMat,
}

/// One random 9×9 term per unordered pair `n < n'`, divided by
/// `|n − n'|^decay_power`.
pub fn pair_interactions(cfg: &ChainConfig, spec: &RandomInteractionSpec) -> Result<Vec<PairTerm>> {
    cfg.require_local_dim(3, "two-site pair interactions")?;
    spec.validate()?;
    if spec.window_size != 2 {
        return Err(Error::ConfigMismatch(format!(
            "spin-1 interactions are two-body, got window_size = {}",
            spec.window_size
        )));
    }
    let n_sites = cfg.n_sites;
    let shared = spec
        .homogeneous
        .then(|| random_hermitian(9, &mut term_rng(spec.seed, TermKind::SpinOnePair, 0)));
    let mut terms = Vec::with_capacity(n_sites * (n_sites - 1) / 2);
    for first in 1..=n_sites {
        for second in first + 1..=n_sites {
            let base = match &shared {
                Some(h) => h.clone(),
                None => {
                    let index = ((first as u64) << 32) | second as u64;
                    random_hermitian(9, &mut term_rng(spec.seed, TermKind::SpinOnePair, index))
                }
            };
            let scale = ((second - first) as f64).powf(spec.decay_power).recip();
            let op = Mat::from_fn(9, 9, |i, j| base[(i, j)] * scale);
            terms.push(PairTerm { sites: (first, second), op });
        }
    }
    Ok(terms)
}

/// `P h P` for a diagonal local projector.
pub fn project_term(projector: ProjectorSpec, h: &CMat) -> CMat {
    let d = projector.diagonal();
    Mat::from_fn(d.len(), d.len(), |i, j| h[(i, j)] * (d[i] * d[j]))
}

fn add_window_terms(
    h: &mut DenseOperator,
    cfg: &ChainConfig,
    terms: &[CMat],
    projected: bool,
) -> Result<()> {
    if terms.len() + 2 != cfg.n_sites {
        return Err(Error::DimensionMismatch { expected: cfg.n_sites.saturating_sub(2), found: terms.len() });
    }
    for (k, term) in terms.iter().enumerate() {
        let local = if projected { project_term(ProjectorSpec::SpinHalfPxxp, term) } else { term.clone() };
        h.add_local_term(local.as_ref(), &[k + 1, k + 2, k + 3], cfg, 1.0)?;
    }
    Ok(())
}

fn add_pair_terms(h: &mut DenseOperator, cfg: &ChainConfig, terms: &[PairTerm], projected: bool) -> Result<()> {
    for term in terms {
        let local = if projected { project_term(ProjectorSpec::SpinOneTwoBody, &term.op) } else { term.op.clone() };
        h.add_local_term(local.as_ref(), &[term.sites.0, term.sites.1], cfg, 1.0)?;
    }
    Ok(())
}

/// `H_PST + Σ_k h_k` with random three-site terms.
pub fn build_h_thermal(cfg: &ChainConfig, spec: &RandomInteractionSpec) -> Result<DenseOperator> {
    let terms = window_interactions(cfg, spec)?;
    build_h_thermal_with(cfg, &CouplingProfile::engineered(cfg), &terms)
}

pub fn build_h_thermal_with(cfg: &ChainConfig, profile: &CouplingProfile, terms: &[CMat]) -> Result<DenseOperator> {
    cfg.require_local_dim(2, "build_h_thermal")?;
    let mut h = build_h_pst_with(cfg, profile)?;
    add_window_terms(&mut h, cfg, terms, false)?;
    Ok(h)
}

/// `H_PST + Σ_k P_k h_k P_k` with the three-site scar projector.
pub fn build_h_scar(cfg: &ChainConfig, spec: &RandomInteractionSpec) -> Result<DenseOperator> {
    let terms = window_interactions(cfg, spec)?;
    build_h_scar_with(cfg, &CouplingProfile::engineered(cfg), &terms)
}

pub fn build_h_scar_with(cfg: &ChainConfig, profile: &CouplingProfile, terms: &[CMat]) -> Result<DenseOperator> {
    cfg.require_local_dim(2, "build_h_scar")?;
    let mut h = build_h_pst_with(cfg, profile)?;
    add_window_terms(&mut h, cfg, terms, true)?;
    Ok(h)
}

/// `H_PST⁽¹⁾ + Σ_{n<n'} h_{n,n'}`.
pub fn build_h_thermal_spin1(cfg: &ChainConfig, spec: &RandomInteractionSpec) -> Result<DenseOperator> {
    let terms = pair_interactions(cfg, spec)?;
    build_h_thermal_spin1_with(cfg, &CouplingProfile::engineered(cfg), &terms)
}

pub fn build_h_thermal_spin1_with(
    cfg: &ChainConfig,
    profile: &CouplingProfile,
    terms: &[PairTerm],
) -> Result<DenseOperator> {
    cfg.require_local_dim(3, "build_h_thermal_spin1")?;
    let mut h = build_h_pst_with(cfg, profile)?;
    add_pair_terms(&mut h, cfg, terms, false)?;
    Ok(h)
}

/// `H_PST⁽¹⁾ + Σ_{n<n'} P_{n,n'} h_{n,n'} P_{n,n'}`.
pub fn build_h_scar_spin1(cfg: &ChainConfig, spec: &RandomInteractionSpec) -> Result<DenseOperator> {
    let terms = pair_interactions(cfg, spec)?;
    build_h_scar_spin1_with(cfg, &CouplingProfile::engineered(cfg), &terms)
}

pub fn build_h_scar_spin1_with(
    cfg: &ChainConfig,
    profile: &CouplingProfile,
    terms: &[PairTerm],
) -> Result<DenseOperator> {
    cfg.require_local_dim(3, "build_h_scar_spin1")?;
    let mut h = build_h_pst_with(cfg, profile)?;
    add_pair_terms(&mut h, cfg, terms, true)?;
    Ok(h)
}

/// Hamiltonian family.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Pst,
    Thermal,
    Scar,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Pst, Variant::Thermal, Variant::Scar];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pst => "pst",
            Self::Thermal => "thermal",
            Self::Scar => "scar",
        }
    }
}

/// Builds any variant for either local dimension with the given couplings.
pub fn build_hamiltonian(
    variant: Variant,
    cfg: &ChainConfig,
    spec: &RandomInteractionSpec,
    profile: &CouplingProfile,
) -> Result<DenseOperator> {
    cfg.validate()?;
    match (variant, cfg.local_space()) {
        (Variant::Pst, _) => build_h_pst_with(cfg, profile),
        (Variant::Thermal, LocalSpace::SpinHalf) => build_h_thermal_with(cfg, profile, &window_interactions(cfg, spec)?),
        (Variant::Scar, LocalSpace::SpinHalf) => build_h_scar_with(cfg, profile, &window_interactions(cfg, spec)?),
        (Variant::Thermal, LocalSpace::SpinOne) => {
            build_h_thermal_spin1_with(cfg, profile, &pair_interactions(cfg, spec)?)
        }
        (Variant::Scar, LocalSpace::SpinOne) => build_h_scar_spin1_with(cfg, profile, &pair_interactions(cfg, spec)?),
    }
}

/// Interaction part `H − H_PST` of a built Hamiltonian.
pub fn interaction_part(h: &DenseOperator, cfg: &ChainConfig, profile: &CouplingProfile) -> Result<DenseOperator> {
    let pst = build_h_pst_with(cfg, profile)?;
    let mut out = h.clone();
    out.add_assign(&pst.scaled(C64::new(-1.0, 0.0)))?;
    Ok(out)
}

/// `‖P² − P‖_max` and `‖P − P†‖_max` of a local matrix.
pub fn projector_defects(p: &CMat) -> (f64, f64) {
    let p2 = linalg::matmul(p.as_ref(), p.as_ref());
    let idem = (0..p.nrows())
        .flat_map(|i| (0..p.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| (p2[(i, j)] - p[(i, j)]).norm())
        .fold(0.0, f64::max);
    (idem, linalg::hermiticity_defect(p.as_ref()))
}
