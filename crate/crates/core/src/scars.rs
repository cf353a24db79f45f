//! The scar subspace: effective spin-`(N−1)/2` operators on the
//! single-excitation sector, the rotated eigenstates `|x_n⟩`, and structural
//! checks of the projector construction.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::hilbert::{ChainConfig, DenseOperator, LocalSpace, StateVector};
use crate::models::{self, build_projector, ProjectorSpec};
use crate::{linalg, CMat, Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Spin-`J` matrices with `J = (N−1)/2` in the basis `|1⟩..|N⟩`, where `|n⟩`
/// carries the single flipped spin at site `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveSpinOps {
    pub n_sites: usize,
    pub jp: CMat,
    pub jx: CMat,
    pub jy: CMat,
    pub jz: CMat,
}

impl EffectiveSpinOps {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidConfig(format!("effective spin needs N >= 2, got {n_sites}")));
        }
        let n = n_sites;
        // J⁺ = Σ √(n(N−n)) |n+1⟩⟨n|, 0-based rows/cols
        let jp = Mat::from_fn(n, n, |i, j| {
            if i == j + 1 {
                C64::new((((j + 1) * (n - j - 1)) as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        });
        let jx = Mat::from_fn(n, n, |i, j| (jp[(i, j)] + jp[(j, i)].conj()) * 0.5);
        // J^y = (J⁺ − J⁻)/(2i)
        let jy = Mat::from_fn(n, n, |i, j| (jp[(i, j)] - jp[(j, i)].conj()) * C64::new(0.0, -0.5));
        let jz = Mat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new((2.0 * (i + 1) as f64 - n as f64 - 1.0) / 2.0, 0.0)
            } else {
                ZERO
            }
        });
        Ok(Self { n_sites, jp, jx, jy, jz })
    }

    /// `J(J+1)` for `J = (N−1)/2`.
    pub fn casimir_value(&self) -> f64 {
        let j = (self.n_sites as f64 - 1.0) / 2.0;
        j * (j + 1.0)
    }

    /// Largest residual of `[Jx, Jy] = iJz` and its cyclic partners.
    pub fn algebra_residual(&self) -> f64 {
        let i = C64::new(0.0, 1.0);
        let comm = |a: &CMat, b: &CMat, c: &CMat| {
            let ab = linalg::matmul(a.as_ref(), b.as_ref());
            let ba = linalg::matmul(b.as_ref(), a.as_ref());
            max_entry(self.n_sites, |r, s| ab[(r, s)] - ba[(r, s)] - i * c[(r, s)])
        };
        comm(&self.jx, &self.jy, &self.jz)
            .max(comm(&self.jy, &self.jz, &self.jx))
            .max(comm(&self.jz, &self.jx, &self.jy))
    }

    /// `‖Jx² + Jy² + Jz² − J(J+1)𝕀‖_max`.
    pub fn casimir_residual(&self) -> f64 {
        let sq = |a: &CMat| linalg::matmul(a.as_ref(), a.as_ref());
        let (x, y, z) = (sq(&self.jx), sq(&self.jy), sq(&self.jz));
        let c = self.casimir_value();
        max_entry(self.n_sites, |r, s| {
            x[(r, s)] + y[(r, s)] + z[(r, s)] - if r == s { C64::new(c, 0.0) } else { ZERO }
        })
    }

    /// `e^{−iπJy/2}`, exponentiated through the eigendecomposition of `Jy`.
    pub fn rotation(&self) -> Result<CMat> {
        let (mu, w) = linalg::hermitian_eigen(self.jy.as_ref())?;
        let scaled = Mat::from_fn(self.n_sites, self.n_sites, |i, k| w[(i, k)] * C64::from_polar(1.0, -PI * mu[k] / 2.0));
        Ok(linalg::matmul_adjoint_rhs(scaled.as_ref(), w.as_ref()))
    }

    /// Full-space index of `|n⟩` (1-based `n`).
    pub fn state_index(cfg: &ChainConfig, n: usize) -> usize {
        let layout = cfg.layout();
        let space = cfg.local_space();
        let vacuum = layout.uniform(space.up());
        vacuum - space.up() * layout.strides[n - 1] + space.down() * layout.strides[n - 1]
    }

    /// Non-zero entries `(row, col, value)` of an N×N operator lifted to the
    /// chain.
    pub fn lifted_entries(&self, op: &CMat, cfg: &ChainConfig) -> Result<Vec<(usize, usize, C64)>> {
        self.check_cfg(cfg)?;
        if op.nrows() != self.n_sites || op.ncols() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, found: op.nrows() });
        }
        let idx: Vec<usize> = (1..=self.n_sites).map(|n| Self::state_index(cfg, n)).collect();
        let mut out = Vec::new();
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                if op[(a, b)] != ZERO {
                    out.push((ia, ib, op[(a, b)]));
                }
            }
        }
        Ok(out)
    }

    /// `Σ_{m,n} ⟨m|A|n⟩ |m⟩⟨n|` on the full chain, zero elsewhere.
    pub fn lift(&self, op: &CMat, cfg: &ChainConfig) -> Result<DenseOperator> {
        let mut out = DenseOperator::zeros(cfg.dim());
        for (r, c, v) in self.lifted_entries(op, cfg)? {
            out[(r, c)] = v;
        }
        Ok(out)
    }

    fn check_cfg(&self, cfg: &ChainConfig) -> Result<()> {
        cfg.validate()?;
        if cfg.n_sites != self.n_sites {
            return Err(Error::ConfigMismatch(format!(
                "operators built for N = {}, config has N = {}",
                self.n_sites, cfg.n_sites
            )));
        }
        Ok(())
    }
}

fn max_entry(n: usize, f: impl Fn(usize, usize) -> C64) -> f64 {
    (0..n).flat_map(|r| (0..n).map(move |s| (r, s))).map(|(r, s)| f(r, s).norm()).fold(0.0, f64::max)
}

pub fn effective_spin_ops(cfg: &ChainConfig) -> Result<EffectiveSpinOps> {
    cfg.validate()?;
    EffectiveSpinOps::new(cfg.n_sites)
}

/// The N+1 scar eigenstates with their predicted energies.
#[derive(Clone, Debug)]
pub struct ScarBasis {
    /// `|0⟩^⊗N` (spin-1: `|+⟩^⊗N`).
    pub vacuum: StateVector,
    /// `|x_n⟩ = e^{−iπJy/2}|n⟩`, `n = 1..N`.
    pub xstates: Vec<StateVector>,
    /// Vacuum energy `ωN/2` first, then `ω(N−2)/2 + λ(2n−N−1)`.
    pub energies: Vec<f64>,
    /// `Jx` eigenvalue `(2n−N−1)/2` of each `|x_n⟩`.
    pub jx_values: Vec<f64>,
}

impl ScarBasis {
    pub fn len(&self) -> usize {
        self.xstates.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Vacuum first, then the x-states.
    pub fn states(&self) -> impl Iterator<Item = &StateVector> {
        std::iter::once(&self.vacuum).chain(&self.xstates)
    }

    /// Basis vectors as the columns of a dim × (N+1) matrix.
    pub fn as_matrix(&self) -> CMat {
        let states: Vec<&StateVector> = self.states().collect();
        Mat::from_fn(self.vacuum.dim(), states.len(), |i, k| states[k].amplitudes()[i])
    }

    /// `‖G − 𝕀‖_max` of the Gram matrix.
    pub fn gram_defect(&self) -> f64 {
        let states: Vec<&StateVector> = self.states().collect();
        let n = states.len();
        max_entry(n, |a, b| states[a].inner(states[b]) - if a == b { C64::new(1.0, 0.0) } else { ZERO })
    }
}

fn build_scar_basis(cfg: &ChainConfig) -> Result<ScarBasis> {
    let ops = effective_spin_ops(cfg)?;
    let rotation = ops.rotation()?;
    let n = cfg.n_sites;
    let idx: Vec<usize> = (1..=n).map(|k| EffectiveSpinOps::state_index(cfg, k)).collect();
    let xstates = (0..n)
        .map(|k| {
            let mut amps = vec![ZERO; cfg.dim()];
            for (a, &ia) in idx.iter().enumerate() {
                amps[ia] = rotation[(a, k)];
            }
            StateVector::normalized(amps)
        })
        .collect::<Result<Vec<_>>>()?;
    let space = cfg.local_space();
    let vacuum = StateVector::basis(cfg.dim(), cfg.layout().uniform(space.up()));
    let nf = n as f64;
    let jx_values: Vec<f64> = (1..=n).map(|k| (2.0 * k as f64 - nf - 1.0) / 2.0).collect();
    let mut energies = vec![cfg.omega * nf / 2.0];
    energies.extend(jx_values.iter().map(|m| cfg.omega * (nf - 2.0) / 2.0 + 2.0 * cfg.lambda * m));
    Ok(ScarBasis { vacuum, xstates, energies, jx_values })
}

/// Scar basis of a spin-1/2 chain.
pub fn scar_basis(cfg: &ChainConfig) -> Result<ScarBasis> {
    cfg.require_local_dim(2, "scar_basis")?;
    build_scar_basis(cfg)
}

/// Scar basis of a spin-1 chain: `|+⟩^⊗N` and rotated single-`|−⟩` states.
pub fn scar_basis_spin1(cfg: &ChainConfig) -> Result<ScarBasis> {
    cfg.require_local_dim(3, "scar_basis_spin1")?;
    build_scar_basis(cfg)
}

/// Scar basis for either local dimension.
pub fn scar_basis_for(cfg: &ChainConfig) -> Result<ScarBasis> {
    match cfg.local_space() {
        LocalSpace::SpinHalf => scar_basis(cfg),
        LocalSpace::SpinOne => scar_basis_spin1(cfg),
    }
}

/// `‖H|s⟩ − E_pred|s⟩‖` for every scar state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScarResidualReport {
    pub energies: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

pub fn verify_scar_eigenstates(h: &DenseOperator, basis: &ScarBasis) -> Result<ScarResidualReport> {
    if h.dim() != basis.vacuum.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: basis.vacuum.dim() });
    }
    let residuals = basis
        .states()
        .zip(&basis.energies)
        .map(|(s, &e)| {
            let hs = h.apply(s)?;
            Ok(hs.iter().zip(s.amplitudes()).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ScarResidualReport { energies: basis.energies.clone(), residuals, max_residual })
}

/// `‖(1 − Π_S) H Π_S‖_max` for the projector `Π_S` onto the scar basis.
pub fn subspace_leakage(h: &DenseOperator, basis: &ScarBasis) -> Result<f64> {
    if h.dim() != basis.vacuum.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: basis.vacuum.dim() });
    }
    let s = basis.as_matrix();
    let hs = linalg::matmul(h.as_mat(), s.as_ref());
    let mut inside = Mat::<C64>::zeros(s.ncols(), s.ncols());
    faer::linalg::matmul::matmul(
        inside.as_mut(),
        faer::Accum::Replace,
        s.adjoint(),
        hs.as_ref(),
        C64::new(1.0, 0.0),
        faer::Par::Seq,
    );
    let back = linalg::matmul(s.as_ref(), inside.as_ref());
    // (1 − Π) H Π = (HS − S S†HS) S†, and S† has orthonormal rows
    let leak = Mat::from_fn(s.nrows(), s.ncols(), |i, k| hs[(i, k)] - back[(i, k)]);
    let full = linalg::matmul_adjoint_rhs(leak.as_ref(), s.as_ref());
    Ok(linalg::max_abs(full.as_ref()))
}

/// Real dimensions of the kernel, fixed space and remainder of `h ↦ PhP` on
/// Hermitian operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionClassification {
    pub annihilated: usize,
    pub fixed: usize,
    pub other: usize,
}

/// Orthonormal basis of the Hermitian d×d matrices under `Re Tr(A†B)`.
fn hermitian_basis(d: usize) -> Vec<CMat> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(Mat::from_fn(d, d, |a, b| if a == i && b == i { C64::new(1.0, 0.0) } else { ZERO }));
    }
    for i in 0..d {
        for j in i + 1..d {
            out.push(Mat::from_fn(d, d, |a, b| {
                if (a, b) == (i, j) || (a, b) == (j, i) {
                    C64::new(r, 0.0)
                } else {
                    ZERO
                }
            }));
            out.push(Mat::from_fn(d, d, |a, b| {
                if (a, b) == (i, j) {
                    C64::new(0.0, -r)
                } else if (a, b) == (j, i) {
                    C64::new(0.0, r)
                } else {
                    ZERO
                }
            }));
        }
    }
    out
}

fn numerical_rank(m: &Mat<f64>, tol: f64) -> Result<usize> {
    Ok(linalg::singular_values(m.as_ref())?.into_iter().filter(|s| *s > tol).count())
}

/// Classifies the interaction space under compression by a local projector.
///
/// `pair_dim` is the dimension the projector acts on (9 for two spin-1
/// sites, 8 for a three-qubit window).
pub fn classify_interactions(p: &CMat, pair_dim: usize) -> Result<InteractionClassification> {
    if p.nrows() != pair_dim || p.ncols() != pair_dim {
        return Err(Error::DimensionMismatch { expected: pair_dim, found: p.nrows() });
    }
    let (idem, herm) = models::projector_defects(p);
    if idem > 1e-10 || herm > 1e-10 {
        return Err(Error::NotProjector { defect: idem.max(herm) });
    }
    let basis = hermitian_basis(pair_dim);
    let images: Vec<CMat> = basis
        .iter()
        .map(|g| {
            let pg = linalg::matmul(p.as_ref(), g.as_ref());
            linalg::matmul(pg.as_ref(), p.as_ref())
        })
        .collect();
    let count = basis.len();
    let inner = |a: &CMat, b: &CMat| -> f64 {
        let mut acc = 0.0;
        for j in 0..pair_dim {
            for i in 0..pair_dim {
                acc += (a[(i, j)].conj() * b[(i, j)]).re;
            }
        }
        acc
    };
    let map = Mat::<f64>::from_fn(count, count, |i, j| inner(&basis[i], &images[j]));
    let shifted = Mat::<f64>::from_fn(count, count, |i, j| map[(i, j)] - if i == j { 1.0 } else { 0.0 });
    let annihilated = count - numerical_rank(&map, 1e-10)?;
    let fixed = count - numerical_rank(&shifted, 1e-10)?;
    Ok(InteractionClassification { annihilated, fixed, other: count - annihilated - fixed })
}

/// Commutator norms comparing the construction with projector embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiraishiMoriReport {
    pub n_sites: usize,
    /// `‖[H_PST, P_k]‖_max` per window `k = 1..N−2`.
    pub h_pst_window_commutators: Vec<f64>,
    /// `‖[Jx_lifted, P_k]‖_max` per window.
    pub jx_window_commutators: Vec<f64>,
    /// Spin-1 chain length used for the trivial-projector check.
    pub spin1_n_sites: usize,
    /// `max_{n<n'} ‖[H_PST⁽¹⁾, P^(triv)_{n,n'}]‖_max`.
    pub spin1_trivial_commutator: f64,
}

/// Full-space diagonal of a local diagonal projector on the given sites.
fn embedded_diagonal(local: &[f64], sites: &[usize], cfg: &ChainConfig) -> Vec<f64> {
    let layout = cfg.layout();
    let d = cfg.local_dim;
    (0..cfg.dim())
        .map(|i| {
            let local_index = sites.iter().fold(0, |acc, &s| acc * d + layout.digit(i, s - 1));
            local[local_index]
        })
        .collect()
}

/// Largest spin-1 chain used where a dense spin-1 check accompanies a
/// spin-1/2 configuration.
pub const SPIN1_REPORT_MAX_SITES: usize = 6;

pub fn shiraishi_mori_report(cfg: &ChainConfig) -> Result<ShiraishiMoriReport> {
    cfg.require_local_dim(2, "shiraishi_mori_report")?;
    if cfg.n_sites < 3 {
        return Err(Error::InvalidConfig("window projectors need N >= 3".into()));
    }
    let h = models::build_h_pst(cfg)?;
    let ops = effective_spin_ops(cfg)?;
    let jx_entries = ops.lifted_entries(&ops.jx, cfg)?;
    let window = ProjectorSpec::SpinHalfPxxp.diagonal();
    let mut h_comm = Vec::new();
    let mut jx_comm = Vec::new();
    for k in 1..=cfg.n_sites - 2 {
        let d = embedded_diagonal(&window, &[k, k + 1, k + 2], cfg);
        h_comm.push(linalg::commutator_with_diagonal_max_abs(h.as_mat(), &d));
        jx_comm.push(jx_entries.iter().map(|&(r, c, v)| v.norm() * (d[c] - d[r]).abs()).fold(0.0, f64::max));
    }
    let n1 = cfg.n_sites.min(SPIN1_REPORT_MAX_SITES);
    let cfg1 = ChainConfig::spin_one(n1, cfg.omega, cfg.lambda, cfg.seed)?;
    let h1 = models::build_h_pst_spin1(&cfg1)?;
    let triv = ProjectorSpec::SpinOneTrivial.diagonal();
    let mut worst = 0.0f64;
    for a in 1..=n1 {
        for b in a + 1..=n1 {
            let d = embedded_diagonal(&triv, &[a, b], &cfg1);
            worst = worst.max(linalg::commutator_with_diagonal_max_abs(h1.as_mat(), &d));
        }
    }
    Ok(ShiraishiMoriReport {
        n_sites: cfg.n_sites,
        h_pst_window_commutators: h_comm,
        jx_window_commutators: jx_comm,
        spin1_n_sites: n1,
        spin1_trivial_commutator: worst,
    })
}

/// `a|−,−⟩⟨0,+| + b|−,−⟩⟨+,0| + c|−,−⟩⟨0,−| + d|−,−⟩⟨−,0| + f|−,−⟩⟨0,0| + h.c.`
pub fn minimal_only_interaction(params: [C64; 5]) -> CMat {
    // local index = 3·first + second, digits (−, 0, +) = (0, 1, 2)
    const MINUS_MINUS: usize = 0;
    const KETS: [usize; 5] = [3 + 2, 3 * 2 + 1, 3, 1, 3 + 1];
    let mut h = Mat::<C64>::zeros(9, 9);
    for (&col, &p) in KETS.iter().zip(&params) {
        h[(MINUS_MINUS, col)] += p;
        h[(col, MINUS_MINUS)] += p.conj();
    }
    h
}

/// One member of the five-parameter family and its compression defects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyCheck {
    pub params: [f64; 5],
    /// `‖PhP − h‖_max` for the minimal projector.
    pub minimal_defect: f64,
    /// `‖P^(triv) h P^(triv) − h‖_max`.
    pub trivial_defect: f64,
}

/// Scar-space dimensions and interaction robustness of the minimal versus
/// the trivial spin-1 embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrivialEmbeddingReport {
    pub n_sites: usize,
    /// Simultaneous kernel of all `P^(triv)_{n,n'}`.
    pub trivial_kernel_dim: usize,
    /// Simultaneous kernel of the minimal projectors `P_{n,n'}`.
    pub minimal_kernel_dim: usize,
    pub family: Vec<FamilyCheck>,
}

/// Largest chain for the explicit null-space computation.
pub const KERNEL_MAX_SITES: usize = 6;

fn simultaneous_kernel_dim(spec: ProjectorSpec, cfg: &ChainConfig) -> Result<usize> {
    // Σ P is positive semidefinite, so its kernel is the common kernel
    let mut sum = DenseOperator::zeros(cfg.dim());
    let p = build_projector(spec);
    for a in 1..=cfg.n_sites {
        for b in a + 1..=cfg.n_sites {
            sum.add_local_term(p.as_ref(), &[a, b], cfg, 1.0)?;
        }
    }
    let values = linalg::hermitian_eigenvalues(sum.as_mat())?;
    Ok(values.into_iter().filter(|v| v.abs() <= 1e-10).count())
}

fn compression_defect(spec: ProjectorSpec, h: &CMat) -> f64 {
    let ph = models::project_term(spec, h);
    (0..9).flat_map(|i| (0..9).map(move |j| (i, j))).map(|(i, j)| (ph[(i, j)] - h[(i, j)]).norm()).fold(0.0, f64::max)
}

/// Family members checked by default: each parameter alone, all equal, and
/// one generic mixture.
pub fn default_family_members() -> Vec<[f64; 5]> {
    let mut out: Vec<[f64; 5]> = (0..5)
        .map(|k| {
            let mut p = [0.0; 5];
            p[k] = 1.0;
            p
        })
        .collect();
    out.push([1.0; 5]);
    out.push([0.31, -1.2, 0.74, 0.55, -0.93]);
    out
}

pub fn trivial_embedding_compare(cfg: &ChainConfig) -> Result<TrivialEmbeddingReport> {
    cfg.require_local_dim(3, "trivial_embedding_compare")?;
    if cfg.n_sites < 2 || cfg.n_sites > KERNEL_MAX_SITES {
        return Err(Error::InvalidConfig(format!(
            "kernel computation supports 2 <= N <= {KERNEL_MAX_SITES}, got {}",
            cfg.n_sites
        )));
    }
    let family = default_family_members()
        .into_iter()
        .map(|params| {
            let h = minimal_only_interaction(params.map(|x| C64::new(x, 0.0)));
            FamilyCheck {
                params,
                minimal_defect: compression_defect(ProjectorSpec::SpinOneTwoBody, &h),
                trivial_defect: compression_defect(ProjectorSpec::SpinOneTrivial, &h),
            }
        })
        .collect();
    Ok(TrivialEmbeddingReport {
        n_sites: cfg.n_sites,
        trivial_kernel_dim: simultaneous_kernel_dim(ProjectorSpec::SpinOneTrivial, cfg)?,
        minimal_kernel_dim: simultaneous_kernel_dim(ProjectorSpec::SpinOneTwoBody, cfg)?,
        family,
    })
}
