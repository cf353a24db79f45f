//! Robustness of spin-1 transfer against unprojected perturbations.
//!
//! Three perturbations built from the true spin-1 matrices `Sˣ`, `Sʸ` (basis
//! order `|−⟩, |0⟩, |+⟩`) are added to a spin-1 base Hamiltonian, and the
//! infidelity `1 − F(τ₁)` is recorded with the unperturbed correction
//! unitary and fitted to a power law in ε.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    diagonalize, evolve, evolve_krylov, fidelity_of_state, prepare_initial, transfer_times, KrylovOptions,
    SparseHamiltonian, TransferJob,
};
use crate::hilbert::{ChainConfig, DenseOperator};
use crate::models::{self, RandomInteractionSpec};
use crate::{CMat, Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Infidelities at or below this are treated as numerical noise in fits.
pub const INFIDELITY_FLOOR: f64 = 1e-9;
/// Infidelities at or above this are treated as saturated in fits.
pub const INFIDELITY_CEILING: f64 = 0.5;

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    /// `ε Sˣ_{N/2}`.
    LocalX,
    /// `ε Σ_{n=1}^{N} Sˣ_n`.
    GlobalX,
    /// `ε Σ_{n=1}^{N−1} Sʸ_n Sʸ_{n+1}`.
    GlobalYy,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 3] = [Self::LocalX, Self::GlobalX, Self::GlobalYy];

    pub fn name(self) -> &'static str {
        match self {
            Self::LocalX => "local-x",
            Self::GlobalX => "global-x",
            Self::GlobalYy => "global-yy",
        }
    }
}

/// Unperturbed spin-1 Hamiltonian the perturbation is added to.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationBase {
    ScarSpin1,
    PstSpin1,
}

impl PerturbationBase {
    pub fn name(self) -> &'static str {
        match self {
            Self::ScarSpin1 => "scar-spin1",
            Self::PstSpin1 => "pst-spin1",
        }
    }

    pub fn build(self, cfg: &ChainConfig, spec: &RandomInteractionSpec) -> Result<DenseOperator> {
        match self {
            Self::ScarSpin1 => models::build_h_scar_spin1(cfg, spec),
            Self::PstSpin1 => models::build_h_pst_spin1(cfg),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub epsilon: f64,
    pub base: PerturbationBase,
}

/// Spin-1 `Sˣ` with unit off-diagonal entries.
pub fn spin1_sx() -> CMat {
    Mat::from_fn(3, 3, |i, j| if i.abs_diff(j) == 1 { C64::new(1.0, 0.0) } else { ZERO })
}

/// Spin-1 `Sʸ`: `−i` above and `+i` below the diagonal.
pub fn spin1_sy() -> CMat {
    Mat::from_fn(3, 3, |i, j| {
        if j == i + 1 {
            C64::new(0.0, -1.0)
        } else if i == j + 1 {
            C64::new(0.0, 1.0)
        } else {
            ZERO
        }
    })
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    let (m, n) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * m, a.ncols() * n, |i, j| a[(i / m, j / n)] * b[(i % m, j % n)])
}

/// The perturbation with `ε = 1`.
pub fn unit_perturbation(kind: PerturbationKind, cfg: &ChainConfig) -> Result<DenseOperator> {
    cfg.require_local_dim(3, "spin-1 perturbations")?;
    let n = cfg.n_sites;
    let mut h = DenseOperator::zeros(cfg.dim());
    match kind {
        PerturbationKind::LocalX => {
            if n % 2 != 0 {
                return Err(Error::InvalidConfig(format!("local-X acts on site N/2 and needs even N, got {n}")));
            }
            h.add_local_term(spin1_sx().as_ref(), &[n / 2], cfg, 1.0)?;
        }
        PerturbationKind::GlobalX => {
            let sx = spin1_sx();
            for site in 1..=n {
                h.add_local_term(sx.as_ref(), &[site], cfg, 1.0)?;
            }
        }
        PerturbationKind::GlobalYy => {
            let yy = kron(&spin1_sy(), &spin1_sy());
            for site in 1..n {
                h.add_local_term(yy.as_ref(), &[site, site + 1], cfg, 1.0)?;
            }
        }
    }
    Ok(h)
}

pub fn build_perturbation(spec: &PerturbationSpec, cfg: &ChainConfig) -> Result<DenseOperator> {
    if !(spec.epsilon.is_finite() && spec.epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {}", spec.epsilon)));
    }
    Ok(unit_perturbation(spec.kind, cfg)?.scaled(C64::new(spec.epsilon, 0.0)))
}

/// `10^(−3 + k/4)` for `k = 0..=8`: 1e−3 to 1e−1, four points per decade.
pub fn default_epsilons() -> Vec<f64> {
    (0..=8).map(|k| 10f64.powf(-3.0 + k as f64 / 4.0)).collect()
}

/// How each perturbed Hamiltonian is propagated to `τ₁`.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Propagation {
    /// Full diagonalization per ε.
    Spectral,
    /// Lanczos propagation on a sparse copy.
    Krylov(KrylovOptions),
}

impl Default for Propagation {
    fn default() -> Self {
        Self::Krylov(KrylovOptions::default())
    }
}

/// Prepared base plus unit perturbation, reusable across ε.
pub struct PerturbedFamily<'a> {
    base: &'a DenseOperator,
    mode: FamilyMode,
}

enum FamilyMode {
    Spectral { unit: DenseOperator },
    // the dense unit perturbation is dropped once the sparse copy exists
    Krylov { sparse: SparseHamiltonian, opts: KrylovOptions },
}

impl<'a> PerturbedFamily<'a> {
    pub fn new(base: &'a DenseOperator, kind: PerturbationKind, cfg: &ChainConfig, propagation: Propagation) -> Result<Self> {
        if base.dim() != cfg.dim() {
            return Err(Error::DimensionMismatch { expected: cfg.dim(), found: base.dim() });
        }
        let unit = unit_perturbation(kind, cfg)?;
        let mode = match propagation {
            Propagation::Krylov(opts) => FamilyMode::Krylov { sparse: SparseHamiltonian::from_dense(base)?.plus(&unit, 0.0)?, opts },
            Propagation::Spectral => FamilyMode::Spectral { unit },
        };
        Ok(Self { base, mode })
    }

    /// `1 − F(τ₁)` at one ε.
    pub fn infidelity(&self, epsilon: f64, job: &TransferJob, cfg: &ChainConfig) -> Result<f64> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
        }
        let tau1 = transfer_times(cfg, 1)[0];
        let psi0 = prepare_initial(job, cfg)?;
        let psi = match &self.mode {
            FamilyMode::Krylov { sparse, opts } => evolve_krylov(&sparse.with_scale(1, epsilon)?, &psi0, tau1, opts)?,
            FamilyMode::Spectral { unit } => {
                let mut h = self.base.clone();
                h.add_assign(&unit.scaled(C64::new(epsilon, 0.0)))?;
                evolve(&diagonalize(&h)?, &psi0, tau1)?
            }
        };
        Ok(1.0 - fidelity_of_state(psi.amplitudes(), job, cfg, tau1)?)
    }
}

/// `1 − F(τ₁)` for `base + ε·perturbation`.
pub fn infidelity_at(
    base: &DenseOperator,
    kind: PerturbationKind,
    epsilon: f64,
    job: &TransferJob,
    cfg: &ChainConfig,
    propagation: Propagation,
) -> Result<f64> {
    PerturbedFamily::new(base, kind, cfg, propagation)?.infidelity(epsilon, job, cfg)
}

/// Log-log least-squares fit `log10(1−F) = slope · log10 ε + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub kind: PerturbationKind,
    pub epsilons: Vec<f64>,
    pub infidelities: Vec<f64>,
    /// Indices of the points inside `(INFIDELITY_FLOOR, INFIDELITY_CEILING)`.
    pub fitted: Vec<usize>,
    pub slope: f64,
    pub slope_std_error: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Indices `k` where `infidelity[k+1] < infidelity[k] − 1e−9`.
    pub monotonicity_violations: Vec<usize>,
}

impl ScalingFit {
    pub fn from_points(kind: PerturbationKind, epsilons: Vec<f64>, infidelities: Vec<f64>) -> Result<Self> {
        if epsilons.len() != infidelities.len() {
            return Err(Error::DimensionMismatch { expected: epsilons.len(), found: infidelities.len() });
        }
        let fitted: Vec<usize> = (0..epsilons.len())
            .filter(|&k| infidelities[k] > INFIDELITY_FLOOR && infidelities[k] < INFIDELITY_CEILING && epsilons[k] > 0.0)
            .collect();
        if fitted.len() < 3 {
            let dump: Vec<String> = epsilons.iter().zip(&infidelities).map(|(e, f)| format!("({e:.3e}, {f:.3e})")).collect();
            return Err(Error::InsufficientData(format!(
                "power-law fit needs 3 points with infidelity in ({INFIDELITY_FLOOR:e}, {INFIDELITY_CEILING}); data: {}",
                dump.join(" ")
            )));
        }
        let x: Vec<f64> = fitted.iter().map(|&k| epsilons[k].log10()).collect();
        let y: Vec<f64> = fitted.iter().map(|&k| infidelities[k].log10()).collect();
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
        if !(sxx > 0.0) {
            return Err(Error::InsufficientData("power-law fit needs distinct epsilons".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
        let slope_std_error = (sse / (n - 2.0) / sxx).sqrt();
        let monotonicity_violations =
            (0..infidelities.len().saturating_sub(1)).filter(|&k| infidelities[k + 1] < infidelities[k] - 1e-9).collect();
        Ok(Self {
            kind,
            epsilons,
            infidelities,
            fitted,
            slope,
            slope_std_error,
            intercept,
            r_squared,
            monotonicity_violations,
        })
    }

    /// Fitted infidelity at ε.
    pub fn predict(&self, epsilon: f64) -> f64 {
        10f64.powf(self.intercept + self.slope * epsilon.log10())
    }
}

fn check_grid(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidArgument("epsilons must be positive and finite".into()));
    }
    if epsilons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("epsilons must be strictly ascending".into()));
    }
    let span = (epsilons[epsilons.len() - 1] / epsilons[0]).log10();
    if span < 2.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!("epsilons must span at least 2 decades, got {span:.2}")));
    }
    Ok(())
}

/// Infidelity at `τ₁` for every ε, with a power-law fit.
pub fn infidelity_scan(
    base: &DenseOperator,
    kind: PerturbationKind,
    epsilons: &[f64],
    job: &TransferJob,
    cfg: &ChainConfig,
    propagation: Propagation,
) -> Result<ScalingFit> {
    check_grid(epsilons)?;
    job.validate()?;
    let family = PerturbedFamily::new(base, kind, cfg, propagation)?;
    let infidelities = match propagation {
        // dense copies are large; keep those sequential
        Propagation::Spectral => epsilons.iter().map(|&e| family.infidelity(e, job, cfg)).collect::<Result<Vec<_>>>()?,
        Propagation::Krylov(_) => {
            epsilons.par_iter().map(|&e| family.infidelity(e, job, cfg)).collect::<Result<Vec<_>>>()?
        }
    };
    ScalingFit::from_points(kind, epsilons.to_vec(), infidelities)
}
