//! Experiment pipelines. Each one computes its results, writes them to the
//! run directory and, in check mode, hands them to the criteria in
//! [`crate::check`].

use std::time::Instant;

use serde::Serialize;

use scarchain::diagnostics::{
    bulk_levels, default_degeneracy_tolerance, detect_scars, eigenstate_entropies, gap_ratio_statistic,
    gue_gap_ratio_oracle, page_entropy, page_estimate_spin_half, poisson_mean_gap_ratio, spacing_histogram,
    OracleEstimate, ScarDetection, SpacingHistogram, SpectralStatistics, BULK_FRACTION, DEFAULT_UNFOLDING_DEGREE,
};
use scarchain::dynamics::{
    diagonalize, transfer_fidelity, transfer_fidelity_krylov, transfer_times, Background, EigenSystem,
    FidelityTrace, KrylovOptions, SparseHamiltonian, TransferJob,
};
use scarchain::hilbert::{ChainConfig, DenseOperator};
use scarchain::models::{build_hamiltonian, build_projector, ProjectorSpec, Variant};
use scarchain::perturbations::{infidelity_at, infidelity_scan, PerturbationBase, ScalingFit};
use scarchain::scars::{
    classify_interactions, scar_basis_for, shiraishi_mori_report, trivial_embedding_compare,
    InteractionClassification, ShiraishiMoriReport, TrivialEmbeddingReport,
};

use crate::check::{self, CheckReport, Criterion};
use crate::config::{Experiment, ResolvedConfig};
use crate::error::CliResult;
use crate::output::{content_hash, Cell, RunDir, RunManifest, StageTiming};

/// Number of transfer times `τ_m` reported per trace.
pub const TRANSFER_TIMES_REPORTED: usize = 3;

/// Plateau window `[2π/λ, 3π/λ]` for thermal time averages.
pub fn plateau_window(cfg: &ChainConfig) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    (2.0 * pi / cfg.lambda, 3.0 * pi / cfg.lambda)
}

/// Chain sizes of the explicit kernel computation.
pub const KERNEL_SITES: [usize; 2] = [3, 4];

/// Reference infidelity strength for comparing perturbation bases.
pub const REFERENCE_EPSILON: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Run,
    Check,
}

#[derive(Debug, Default)]
struct Timer {
    stages: Vec<StageTiming>,
}

impl Timer {
    fn time<T>(&mut self, stage: impl Into<String>, f: impl FnOnce() -> CliResult<T>) -> CliResult<T> {
        let start = Instant::now();
        let out = f()?;
        self.stages.push(StageTiming { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        Ok(out)
    }
}

/// Either a full eigendecomposition or a sparse copy for Lanczos stepping.
pub enum Propagator {
    Spectral(EigenSystem),
    Krylov(SparseHamiltonian, KrylovOptions),
}

impl Propagator {
    pub fn new(h: &DenseOperator, propagation: scarchain::perturbations::Propagation) -> CliResult<Self> {
        use scarchain::perturbations::Propagation;
        Ok(match propagation {
            Propagation::Spectral => Self::Spectral(diagonalize(h)?),
            Propagation::Krylov(opts) => Self::Krylov(SparseHamiltonian::from_dense(h)?, opts),
        })
    }

    pub fn trace(&self, job: &TransferJob, cfg: &ChainConfig) -> CliResult<FidelityTrace> {
        Ok(match self {
            Self::Spectral(eig) => transfer_fidelity(eig, job, cfg)?,
            Self::Krylov(h, opts) => transfer_fidelity_krylov(h, job, cfg, opts)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferPoint {
    pub m: usize,
    pub t_lambda: f64,
    pub fidelity: f64,
}

/// Headline numbers of one fidelity trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSummary {
    pub variant: Variant,
    pub background: Background,
    pub seed: u64,
    /// `F(τ_m)` evaluated exactly at `τ_m`, not interpolated from the grid.
    pub at_transfer_times: Vec<TransferPoint>,
    /// Trapezoidal average of the sampled trace over the plateau window.
    pub plateau_average: f64,
    pub max_fidelity: f64,
    pub min_fidelity: f64,
}

pub struct VariantTransfer {
    pub summaries: Vec<TraceSummary>,
    pub traces: Vec<FidelityTrace>,
}

/// Traces for both backgrounds of one variant at the configuration's seed.
pub fn transfer_for_variant(rc: &ResolvedConfig, variant: Variant) -> CliResult<VariantTransfer> {
    let cfg = &rc.chain;
    let h = build_hamiltonian(variant, cfg, &rc.interaction, &rc.coupling.profile(cfg))?;
    let prop = Propagator::new(&h, rc.propagation)?;
    drop(h);
    let times = rc.times();
    let (lo, hi) = plateau_window(cfg);
    let mut out = VariantTransfer { summaries: Vec::new(), traces: Vec::new() };
    for background in [Background::Zeros, Background::Ones] {
        let job = TransferJob::new(cfg)
            .with_variant(variant)
            .with_payload(rc.payload)
            .with_background(background)
            .with_times(times.clone());
        let trace = prop.trace(&job, cfg)?;
        let exact = prop.trace(&job.clone().with_times(transfer_times(cfg, TRANSFER_TIMES_REPORTED)), cfg)?;
        out.summaries.push(TraceSummary {
            variant,
            background,
            seed: cfg.seed,
            at_transfer_times: exact
                .times
                .iter()
                .zip(&exact.fidelity)
                .enumerate()
                .map(|(i, (&t, &f))| TransferPoint { m: i + 1, t_lambda: t * cfg.lambda, fidelity: f })
                .collect(),
            plateau_average: trace.window_average(lo, hi)?,
            max_fidelity: trace.max(),
            min_fidelity: trace.fidelity.iter().copied().fold(f64::INFINITY, f64::min),
        });
        out.traces.push(trace);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferSummary {
    pub experiment: Experiment,
    pub chain: ChainConfig,
    pub plateau_window_lambda: [f64; 2],
    pub traces: Vec<TraceSummary>,
    /// Scar-variant summaries on further seeds (check mode only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub seed_sweep: Vec<TraceSummary>,
}

fn transfer_experiment(rc: &ResolvedConfig, mode: Mode, out: &mut RunDir, timer: &mut Timer) -> CliResult<Vec<Criterion>> {
    let cfg = &rc.chain;
    let mut summary = TransferSummary {
        experiment: rc.experiment,
        chain: *cfg,
        plateau_window_lambda: [2.0 * std::f64::consts::PI, 3.0 * std::f64::consts::PI],
        traces: Vec::new(),
        seed_sweep: Vec::new(),
    };
    for &variant in &rc.variants {
        let result = timer.time(format!("transfer/{}", variant.name()), || transfer_for_variant(rc, variant))?;
        if rc.format.csv() {
            for trace in &result.traces {
                let rows: Vec<Vec<Cell>> = trace
                    .times
                    .iter()
                    .zip(&trace.fidelity)
                    .map(|(&t, &f)| vec![(t * cfg.lambda).into(), f.into()])
                    .collect();
                let name = format!("transfer_{}_{}.csv", variant.name(), trace.background.name());
                out.write_csv(&name, &["t_lambda", "fidelity"], &rows)?;
            }
        }
        summary.traces.extend(result.summaries);
    }
    if mode == Mode::Check && rc.variants.contains(&Variant::Scar) {
        for &seed in &rc.check_seeds {
            if seed == cfg.seed {
                let primary = summary.traces.iter().filter(|s| s.variant == Variant::Scar).cloned();
                summary.seed_sweep.extend(primary);
                continue;
            }
            let seeded = rc.with_seed(seed);
            let result = timer.time(format!("seed-sweep/{seed}"), || transfer_for_variant(&seeded, Variant::Scar))?;
            summary.seed_sweep.extend(result.summaries);
        }
        if rc.format.csv() {
            let rows: Vec<Vec<Cell>> = summary
                .seed_sweep
                .iter()
                .map(|s| {
                    vec![
                        Cell::Int(s.seed),
                        s.background.name().into(),
                        s.at_transfer_times[0].fidelity.into(),
                        s.max_fidelity.into(),
                    ]
                })
                .collect();
            out.write_csv("transfer_seed_sweep.csv", &["seed", "background", "fidelity_tau1", "max_fidelity"], &rows)?;
        }
    }
    if rc.format.json() {
        out.write_json("transfer_summary.json", &summary)?;
    }
    Ok(if mode == Mode::Check { check::transfer_criteria(rc, &summary) } else { Vec::new() })
}

/// Scar-census numbers of one variant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScarCensus {
    pub count: usize,
    pub expected_energies: Vec<f64>,
    pub outlier_indices: Vec<usize>,
    pub outlier_energies: Vec<f64>,
    pub outlier_entropies: Vec<f64>,
    pub entropy_bound: f64,
    /// Entropy of the outlier with the largest vacuum weight.
    pub vacuum_entropy: Option<f64>,
    pub overlap_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantSpectral {
    pub variant: Variant,
    pub levels: usize,
    pub bulk_levels: usize,
    pub distinct_bulk_levels: usize,
    pub degeneracy_tolerance: f64,
    pub mean_r: f64,
    pub std_error: f64,
    pub bulk_entropy_mean: f64,
    pub page_reference: f64,
    pub census: ScarCensus,
    #[serde(skip)]
    pub gap_ratios: Vec<f64>,
    #[serde(skip)]
    pub histogram: Option<SpacingHistogram>,
    #[serde(skip)]
    pub energies: Vec<f64>,
    #[serde(skip)]
    pub entropies: Vec<f64>,
    #[serde(skip)]
    pub overlaps: Vec<f64>,
}

/// Page value for the half-chain cut of `cfg`.
pub fn page_reference(cfg: &ChainConfig) -> f64 {
    if cfg.local_dim == 2 {
        page_estimate_spin_half(cfg.n_sites)
    } else {
        let left = cfg.local_dim.pow(scarchain::diagnostics::half_chain_cut(cfg) as u32);
        page_entropy(left, cfg.dim() / left)
    }
}

pub fn spectral_for_variant(rc: &ResolvedConfig, variant: Variant) -> CliResult<VariantSpectral> {
    let cfg = &rc.chain;
    let h = build_hamiltonian(variant, cfg, &rc.interaction, &rc.coupling.profile(cfg))?;
    let tolerance = default_degeneracy_tolerance(h.max_abs());
    let eig = diagonalize(&h)?;
    drop(h);
    let bulk = bulk_levels(&eig.eigenvalues, BULK_FRACTION);
    let stats: SpectralStatistics = gap_ratio_statistic(bulk, tolerance)?;
    // unfolding can fail on strongly degenerate spectra; the histogram is optional output
    let histogram = spacing_histogram(bulk, DEFAULT_UNFOLDING_DEGREE).ok().and_then(|s| s.spacing_histogram);
    let scatter = eigenstate_entropies(&eig, cfg)?;
    let basis = scar_basis_for(cfg)?;
    let detection: ScarDetection = detect_scars(&eig, &basis, Some(&scatter), cfg)?;
    let vacuum_weights = eig.coefficients(&basis.vacuum)?;
    let vacuum_entropy = detection
        .outlier_indices
        .iter()
        .max_by(|&&a, &&b| vacuum_weights[a].norm_sqr().total_cmp(&vacuum_weights[b].norm_sqr()))
        .map(|&a| scatter.entropies[a]);
    Ok(VariantSpectral {
        variant,
        levels: eig.dim(),
        bulk_levels: bulk.len(),
        distinct_bulk_levels: stats.distinct_levels,
        degeneracy_tolerance: tolerance,
        mean_r: stats.mean_r,
        std_error: stats.std_error,
        bulk_entropy_mean: scatter.bulk_mean(BULK_FRACTION),
        page_reference: page_reference(cfg),
        census: ScarCensus {
            count: detection.count,
            expected_energies: basis.energies.clone(),
            outlier_entropies: detection.outlier_entropies.clone().unwrap_or_default(),
            outlier_indices: detection.outlier_indices,
            outlier_energies: detection.outlier_energies,
            entropy_bound: detection.entropy_bound,
            vacuum_entropy,
            overlap_sum: detection.overlap_sum,
        },
        gap_ratios: stats.gap_ratios,
        histogram,
        energies: scatter.energies,
        entropies: scatter.entropies,
        overlaps: detection.overlaps,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralSummary {
    pub experiment: Experiment,
    pub chain: ChainConfig,
    pub bulk_fraction: f64,
    pub gue_oracle: OracleEstimate,
    pub poisson_mean_r: f64,
    pub variants: Vec<VariantSpectral>,
}

fn spectral_experiment(rc: &ResolvedConfig, mode: Mode, out: &mut RunDir, timer: &mut Timer) -> CliResult<Vec<Criterion>> {
    let o = rc.gue_oracle;
    let gue = timer.time("gue-oracle", || Ok(gue_gap_ratio_oracle(o.dim, o.samples, o.seed)?))?;
    let mut summary = SpectralSummary {
        experiment: rc.experiment,
        chain: rc.chain,
        bulk_fraction: BULK_FRACTION,
        gue_oracle: gue,
        poisson_mean_r: poisson_mean_gap_ratio(),
        variants: Vec::new(),
    };
    for &variant in &rc.variants {
        let s = timer.time(format!("spectral/{}", variant.name()), || spectral_for_variant(rc, variant))?;
        if rc.format.csv() {
            let name = variant.name();
            let rows: Vec<Vec<Cell>> = (0..s.energies.len())
                .map(|k| vec![s.energies[k].into(), s.entropies[k].into(), s.overlaps[k].into()])
                .collect();
            out.write_csv(&format!("entropy_{name}.csv"), &["energy", "entropy", "scar_overlap"], &rows)?;
            let rows: Vec<Vec<Cell>> = s.gap_ratios.iter().map(|&r| vec![r.into()]).collect();
            out.write_csv(&format!("gap_ratio_{name}.csv"), &["r"], &rows)?;
            if let Some(h) = &s.histogram {
                let rows: Vec<Vec<Cell>> = (0..h.density.len())
                    .map(|b| {
                        vec![
                            h.bin_edges[b].into(),
                            h.bin_edges[b + 1].into(),
                            h.density[b].into(),
                            h.wigner_gue[b].into(),
                            h.poisson[b].into(),
                        ]
                    })
                    .collect();
                let header = ["bin_left", "bin_right", "density", "wigner_gue", "poisson"];
                out.write_csv(&format!("spacing_{name}.csv"), &header, &rows)?;
            }
        }
        summary.variants.push(s);
    }
    if rc.format.json() {
        out.write_json("spectral_summary.json", &summary)?;
    }
    Ok(if mode == Mode::Check { check::spectral_criteria(rc, &summary) } else { Vec::new() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub base: PerturbationBase,
    pub fit: ScalingFit,
    /// 95% interval for the slope, normal approximation.
    pub slope_interval: [f64; 2],
    pub reference_epsilon: f64,
    pub reference_infidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationSummary {
    pub chain: ChainConfig,
    pub scans: Vec<ScanResult>,
}

fn perturbation_experiment(
    rc: &ResolvedConfig,
    mode: Mode,
    out: &mut RunDir,
    timer: &mut Timer,
) -> CliResult<Vec<Criterion>> {
    let cfg = &rc.chain;
    let job = TransferJob::at_transfer_times(cfg, 1).with_payload(rc.payload);
    let mut summary = PerturbationSummary { chain: *cfg, scans: Vec::new() };
    for &base in &rc.bases {
        let h = base.build(cfg, &rc.interaction)?;
        for &kind in &rc.perturbations {
            let stage = format!("scan/{}/{}", base.name(), kind.name());
            let (fit, reference) = timer.time(stage, || {
                let fit = infidelity_scan(&h, kind, &rc.epsilons, &job, cfg, rc.propagation)?;
                let reference = infidelity_at(&h, kind, REFERENCE_EPSILON, &job, cfg, rc.propagation)?;
                Ok((fit, reference))
            })?;
            if rc.format.csv() {
                let rows: Vec<Vec<Cell>> = fit
                    .epsilons
                    .iter()
                    .zip(&fit.infidelities)
                    .enumerate()
                    .map(|(i, (&e, &f))| vec![e.into(), f.into(), usize::from(fit.fitted.contains(&i)).into()])
                    .collect();
                let name = format!("infidelity_{}_{}.csv", base.name(), kind.name());
                out.write_csv(&name, &["epsilon", "infidelity", "fitted"], &rows)?;
            }
            let half = 1.96 * fit.slope_std_error;
            summary.scans.push(ScanResult {
                base,
                slope_interval: [fit.slope - half, fit.slope + half],
                fit,
                reference_epsilon: REFERENCE_EPSILON,
                reference_infidelity: reference,
            });
        }
    }
    if rc.format.json() {
        out.write_json("perturbation_summary.json", &summary)?;
    }
    Ok(if mode == Mode::Check { check::perturbation_criteria(&summary) } else { Vec::new() })
}

fn classify_experiment(rc: &ResolvedConfig, mode: Mode, out: &mut RunDir, timer: &mut Timer) -> CliResult<Vec<Criterion>> {
    let result: InteractionClassification = timer.time("classify", || {
        Ok(classify_interactions(&build_projector(ProjectorSpec::SpinOneTwoBody), 9)?)
    })?;
    if rc.format.json() {
        out.write_json("classify.json", &result)?;
    }
    if rc.format.csv() {
        let rows = vec![
            vec!["annihilated".into(), result.annihilated.into()],
            vec!["fixed".into(), result.fixed.into()],
            vec!["other".into(), result.other.into()],
        ];
        out.write_csv("classify.csv", &["class", "count"], &rows)?;
    }
    Ok(if mode == Mode::Check { vec![check::classification_criterion(&result)] } else { Vec::new() })
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixReport {
    pub projector_embedding: ShiraishiMoriReport,
    pub trivial_embedding: Vec<TrivialEmbeddingReport>,
}

fn appendix_experiment(rc: &ResolvedConfig, mode: Mode, out: &mut RunDir, timer: &mut Timer) -> CliResult<Vec<Criterion>> {
    let a = timer.time("projector-embedding", || Ok(shiraishi_mori_report(&rc.chain)?))?;
    let b = timer.time("trivial-embedding", || {
        KERNEL_SITES
            .iter()
            .map(|&n| Ok(trivial_embedding_compare(&ChainConfig::spin_one(n, 0.0, 1.0, rc.chain.seed)?)?))
            .collect::<CliResult<Vec<_>>>()
    })?;
    let report = AppendixReport { projector_embedding: a, trivial_embedding: b };
    if rc.format.csv() {
        let a = &report.projector_embedding;
        let rows: Vec<Vec<Cell>> = (0..a.h_pst_window_commutators.len())
            .map(|k| vec![(k + 1).into(), a.h_pst_window_commutators[k].into(), a.jx_window_commutators[k].into()])
            .collect();
        out.write_csv("appendix_windows.csv", &["window_start", "h_pst_commutator", "jx_commutator"], &rows)?;
        let mut rows: Vec<Vec<Cell>> = Vec::new();
        for r in &report.trivial_embedding {
            for f in &r.family {
                let mut row: Vec<Cell> = vec![r.n_sites.into()];
                row.extend(f.params.iter().map(|&p| Cell::Real(p)));
                row.extend([Cell::Real(f.minimal_defect), Cell::Real(f.trivial_defect)]);
                rows.push(row);
            }
        }
        let header = ["n_sites", "c1", "c2", "c3", "c4", "c5", "minimal_defect", "trivial_defect"];
        out.write_csv("appendix_family.csv", &header, &rows)?;
    }
    if rc.format.json() {
        out.write_json("appendix.json", &report)?;
    }
    Ok(if mode == Mode::Check { check::appendix_criteria(&report) } else { Vec::new() })
}

/// Everything a finished run leaves behind.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub check: Option<CheckReport>,
}

/// Runs the configured experiment, writes its files and the manifest, and
/// in check mode evaluates and writes the acceptance criteria.
pub fn execute(rc: &ResolvedConfig, mode: Mode) -> CliResult<RunOutcome> {
    let mut out = RunDir::create(&rc.output_dir)?;
    let mut timer = Timer::default();
    let criteria = match rc.experiment {
        Experiment::Fig2Transfer | Experiment::Fig3Transfer => transfer_experiment(rc, mode, &mut out, &mut timer)?,
        Experiment::Fig2Spectral | Experiment::Fig3Spectral => spectral_experiment(rc, mode, &mut out, &mut timer)?,
        Experiment::Fig4Perturbation => perturbation_experiment(rc, mode, &mut out, &mut timer)?,
        Experiment::Classify => classify_experiment(rc, mode, &mut out, &mut timer)?,
        Experiment::AppendixChecks => appendix_experiment(rc, mode, &mut out, &mut timer)?,
    };
    let check = (mode == Mode::Check).then(|| CheckReport::new(rc.experiment, criteria));
    if let Some(report) = &check {
        out.write_json("check.json", report)?;
    }
    let manifest = RunManifest {
        tool: "scarchain".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: content_hash(rc.canonical_json().as_bytes()),
        config: rc.clone(),
        timings: timer.stages,
        files: out.files().to_vec(),
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(RunOutcome { manifest, check })
}
