//! Level statistics, eigenstate entanglement and scar detection.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::EigenSystem;
use crate::hilbert::{entropy_of_spectrum, ChainConfig};
use crate::models::{random_hermitian, term_rng, TermKind};
use crate::scars::ScarBasis;
use crate::{linalg, Error, Result, C64};

/// Fraction of levels, taken from the middle of the spectrum by index, used
/// for bulk statistics.
pub const BULK_FRACTION: f64 = 0.6;

/// Overlap above which an eigenstate counts as a scar.
pub const SCAR_OVERLAP_THRESHOLD: f64 = 0.99;

/// Default unfolding polynomial degree.
pub const DEFAULT_UNFOLDING_DEGREE: usize = 10;

pub const HISTOGRAM_BINS: usize = 40;
pub const HISTOGRAM_MAX_SPACING: f64 = 4.0;

/// Degeneracy tolerance `1e−10 · ‖H‖_max`.
pub fn default_degeneracy_tolerance(h_max_abs: f64) -> f64 {
    1e-10 * h_max_abs
}

/// Middle `fraction` of an ascending spectrum: `⌊(1−fraction)/2 · n⌋` levels
/// are dropped from each end.
pub fn bulk_levels(eigenvalues: &[f64], fraction: f64) -> &[f64] {
    let n = eigenvalues.len();
    let drop = (((1.0 - fraction) / 2.0) * n as f64).floor() as usize;
    &eigenvalues[drop.min(n / 2)..n - drop.min(n / 2)]
}

/// Normalized spacing histogram with random-matrix reference curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingHistogram {
    pub unfolding_degree: usize,
    pub bin_edges: Vec<f64>,
    /// Probability density per bin.
    pub density: Vec<f64>,
    /// GUE Wigner surmise `(32/π²) s² e^{−4s²/π}` at bin centres.
    pub wigner_gue: Vec<f64>,
    /// `e^{−s}` at bin centres.
    pub poisson: Vec<f64>,
    pub mean_spacing: f64,
    pub spacings: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralStatistics {
    pub gap_ratios: Vec<f64>,
    pub mean_r: f64,
    /// Standard error of `mean_r`.
    pub std_error: f64,
    pub degeneracy_tolerance: f64,
    pub distinct_levels: usize,
    pub spacing_histogram: Option<SpacingHistogram>,
}

/// Levels with neighbours closer than `tolerance` merged into one.
fn distinct_levels(eigenvalues: &[f64], tolerance: f64) -> Result<Vec<f64>> {
    if eigenvalues.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument("eigenvalues must be finite".into()));
    }
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidArgument(format!("degeneracy tolerance must be >= 0, got {tolerance}")));
    }
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for e in sorted {
        match out.last() {
            Some(&prev) if e - prev <= tolerance => {}
            _ => out.push(e),
        }
    }
    Ok(out)
}

fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Consecutive-gap ratios `r_k = min(s_k, s_{k+1}) / max(s_k, s_{k+1})`.
pub fn gap_ratio_statistic(eigenvalues: &[f64], degeneracy_tolerance: f64) -> Result<SpectralStatistics> {
    let levels = distinct_levels(eigenvalues, degeneracy_tolerance)?;
    if levels.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "gap ratios need at least 3 distinct levels, got {}",
            levels.len()
        )));
    }
    let spacings: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let gap_ratios: Vec<f64> = spacings.windows(2).map(|w| w[0].min(w[1]) / w[0].max(w[1])).collect();
    let (mean_r, std_error) = mean_and_error(&gap_ratios);
    Ok(SpectralStatistics {
        gap_ratios,
        mean_r,
        std_error,
        degeneracy_tolerance,
        distinct_levels: levels.len(),
        spacing_histogram: None,
    })
}

fn chebyshev_row(x: f64, degree: usize) -> Vec<f64> {
    let mut t = vec![1.0; degree + 1];
    if degree >= 1 {
        t[1] = x;
    }
    for k in 2..=degree {
        t[k] = 2.0 * x * t[k - 1] - t[k - 2];
    }
    t
}

/// Unfolds by least-squares fitting the staircase `N(E_i) = i` with a
/// Chebyshev series of the given degree, then histograms the spacings of the
/// fitted values.
pub fn spacing_histogram(eigenvalues: &[f64], unfolding_degree: usize) -> Result<SpectralStatistics> {
    let tolerance = default_degeneracy_tolerance(eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs())));
    let mut stats = gap_ratio_statistic(eigenvalues, tolerance)?;
    let mut levels = eigenvalues.to_vec();
    levels.sort_by(f64::total_cmp);
    let n = levels.len();
    let terms = unfolding_degree + 1;
    if n <= terms {
        return Err(Error::InsufficientData(format!("degree {unfolding_degree} fit needs more than {terms} levels, got {n}")));
    }
    let (lo, hi) = (levels[0], levels[n - 1]);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    if !(half > 0.0) {
        return Err(Error::InvalidArgument("degenerate fit: spectrum has zero width".into()));
    }
    let rows: Vec<Vec<f64>> = levels.iter().map(|e| chebyshev_row((e - mid) / half, unfolding_degree)).collect();
    // normal equations, solved through the eigendecomposition of the Gram
    // matrix so that rank deficiency is detected explicitly
    let gram = Mat::<f64>::from_fn(terms, terms, |a, b| rows.iter().map(|r| r[a] * r[b]).sum());
    let rhs: Vec<f64> = (0..terms).map(|a| rows.iter().enumerate().map(|(i, r)| r[a] * i as f64).sum()).collect();
    let (mu, w) = linalg::symmetric_eigen(gram.as_ref())?;
    let mu_max = mu.iter().copied().fold(0.0, f64::max);
    let mu_min = mu.iter().copied().fold(f64::INFINITY, f64::min);
    if !(mu_min > 1e-12 * mu_max) {
        return Err(Error::Numerical(format!(
            "degenerate unfolding fit: Gram eigenvalue ratio {:.3e} at degree {unfolding_degree}",
            mu_min / mu_max
        )));
    }
    let coef: Vec<f64> = (0..terms)
        .map(|a| (0..terms).map(|k| w[(a, k)] * (0..terms).map(|b| w[(b, k)] * rhs[b]).sum::<f64>() / mu[k]).sum())
        .collect();
    let unfolded: Vec<f64> = rows.iter().map(|r| r.iter().zip(&coef).map(|(t, c)| t * c).sum()).collect();
    let spacings: Vec<f64> = unfolded.windows(2).map(|w| w[1] - w[0]).collect();
    if let Some(bad) = spacings.iter().position(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::Numerical(format!(
            "degenerate unfolding fit: fitted staircase decreases at level {bad} (spacing {:.3e})",
            spacings[bad]
        )));
    }
    let width = HISTOGRAM_MAX_SPACING / HISTOGRAM_BINS as f64;
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for s in &spacings {
        let bin = (s / width).floor() as usize;
        if bin < HISTOGRAM_BINS {
            counts[bin] += 1;
        }
    }
    let total = spacings.len() as f64;
    let bin_edges: Vec<f64> = (0..=HISTOGRAM_BINS).map(|k| k as f64 * width).collect();
    let centres: Vec<f64> = (0..HISTOGRAM_BINS).map(|k| (k as f64 + 0.5) * width).collect();
    stats.spacing_histogram = Some(SpacingHistogram {
        unfolding_degree,
        bin_edges,
        density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        wigner_gue: centres.iter().map(|&s| wigner_surmise_gue(s)).collect(),
        poisson: centres.iter().map(|&s| (-s).exp()).collect(),
        mean_spacing: spacings.iter().sum::<f64>() / total,
        spacings,
    });
    Ok(stats)
}

/// `P(s) = (32/π²) s² e^{−4s²/π}`.
pub fn wigner_surmise_gue(s: f64) -> f64 {
    use std::f64::consts::PI;
    32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp()
}

/// `⟨r⟩ = 2 ln 2 − 1` for independent exponential spacings.
pub fn poisson_mean_gap_ratio() -> f64 {
    2.0 * std::f64::consts::LN_2 - 1.0
}

/// Monte-Carlo estimate of a reference statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub ratios: usize,
}

/// Bulk mean gap ratio of `samples` sampled GUE matrices of size `dim`.
///
/// Each sample draws from its own seeded stream, so the estimate does not
/// depend on the number of worker threads.
pub fn gue_gap_ratio_oracle(dim: usize, samples: usize, seed: u64) -> Result<OracleEstimate> {
    if samples == 0 || dim < 8 {
        return Err(Error::InvalidArgument("GUE oracle needs samples >= 1 and dim >= 8".into()));
    }
    let per_sample: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = term_rng(seed, TermKind::GueSample, k as u64);
            let h = random_hermitian(dim, &mut rng);
            let eig = linalg::hermitian_eigenvalues(h.as_ref())?;
            Ok(gap_ratio_statistic(bulk_levels(&eig, BULK_FRACTION), 0.0)?.gap_ratios)
        })
        .collect::<Result<_>>()?;
    // per-sample means are independent; use them for the error bar
    let means: Vec<f64> = per_sample.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).collect();
    let all: Vec<f64> = per_sample.into_iter().flatten().collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let std_error = if samples > 1 { mean_and_error(&means).1 } else { mean_and_error(&all).1 };
    Ok(OracleEstimate { mean, std_error, samples, ratios: all.len() })
}

/// Spectrum with i.i.d. unit-mean exponential spacings.
pub fn poisson_spectrum(levels: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut e = 0.0;
    (0..levels)
        .map(|_| {
            e += -(1.0 - rng.gen::<f64>()).ln();
            e
        })
        .collect()
}

/// Half-chain entanglement of every eigenstate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyScatter {
    pub energies: Vec<f64>,
    pub entropies: Vec<f64>,
    /// Sites `1..=cut` form the kept half.
    pub cut: usize,
}

impl EntropyScatter {
    /// Mean entropy over the bulk levels (by index).
    pub fn bulk_mean(&self, fraction: f64) -> f64 {
        let n = self.entropies.len();
        let drop = (((1.0 - fraction) / 2.0) * n as f64).floor() as usize;
        let bulk = &self.entropies[drop.min(n / 2)..n - drop.min(n / 2)];
        bulk.iter().sum::<f64>() / bulk.len() as f64
    }
}

/// Half-chain cut site `⌈N/2⌉`.
pub fn half_chain_cut(cfg: &ChainConfig) -> usize {
    cfg.n_sites.div_ceil(2)
}

/// Entropy of sites `1..=cut` for a pure state, by direct contraction over
/// the traced right block.
pub fn half_chain_entropy(psi: &[C64], cfg: &ChainConfig) -> Result<f64> {
    if psi.len() != cfg.dim() {
        return Err(Error::DimensionMismatch { expected: cfg.dim(), found: psi.len() });
    }
    let left = cfg.local_dim.pow(half_chain_cut(cfg) as u32);
    let right = cfg.dim() / left;
    let rho = Mat::<C64>::from_fn(left, left, |a, b| {
        let ra = &psi[a * right..(a + 1) * right];
        let rb = &psi[b * right..(b + 1) * right];
        ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum()
    });
    let probs = linalg::hermitian_eigenvalues(rho.as_ref())?;
    Ok(entropy_of_spectrum(&probs))
}

pub fn eigenstate_entropies(eig: &EigenSystem, cfg: &ChainConfig) -> Result<EntropyScatter> {
    cfg.validate()?;
    if eig.dim() != cfg.dim() {
        return Err(Error::DimensionMismatch { expected: cfg.dim(), found: eig.dim() });
    }
    let entropies = (0..eig.dim())
        .into_par_iter()
        .map(|k| {
            let col: Vec<C64> = eig.eigenvectors.col(k).iter().copied().collect();
            half_chain_entropy(&col, cfg)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EntropyScatter { energies: eig.eigenvalues.clone(), entropies, cut: half_chain_cut(cfg) })
}

/// `ln(d^⌊N/2⌋)`, the largest possible half-chain entropy.
pub fn max_half_chain_entropy(cfg: &ChainConfig) -> f64 {
    (cfg.n_sites / 2) as f64 * (cfg.local_dim as f64).ln()
}

/// Page estimate `(N/2) ln 2 − ½` for a spin-1/2 half-chain cut.
pub fn page_estimate_spin_half(n_sites: usize) -> f64 {
    n_sites as f64 / 2.0 * std::f64::consts::LN_2 - 0.5
}

/// Exact mean entropy of a random pure state on `C^m ⊗ C^n`, `m ≤ n`:
/// `Σ_{k=n+1}^{mn} 1/k − (m−1)/(2n)`.
pub fn page_entropy(m: usize, n: usize) -> f64 {
    let (m, n) = if m <= n { (m, n) } else { (n, m) };
    (n + 1..=m * n).map(|k| 1.0 / k as f64).sum::<f64>() - (m as f64 - 1.0) / (2.0 * n as f64)
}

/// Eigenstates with large weight on the scar subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScarDetection {
    pub threshold: f64,
    /// `Σ_s |⟨s|E_α⟩|²` for every eigenstate.
    pub overlaps: Vec<f64>,
    pub outlier_indices: Vec<usize>,
    pub outlier_energies: Vec<f64>,
    pub outlier_entropies: Option<Vec<f64>>,
    pub count: usize,
    /// `Σ_α overlap_α`, which equals the scar-space dimension.
    pub overlap_sum: f64,
    /// `ln(⌊N/2⌋ + 1)`.
    pub entropy_bound: f64,
}

pub fn detect_scars(
    eig: &EigenSystem,
    basis: &ScarBasis,
    entropy_data: Option<&EntropyScatter>,
    cfg: &ChainConfig,
) -> Result<ScarDetection> {
    if eig.dim() != basis.vacuum.dim() {
        return Err(Error::DimensionMismatch { expected: eig.dim(), found: basis.vacuum.dim() });
    }
    if let Some(e) = entropy_data {
        if e.entropies.len() != eig.dim() {
            return Err(Error::DimensionMismatch { expected: eig.dim(), found: e.entropies.len() });
        }
    }
    let s = basis.as_matrix();
    let mut proj = Mat::<C64>::zeros(s.ncols(), eig.dim());
    faer::linalg::matmul::matmul(
        proj.as_mut(),
        faer::Accum::Replace,
        s.adjoint(),
        eig.eigenvectors.as_ref(),
        C64::new(1.0, 0.0),
        faer::Par::Seq,
    );
    let overlaps: Vec<f64> = (0..eig.dim()).map(|a| proj.col(a).iter().map(|z| z.norm_sqr()).sum()).collect();
    let outlier_indices: Vec<usize> = (0..eig.dim()).filter(|&a| overlaps[a] > SCAR_OVERLAP_THRESHOLD).collect();
    Ok(ScarDetection {
        threshold: SCAR_OVERLAP_THRESHOLD,
        overlap_sum: overlaps.iter().sum(),
        outlier_energies: outlier_indices.iter().map(|&a| eig.eigenvalues[a]).collect(),
        outlier_entropies: entropy_data.map(|e| outlier_indices.iter().map(|&a| e.entropies[a]).collect()),
        count: outlier_indices.len(),
        outlier_indices,
        overlaps,
        entropy_bound: ((cfg.n_sites / 2 + 1) as f64).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::diagonalize;
    use crate::models::{self, RandomInteractionSpec};
    use crate::scars::scar_basis;

    #[test]
    fn equal_spacing_gives_unit_ratios() {
        let levels: Vec<f64> = (0..50).map(|k| 0.3 * k as f64 - 2.0).collect();
        let s = gap_ratio_statistic(&levels, 0.0).unwrap();
        assert!(s.gap_ratios.iter().all(|r| (r - 1.0).abs() < 1e-12));
        assert_eq!(s.gap_ratios.len(), 48);
    }

    #[test]
    fn degeneracies_are_collapsed() {
        let s = gap_ratio_statistic(&[0.0, 1.0, 1.0, 1.0 + 1e-13, 3.0], 1e-10).unwrap();
        assert_eq!(s.distinct_levels, 3);
        assert!((s.gap_ratios[0] - 0.5).abs() < 1e-12);
        assert!(matches!(gap_ratio_statistic(&[1.0, 1.0, 2.0], 1e-10), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn poisson_oracle_matches_analytic_value() {
        let s = gap_ratio_statistic(&poisson_spectrum(100_000, 1), 0.0).unwrap();
        assert!((s.mean_r - poisson_mean_gap_ratio()).abs() < 0.005, "{}", s.mean_r);
    }

    #[test]
    fn affine_invariance() {
        let levels = poisson_spectrum(500, 2);
        let a = gap_ratio_statistic(&levels, 0.0).unwrap();
        let scaled: Vec<f64> = levels.iter().map(|e| -3.7 * e + 11.0).collect();
        let b = gap_ratio_statistic(&scaled, 0.0).unwrap();
        assert!((a.mean_r - b.mean_r).abs() < 1e-12);
    }

    #[test]
    fn gue_oracle_small() {
        let est = gue_gap_ratio_oracle(200, 8, 5).unwrap();
        assert!((est.mean - 0.60).abs() < 0.02, "{est:?}");
        assert_eq!(est, gue_gap_ratio_oracle(200, 8, 5).unwrap());
    }

    #[test]
    fn unfolding_uniform_density() {
        let levels: Vec<f64> = (0..400).map(|k| 0.5 * k as f64).collect();
        let s = spacing_histogram(&levels, 1).unwrap();
        let h = s.spacing_histogram.unwrap();
        assert!((h.mean_spacing - 1.0).abs() < 0.01);
        assert!(spacing_histogram(&levels[..5], 10).is_err());
        assert!(spacing_histogram(&[1.0; 50], 3).is_err());
    }

    #[test]
    fn histogram_shapes() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let h = random_hermitian(600, &mut rng);
        let eig = linalg::hermitian_eigenvalues(h.as_ref()).unwrap();
        let gue = spacing_histogram(bulk_levels(&eig, BULK_FRACTION), DEFAULT_UNFOLDING_DEGREE).unwrap();
        let d = gue.spacing_histogram.unwrap().density;
        let peak = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(d[0] < 0.1);
        assert!((6..=12).contains(&peak), "peak bin {peak}");
        let pois = spacing_histogram(&poisson_spectrum(5000, 3), DEFAULT_UNFOLDING_DEGREE).unwrap();
        let d = pois.spacing_histogram.unwrap().density;
        let peak = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(peak, 0);
    }

    #[test]
    fn bulk_window() {
        let levels: Vec<f64> = (0..10).map(|k| k as f64).collect();
        assert_eq!(bulk_levels(&levels, 0.6), &levels[2..8]);
        assert_eq!(bulk_levels(&levels, 1.0), &levels[..]);
    }

    #[test]
    fn page_values() {
        // one qubit against a large bath tends to ln 2
        assert!((page_entropy(2, 4096) - std::f64::consts::LN_2).abs() < 1e-3);
        assert!((page_entropy(64, 64) - page_estimate_spin_half(12)).abs() < 0.01);
    }

    #[test]
    fn scar_detection_small_chain() {
        let cfg = ChainConfig::spin_half(8, 0.37, 1.0, 0).unwrap();
        let basis = scar_basis(&cfg).unwrap();
        let pst = diagonalize(&models::build_h_pst(&cfg).unwrap()).unwrap();
        let det = detect_scars(&pst, &basis, None, &cfg).unwrap();
        assert_eq!(det.count, 9);
        assert!(det.outlier_indices.iter().all(|&a| (det.overlaps[a] - 1.0).abs() < 1e-10));
        assert!((det.overlap_sum - 9.0).abs() < 1e-6);

        let spec = RandomInteractionSpec::spin_half(4);
        let h = models::build_h_scar(&cfg, &spec).unwrap();
        let eig = diagonalize(&h).unwrap();
        let ent = eigenstate_entropies(&eig, &cfg).unwrap();
        let det = detect_scars(&eig, &basis, Some(&ent), &cfg).unwrap();
        assert_eq!(det.count, 9);
        assert!((det.overlap_sum - 9.0).abs() < 1e-6);
        let ents = det.outlier_entropies.unwrap();
        assert!(ents.iter().all(|&s| s <= det.entropy_bound + 1e-10));
        assert!(ents.iter().any(|&s| s <= 1e-8));

        let thermal = diagonalize(&models::build_h_thermal(&cfg, &spec).unwrap()).unwrap();
        assert_eq!(detect_scars(&thermal, &basis, None, &cfg).unwrap().count, 0);
    }

    #[test]
    fn entropies_match_generic_partial_trace() {
        let cfg = ChainConfig::spin_one(3, 0.0, 1.0, 0).unwrap();
        let eig = diagonalize(&models::build_h_thermal_spin1(&cfg, &RandomInteractionSpec::spin_one(1)).unwrap()).unwrap();
        let ent = eigenstate_entropies(&eig, &cfg).unwrap();
        assert_eq!(ent.cut, 2);
        for k in [0, 5, 26] {
            let rho = crate::hilbert::partial_trace(&eig.eigenvector(k), &[1, 2], &cfg).unwrap();
            let s = crate::hilbert::von_neumann_entropy(&rho).unwrap();
            assert!((s - ent.entropies[k]).abs() < 1e-10);
            assert!(ent.entropies[k] <= max_half_chain_entropy(&cfg) + 1e-12);
        }
    }
}
