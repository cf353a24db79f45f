use proptest::prelude::*;

use scarchain::diagnostics::gap_ratio_statistic;
use scarchain::dynamics::{
    correction_unitary, diagonalize, evolve, transfer_fidelity, Background, Payload, TransferJob,
};
use scarchain::hilbert::{embed_local, partial_trace, von_neumann_entropy, ChainConfig, DenseOperator, StateVector};
use scarchain::models::{build_h_scar, build_h_scar_spin1, build_h_thermal, build_h_thermal_spin1, RandomInteractionSpec};
use scarchain::{CMat, C64};

fn state(cfg: &ChainConfig, raw: &[(f64, f64)]) -> StateVector {
    let amps: Vec<C64> = (0..cfg.dim()).map(|i| {
        let (re, im) = raw[i % raw.len()];
        C64::new(re + 0.01 * i as f64, im)
    }).collect();
    StateVector::normalized(amps).unwrap()
}

fn amplitudes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..40)
}

fn spectrum(rho: &DenseOperator) -> Vec<f64> {
    let mut v: Vec<f64> = diagonalize(rho).unwrap().eigenvalues.into_iter().filter(|x| *x > 1e-12).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gap_ratios_are_affine_invariant(
        mut levels in prop::collection::vec(-50.0..50.0f64, 5..200),
        scale in prop_oneof![-10.0..-0.1f64, 0.1..10.0f64],
        shift in -100.0..100.0f64,
    ) {
        levels.sort_by(f64::total_cmp);
        levels.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        prop_assume!(levels.len() >= 3);
        let a = gap_ratio_statistic(&levels, 0.0).unwrap();
        let moved: Vec<f64> = levels.iter().map(|e| scale * e + shift).collect();
        let b = gap_ratio_statistic(&moved, 0.0).unwrap();
        prop_assert!((a.mean_r - b.mean_r).abs() < 1e-9);
        prop_assert!(a.gap_ratios.iter().all(|r| (0.0..=1.0).contains(r)));
    }

    #[test]
    fn builders_are_hermitian(seed in any::<u64>(), n in 3usize..=6, omega in -2.0..2.0f64) {
        let cfg = ChainConfig::spin_half(n, omega, 1.0, seed).unwrap();
        let spec = RandomInteractionSpec::spin_half(seed);
        prop_assert!(build_h_thermal(&cfg, &spec).unwrap().hermiticity_defect() <= 1e-14);
        prop_assert!(build_h_scar(&cfg, &spec).unwrap().hermiticity_defect() <= 1e-14);
        let cfg1 = ChainConfig::spin_one(n.min(4), omega, 1.0, seed).unwrap();
        let spec1 = RandomInteractionSpec::spin_one(seed);
        prop_assert!(build_h_thermal_spin1(&cfg1, &spec1).unwrap().hermiticity_defect() <= 1e-14);
        prop_assert!(build_h_scar_spin1(&cfg1, &spec1).unwrap().hermiticity_defect() <= 1e-14);
    }

    #[test]
    fn evolution_conserves_norm_and_energy(seed in any::<u64>(), t in 0.0..50.0f64, raw in amplitudes()) {
        let cfg = ChainConfig::spin_half(5, 0.3, 1.0, seed).unwrap();
        let h = build_h_thermal(&cfg, &RandomInteractionSpec::spin_half(seed)).unwrap();
        let eig = diagonalize(&h).unwrap();
        let psi0 = state(&cfg, &raw);
        let psi = evolve(&eig, &psi0, t).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() <= 1e-10);
        let e0 = h.expectation(&psi0).unwrap().re;
        prop_assert!((h.expectation(&psi).unwrap().re - e0).abs() <= 1e-10 * h.max_abs().max(1.0));
    }

    #[test]
    fn fidelity_is_bounded_and_phase_blind(
        seed in any::<u64>(),
        (ar, ai, br, bi) in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        phase in 0.0..std::f64::consts::TAU,
        ones in any::<bool>(),
    ) {
        let norm = (ar * ar + ai * ai + br * br + bi * bi).sqrt();
        prop_assume!(norm > 1e-3);
        let payload = Payload::new(C64::new(ar, ai) / norm, C64::new(br, bi) / norm).unwrap();
        let cfg = ChainConfig::spin_half(5, 0.4, 1.0, seed).unwrap();
        let eig = diagonalize(&build_h_scar(&cfg, &RandomInteractionSpec::spin_half(seed)).unwrap()).unwrap();
        let background = if ones { Background::Ones } else { Background::Zeros };
        let job = TransferJob::new(&cfg).with_payload(payload).with_background(background)
            .with_times(scarchain::dynamics::uniform_grid(0.0, 6.0, 13));
        let f = transfer_fidelity(&eig, &job, &cfg).unwrap();
        prop_assert!(f.fidelity.iter().all(|x| (-1e-12..=1.0 + 1e-12).contains(x)));
        let rot = C64::from_polar(1.0, phase);
        let shifted = Payload::new(payload.alpha * rot, payload.beta * rot).unwrap();
        let g = transfer_fidelity(&eig, &job.clone().with_payload(shifted), &cfg).unwrap();
        for (x, y) in f.fidelity.iter().zip(&g.fidelity) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn complementary_reductions_share_spectra(raw in amplitudes(), mask in 1u32..127) {
        let cfg = ChainConfig::spin_half(7, 0.0, 1.0, 0).unwrap();
        let keep: Vec<usize> = (1..=7).filter(|s| mask & (1 << (s - 1)) != 0).collect();
        let rest: Vec<usize> = (1..=7).filter(|s| !keep.contains(s)).collect();
        let psi = state(&cfg, &raw);
        let a = partial_trace(&psi, &keep, &cfg).unwrap();
        let b = partial_trace(&psi, &rest, &cfg).unwrap();
        prop_assert!((a.trace().re - 1.0).abs() <= 1e-12 && a.hermiticity_defect() <= 1e-14);
        let (sa, sb) = (spectrum(&a), spectrum(&b));
        prop_assert_eq!(sa.len(), sb.len());
        for (x, y) in sa.iter().zip(&sb) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!((von_neumann_entropy(&a).unwrap() - von_neumann_entropy(&b).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn embedded_identity_is_identity(n in 2usize..=5, start in 1usize..=5, width in 1usize..=3) {
        prop_assume!(start + width - 1 <= n);
        let cfg = ChainConfig::spin_half(n, 0.0, 1.0, 0).unwrap();
        let local = CMat::from_fn(1 << width, 1 << width, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let op = embed_local(local.as_ref(), start, &cfg).unwrap();
        prop_assert_eq!(op.distance(&DenseOperator::identity(cfg.dim())).unwrap(), 0.0);
    }

    #[test]
    fn correction_is_unitary(n in 2usize..=12, omega in -3.0..3.0f64, t in 0.0..20.0f64, conj in any::<bool>()) {
        let cfg = ChainConfig::spin_half(n, omega, 1.0, 0).unwrap();
        let x = correction_unitary(&cfg, t, conj);
        prop_assert!((x[(0, 0)].norm() - 1.0).abs() <= 1e-14 && (x[(1, 1)].norm() - 1.0).abs() <= 1e-14);
        prop_assert!(x[(0, 1)].norm() == 0.0 && x[(1, 0)].norm() == 0.0);
    }
}
