#![no_main]

use libfuzzer_sys::fuzz_target;
use scarchain::diagnostics::{gap_ratio_statistic, spacing_histogram};

// Input: one tolerance byte, then little-endian f64 levels.
fuzz_target!(|data: &[u8]| {
    let Some((&tol, rest)) = data.split_first() else { return };
    let levels: Vec<f64> = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let tolerance = f64::from(tol) * 1e-3;
    if let Ok(stats) = gap_ratio_statistic(&levels, tolerance) {
        assert!(stats.gap_ratios.iter().all(|r| r.is_nan() || (0.0..=1.0).contains(r)));
    }
    if levels.len() <= 4096 {
        let _ = spacing_histogram(&levels, 4);
    }
});
