#![no_main]

use libfuzzer_sys::fuzz_target;
use scarchain_cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ExperimentConfig::from_json(text) else { return };
    if let Ok(resolved) = cfg.resolve() {
        // accepted configs stay within the runner's size limit
        assert!(resolved.chain.dim() <= scarchain_cli::config::MAX_DIM);
        let _ = resolved.canonical_json();
    }
    let echoed = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ExperimentConfig::from_json(&echoed).unwrap(), cfg);
});
