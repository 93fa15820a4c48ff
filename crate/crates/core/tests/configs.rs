use std::path::Path;

use sparc_core::channel::snr_to_sigma2;
use sparc_core::sim::{ExperimentConfig, Scenario};

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let scenario = Scenario::new(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            for &snr in &cfg.channel.snr_b_db {
                let sigma2 = snr_to_sigma2(snr, cfg.code.power, scenario.info_rate).unwrap();
                scenario
                    .allocation(&cfg, sigma2)
                    .unwrap_or_else(|e| panic!("{} at {snr} dB: {e}", path.display()));
            }
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
