#![no_main]

use libfuzzer_sys::fuzz_target;
use prime_oracle::pipeline::ConfigFile;
use prime_oracle::tmcmc::TmcmcConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ConfigFile::parse(text) {
            let _ = cfg.tmcmc(TmcmcConfig::default());
        }
    }
});
