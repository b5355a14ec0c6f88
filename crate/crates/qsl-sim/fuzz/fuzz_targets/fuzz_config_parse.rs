//! The config-file parser is the one true untrusted-input surface: it must
//! reject garbage with a line-tagged error and never panic.

#![no_main]

use libfuzzer_sys::fuzz_target;
use qsl_sim::config::FileConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    match FileConfig::parse_str(text) {
        Ok(config) => {
            // Accepted numbers must be finite; the parser promises that.
            for v in [
                config.omega,
                config.gamma,
                config.gamma_min,
                config.gamma_max,
                config.lambda0,
                config.c_factor,
                config.step,
            ]
            .into_iter()
            .flatten()
            {
                assert!(v.is_finite());
            }
        }
        Err(qsl_sim::Error::ConfigParse { line, .. }) => {
            assert!(line >= 1 && line <= text.lines().count());
        }
        Err(other) => panic!("parser must only fail with ConfigParse, got {other:?}"),
    }
});
