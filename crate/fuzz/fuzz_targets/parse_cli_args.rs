#![no_main]
use libfuzzer_sys::fuzz_target;

use mipp_cli::{parse_cli_args, resolve};
use std::collections::BTreeMap;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let argv: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        if let Ok(cli) = parse_cli_args(&argv) {
            // Resolution is pure; it must never panic, only reject.
            if let Ok(cfg) = resolve(cli.command, &BTreeMap::new(), &cli.flags) {
                let _ = cfg.canonical_text();
            }
        }
    }
});
