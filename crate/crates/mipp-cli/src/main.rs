use std::collections::BTreeMap;
use std::process::ExitCode;

use mipp_cli::config::{parse_cli_args, parse_config_text, resolve, ConfigError};
use mipp_cli::run::run;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match real_main(&argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn real_main(argv: &[String]) -> Result<ExitCode, mipp_cli::RunError> {
    let cli = parse_cli_args(argv)?;
    let file_map = match &cli.config_path {
        None => BTreeMap::new(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("config file `{path}`: {e}")))?;
            parse_config_text(&text)?
        }
    };
    let cfg = resolve(cli.command, &file_map, &cli.flags)?;
    if cli.print_config {
        print!("{}", cfg.canonical_text());
        return Ok(ExitCode::SUCCESS);
    }
    let written = run(&cfg)?;
    for path in written {
        eprintln!("wrote {path}");
    }
    Ok(ExitCode::SUCCESS)
}
