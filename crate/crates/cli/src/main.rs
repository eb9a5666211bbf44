use std::process::ExitCode;

use clap::Parser;
use matchpoa_cli::{error_code, run_experiment, CliError, ExperimentConfig};

fn main() -> ExitCode {
    let config = ExperimentConfig::parse();
    match run_experiment(&config) {
        Ok(art) => {
            let written = match &config.common.output {
                Some(path) => std::fs::write(path, &art.output).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                }),
                None => {
                    print!("{}", art.output);
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::from(art.status.code()),
                Err(e) => {
                    eprintln!("matchpoa: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("matchpoa: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
