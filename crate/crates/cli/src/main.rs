//! `nlsinflate <experiment> [--config <file>] [--set key=value ...] --out <dir>`
//!
//! Exit status: 0 when every attached assertion passes, 2 when one fails,
//! 3 for configuration or usage errors, 4 for numerical divergence or a run
//! past the limit solution's validity window, 1 for I/O failures.

mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nlsinflate::ErrorKind;

use config::{parse_override, read_file, resolve, Experiment};
use report::Run;

const EXIT_ASSERTION: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_IO: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "nlsinflate", version, about = "Semiclassical NLS and norm-inflation experiments")]
struct Cli {
    experiment: Experiment,
    /// TOML parameter file, or a `manifest.json` from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one parameter (TOML value syntax); may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

fn exit_for(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config | ErrorKind::Structural | ErrorKind::Domain => EXIT_CONFIG,
        ErrorKind::Divergence | ErrorKind::Horizon => EXIT_NUMERICAL,
        ErrorKind::Io => EXIT_IO,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = (|| {
        let file = cli.config.as_deref().map(read_file).transpose()?;
        let overrides = cli.overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
        resolve(cli.experiment, file, &overrides)
    })();
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let mut run = Run::new(&cli.out);
    let result = experiments::dispatch(&cfg, &mut run);
    if let Err(e) = run.finish(&cfg, &result) {
        eprintln!("error: could not write outputs: {e}");
        return ExitCode::from(EXIT_IO);
    }
    match result {
        Ok(outcome) => {
            let mut failed = false;
            for a in &outcome.assertions {
                eprintln!("{} {} = {:.6e} (target {})", if a.pass { "PASS" } else { "FAIL" }, a.name, a.measured, a.target);
                failed |= !a.pass;
            }
            if failed {
                ExitCode::from(EXIT_ASSERTION)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(e.kind()))
        }
    }
}
