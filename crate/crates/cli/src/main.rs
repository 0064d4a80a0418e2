mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use deltashell::Error;

use crate::commands::Output;
use crate::config::{Body, Command, RunConfig};

/// Scattering by δ-shell media: forward solves, far fields, the acoustic
/// map, the partial-wave reference and verification experiments.
#[derive(Parser, Debug)]
#[command(name = "deltashell", version)]
struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only errors on stderr
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Single forward solve: field samples, boundary density, metadata
    Forward,
    /// Far-field pattern for a list of incident fields
    Farfield,
    /// Acoustic medium through the Liouville map, one table per frequency
    Acoustic,
    /// Partial-wave reference for a radial δ-sphere
    Oracle,
    /// Run harness experiments; exit 3 if any fails
    Verify,
    /// Relative distances between two far-field CSV files on the same grid
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Fail (exit 3) if the relative L² distance exceeds this
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

const EXIT_COMPUTE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::Json(_)
        | Error::Io(_)
        | Error::Parse { .. }
        | Error::NonTriangularFace { .. }
        | Error::Mesh(_)
        | Error::Validation(_)
        | Error::Medium(_) => EXIT_CONFIG,
        _ => EXIT_COMPUTE,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config {
                key: "--threads".into(),
                msg: "must be positive".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(e.to_string()))?;
    }
    if let Cmd::Compare { a, b, tolerance } = &cli.cmd {
        let mut out = cli.out.clone().map(|d| Output::new(d, "compare", None, cli.quiet));
        let (report, pass) = commands::compare(a, b, *tolerance, out.as_mut())?;
        if !cli.quiet {
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        return Ok(pass);
    }
    let wanted = match cli.cmd {
        Cmd::Forward => Command::Forward,
        Cmd::Farfield => Command::Farfield,
        Cmd::Acoustic => Command::Acoustic,
        Cmd::Oracle => Command::Oracle,
        Cmd::Verify => Command::Verify,
        Cmd::Compare { .. } => unreachable!(),
    };
    let Some(path) = cli.config.as_ref() else {
        return Err(Error::Config {
            key: "--config".into(),
            msg: "required for this command".into(),
        });
    };
    let cfg = RunConfig::load(path)?;
    if cfg.command != wanted {
        return Err(Error::Config {
            key: "command".into(),
            msg: format!("config is for `{:?}`, invoked as `{wanted:?}`", cfg.command).to_lowercase(),
        });
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(|d| cfg.base.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let name = serde_json::to_value(cfg.command)?.as_str().unwrap_or_default().to_string();
    let mut out = Output::new(dir, &name, Some(&cfg.raw), cli.quiet);
    match &cfg.body {
        Body::Forward(c) => commands::forward(c, &cfg.base, &mut out),
        Body::Farfield(c) => commands::farfield(c, &cfg.base, &mut out),
        Body::Acoustic(c) => commands::acoustic(c, &cfg.base, &mut out),
        Body::Oracle(c) => commands::oracle(c, &mut out),
        Body::Verify(c) => commands::verify(c, &cfg.base, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
