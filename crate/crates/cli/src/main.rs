use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qbutterfly::experiments::{
    self, parse_float_range, parse_int_range, AccuracyConfig, EavesdropConfig, RunManifest,
};
use qbutterfly::{build_butterfly, Execution, PrivateKey, Schedule, SignConvention};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qbutterfly", version, about = "Butterfly-network entanglement distribution and coded teleportation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a JSON run manifest to this path.
    #[arg(long, value_name = "PATH")]
    json_manifest: Option<PathBuf>,
    /// Print the butterfly topology for each simulated size to stderr.
    #[arg(long)]
    dump_topology: bool,
    /// Run trials on a single thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Formula,
    Example,
}

impl From<ConventionArg> for SignConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Formula => SignConvention::Formula,
            ConventionArg::Example => SignConvention::Example,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Batched,
    Eager,
}

#[derive(Subcommand)]
enum Command {
    /// Success rate of full rounds against per-gate Pauli noise.
    Accuracy {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// start:end:step or a single probability.
        #[arg(long, default_value = "0.01:0.10:0.01")]
        noise: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "batched")]
        schedule: ScheduleArg,
        /// Encrypt every payload with rotations read from this key file.
        #[arg(long)]
        key_file: Option<PathBuf>,
        /// Magnitude bits per rotation when a key file is given.
        #[arg(long, default_value_t = 2)]
        chunk_width: usize,
        #[arg(long, value_enum, default_value = "formula")]
        sign_convention: ConventionArg,
        #[command(flatten)]
        common: Common,
    },
    /// Eavesdropper success rate against the number of key bits per rotation.
    Eavesdrop {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// start:end over total bits read per rotation, at least 3.
        #[arg(long, default_value = "3:8")]
        bits: String,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Reuse the leading bits of this key in every trial.
        #[arg(long)]
        key_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "formula")]
        sign_convention: ConventionArg,
        #[command(flatten)]
        common: Common,
    },
    /// Link counts and peak qubit usage alongside the reference formulas.
    Resources {
        #[arg(long, default_value = "2:10")]
        n: String,
        #[command(flatten)]
        common: Common,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn dump_topologies(common: &Common, ns: &[usize]) -> Result<()> {
    if common.dump_topology {
        for &n in ns {
            eprint!("{}", build_butterfly(n)?.describe());
        }
    }
    Ok(())
}

fn execution(common: &Common) -> Execution {
    if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn manifest<C: Serialize>(common: &Common, name: &str, cfg: &C, rows: usize, started: Instant) -> Result<()> {
    if let Some(path) = &common.json_manifest {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        RunManifest::new(name, cfg, rows, started)?.write(BufWriter::new(file))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::Accuracy {
            n,
            noise,
            trials,
            seed,
            schedule,
            key_file,
            chunk_width,
            sign_convention,
            common,
        } => {
            let qsre_key = key_file
                .map(|p| PrivateKey::from_file(&p, chunk_width))
                .transpose()
                .context("cannot load key file")?;
            let cfg = AccuracyConfig {
                n,
                noise_levels: parse_float_range(&noise)?,
                trials,
                seed,
                schedule: match schedule {
                    ScheduleArg::Batched => Schedule::Batched,
                    ScheduleArg::Eager => Schedule::Eager,
                },
                qsre_key,
                convention: sign_convention.into(),
                execution: execution(&common),
            };
            cfg.validate()?;
            dump_topologies(&common, &[n])?;
            let rows = experiments::run_accuracy_sweep(&cfg)?;
            experiments::write_sweep_csv(&rows, output(common.out.as_deref())?)?;
            manifest(&common, "accuracy", &cfg, rows.len(), started)
        }
        Command::Eavesdrop {
            n,
            bits,
            trials,
            seed,
            noise,
            key_file,
            sign_convention,
            common,
        } => {
            let key = key_file
                .map(|p| PrivateKey::from_file(&p, 1))
                .transpose()
                .context("cannot load key file")?;
            let cfg = EavesdropConfig {
                n,
                bits: parse_int_range(&bits)?,
                trials,
                seed,
                noise,
                convention: sign_convention.into(),
                key,
                execution: execution(&common),
                ..EavesdropConfig::default()
            };
            cfg.validate()?;
            dump_topologies(&common, &[n])?;
            let rows = experiments::run_eavesdrop_sweep(&cfg)?;
            experiments::write_sweep_csv(&rows, output(common.out.as_deref())?)?;
            manifest(&common, "eavesdrop", &cfg, rows.len(), started)
        }
        Command::Resources { n, common } => {
            let ns = parse_int_range(&n)?;
            if let Some(bad) = ns.iter().find(|&&n| n < 2) {
                bail!("network size must be at least 2, got {bad}");
            }
            dump_topologies(&common, &ns)?;
            let rows = experiments::run_resource_report(&ns)?;
            experiments::write_resource_csv(&rows, output(common.out.as_deref())?)?;
            manifest(&common, "resources", &ns, rows.len(), started)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
