use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kakeya_lab::config::{ExperimentConfig, RawConfig};
use kakeya_lab::run::{self, LabError};

#[derive(Parser)]
#[command(name = "kakeya-lab", version, about = "Experiments on directional maximal operators along vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides `kappa`.
    #[arg(long, global = true)]
    kappa: Option<u32>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Weak-type quantity against 1/delta, with fitted slopes.
    Sweep,
    /// Weak-type quantity for lacunary Hölder fields truncated at finer scales.
    ProbeHolder,
    /// Covering checks on random admissible families.
    Campaign,
    /// Covering checks on one family file (`verify.family`).
    Verify,
    /// One operator on one input; dumps the maximal function and witnesses.
    Eval,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, LabError> {
    let mut raw = match &cli.config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    if let Some(s) = cli.seed {
        raw.set("seed", s)?;
    }
    if let Some(k) = cli.kappa {
        raw.set("kappa", k)?;
    }
    Ok(ExperimentConfig::from_raw(&raw)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = load(&cli).and_then(|cfg| {
        run::prepare_out(&cli.out)?;
        match cli.command {
            Command::Sweep => run::sweep(&cfg, &cli.out),
            Command::ProbeHolder => run::probe_holder(&cfg, &cli.out),
            Command::Campaign => run::campaign(&cfg, &cli.out),
            Command::Verify => run::verify(&cfg, &cli.out),
            Command::Eval => run::eval(&cfg, &cli.out),
        }
    });
    match result {
        Ok(outcome) => {
            for l in &outcome.lines {
                println!("{l}");
            }
            if outcome.violation {
                eprintln!("invariant violation");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
