use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qedbloch_cli::output::{provenance, render_csv, write};
use qedbloch_cli::{run, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "qedbloch", version, about = "Semiclassical spin-field dynamics and its Fock-space check")]
struct Args {
    /// Configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and JSON files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides `[run] seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Leading-order Bloch vectors.
    Bloch,
    /// First-order correction to the spin expectation at X = 0.
    Correction,
    /// Leading-order photon-number rate for a classical field.
    PhotonRate,
    /// Transition-amplitude bound, optionally against the oracle.
    Bound,
    /// Exact truncated-Fock evolution of one observable.
    Oracle,
    /// Oracle run over several values of hbar with a polynomial fit.
    Sweep,
    /// Acceptance criteria.
    Selftest,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Bloch => Command::Bloch,
            Cmd::Correction => Command::Correction,
            Cmd::PhotonRate => Command::PhotonRate,
            Cmd::Bound => Command::Bound,
            Cmd::Oracle => Command::Oracle,
            Cmd::Sweep => Command::Sweep,
            Cmd::Selftest => Command::Selftest,
        }
    }
}

fn execute(args: Args) -> Result<(), CliError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse_with_env(&text, std::env::vars())?;
    if let Some(s) = args.seed {
        cfg.set_seed(s);
    }
    if args.print_config {
        print!("{}", cfg.serialize());
        return Ok(());
    }
    let cmd: Command = args
        .command
        .ok_or_else(|| CliError::Config("a subcommand is required; see --help".into()))?
        .into();
    let outcome = run(cmd, &cfg)?;
    for line in &outcome.report {
        println!("{line}");
    }
    let header = provenance(&cfg, cmd.name(), &outcome.notes);
    write(&args.out, &format!("{}.csv", cmd.name()), &render_csv(&outcome.table, &header))?;
    let json = serde_json::to_string_pretty(&outcome.summary).map_err(|e| CliError::Failure(e.to_string()))?;
    write(&args.out, &format!("{}.json", cmd.name()), &(json + "\n"))?;
    match outcome.violation {
        Some(v) => Err(CliError::Failure(v)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qedbloch: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
