use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use corrmimo::csv::{write_rows, SweepRow};
use corrmimo::experiments::{self, Figure, ReproduceOptions};
use corrmimo::parallel::RayonExecutor;
use corrmimo::selftest::{self, Fault};
use corrmimo::{config, CliError};

#[derive(Parser)]
#[command(name = "corrmimo", version, about = "Structured precoding experiments for spatially correlated MIMO channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Fail with exit code 3 on optimizer non-convergence.
        #[arg(long)]
        strict: bool,
    },
    /// Emit the sweep CSV behind one of the figures.
    Reproduce {
        /// fig1, fig2, fig3, fig4a or fig4b
        figure: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Number of channels in the fig2 matching sweep.
        #[arg(long)]
        family: Option<usize>,
    },
    /// Run the fast invariant suite.
    Selftest {
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_rows(BufWriter::new(File::create(path)?), rows)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { config, strict } => {
            let mut cfg = config::load(&config)?;
            cfg.strict |= strict;
            let (rows, notes) = experiments::run_config(&cfg, &RayonExecutor::from_env())?;
            for n in notes {
                eprintln!("warning: {n}");
            }
            write_csv(&cfg.output, &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), cfg.output.display());
        }
        Command::Reproduce { figure, trials, seed, out, family } => {
            let fig: Figure = figure.parse()?;
            let opts = ReproduceOptions { trials, seed, family };
            let rows = experiments::reproduce(fig, &opts, &RayonExecutor::from_env())?;
            let path = out.join(format!("{fig}.csv"));
            write_csv(&path, &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::Selftest { inject_fault } => {
            let fault = inject_fault.map(|f| f.parse::<Fault>()).transpose()?;
            let results = selftest::run(fault);
            print!("{}", selftest::report(&results));
            if !results.iter().all(|r| r.ok()) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
