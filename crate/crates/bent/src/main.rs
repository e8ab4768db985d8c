use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bent::{bisect_omega, run_certify, run_sweep, CliError, Config, Grid, EXIT_CODES};
use clap::{Parser, Subcommand, ValueEnum};

const AFTER_HELP: &str = "Environment:\n  BENT_THREADS  maximum number of worker threads\n\n";

#[derive(Parser)]
#[command(
    name = "bent",
    version,
    about = "Certify PPT bound entanglement of beam-split Fock mixtures"
)]
#[command(after_help = format!("{AFTER_HELP}{EXIT_CODES}"))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on one configuration and write a JSON report.
    Certify {
        #[arg(long)]
        config: PathBuf,
        /// Report path; defaults to `outputs.report_path`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write `rho.bent` and `rho_pt.bent` here.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
    },
    /// Certify every point of a parameter grid and print a CSV summary.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Instead of the grid, locate the PPT boundary in this parameter.
        #[arg(long, value_enum)]
        bisect: Option<BisectParam>,
        /// Directory for `summary.csv` and one report per grid point; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the version.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum BisectParam {
    Omega,
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Version => println!("bent {}", env!("CARGO_PKG_VERSION")),
        Command::Certify { config, out, dump_dir } => {
            let config = Config::load(&config)?;
            let report = run_certify(&config, dump_dir.as_deref())?;
            let json = report.to_json();
            match out.or_else(|| config.outputs.report_path.clone()) {
                Some(path) => write_text(&path, &json)?,
                None => println!("{json}"),
            }
            eprintln!("verdict: {}", report.verdict);
        }
        Command::Sweep {
            config,
            grid,
            bisect,
            out,
        } => {
            let config = Config::load(&config)?;
            let grid_spec = Grid::load(&grid)?;
            if let Some(BisectParam::Omega) = bisect {
                let result = bisect_omega(&config)?;
                let json = serde_json::to_string_pretty(&result).expect("bisection serializes");
                match out {
                    Some(dir) => write_text(&dir.join("bisection.json"), &json)?,
                    None => println!("{json}"),
                }
                return Ok(());
            }
            let sweep = run_sweep(&config, &grid_spec)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
                    let csv_path = dir.join("summary.csv");
                    let f = std::fs::File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
                    sweep.write_csv(f)?;
                    for (i, r) in sweep.reports.iter().enumerate() {
                        write_text(&dir.join(format!("report_{i:04}.json")), &r.to_json())?;
                    }
                }
                None => sweep.write_csv(std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
