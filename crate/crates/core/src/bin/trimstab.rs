use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trimstab::experiments::{self, ExperimentConfig, ExperimentKind, Table};
use trimstab::Error;

#[derive(Parser)]
#[command(
    name = "trimstab",
    version,
    about = "Stabilized Nitsche solver for trimmed spline domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; overrides `out` in the config. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress progress messages on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and report its errors.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Write the assembled matrix in coordinate format.
        #[arg(long)]
        export_matrix: Option<PathBuf>,
    },
    /// Generalized eigenvalue sweep over eps.
    Stability(Common),
    /// Error and rate table over mesh levels.
    Convergence(Common),
    /// Condition numbers over h, eps or rotation angle.
    Conditioning(Common),
    /// Run the built-in invariant checks.
    Verify {
        #[arg(long)]
        quiet: bool,
    },
}

fn exit_for(e: &Error) -> ExitCode {
    if e.is_config() {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

fn load(common: &Common, expected: ExperimentKind) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if expected != ExperimentKind::Solve && cfg.experiment != expected {
        return Err(Error::Config(format!(
            "{} declares experiment {:?}, expected {expected:?}",
            common.config.display(),
            cfg.experiment
        )));
    }
    cfg.experiment = expected;
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    Ok(cfg)
}

fn emit(table: &Table, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => table.write(p),
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    faer::set_global_parallelism(faer::Par::Seq);
    let (common, kind) = match &cli.command {
        Command::Verify { quiet } => {
            let checks = experiments::run_verify()?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                if !quiet || !c.passed {
                    println!(
                        "{} {}: {}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                }
            }
            return if failed == 0 {
                Ok(())
            } else {
                Err(Error::Numerical(format!(
                    "{failed} invariant check(s) failed"
                )))
            };
        }
        Command::Solve { common, .. } => (common, ExperimentKind::Solve),
        Command::Stability(c) => (c, ExperimentKind::Stability),
        Command::Convergence(c) => (c, ExperimentKind::Convergence),
        Command::Conditioning(c) => (c, ExperimentKind::Conditioning),
    };
    let cfg = load(common, kind)?;
    if !common.quiet {
        eprintln!("running {kind:?} from {}", common.config.display());
    }
    let table = if let Command::Solve {
        export_matrix: Some(path),
        ..
    } = &cli.command
    {
        let out = experiments::run_solve(&cfg)?;
        let file = std::fs::File::create(path)?;
        out.system
            .matrix
            .write_coordinate(std::io::BufWriter::new(file))?;
        experiments::solve_table(&out)
    } else {
        experiments::run(&cfg)?
    };
    emit(&table, cfg.out.as_deref())?;
    if !common.quiet {
        eprintln!("{} rows", table.rows.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
