use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use membrane_cli::manifest::MANIFEST_FILE;
use membrane_cli::{run_experiment, run_solve, Config, ExperimentManifest};
use membrane_core::analysis::weiss_profile;
use membrane_core::domain::io::read_stack;

/// Numerical laboratory for ordered adhesive membranes.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory of the run.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Multi-start seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cells per unit length.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize with the trace of a cone, as set in the `[solve]` section.
    Solve,
    /// Weiss profile of a stored field; prints `r,phi` rows.
    Weiss {
        /// Field file written by `solve`.
        #[arg(long)]
        input: PathBuf,
        /// Center `x,y` (or `x` in 1D).
        #[arg(long, value_delimiter = ',', default_value = "0,0")]
        center: Vec<f64>,
        /// Increasing radii.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        /// Gap above which membranes count as separated.
        #[arg(long, default_value_t = membrane_cli::experiments::ANALYSIS_TAU)]
        tau: f64,
    },
    /// Eigenvalue table of the transmission problem.
    Spectrum,
    /// Adhesion energy of sampled cones on the unit disk.
    Cones,
    /// Run one named experiment.
    Experiment {
        /// One of: fig3-1d, rectangle-junction, vs-instability, weiss-monotonicity, spectrum-table.
        id: String,
    },
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MEMBRANE_THREADS") {
        let n: usize = v.parse().context("MEMBRANE_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn report(m: &ExperimentManifest, cli: &Cli) -> ExitCode {
    for (k, v) in &m.metrics {
        println!("{k} = {v}");
    }
    println!("wrote {}", cli.out.join(MANIFEST_FILE).display());
    for f in &m.flags {
        eprintln!("flagged: {f}");
    }
    if m.flagged {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.resolution.is_some() {
        cfg.resolution = cli.resolution;
    }
    match &cli.command {
        Command::Solve => Ok(report(&run_solve(&cfg, &cli.out)?, cli)),
        Command::Weiss {
            input,
            center,
            radii,
            tau,
        } => {
            let file = std::fs::File::open(input)
                .with_context(|| format!("opening {}", input.display()))?;
            let stack = read_stack(std::io::BufReader::new(file))?;
            let c = [center[0], center.get(1).copied().unwrap_or(0.0)];
            let w = weiss_profile(&stack, c, radii, *tau)?;
            print!("{}", w.to_csv());
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum => {
            let m = run_experiment("spectrum-table", &cfg, &cli.out)?;
            print!("{}", std::fs::read_to_string(cli.out.join("spectrum.csv"))?);
            Ok(if m.flagged { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Cones => {
            let m = run_experiment("cones", &cfg, &cli.out)?;
            print!("{}", std::fs::read_to_string(cli.out.join("cones.csv"))?);
            Ok(if m.flagged { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Experiment { id } => Ok(report(&run_experiment(id, &cfg, &cli.out)?, cli)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
