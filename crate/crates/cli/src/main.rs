mod config;
mod experiments;
mod report;

use clap::{Parser, Subcommand};
use config::Config;
use report::Report;
use sdl_core::error::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

/// Singular Dirichlet laboratory: electrical-network experiments on
/// weighted forms with a degenerate origin.
#[derive(Parser)]
#[command(name = "sdl", version, about)]
struct Cli {
    /// Flat key=value config file ('#' starts a comment).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a single config key, e.g. --set mesh.rings=48.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the admissibility integrals of the radial profile.
    CheckAssumptions,
    /// Origin capacity across a shrinking-hole ladder, with a flat control.
    Capacity,
    /// Capacity of thin wedges in the conducting cones versus epsilon.
    Cones,
    /// One-point resolvent extension identity on the glued network.
    OnePoint,
    /// Two-point resolvent extension identity on the split network.
    TwoPoint,
    /// Monte Carlo hitting probabilities of the two split origins.
    HittingMc,
    /// Harmonic measure of the inner boundary by angle, exact and sampled.
    ApproachAngle,
    /// Radial comparison diffusion: scale-function hit probabilities.
    Bessel,
    /// Cone traces of the plateau function and the trace decomposition.
    Trace,
    /// Distance from the plateau function to the glued form domain.
    Dist,
}

impl Command {
    fn run(&self, cfg: &Config) -> Result<Report> {
        match self {
            Command::CheckAssumptions => experiments::check_assumptions_exp(cfg),
            Command::Capacity => experiments::capacity_exp(cfg),
            Command::Cones => experiments::cones_exp(cfg),
            Command::OnePoint => experiments::one_point_exp(cfg),
            Command::TwoPoint => experiments::two_point_exp(cfg),
            Command::HittingMc => experiments::hitting_mc_exp(cfg),
            Command::ApproachAngle => experiments::approach_angle_exp(cfg),
            Command::Bessel => experiments::bessel_exp(cfg),
            Command::Trace => experiments::trace_exp(cfg),
            Command::Dist => experiments::dist_exp(cfg),
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("SDL_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                // A second init (tests call the binary repeatedly) is fine.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = Config::load(cli.config.as_deref(), &cli.set)?;
    let rep = cli.command.run(&cfg)?;

    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%3fZ").to_string();
    let dir = PathBuf::from(cfg.str("output.dir"));
    let (json_path, csv_path) = rep
        .write(&dir, &stamp)
        .map_err(|e| Error::config(format!("cannot write outputs under {}: {e}", dir.display())))?;

    println!("experiment: {}", rep.experiment);
    for (k, v) in &rep.residuals {
        println!("  {k} = {v}");
    }
    println!("passed: {}", rep.passed);
    println!("wrote {}", json_path.display());
    println!("wrote {}", csv_path.display());
    Ok(rep.passed)
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
