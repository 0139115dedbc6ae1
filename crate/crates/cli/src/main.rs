mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use gaphilbert::{Lab, RunConfig};

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "gaphilbert", version, about = "Finite Hilbert transform with gaps: spectra, asymptotics, continuation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; omitted keys take the reference defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Series truncation (capped at the spectral noise floor).
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum Command {
    /// Period matrix, Abel constants and g/d data as JSON.
    Surface,
    /// |Θ(W(κ) - W_0)| scan and its zeros.
    Theta,
    /// Nyström singular values against the theta prediction.
    Spectrum,
    /// Theta-function model of the singular functions.
    Asymptotics,
    /// Series continuation and phantom recovery in the gaps.
    Continue {
        #[arg(long)]
        phantom_degree: Option<usize>,
        #[arg(long)]
        omega: Option<f64>,
        /// Points per gap.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Sobolev norm ratios r_n.
    Instability,
    /// Continuation bounds on the weighted space.
    Stability,
    /// Every table plus the acceptance summary.
    All,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            toml::from_str::<RunConfig>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.nmax {
        cfg.n_max = Some(n);
    }
    if let Command::Continue {
        phantom_degree,
        omega,
        points,
    } = cli.command
    {
        if let Some(d) = phantom_degree {
            cfg.phantom_degree = d;
        }
        if let Some(o) = omega {
            cfg.omega = o;
        }
        if let Some(p) = points {
            cfg.points_per_gap = p;
        }
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let t0 = Instant::now();
    let lab = Lab::build(&cfg)?;
    if cli.verbose {
        eprintln!(
            "built surface, theta scan and spectrum in {:.2}s ({} resolved indices, {} scan roots)",
            t0.elapsed().as_secs_f64(),
            lab.spectrum.resolved_count(),
            lab.scan.roots.len()
        );
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| io_err(&cli.out, e))?;
    let out = cli.out.as_path();
    let step = |name: &str, f: &dyn Fn() -> Result<(), CliError>| -> Result<(), CliError> {
        let t = Instant::now();
        f()?;
        if cli.verbose {
            eprintln!("{name}: {:.2}s", t.elapsed().as_secs_f64());
        }
        Ok(())
    };
    match cli.command {
        Command::Surface => step("surface", &|| output::surface(&lab, out)),
        Command::Theta => step("theta", &|| output::theta(&lab, out)),
        Command::Spectrum => step("spectrum", &|| output::spectrum(&lab, out)),
        Command::Asymptotics => step("asymptotics", &|| output::asymptotics(&lab, out)),
        Command::Continue { .. } => step("continue", &|| output::continuation(&lab, out)),
        Command::Instability => step("instability", &|| output::instability(&lab, out)),
        Command::Stability => step("stability", &|| output::stability(&lab, out)),
        Command::All => {
            step("surface", &|| output::surface(&lab, out))?;
            step("theta", &|| output::theta(&lab, out))?;
            step("spectrum", &|| output::spectrum(&lab, out))?;
            step("asymptotics", &|| output::asymptotics(&lab, out))?;
            step("continue", &|| output::continuation(&lab, out))?;
            step("instability", &|| output::instability(&lab, out))?;
            step("stability", &|| output::stability(&lab, out))?;
            let results = output::summary(&lab, out)?;
            for r in &results {
                println!(
                    "{:>2} {:<34} {}  {}",
                    r.id,
                    r.key,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.detail
                );
            }
            Ok(())
        }
    }
}

pub(crate) fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
