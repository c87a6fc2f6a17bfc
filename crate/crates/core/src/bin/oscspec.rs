use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oscspec::cli::{
    load_config, matelem_routes, meta_path, run_compute, run_verify, trace_diagnostics, RunConfig, Suite,
    DEFAULT_JMAX, DEFAULT_SEED,
};
use oscspec::model::PhasePoint;

#[derive(Parser)]
#[command(name = "oscspec", version, about = "Perturbed harmonic oscillator spectra")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Converged spectrum and residual report as CSV plus a .meta.json sidecar
    Compute {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Property suites; exit status 1 if any check fails
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        epsilon: Option<f64>,
        /// CSV of the checked quantities
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One matrix element <U_a phi_k, phi_k'> by all three routes
    Matelem {
        #[arg(long, allow_negative_numbers = true)]
        ax: f64,
        #[arg(long, allow_negative_numbers = true)]
        axi: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        kprime: usize,
        #[arg(long, default_value_t = DEFAULT_JMAX)]
        jmax: usize,
    },
    /// Resolvent diagnostics and the contour-trace eigenvalue at one index
    Trace {
        #[arg(long)]
        config: PathBuf,
        /// Index; defaults to the config's nmax
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 6)]
        jmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config_with(path: &PathBuf, epsilon: Option<f64>) -> oscspec::Result<RunConfig> {
    let config = load_config(path)?;
    match epsilon {
        Some(e) => config.with_epsilon(e),
        None => Ok(config),
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> oscspec::Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(args: Args) -> oscspec::Result<bool> {
    match args.command {
        Command::Compute { config, out, nmax } => {
            let mut config = load_config(&config)?;
            if let Some(n) = nmax {
                config = config.with_nmax(n)?;
            }
            let result = run_compute(&config, &out)?;
            eprintln!(
                "wrote {} rows to {} (basis {}, trusted up to {}) and {}",
                result.meta.rows,
                out.display(),
                result.meta.basis_size,
                result.meta.trusted_max,
                meta_path(&out).display()
            );
            Ok(true)
        }
        Command::Verify {
            config,
            suite,
            seed,
            epsilon,
            out,
        } => {
            let config = config_with(&config, epsilon)?;
            let suite: Suite = suite.parse()?;
            let report = run_verify(&config, suite, seed)?;
            print!("{}", report.render_text());
            if let Some(p) = out {
                fs::write(p, report.render_csv())?;
            }
            Ok(report.passed())
        }
        Command::Matelem {
            ax,
            axi,
            alpha,
            k,
            kprime,
            jmax,
        } => {
            let routes = matelem_routes(PhasePoint::new(ax, axi), alpha, k, kprime, jmax)?;
            println!("{}", serde_json::to_string_pretty(&routes).expect("serializable"));
            Ok(true)
        }
        Command::Trace {
            config,
            nmax,
            epsilon,
            jmax,
            out,
        } => {
            let config = config_with(&config, epsilon)?;
            let n = nmax.unwrap_or(config.nmax());
            let diag = trace_diagnostics(&config, n, jmax)?;
            let mut text = serde_json::to_string_pretty(&diag).expect("serializable");
            text.push('\n');
            emit(out.as_ref(), &text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
