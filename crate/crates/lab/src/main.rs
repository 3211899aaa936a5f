use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mcflow::io::{write_expander, Artifacts};
use mcflow::run::{run_path, verdict_table};
use mcflow::sweep::{sweep, sweep_table};
use mcflow::OUT_ENV;
use mcflow_core::expander::solve_graph_expander;

#[derive(Parser)]
#[command(name = "mcflow", version, about = "Expander monotonicity experiments for rotationally symmetric mean curvature flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario configuration.
    Run {
        config: PathBuf,
        /// Output directory (defaults to $MCFLOW_OUT/<config stem>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a value, e.g. `--set scenario.spacing=0.025`.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run every configuration matching a glob.
    Sweep {
        pattern: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output root (defaults to $MCFLOW_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shoot a graphical rotationally symmetric self-expander.
    Expander {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        u0: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 20.0)]
        r_max: f64,
        /// Write the profile CSV and sidecar here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn default_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("mcflow-out"))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, overrides } => {
            let out = out.unwrap_or_else(|| default_root().join(stem(&config)));
            match run_path(&config, &out, &overrides) {
                Ok(report) => {
                    print!("{}", verdict_table(&report));
                    println!("summary: {}", out.join("summary.json").display());
                    if report.all_matched {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    ExitCode::from(2)
                }
            }
        }
        Command::Sweep { pattern, jobs, out } => {
            let out = out.unwrap_or_else(default_root);
            match sweep(&pattern, &out, jobs) {
                Ok(report) => {
                    print!("{}", sweep_table(&report));
                    println!("aggregate: {}", out.join("aggregate.json").display());
                    if report.all_matched {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Expander { n, u0, tol, r_max, out } => match solve_graph_expander(n, u0, r_max, tol) {
            Ok(p) => {
                let summary = serde_json::json!({
                    "n": n,
                    "initial_height": p.initial_height,
                    "slope": p.slope,
                    "residual": p.residual,
                    "tolerance": p.tolerance,
                    "step": p.step,
                    "iterations": p.iterations,
                    "r_max": p.r_max(),
                });
                println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
                if let Some(dir) = out {
                    let written = Artifacts::new(&dir).and_then(|mut art| {
                        write_expander(&mut art, "profile", &p)?;
                        art.finalize()
                    });
                    if let Err(e) = written {
                        eprintln!("error: {}: {e}", dir.display());
                        return ExitCode::from(2);
                    }
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
