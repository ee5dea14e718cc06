use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonlocal_limit::harness::{
    emit_plot_script, load_config, run_single, run_stability_probe, run_sweep, ExperimentConfig,
};
use nonlocal_limit::Error;

#[derive(Parser)]
#[command(version, about = "Nonlocal conservation law experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one eta from the config's eta_list.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eta: f64,
        /// Defaults to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every eta and compare against the local reference.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perturb the datum by bumps of the given L1 sizes and rerun.
    Stability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "delta", required = true)]
        deltas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write plot.py next to the sweep output.
    Plot {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output_dir.clone())
}

fn execute(command: Command) -> Result<String, Error> {
    match command {
        Command::Run { config, eta, out } => {
            let cfg = load_config(&config)?;
            let out = out_dir(&cfg, out);
            let run = run_single(&cfg, eta, &out)?;
            Ok(format!(
                "eta = {eta}: {} cells, {} steps -> {}",
                run.grid.n_cells(),
                run.report.steps,
                out.display()
            ))
        }
        Command::Sweep { config, out } => {
            let cfg = load_config(&config)?;
            let out = out_dir(&cfg, out);
            let outcome = run_sweep(&cfg, &out)?;
            let mut msg = String::new();
            for r in &outcome.rows {
                msg.push_str(&format!(
                    "eta = {:<8} sup L1 q: {:.3e}  W: {:.3e}\n",
                    r.eta, r.sup_time_l1_q_vs_ref, r.sup_time_l1_w_vs_ref
                ));
            }
            msg.push_str(&format!("wrote {}", out.join("sweep.csv").display()));
            Ok(msg)
        }
        Command::Stability {
            config,
            deltas,
            out,
        } => {
            let cfg = load_config(&config)?;
            let out = out_dir(&cfg, out);
            let rows = run_stability_probe(&cfg, &deltas, &out)?;
            let mut msg = String::new();
            for r in &rows {
                msg.push_str(&format!("delta = {:e}: {:.3e}\n", r.delta, r.sup_time_l1));
            }
            msg.push_str(&format!("wrote {}", out.join("probe.csv").display()));
            Ok(msg)
        }
        Command::Plot { config, out } => {
            let cfg = load_config(&config)?;
            let out = out_dir(&cfg, out);
            let path = emit_plot_script(&cfg, Path::new(&out))?;
            Ok(format!("wrote {}", path.display()))
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 is reserved for numerical blowup.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_blowup() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
