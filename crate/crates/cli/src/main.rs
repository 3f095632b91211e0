//! `gpwave` command line: configured runs of the spectral laboratory with
//! reproducible reports, CSV series, SVG plots and field snapshots.

mod config;
mod plot;
mod runner;

use clap::Parser;
use config::{parse_config, Command, Overrides};
use gpwave::experiments::Engine;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "gpwave",
    about = "Pseudo-spectral laboratory for the Gross-Pitaevskii long-wave regime",
    after_help = "Commands: simulate, decay, compare-wave, compare-leps, soliton, lp-check, sweep.\n\
                  Flags override values from --config. GPWAVE_THREADS caps worker parallelism."
)]
struct Cli {
    /// Command to run (may instead come from the config file)
    command: Option<String>,
    /// JSON config file (a bare config or a manifest.json from a previous run)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Box length per axis
    #[arg(long = "box")]
    box_length: Option<f64>,
    /// Scaling parameter (repeatable)
    #[arg(long = "eps")]
    eps: Vec<f64>,
    #[arg(long = "tmax")]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Sobolev index of the data class
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory root
    #[arg(long = "out")]
    out_dir: Option<String>,
    /// Nonlinear engine: gp, hydro or both
    #[arg(long)]
    engine: Option<String>,
}

fn main() {
    // worker-parallelism cap
    if let Ok(v) = std::env::var("GPWAVE_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }

    let cli = Cli::parse();
    let command = match cli.command.as_deref().map(str::parse::<Command>) {
        Some(Ok(c)) => Some(c),
        Some(Err(e)) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
        None => None,
    };
    let engine = match cli.engine.as_deref() {
        None => None,
        Some("gp") => Some(Engine::Gp),
        Some("hydro") => Some(Engine::Hydro),
        Some("both") => Some(Engine::Both),
        Some(other) => {
            eprintln!("unknown engine `{other}` (expected gp, hydro or both)");
            std::process::exit(2);
        }
    };
    let overrides = Overrides {
        command,
        dim: cli.dim,
        n: cli.n,
        box_length: cli.box_length,
        eps: cli.eps,
        t_max: cli.t_max,
        dt: cli.dt,
        s: cli.s,
        seed: cli.seed,
        engine,
        out_dir: cli.out_dir,
    };

    let cfg = match parse_config(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };

    match runner::run_command(&cfg) {
        Ok(out) => {
            println!("report: {}", out.dir.display());
            let mut failures = Vec::new();
            for v in &out.report.verdicts {
                println!(
                    "  [{}] {} (measured {:.6e})",
                    if v.pass { "pass" } else { "FAIL" },
                    v.criterion,
                    v.measured
                );
                if !v.pass {
                    failures.push(serde_json::json!({
                        "criterion": v.criterion,
                        "measured": v.measured,
                        "detail": v.detail,
                    }));
                }
            }
            if failures.is_empty() {
                std::process::exit(0);
            }
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({ "failures": failures }))
                    .expect("failure list serializes")
            );
            std::process::exit(1);
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string() })
            );
            std::process::exit(1);
        }
    }
}
