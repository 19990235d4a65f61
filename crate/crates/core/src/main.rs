use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use uav_ee::experiments::{load_scenario, preset, run_scenario_with, write_csv, RunOptions, ScenarioConfig};
use uav_ee::{Error, Result, Scheme};

#[derive(Parser)]
#[command(name = "uav-ee", version, about = "Energy-efficient RSMA/NOMA/SDMA precoding for cellular-connected UAVs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write one CSV row per (sweep point, seed, scheme).
    Run {
        #[command(flatten)]
        source: Source,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Base seed (overrides monte_carlo.base_seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of Monte-Carlo seeds (overrides monte_carlo.num_seeds).
        #[arg(long)]
        seeds: Option<usize>,
        /// Comma-separated subset of rsma,noma,sdma.
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<Scheme>>,
        /// Worker threads (default: one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Check a scenario file without running it.
    Validate {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Args)]
struct Source {
    /// Scenario TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset the config is laid over: fig2, fig3_4 or fig6_7.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<ScenarioConfig> {
        match (&self.config, &self.preset) {
            (Some(path), p) => load_scenario(path, p.as_deref()),
            (None, Some(p)) => preset(p),
            (None, None) => Err(Error::config("--config", "give a scenario file, a --preset, or both")),
        }
    }
}

fn num_cells(cfg: &ScenarioConfig) -> usize {
    cfg.sweep_points().len() * cfg.monte_carlo.num_seeds
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { source } => {
            let cfg = source.load()?;
            eprintln!(
                "{}: ok ({} UAVs, {} cells, schemes {})",
                cfg.scenario_id,
                cfg.uavs.len(),
                num_cells(&cfg),
                cfg.schemes.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(",")
            );
            Ok(())
        }
        Command::Run {
            source,
            out,
            seed,
            seeds,
            schemes,
            workers,
        } => {
            let mut cfg = source.load()?;
            if let Some(seed) = seed {
                cfg.monte_carlo.base_seed = seed;
            }
            if let Some(n) = seeds {
                cfg.monte_carlo.num_seeds = n;
            }
            if let Some(s) = schemes {
                cfg.schemes = s;
            }
            cfg.validate()?;

            let id = cfg.scenario_id.clone();
            let start = Instant::now();
            eprintln!("{id}: {} cells, schemes {:?}", num_cells(&cfg), cfg.schemes);
            let rows = run_scenario_with(&cfg, RunOptions { workers }, |done, total| {
                if done == total || (done * 20) / total != ((done - 1) * 20) / total {
                    eprintln!("{id}: {done}/{total} cells ({:.1?})", start.elapsed());
                }
            })?;
            let unconverged = rows.iter().filter(|r| !r.converged).count();
            if unconverged > 0 {
                eprintln!("{id}: {unconverged} rows hit the iteration limit before converging");
            }
            write_csv(&rows, &out)?;
            eprintln!("{id}: wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
