//! `compsim` — command-line front end of the CoMP downlink simulator.

mod values;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use comp_sim::export::{
    cluster_snapshot, metrics_rows, power_rows, sweep_rows, write_csv, write_json,
    write_resolved_config, SummaryRecord,
};
use comp_sim::sim::{run_scenario, run_sweep, SweepAxis};
use comp_sim::{Algorithm, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "compsim",
    version,
    about = "Downlink CoMP clustering and power-control simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML scenario file; built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set cell_radius_m=200`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario and write per-user metrics, powers and clusters.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Run every algorithm instead of only the configured one.
        #[arg(long)]
        all: bool,
    },
    /// Sweep one parameter for every algorithm and write sweep.csv.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Parameter to sweep: cluster_size, cell_radius or damping.
        #[arg(long)]
        axis: SweepAxis,
        /// Values: `1..6` (integer range), `50..500:50` (stepped range) or `0.1,0.5,0.9`.
        #[arg(long)]
        values: String,
        /// Restrict the sweep to these algorithms (comma separated).
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<Algorithm>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Resolve and check a configuration without simulating.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn load_config(args: &ConfigArgs) -> Result<ScenarioConfig> {
    let cfg = match &args.config {
        Some(path) => ScenarioConfig::from_file(path, &args.overrides)?,
        None => ScenarioConfig::from_toml_str("", &args.overrides)?,
    };
    Ok(cfg)
}

fn create_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory `{}`", out.display()))
}

fn run(cfg: &ScenarioConfig, out: &Path, all: bool) -> Result<()> {
    create_out_dir(out)?;
    let algorithms: Vec<Algorithm> = if all {
        Algorithm::ALL.to_vec()
    } else {
        vec![cfg.algorithm]
    };
    let mut metrics = Vec::new();
    let mut summaries = Vec::new();
    for algorithm in algorithms {
        let mut c = cfg.clone();
        c.algorithm = algorithm;
        let (drops, summary) =
            run_scenario(&c).with_context(|| format!("simulating {algorithm}"))?;
        metrics.extend(metrics_rows(algorithm, &drops));
        if let Some(first) = drops.first() {
            let suffix = if all {
                format!("_{algorithm}")
            } else {
                String::new()
            };
            write_json(
                &out.join(format!("clusters{suffix}.json")),
                &cluster_snapshot(algorithm, first),
            )?;
            write_csv(
                &out.join(format!("power{suffix}.csv")),
                &power_rows(&first.power),
            )?;
        }
        println!(
            "{algorithm:<12} mean edge throughput {:>12.1} bps  mean delay {:>10.2} s  jain {:.3}  stderr {:.1}  drops {}",
            summary.mean_edge_throughput_bps, summary.mean_delay_s, summary.jain, summary.stderr, summary.n_drops
        );
        summaries.push(SummaryRecord { algorithm, summary });
    }
    write_csv(&out.join("metrics.csv"), &metrics)?;
    write_json(&out.join("summary.json"), &summaries)?;
    write_resolved_config(&out.join("resolved_config.json"), cfg)?;
    println!("wrote results to {}", out.display());
    Ok(())
}

fn sweep(
    cfg: &ScenarioConfig,
    axis: SweepAxis,
    values: &str,
    algorithms: &[Algorithm],
    out: &Path,
) -> Result<()> {
    let xs = values::parse_values(values).context("invalid --values")?;
    let algorithms = if algorithms.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        algorithms.to_vec()
    };
    create_out_dir(out)?;
    let mut results = Vec::new();
    for algorithm in algorithms {
        let mut c = cfg.clone();
        c.algorithm = algorithm;
        let r =
            run_sweep(&c, axis, &xs).with_context(|| format!("sweeping {axis} for {algorithm}"))?;
        for p in &r.points {
            println!(
                "{algorithm:<12} {axis}={:<8} mean edge throughput {:>12.1} bps  mean delay {:>10.2} s  jain {:.3}",
                p.x_value, p.mean_edge_throughput_bps, p.mean_delay_s, p.jain
            );
        }
        results.push(r);
    }
    write_csv(&out.join("sweep.csv"), &sweep_rows(&results))?;
    write_resolved_config(&out.join("resolved_config.json"), cfg)?;
    println!("wrote {}", out.join("sweep.csv").display());
    Ok(())
}

fn validate(cfg: &ScenarioConfig) {
    println!("configuration OK");
    println!("cells                 {}", cfg.n_cells);
    println!("deployment            {:?}", cfg.deployment);
    println!("cell radius           {} m", cfg.cell_radius_m);
    println!("users per cell        {}", cfg.users_per_cell);
    println!("BS max power          {} dBm", cfg.bs_max_power_dbm);
    println!("bandwidth             {} MHz", cfg.bandwidth_hz / 1e6);
    println!("PRBs                  {}", cfg.n_prb);
    println!("algorithm             {}", cfg.algorithm);
    println!("drops                 {} (seed {})", cfg.n_drops, cfg.seed);
    println!();
    print!("{}", cfg.to_toml_string());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, all } => load_config(&config).and_then(|c| run(&c, &out, all)),
        Command::Sweep {
            config,
            axis,
            values,
            algorithms,
            out,
        } => load_config(&config).and_then(|c| sweep(&c, axis, &values, &algorithms, &out)),
        Command::Validate { config } => load_config(&config).map(|c| validate(&c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
