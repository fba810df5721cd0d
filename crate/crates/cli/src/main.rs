use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use commgp_cli::config::{
    load_or_default, DimredCompareConfig, Gp1dConfig, RateSweepConfig, RdCurveConfig,
};
use commgp_cli::{experiments, report, CliError};

/// Communication-constrained distributed GP experiments.
///
/// Each subcommand runs one experiment and writes `<name>.csv` (plot data,
/// byte-identical across reruns of the same seed) plus `<name>.json` (full
/// run report) into the output directory.
#[derive(Parser)]
#[command(name = "commgp", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; omit to use the experiment's defaults (see `info`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RateSweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also dump completed gram matrices (row-major little-endian f64)
    /// into this directory.
    #[arg(long)]
    dump_grams: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Distortion-rate curves for both codecs against the information bound.
    RdCurve(RunArgs),
    /// Metric-aware reduction versus plain principal components.
    DimredCompare(RunArgs),
    /// One-dimensional GP regression on quantized inputs.
    Gp1d(RunArgs),
    /// Distributed protocols across a rate grid: SMSE versus total bits.
    RateSweep(RateSweepArgs),
    /// Print every experiment's default config as JSON.
    Info,
}

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RdCurve(args) => {
            let cfg: RdCurveConfig = load_or_default(
                args.config.as_deref(),
                args.seed,
                |c, s| c.seed = s,
                RdCurveConfig::validate,
            )?;
            ensure_out(&args.out)?;
            let out = experiments::rd_curve(&cfg)?;
            let csv = args.out.join("rd_curve.csv");
            report::write_rd_curve_csv(&csv, &out)?;
            report::write_json(&args.out.join("rd_curve.json"), "rd_curve", &cfg, &out)?;
            println!("wrote {}", csv.display());
        }
        Command::DimredCompare(args) => {
            let cfg: DimredCompareConfig = load_or_default(
                args.config.as_deref(),
                args.seed,
                |c, s| c.seed = s,
                DimredCompareConfig::validate,
            )?;
            ensure_out(&args.out)?;
            let out = experiments::dimred_compare(&cfg)?;
            let csv = args.out.join("dimred_compare.csv");
            report::write_dimred_compare_csv(&csv, &out)?;
            report::write_json(
                &args.out.join("dimred_compare.json"),
                "dimred_compare",
                &cfg,
                &out,
            )?;
            println!("wrote {}", csv.display());
        }
        Command::Gp1d(args) => {
            let cfg: Gp1dConfig = load_or_default(
                args.config.as_deref(),
                args.seed,
                |c, s| c.seed = s,
                Gp1dConfig::validate,
            )?;
            ensure_out(&args.out)?;
            let out = experiments::gp1d(&cfg)?;
            let csv = args.out.join("gp1d.csv");
            report::write_gp1d_csv(&csv, &out)?;
            report::write_json(&args.out.join("gp1d.json"), "gp1d", &cfg, &out)?;
            println!("wrote {}", csv.display());
        }
        Command::RateSweep(args) => {
            let cfg: RateSweepConfig = load_or_default(
                args.run.config.as_deref(),
                args.run.seed,
                |c, s| c.seed = s,
                RateSweepConfig::validate,
            )?;
            ensure_out(&args.run.out)?;
            if let Some(dir) = &args.dump_grams {
                ensure_out(dir)?;
            }
            let out = experiments::rate_sweep(&cfg, args.dump_grams.as_deref())?;
            let csv = args.run.out.join("rate_sweep.csv");
            report::write_rate_sweep_csv(&csv, &out)?;
            report::write_json(
                &args.run.out.join("rate_sweep.json"),
                "gp_rate_sweep",
                &cfg,
                &out,
            )?;
            println!("wrote {}", csv.display());
        }
        Command::Info => {
            let defaults = serde_json::json!({
                "schema": commgp_cli::config::SCHEMA_VERSION,
                "rd_curve": RdCurveConfig::default(),
                "dimred_compare": DimredCompareConfig::default(),
                "gp1d": Gp1dConfig::default(),
                "rate_sweep": RateSweepConfig::default(),
            });
            println!("{}", serde_json::to_string_pretty(&defaults).expect("static schema"));
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
