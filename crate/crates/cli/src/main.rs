use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use microgrid_core::scheduler::HorizonMode;
use microgrid_core::{
    emit_comparison, emit_report, load_config, run_all_scenarios, run_scenario, RunConfig,
    RunReport, Scenario,
};

#[derive(Debug, Parser)]
#[command(
    name = "microgrid",
    version,
    about = "Receding-horizon microgrid scheduler"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Run {
        #[command(flatten)]
        common: RunArgs,
        /// Scenario number; overrides the config.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        scenario: Option<u8>,
    },
    /// Run all three scenarios and write a side-by-side comparison.
    Compare {
        #[command(flatten)]
        common: RunArgs,
    },
    /// Load and validate a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration; the built-in preset when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; falls back to `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Population seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    horizon_mode: Option<ModeArg>,
    /// Fixed horizon length in intervals; implies `--horizon-mode fixed`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    horizon: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Shrinking,
    Fixed,
}

fn configure(args: &RunArgs) -> Result<(RunConfig, PathBuf), String> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path).map_err(|e| e.to_string())?,
        None => RunConfig::preset(),
    };
    if let Some(seed) = args.seed {
        cfg.population.seed = seed;
    }
    match (args.horizon_mode, args.horizon) {
        (Some(ModeArg::Shrinking), Some(_)) => {
            return Err("--horizon needs --horizon-mode fixed".into());
        }
        (Some(ModeArg::Shrinking), None) => cfg.horizon.horizon_mode = HorizonMode::Shrinking,
        (Some(ModeArg::Fixed), None) => cfg.horizon.horizon_mode = HorizonMode::Fixed,
        (_, Some(h)) => {
            cfg.horizon.horizon_mode = HorizonMode::Fixed;
            cfg.horizon.fixed_horizon_length = h as usize;
        }
        (None, None) => {}
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or("no output directory: pass --out or set output_dir")?;
    Ok((cfg, out))
}

fn print_summary(r: &RunReport) {
    let s = &r.summary;
    let soc: Vec<String> = s.soc_mean.iter().map(|x| format!("{x:.4}")).collect();
    println!(
        "scenario {}: cost {:.2} $, DG {:.1} kWh, BESS {:.1} kWh, RES used {:.1} kWh, unserved {:.1} kWh, SOC {}",
        r.scenario.number(),
        s.total_cost,
        s.dg_energy,
        s.bess_energy,
        s.res_used,
        s.unserved,
        soc.join("/")
    );
}

fn run(common: &RunArgs, scenario: Option<u8>) -> Result<(), String> {
    let (mut cfg, out) = configure(common)?;
    if let Some(n) = scenario {
        cfg.scenario = Scenario::try_from(n)?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    let report = run_scenario(&cfg).map_err(|e| e.to_string())?;
    emit_report(&report, &out).map_err(|e| e.to_string())?;
    print_summary(&report);
    println!("wrote {}", out.display());
    Ok(())
}

fn compare(common: &RunArgs) -> Result<(), String> {
    let (cfg, out) = configure(common)?;
    for s in Scenario::ALL {
        let mut c = cfg.clone();
        c.scenario = s;
        c.validate()
            .map_err(|e| format!("scenario {}: {e}", s.number()))?;
    }
    let reports = run_all_scenarios(&cfg).map_err(|e| e.to_string())?;
    emit_comparison(&reports, &out).map_err(|e| e.to_string())?;
    for r in &reports {
        print_summary(r);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn validate(path: &Path) -> Result<(), String> {
    let cfg = load_config(path).map_err(|e| e.to_string())?;
    println!(
        "{}: ok (scenario {}, {} intervals, {} DERs, {} unit classes)",
        path.display(),
        cfg.scenario.number(),
        cfg.horizon.n_k,
        cfg.population.count,
        cfg.units.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { common, scenario } => run(common, *scenario),
        Command::Compare { common } => compare(common),
        Command::Validate { config } => validate(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
