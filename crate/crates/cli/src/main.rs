use std::fs::{File, TryLockError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use walker_forge::pipeline::{self, PipelineConfig};
use walker_forge::surrogate::EvaluationReport;
use walker_forge::{Target, TipAngle};

const LOCK_FILE: &str = ".walker-forge.lock";

/// Walker frame dataset generation, surrogate training and counterfactual
/// design search.
#[derive(Debug, Parser)]
#[command(name = "walker-forge", version, about)]
struct Cli {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed for sampling, the train/test split and the optimizer.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for parallel stages; defaults to the CPU count.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Recompute outputs that would otherwise be reused.
    #[arg(long, global = true)]
    force: bool,

    /// Output directory; overrides the config file.
    #[arg(long, global = true, env = "WALKER_FORGE_DIR", value_name = "DIR")]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample feasible designs into designs.csv.
    Generate {
        /// Sobol points to draw before feasibility filtering.
        #[arg(short, long)]
        n: Option<usize>,
    },
    /// Simulate designs.csv into dataset.csv.
    Simulate,
    /// Train the surrogate ensemble and write model.bin and r2_report.csv.
    Train,
    /// Re-score model.bin on the held-out split.
    Evaluate,
    /// Search for counterfactual designs with the trained model.
    Optimize,
    /// Re-simulate the designs in counterfactuals.csv.
    Validate,
    /// Export scatter, KDE and correlation tables for plotting.
    Plotdata {
        /// Performance values to include; the config's selection when omitted.
        #[arg(value_parser = parse_target)]
        targets: Vec<Target>,
    },
    /// Evaluate the static tipping angle for one walker.
    Stability {
        /// Mass, lbs.
        #[arg(long)]
        mass: f64,
        /// Leg width L1, in.
        #[arg(long)]
        leg_width: f64,
        /// Handle distance L2, in.
        #[arg(long)]
        handle_distance: f64,
        /// Height H, in.
        #[arg(long)]
        height: f64,
        /// Hypothetical handle force, lbf; the config value when omitted.
        #[arg(long)]
        force_lbf: Option<f64>,
    },
    /// Generate, simulate, train, optimize and plot in one go.
    Run,
}

fn parse_target(s: &str) -> std::result::Result<Target, String> {
    s.parse::<Target>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_target(false)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.apply_seed(seed);
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(n) = cli.workers {
        if n == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }

    if let Command::Stability {
        mass,
        leg_width,
        handle_distance,
        height,
        force_lbf,
    } = cli.command
    {
        let f = force_lbf.unwrap_or(cfg.stability.tipping_force);
        let r = pipeline::cmd_stability(mass, leg_width, handle_distance, height, f)?;
        match r.theta {
            TipAngle::Degrees(d) => println!("theta_deg={d:.6} status=tips"),
            TipAngle::NoTip => println!("theta_deg= status=no_tip"),
        }
        return Ok(());
    }

    let _lock = lock_output(&cfg.output_dir)?;
    cfg.write_resolved()?;
    match cli.command {
        Command::Generate { n } => generate(&cfg, n),
        Command::Simulate => simulate(&cfg, cli.force),
        Command::Train => train(&cfg),
        Command::Evaluate => print_report(&pipeline::cmd_evaluate(&cfg)?),
        Command::Optimize => optimize(&cfg),
        Command::Validate => {
            let results = pipeline::cmd_validate(&cfg)?;
            let ok = results.iter().filter(|r| r.simulated_satisfied.is_some_and(|s| s.iter().all(|x| *x))).count();
            println!("validated={} satisfied={ok}", results.len());
            Ok(())
        }
        Command::Plotdata { targets } => plotdata(&cfg, &targets),
        Command::Run => {
            generate(&cfg, None)?;
            simulate(&cfg, cli.force)?;
            train(&cfg)?;
            optimize(&cfg)?;
            plotdata(&cfg, &[])
        }
        Command::Stability { .. } => unreachable!("handled above"),
    }
}

/// Holds an exclusive lock on the output directory until dropped.
fn lock_output(dir: &Path) -> Result<File> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(LOCK_FILE);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    match file.try_lock() {
        Ok(()) => Ok(file),
        Err(TryLockError::WouldBlock) => {
            bail!("{} is in use by another walker-forge process", dir.display())
        }
        Err(TryLockError::Error(e)) => Err(e).with_context(|| format!("locking {}", path.display())),
    }
}

fn generate(cfg: &PipelineConfig, n: Option<usize>) -> Result<()> {
    let s = pipeline::cmd_generate(cfg, n)?;
    println!("{s}");
    Ok(())
}

fn simulate(cfg: &PipelineConfig, force: bool) -> Result<()> {
    let s = pipeline::cmd_simulate(cfg, force)?;
    println!("{s}");
    Ok(())
}

fn train(cfg: &PipelineConfig) -> Result<()> {
    print_report(&pipeline::cmd_train(cfg)?)
}

fn print_report(r: &EvaluationReport) -> Result<()> {
    println!("train={} test={}", r.train_size, r.test_size);
    for t in &r.targets {
        let flag = if t.reliable { "" } else { " (unreliable)" };
        println!("{:<20} r2={:.4}{flag}", t.target.label(), t.r2);
    }
    Ok(())
}

fn optimize(cfg: &PipelineConfig) -> Result<()> {
    let out = pipeline::cmd_optimize(cfg)?;
    println!(
        "evaluations={} archive={} returned={}",
        out.evaluations,
        out.archive_size,
        out.results.len()
    );
    println!("baseline predicted mass={:.3} lbs", out.baseline.predicted.mass);
    for (i, r) in out.results.iter().enumerate() {
        let sim = r
            .simulated
            .map(|p| format!(" simulated mass={:.3}", p.mass))
            .unwrap_or_default();
        let flag = if r.flagged() { " flagged" } else { "" };
        println!("cf_{i}: predicted mass={:.3}{sim}{flag}", r.predicted.mass);
    }
    Ok(())
}

fn plotdata(cfg: &PipelineConfig, targets: &[Target]) -> Result<()> {
    let s = pipeline::cmd_plotdata(cfg, targets)?;
    println!("rows={}", s.rows);
    for (a, b, r) in s.correlations {
        if a < b {
            let r = r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "undefined".into());
            println!("pearson({a}, {b})={r}");
        }
    }
    Ok(())
}
