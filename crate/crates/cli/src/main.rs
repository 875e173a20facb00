//! `hpmc`: run the clock experiment, re-analyse its samples, or run the
//! self-test suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use hpmc::analysis::{aggregate, emit_plot_data, records_from_samples, render_report};
use hpmc::experiment::{
    read_samples, write_manifest, write_records, Experiment, ExperimentConfig, MovementRecord, RunManifest,
    MANIFEST_FILE, RECORDS_FILE, SAMPLES_FILE,
};
use hpmc::Error;

#[derive(Parser)]
#[command(name = "hpmc", version, about = "Clock-experiment simulator for a hierarchical passive motor controller")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the clock experiment and write samples, records and a manifest.
    Run(RunArgs),
    /// Recompute records, figure data and the report from a samples file.
    Analyze(AnalyzeArgs),
    /// Run the fast invariant suite.
    Selftest,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (flat `section.key = value` text). Defaults are embedded.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a setting, e.g. `planner.a_max=2.0`. Repeatable; the last one wins.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shortcut for `experiment.cycles_per_target`.
    #[arg(long)]
    cycles: Option<u32>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory (default: `experiment.output_path`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Do not print the summary.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Samples file written by `run`.
    samples: PathBuf,
    /// Configuration used for the run; defaults to the manifest next to the samples.
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory for records, figure data and the report (default: next to the samples).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

/// Failure with the process exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, error: e.into() }
    }
}

fn usage(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(args: &ConfigArgs, fallback: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    let mut overrides = args.overrides.clone();
    if let Some(c) = args.cycles {
        overrides.push(format!("experiment.cycles_per_target={c}"));
    }
    let text = match (&args.config, fallback) {
        (Some(path), _) => std::fs::read_to_string(path)
            .map_err(|e| usage(anyhow!("cannot read config file {}: {e}", path.display())))?,
        (None, Some(manifest)) if manifest.exists() => {
            RunManifest::read(manifest).map_err(|e| usage(e.into()))?.config
        }
        _ => String::new(),
    };
    let cfg = ExperimentConfig::from_text(&text, &overrides).map_err(|e| usage(e.into()))?;
    cfg.validate().map_err(|e| usage(e.into()))?;
    Ok(cfg)
}

fn summary(records: &[MovementRecord]) -> anyhow::Result<String> {
    let stats = aggregate(records)?;
    Ok(format!(
        "{} movements ({} excluded): r planned {}, r executed {}",
        stats.overall.count, stats.excluded, stats.overall.r_planned, stats.overall.r_executed
    ))
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config, None)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_path.clone());
    let experiment = Experiment::new(cfg.clone()).map_err(|e| usage(e.into()))?;
    let started = Instant::now();
    let records = experiment
        .run_to_dir(&out)
        .with_context(|| format!("simulation into {}", out.display()))?;
    let manifest = RunManifest::new(cfg.to_text(), &out, &[SAMPLES_FILE, RECORDS_FILE])?;
    write_manifest(&manifest, &out.join(MANIFEST_FILE))?;
    if !args.quiet {
        println!("{}", summary(&records)?);
        eprintln!(
            "wrote {} records to {} in {:.1} s",
            records.len(),
            out.display(),
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let dir = args.samples.parent().map(Path::to_path_buf).unwrap_or_default();
    let cfg = load_config(&args.config, Some(&dir.join(MANIFEST_FILE)))?;
    let out = args.out.clone().unwrap_or_else(|| dir.clone());
    let samples = read_samples(&args.samples)?;
    if samples.is_empty() {
        return Err(Error::NoMovements(args.samples.clone()).into());
    }
    let records = records_from_samples(&samples, &cfg);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_records(&records, &out.join(RECORDS_FILE))?;
    let experiment = Experiment::new(cfg.clone()).map_err(|e| usage(e.into()))?;
    emit_plot_data(&records, &samples, &experiment, &out)?;
    if !args.quiet {
        print!("{}", render_report(&records, cfg.trim_fraction)?);
    }
    Ok(())
}

fn cmd_selftest() -> Result<(), Failure> {
    let started = Instant::now();
    let checks = hpmc::selftest::run_all();
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    eprintln!("{} checks, {failed} failed, {:.1} s", checks.len(), started.elapsed().as_secs_f64());
    if failed > 0 {
        return Err(anyhow!("{failed} self-test checks failed").into());
    }
    Ok(())
}
