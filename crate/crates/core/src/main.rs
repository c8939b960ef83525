//! Command-line driver: runs one experiment from a config file or built-in
//! defaults, writes CSV and a JSON summary, prints one line per check.

use clap::Parser;
use resolvent_lab::config::{Experiment, ExperimentConfig, OutputFormat};
use resolvent_lab::experiments;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "resolvent-lab",
    about = "Semiclassical resolvent, quasimode and resonance experiments on the line"
)]
struct Args {
    /// JSON config file; omitted fields fall back to experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Experiment name (overrides the config file's choice).
    #[arg(long)]
    experiment: Option<String>,

    /// Output directory for CSV/JSON artifacts.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Worker threads; falls back to RESOLVENT_LAB_JOBS, then all cores.
    #[arg(long)]
    jobs: Option<usize>,

    /// csv | json
    #[arg(long)]
    format: Option<String>,
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool, Box<dyn std::error::Error>> {
    let args = Args::parse();

    let mut cfg = match (&args.config, &args.experiment) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(name)) => ExperimentConfig::default_for(Experiment::parse(name)?),
        (None, None) => {
            eprintln!("pass --config FILE or --experiment NAME; experiments:");
            for e in Experiment::all() {
                eprintln!("  {}", e.name());
            }
            return Err("no experiment selected".into());
        }
    };
    if let Some(name) = &args.experiment {
        cfg.experiment = Experiment::parse(name)?;
    }
    if let Some(out) = &args.output {
        cfg.output = Some(out.clone());
    }
    if let Some(fmt) = &args.format {
        cfg.format = match fmt.as_str() {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => return Err(format!("unknown format `{other}`").into()),
        };
    }
    let jobs = args
        .jobs
        .or(cfg.jobs)
        .or_else(|| std::env::var("RESOLVENT_LAB_JOBS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    let started = std::time::Instant::now();
    let output = experiments::run(&cfg)?;
    let elapsed = started.elapsed();

    if let Some(dir) = &cfg.output {
        std::fs::create_dir_all(dir)?;
        let base = dir.join(output.experiment.clone());
        match cfg.format {
            OutputFormat::Csv => {
                std::fs::write(base.with_extension("csv"), output.csv())?;
            }
            OutputFormat::Json => {
                std::fs::write(
                    base.with_extension("json"),
                    serde_json::to_string_pretty(&output)?,
                )?;
            }
        }
        // the summary always lands next to the table
        std::fs::write(
            dir.join(format!("{}-summary.json", output.experiment)),
            serde_json::to_string_pretty(&serde_json::json!({
                "schema_version": output.schema_version,
                "experiment": output.experiment,
                "summary": output.summary,
                "checks": output.checks,
            }))?,
        )?;
    }

    println!(
        "{} ({} rows, {:.1}s)",
        output.experiment,
        output.csv_rows.len(),
        elapsed.as_secs_f64()
    );
    for c in &output.checks {
        println!(
            "  [{}] {} (value {:.4e}, threshold {:.4e}) {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold,
            c.detail
        );
    }
    Ok(output.all_pass())
}
