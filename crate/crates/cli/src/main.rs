use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use cloneforge_core::{run_scenario, RunConfig, Scenario};

#[derive(Parser)]
#[command(name = "cloneforge", version, about = "Seeded verification runs for clone constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report and diagrams.
    Run {
        /// shift, semilattice, filters or all; overrides the config file.
        #[arg(long)]
        scenario: Option<Scenario>,
        /// TOML file with a RunConfig; missing keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed of the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, created if missing.
        #[arg(long, default_value = "cloneforge-out")]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(scenario: Option<Scenario>, config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<i32> {
    let mut cfg = load_config(config)?;
    if let Some(s) = scenario {
        cfg.scenario = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let output = run_scenario(&cfg)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    if cfg.formats.json {
        let mut report = serde_json::to_string_pretty(&output.report)?;
        report.push('\n');
        write(out, "report.json", &report)?;
        let mut timings = serde_json::to_string_pretty(&output.timings)?;
        timings.push('\n');
        write(out, "timings.json", &timings)?;
    }
    for a in &output.artifacts {
        write(out, &a.name, &a.contents)?;
    }
    let summary = output.summary();
    if cfg.formats.text {
        write(out, "summary.txt", &summary)?;
    }
    print!("{summary}");
    Ok(output.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            config,
            seed,
            out,
        } => run(*scenario, config.as_deref(), *seed, out),
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
