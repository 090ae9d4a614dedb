use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dfljam_cli::commands::{self, topology_json, RunOptions};
use dfljam_cli::ExperimentConfig;
use dfljam_core::report::{emit, Format};
use serde_json::{Map, Value};

/// Decentralized federated learning under link jamming.
#[derive(Parser)]
#[command(name = "dfljam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a topology and print or save it as JSON.
    Topology(Common),
    /// Compute an attack plan for the configured scenario and algorithm.
    Plan(Common),
    /// Run one experiment.
    Run {
        #[command(flatten)]
        common: Common,
        /// Save all node models after the final round.
        #[arg(long)]
        checkpoint: bool,
    },
    /// Run every attack row on one topology and emit a comparison table.
    Table(Common),
}

#[derive(Args)]
struct Common {
    /// Flat JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// paper or desk.
    #[arg(long)]
    preset: Option<String>,
    /// line, star, grid, ring or random.
    #[arg(long)]
    topology: Option<String>,
    /// Topology JSON with positions and optional explicit links.
    #[arg(long)]
    topology_file: Option<PathBuf>,
    /// s1 or s2.
    #[arg(long)]
    scenario: Option<String>,
    /// mcba, ndba, random, all or none.
    #[arg(long)]
    algo: Option<String>,
    /// Scenario 1 budget (undirected links).
    #[arg(long)]
    mb: Option<usize>,
    /// Scenario 2 budget (directed links).
    #[arg(long)]
    md: Option<usize>,
    /// Number of jammers.
    #[arg(long)]
    na: Option<usize>,
    /// Jamming range in meters.
    #[arg(long)]
    rj: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    train_samples: Option<usize>,
    /// Output file (topology, plan) or directory (run, table).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> dfljam_core::Result<Map<String, Value>> {
        let mut map = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => Map::new(),
        };
        let mut set = |key: &str, value: Option<Value>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v);
            }
        };
        let lower = |s: &Option<String>| s.as_ref().map(|s| Value::from(s.to_ascii_lowercase()));
        set("preset", lower(&self.preset));
        set("topology", lower(&self.topology));
        set(
            "topology_file",
            self.topology_file
                .as_ref()
                .map(|p| Value::from(p.display().to_string())),
        );
        set("scenario", lower(&self.scenario));
        set("algo", lower(&self.algo));
        set("mb", self.mb.map(Value::from));
        set("md", self.md.map(Value::from));
        set("na", self.na.map(Value::from));
        set("rj", self.rj.map(Value::from));
        set("seed", self.seed.map(Value::from));
        set("max_rounds", self.max_rounds.map(Value::from));
        set("train_samples", self.train_samples.map(Value::from));
        Ok(map)
    }

    fn prepare(&self) -> dfljam_core::Result<commands::Prepared> {
        let config = ExperimentConfig::resolve(&self.overrides()?)?;
        let prepared = commands::prepare(config)?;
        for w in &prepared.warnings {
            eprintln!("warning: {w}");
        }
        Ok(prepared)
    }

    fn out_dir(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

fn emit_text(out: &Option<PathBuf>, text: String) -> dfljam_core::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| dfljam_core::Error::File {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DFLJAM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("DFLJAM_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> dfljam_core::Result<()> {
    match cli.command {
        Command::Topology(common) => {
            let prepared = common.prepare()?;
            emit_text(&common.out, topology_json(&prepared)?)
        }
        Command::Plan(common) => {
            let prepared = common.prepare()?;
            let c = &prepared.config;
            let plan = commands::make_plan(&prepared, c.scenario, c.algo)?;
            emit_text(&common.out, plan.to_json()? + "\n")
        }
        Command::Run { common, checkpoint } => {
            let prepared = common.prepare()?;
            let dir = common.out_dir("dfljam-run");
            let table = commands::cmd_run(&prepared, &dir, RunOptions { checkpoint })?;
            print!("{}", String::from_utf8_lossy(&emit(&table, Format::Csv)?));
            eprintln!("results in {}", dir.display());
            Ok(())
        }
        Command::Table(common) => {
            let prepared = common.prepare()?;
            let dir = common.out_dir("dfljam-table");
            let table = commands::cmd_table(&prepared, &dir)?;
            print!("{}", String::from_utf8_lossy(&emit(&table, Format::Csv)?));
            eprintln!("results in {}", dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
