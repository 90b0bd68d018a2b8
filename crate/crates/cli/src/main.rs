use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use passive_nav::scenario::{self, Scenario, ScenarioError};
use passive_nav::NavError;

/// Passive navigation planner: run, validate and benchmark scenarios.
#[derive(Parser)]
#[command(name = "passive-nav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or bundled scenario name) and write CSV + summary.
    Run {
        file: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override every agent's feedback sampling rate.
        #[arg(long)]
        feedback_hz: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluate controllers in parallel (same results as serial).
        #[arg(long)]
        parallel: bool,
    },
    /// Time a single-agent and a swarm scenario, serially and without logging.
    Bench {
        single: String,
        swarm: String,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        /// Override both scenarios' duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Parse and validate a scenario file.
    Validate { file: String },
    /// List the bundled scenarios.
    List,
}

enum Failure {
    Diagnostic(String),
    Halt(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Diagnostic(e.to_string())
    }
}

impl From<NavError> for Failure {
    fn from(e: NavError) -> Self {
        match e {
            NavError::SimulationHalt { .. } => Failure::Halt(e.to_string()),
            other => Failure::Diagnostic(other.to_string()),
        }
    }
}

fn load(spec: &str) -> Result<Scenario, Failure> {
    Ok(scenario::load_path_or_bundled(spec)?)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            file,
            out,
            feedback_hz,
            seed,
            parallel,
        } => {
            let mut s = load(&file)?;
            if let Some(hz) = feedback_hz {
                for a in &mut s.agents {
                    a.feedback_hz = Some(hz);
                }
            }
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let summary = scenario::write_outputs(&s, &out, parallel)?;
            print!("{}", summary.to_text());
            println!("csv = {}", out.join(format!("{}.csv", s.name)).display());
        }
        Command::Bench {
            single,
            swarm,
            repeats,
            duration,
        } => {
            let mut a = load(&single)?;
            let mut b = load(&swarm)?;
            if let Some(d) = duration {
                a.duration = d;
                b.duration = d;
            }
            let report = scenario::bench(&a, &b, repeats)?;
            print!("{}", report.to_text());
        }
        Command::Validate { file } => {
            let s = load(&file)?;
            println!(
                "ok: {} ({} agents, {} DoF, {} obstacles, {} steps)",
                s.name,
                s.agents.len(),
                s.total_dofs(),
                s.obstacles.len(),
                s.steps()
            );
        }
        Command::List => {
            for name in scenario::bundled_names() {
                println!("{name}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Diagnostic(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Halt(msg)) => {
            eprintln!("halted: {msg}");
            ExitCode::from(2)
        }
    }
}
