use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use epioc::integrators::Method;
use epioc::report::{self, RunError};
use epioc::scenario::{load_scenario, Scenario, ScenarioError, SolverMethod};

/// Compartmental epidemic models with threshold analysis and optimal
/// control. Scenario files are JSON documents; ready-made presets live
/// under `presets/`.
#[derive(Parser)]
#[command(name = "epioc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scenario and write trajectory.csv + metrics.csv.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// euler | rk2 | rk4 | rk45 (defaults to the scenario's solver)
        #[arg(long)]
        method: Option<String>,
    },
    /// Reproduction numbers, equilibria and stability; writes analysis.csv.
    Analyze {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Bisect this parameter or control for the R0 = 1 threshold.
        #[arg(long)]
        critical: Option<String>,
    },
    /// Solve the optimal-control problem (sweep or direct transcription).
    Optimize {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// sweep | direct (defaults to the scenario's solver)
        #[arg(long)]
        solver: Option<String>,
    },
    /// Simulate spraying schedules and rank them; writes ranking.csv.
    Strategy {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// e.g. `constant:0.157` or `pulse:7,1,1`; repeatable.
        #[arg(long = "schedule", required = true)]
        schedules: Vec<String>,
    },
}

fn read_scenario(path: &PathBuf) -> Result<Scenario, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        RunError::Scenario(ScenarioError::Parse(format!(
            "cannot read {}: {e}",
            path.display()
        )))
    })?;
    Ok(load_scenario(&text)?)
}

fn parse_method(s: &str) -> Result<Method, RunError> {
    match s {
        "euler" => Ok(Method::Euler),
        "rk2" => Ok(Method::Rk2),
        "rk4" => Ok(Method::Rk4),
        "rk45" => Ok(Method::Rk45),
        other => Err(RunError::Scenario(ScenarioError::invalid(
            "method",
            format!("expected euler|rk2|rk4|rk45, got `{other}`"),
        ))),
    }
}

fn parse_solver(s: &str) -> Result<SolverMethod, RunError> {
    match s {
        "sweep" => Ok(SolverMethod::Sweep),
        "direct" => Ok(SolverMethod::Direct),
        other => Err(RunError::Scenario(ScenarioError::invalid(
            "solver",
            format!("expected sweep|direct, got `{other}`"),
        ))),
    }
}

fn run(cli: Cli) -> Result<report::RunReport, RunError> {
    match cli.command {
        Command::Simulate {
            scenario,
            out,
            method,
        } => {
            let s = read_scenario(&scenario)?;
            let method = method.as_deref().map(parse_method).transpose()?;
            report::cmd_simulate(&s, &out, method)
        }
        Command::Analyze {
            scenario,
            out,
            critical,
        } => {
            let s = read_scenario(&scenario)?;
            report::cmd_analyze(&s, &out, critical.as_deref())
        }
        Command::Optimize {
            scenario,
            out,
            solver,
        } => {
            let s = read_scenario(&scenario)?;
            let solver = solver.as_deref().map(parse_solver).transpose()?;
            report::cmd_optimize(&s, &out, solver)
        }
        Command::Strategy {
            scenario,
            out,
            schedules,
        } => {
            let s = read_scenario(&scenario)?;
            report::cmd_strategy(&s, &out, &schedules)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("EPI_OC_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            report.print();
            if report.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("solver did not converge; outputs were still written");
                ExitCode::from(4)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
