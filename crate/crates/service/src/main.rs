use std::fs;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use qdt_core::engine::{load_config, Automation, Config, EngineError, RunArtifacts};
use qdt_core::nodes;
use qdt_core::problems::{OptimizationProblem, ProblemInstance};
use qdt_core::queries::{AnswerSource, AutoSource, InteractiveSource, ScriptedSource};
use qdt_service::{serve, DEFAULT_PORT};

#[derive(Parser)]
#[command(name = "qdt", version, about = "Decision tree for QUBO formulation and hybrid algorithm runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the decision tree once.
    Run {
        #[arg(long, default_value = "config.json")]
        config: PathBuf,
        /// JSON map of query id to raw answer.
        #[arg(long)]
        answers: Option<PathBuf>,
        /// Accept every default without prompting.
        #[arg(long)]
        auto: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for run artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, default_value = "config.json")]
        config: PathBuf,
    },
    /// Check that a file holds a valid problem instance.
    ValidateInstance { file: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            answers,
            auto,
            seed,
            out,
        } => run(config, answers, auto, seed, out),
        Command::Serve { port, host, config } => {
            let config = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let addr = SocketAddr::new(host, port);
            let rt = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => return fail(e),
            };
            eprintln!("listening on http://{addr}");
            match rt.block_on(serve(config, addr)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        Command::ValidateInstance { file } => validate_instance(&file),
    }
}

fn fail(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::FAILURE
}

fn run(config_path: PathBuf, answers: Option<PathBuf>, auto: bool, seed: Option<u64>, out: Option<PathBuf>) -> ExitCode {
    let mut config: Config = match load_config(&config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if auto {
        config.automation = Automation::Auto;
    }
    if seed.is_some() {
        config.seed = seed;
    }
    if let Some(out) = out {
        config.output_dir = out;
    }
    let answers = answers.or_else(|| config.answers_file.clone());
    let mut source: Box<dyn AnswerSource> = if config.automation == Automation::Auto {
        Box::new(AutoSource)
    } else if let Some(path) = answers {
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => return fail(format!("{}: {e}", path.display())),
        };
        match ScriptedSource::from_json(&text) {
            Ok(s) => Box::new(s),
            Err(e) => return fail(format!("{}: {e}", path.display())),
        }
    } else {
        Box::new(InteractiveSource::new(io::stdin().lock(), io::stdout()))
    };
    match nodes::run(&config, source.as_mut()) {
        Ok(run) => {
            report(&run);
            ExitCode::SUCCESS
        }
        Err(EngineError::QueryAborted(q)) => {
            eprintln!("aborted at `{q}`");
            ExitCode::from(2)
        }
        Err(e) => fail(e),
    }
}

fn report(run: &RunArtifacts) {
    let r = &run.result;
    println!("run {} finished", r.run_id);
    println!("path: {}", run.path.join(" -> "));
    println!("solver: {}", r.solver_name);
    if let Some(objective) = r.objective {
        println!("objective: {objective}");
    }
    if let Some(solution) = &r.solution {
        println!("solution: {}", json!(solution));
    }
    println!("artifacts: {}", run.run_dir.display());
}

fn validate_instance(file: &PathBuf) -> ExitCode {
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", file.display())),
    };
    let record = match serde_json::from_str(&text) {
        Ok(r) => r,
        Err(e) => return fail(format!("{}: {e}", file.display())),
    };
    match ProblemInstance::from_record(&record) {
        Ok(instance) => {
            println!("valid {} instance of size {}", instance.class(), instance.size());
            ExitCode::SUCCESS
        }
        Err(e) => fail(format!("{}: {e}", file.display())),
    }
}
