//! Command-line interface: `pack validate`, `annotate`, `simulate`, `serve`.
//! Machine-readable output goes to standard output, diagnostics to standard error.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand};
use kielo::commands::{cmd_annotate, cmd_pack_validate, cmd_simulate};
use kielo::simulate::SimulationSpec;
use serde::de::DeserializeOwned;

use crate::api::router;
use crate::tutor::{Tutor, TutorConfig};

#[derive(Debug, Parser)]
#[command(name = "kielo", version, about = "Construct-based language tutoring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Language pack tools.
    Pack {
        #[command(subcommand)]
        command: PackCommand,
    },
    /// Annotate a text file and print the story with construct instances as JSON.
    Annotate {
        /// Language pack directory.
        #[arg(long)]
        pack: PathBuf,
        text: PathBuf,
    },
    /// Simulate Rasch learners and report parameter recovery as JSON.
    Simulate(SimulateArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum PackCommand {
    /// Check a pack and list every violation.
    Validate { path: PathBuf },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON simulation spec; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub learners: Option<usize>,
    #[arg(long)]
    pub constructs: Option<usize>,
    /// Answers per learner.
    #[arg(long)]
    pub answers: Option<usize>,
    #[arg(long)]
    pub theta_sd: Option<f64>,
    #[arg(long)]
    pub difficulty_sd: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the simulated observations here as NDJSON.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Directory holding one subdirectory per language pack.
    #[arg(long, default_value = "packs")]
    pub packs: PathBuf,
    /// Event journal; created when missing, replayed at startup.
    #[arg(long)]
    pub journal: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// JSON service config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exercises per paragraph when a session request gives no density.
    #[arg(long)]
    pub density: Option<usize>,
    /// Share of exercises offered as multiple choice.
    #[arg(long)]
    pub multiple_choice_share: Option<f64>,
}

fn read_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, String> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

pub fn simulation_spec(a: &SimulateArgs) -> Result<SimulationSpec, String> {
    let mut spec: SimulationSpec = read_config(a.config.as_deref())?;
    spec.learners = a.learners.unwrap_or(spec.learners);
    spec.constructs = a.constructs.unwrap_or(spec.constructs);
    spec.answers = a.answers.unwrap_or(spec.answers);
    spec.theta_sd = a.theta_sd.unwrap_or(spec.theta_sd);
    spec.difficulty_sd = a.difficulty_sd.unwrap_or(spec.difficulty_sd);
    spec.seed = a.seed.unwrap_or(spec.seed);
    Ok(spec)
}

pub fn tutor_config(a: &ServeArgs) -> Result<TutorConfig, String> {
    let mut c: TutorConfig = read_config(a.config.as_deref())?;
    c.default_density = a.density.unwrap_or(c.default_density);
    c.multiple_choice_share = a.multiple_choice_share.unwrap_or(c.multiple_choice_share);
    if !(0.0..=1.0).contains(&c.multiple_choice_share) {
        return Err("multiple choice share must be within [0, 1]".into());
    }
    Ok(c)
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::FAILURE
}

pub fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Pack {
            command: PackCommand::Validate { path },
        } => {
            let (ok, report) = cmd_pack_validate(&path);
            if ok {
                print!("{report}");
                ExitCode::SUCCESS
            } else {
                eprint!("{report}");
                ExitCode::FAILURE
            }
        }
        Command::Annotate { pack, text } => match cmd_annotate(&pack, &text) {
            Ok(json) => {
                print!("{json}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Simulate(a) => {
            let spec = match simulation_spec(&a) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            match cmd_simulate(&spec, a.log.as_deref()) {
                Ok(json) => {
                    print!("{json}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Serve(a) => serve(&a),
    }
}

fn serve(a: &ServeArgs) -> ExitCode {
    let config = match tutor_config(a) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let tutor = match Tutor::open(&a.packs, a.journal.as_deref(), config) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let app = router(Arc::new(Mutex::new(tutor)));
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let result = runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(a.addr).await?;
        eprintln!("listening on http://{}/api/v1", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
