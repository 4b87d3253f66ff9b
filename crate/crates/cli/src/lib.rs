//! Command-line entry points and the session server for iwisdm datasets.

pub mod args;
pub mod commands;
pub mod server;
pub mod session;

use std::io;
use std::path::PathBuf;
use std::sync::Arc;

use iwisdm::dataset::DatasetError;
use iwisdm::harness::HarnessError;
use iwisdm::presets::PresetError;
use thiserror::Error;

use args::{Cli, Command, ServeArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("generation failed: {0}")]
    Generation(#[from] PresetError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Scoring(#[from] HarnessError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("bad stored session {0}")]
    Session(String),
    #[error("server: {0}")]
    Server(io::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Runs one parsed command, returning what to print.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Generate(a) => Ok(commands::generate(&a)?.summary()),
        Command::Preset(a) => {
            let done = commands::preset(&a)?;
            let mut out = done.summary();
            if let Some(first) = done.dataset.trials.first() {
                out.push_str(&format!("\n{}", first.instruction));
            }
            Ok(out)
        }
        Command::Singleframe(a) => Ok(commands::singleframe(&a)?.summary()),
        Command::Score(a) => {
            let (report, path) = commands::score_command(&a)?;
            Ok(format!("{}\nreport written to {}", report.table(), path.display()))
        }
        Command::Serve(a) => serve(&a).map(|_| String::new()),
    }
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let state = Arc::new(server::AppState::open(&args.datasets, &args.run_dir)?);
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::Server)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.addr)
            .await
            .map_err(CliError::Server)?;
        eprintln!("serving {} on http://{}", args.datasets.display(), args.addr);
        axum::serve(listener, server::router(state))
            .await
            .map_err(CliError::Server)
    })
}
