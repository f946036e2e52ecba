mod args;
mod commands;
mod render;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use lifecover::config::ConfigDocument;
use serde::Serialize;
use serde_json::{json, Value};

use args::{Cli, Command, Format};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters: exit 2.
    Input(String),
    /// A verification ran and did not pass: exit 1.
    Verification(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verification(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Verification(m) => f.write_str(m),
        }
    }
}

impl From<lifecover::Error> for CliError {
    fn from(e: lifecover::Error) -> Self {
        let msg = match e.field() {
            Some(field) => format!("{field}: {e}"),
            None => e.to_string(),
        };
        match e {
            lifecover::Error::VerificationFailed { .. } => CliError::Verification(msg),
            _ => CliError::Input(msg),
        }
    }
}

impl From<lifecover_api::ApiError> for CliError {
    fn from(e: lifecover_api::ApiError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Provenance stored with every output.
#[derive(Debug, Serialize)]
struct RunManifest {
    command: String,
    config_path: Option<String>,
    parameters: ConfigDocument,
    arguments: Value,
    seed: Option<u64>,
    output_paths: Vec<String>,
    version: String,
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn serve(bind: &str) -> Result<(), CliError> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::input(e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|e| CliError::input(format!("cannot bind {bind}: {e}")))?;
        eprintln!(
            "listening on http://{}",
            listener.local_addr().map_err(|e| CliError::input(e.to_string()))?
        );
        axum::serve(listener, lifecover_api::router())
            .await
            .map_err(|e| CliError::input(e.to_string()))
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Serve(a) = &cli.command {
        return serve(&a.bind);
    }
    let doc = scenario::build_document(cli.config.as_deref(), &cli.overrides)?;
    let (name, arguments, seed) = match &cli.command {
        Command::Solve => ("solve", json!({}), None),
        Command::Calibrate => ("calibrate", json!({}), None),
        Command::Sweep(a) => (
            "sweep",
            json!({ "param": a.param, "from": a.from, "to": a.to, "steps": a.steps }),
            None,
        ),
        Command::Ruin(a) => ("ruin", json!({ "paths": a.paths, "dt": a.dt }), Some(cli.seed)),
        Command::Simulate(a) => ("simulate", json!({ "paths": a.paths, "dt": a.dt }), Some(cli.seed)),
        Command::Verify(a) => (
            "verify",
            json!({ "tol": a.tol, "n_w": a.n_w, "n_d": a.n_d, "fd": a.fd }),
            None,
        ),
        Command::Serve(_) => unreachable!("handled above"),
    };
    let report = match &cli.command {
        Command::Solve => commands::solve(&doc),
        Command::Calibrate => commands::calibrate(&doc),
        Command::Sweep(a) => commands::sweep(&doc, a),
        Command::Ruin(a) => commands::ruin(&doc, a, cli.seed),
        Command::Simulate(a) => commands::simulate(&doc, a, cli.seed),
        Command::Verify(a) => commands::verify(&doc, a),
        Command::Serve(_) => unreachable!("handled above"),
    }?;

    let mut output_paths = Vec::new();
    if let Some(out) = &cli.out {
        output_paths.push(out.display().to_string());
        if cli.format != Format::Json {
            output_paths.push(sidecar(out).display().to_string());
        }
    }
    let manifest = RunManifest {
        command: name.into(),
        config_path: cli.config.as_ref().map(|p| p.display().to_string()),
        parameters: doc,
        arguments: json!({ "format": format!("{:?}", cli.format).to_lowercase(), "command": arguments }),
        seed,
        output_paths,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    let pretty = |v: &Value| serde_json::to_string_pretty(v).expect("json values serialize") + "\n";
    let text = match cli.format {
        Format::Json => pretty(&json!({ "manifest": manifest, "result": report.result })),
        Format::Csv => report.csv,
        Format::Table => report.table,
    };
    match &cli.out {
        Some(out) => {
            write(out, &text)?;
            if cli.format != Format::Json {
                write(&sidecar(out), &pretty(&json!(manifest)))?;
            }
        }
        None => print!("{text}"),
    }
    match report.failure {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
