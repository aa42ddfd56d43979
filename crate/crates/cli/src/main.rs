use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;
use vacdrag_cli::{parse_config, run, Command, ConfigError};

/// Quantum friction between sliding bodies: guided modes, unstable hybrids,
/// friction forces and their time evolution.
#[derive(Parser)]
#[command(name = "vacdrag", version)]
struct Cli {
    /// JSON configuration file.
    config: PathBuf,
    /// Overrides the configured command.
    #[arg(long, value_enum)]
    command: Option<Command>,
    /// Overrides the configured output path; `-` writes to stdout.
    #[arg(long)]
    output: Option<String>,
    /// Worker threads.
    #[arg(long, env = "VACDRAG_THREADS")]
    threads: Option<usize>,
}

/// A failure reported as one JSON object on stderr.
struct Failure {
    kind: &'static str,
    path: Option<String>,
    message: String,
    code: u8,
}

impl Failure {
    fn config(e: ConfigError) -> Self {
        Self {
            kind: "config",
            path: e.path,
            message: e.message,
            code: 2,
        }
    }

    fn io(e: std::io::Error, path: &str) -> Self {
        Self {
            kind: "io",
            path: Some(path.to_string()),
            message: e.to_string(),
            code: 3,
        }
    }
}

fn main_inner(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure {
                kind: "config",
                path: Some("threads".into()),
                message: "must be at least 1".into(),
                code: 2,
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                kind: "config",
                path: Some("threads".into()),
                message: e.to_string(),
                code: 2,
            })?;
    }
    let path = cli.config.display().to_string();
    let text = std::fs::read_to_string(&cli.config).map_err(|e| Failure::io(e, &path))?;
    let mut config = parse_config(&text).map_err(Failure::config)?;
    if let Some(c) = cli.command {
        config.command = c;
        config.check_command().map_err(Failure::config)?;
    }
    if let Some(o) = cli.output {
        config.output = Some(o);
    }
    let table = run(&config).map_err(|e| Failure {
        kind: e.kind(),
        path: None,
        message: e.to_string(),
        code: 1,
    })?;
    let csv = table.to_csv();
    match config.output.as_deref() {
        None | Some("-") => print!("{csv}"),
        Some(out) => std::fs::write(out, csv).map_err(|e| Failure::io(e, out))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let record =
                json!({ "error": { "kind": f.kind, "path": f.path, "message": f.message } });
            eprintln!("{record}");
            ExitCode::from(f.code)
        }
    }
}
