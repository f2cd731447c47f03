//! The `ctx2vec` command-line pipeline.
//!
//! Every stage reads and writes files, so each can be re-run on its own:
//! `prep → gen-teacher → train → retrofit → eval`, plus `nn` for inspection.
//! Each invocation appends a [`manifest::RunManifest`] to the run log,
//! whatever the outcome.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command};
use error::Failure;
use manifest::{FileLog, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

fn parse(argv: &[OsString]) -> Result<Cli, Failure> {
    let command = Cli::command();
    let argv = match config::find_config_flag(argv) {
        Some(path) => config::inject(argv, &config::read(PathBuf::from(path).as_path())?, &command)?,
        None => argv.to_vec(),
    };
    let matches = command.try_get_matches_from(argv).map_err(|e| Failure::Usage(e.into()))?;
    Cli::from_arg_matches(&matches).map_err(|e| Failure::Usage(e.into()))
}

fn seed_of(cmd: &Command) -> Option<u64> {
    match cmd {
        Command::GenTeacher(a) => Some(a.seed),
        Command::Train(a) => Some(a.seed),
        Command::Eval(a) => Some(a.seed),
        _ => None,
    }
}

fn config_of(cmd: &Command) -> serde_json::Value {
    let v = match cmd {
        Command::Prep(a) => serde_json::to_value(a),
        Command::GenTeacher(a) => serde_json::to_value(a),
        Command::Train(a) => serde_json::to_value(a),
        Command::Retrofit(a) => serde_json::to_value(a),
        Command::Eval(a) => serde_json::to_value(a),
        Command::Nn(a) => serde_json::to_value(a),
    };
    v.unwrap_or(serde_json::Value::Null)
}

fn dispatch(cmd: &Command, files: &mut FileLog) -> Result<(), Failure> {
    match cmd {
        Command::Prep(a) => commands::prep::run(a, files),
        Command::GenTeacher(a) => commands::gen_teacher::run(a, files),
        Command::Train(a) => commands::train::run(a, files),
        Command::Retrofit(a) => commands::retrofit::run(a, files),
        Command::Eval(a) => commands::eval::run(a, files),
        Command::Nn(a) => commands::nn::run(a, files),
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let started = Instant::now();
    let started_unix_secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());

    let cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(Failure::Usage(e)) => {
            if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
                if matches!(clap_err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                    let _ = clap_err.print();
                    return EXIT_OK;
                }
                let _ = clap_err.print();
            } else {
                eprintln!("error: {e:#}");
            }
            record_unparsed(&argv, "usage-error", EXIT_USAGE, &e, started, started_unix_secs);
            return EXIT_USAGE;
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            record_unparsed(&argv, "data-error", EXIT_DATA, &e, started, started_unix_secs);
            return EXIT_DATA;
        }
    };

    let mut files = FileLog::default();
    let outcome = dispatch(&cli.command, &mut files);
    let (status, exit_code, error) = match &outcome {
        Ok(()) => ("ok", EXIT_OK, None),
        Err(f) => {
            eprintln!("error: {f}");
            (f.status(), f.exit_code(), Some(f.to_string()))
        }
    };
    let (inputs, outputs) = files.digests();
    let manifest = RunManifest {
        command: cli.command.name().to_owned(),
        status: status.to_owned(),
        exit_code,
        error,
        config: config_of(&cli.command),
        inputs,
        outputs,
        seed: seed_of(&cli.command),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        started_unix_secs,
        duration_secs: started.elapsed().as_secs_f64(),
    };
    if let Err(e) = manifest.append_to(&cli.run_log) {
        eprintln!("warning: could not append to run log {}: {e}", cli.run_log.display());
    }
    exit_code
}

/// Manifest for a run whose arguments did not parse.
fn record_unparsed(
    argv: &[OsString],
    status: &str,
    exit_code: i32,
    err: &anyhow::Error,
    started: Instant,
    started_unix_secs: u64,
) {
    let run_log = config::find_flag_value(argv, "--run-log")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("ctx2vec-runs.jsonl"));
    let raw: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let manifest = RunManifest {
        command: config::find_subcommand(argv).unwrap_or_default(),
        status: status.to_owned(),
        exit_code,
        error: Some(format!("{err:#}").trim().to_owned()),
        config: serde_json::json!({ "argv": raw }),
        inputs: Default::default(),
        outputs: Default::default(),
        seed: None,
        version: env!("CARGO_PKG_VERSION").to_owned(),
        started_unix_secs,
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let _ = manifest.append_to(&run_log);
}
