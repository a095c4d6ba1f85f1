mod cli;
mod report;

use std::path::Path;
use std::process::ExitCode;

use attractorlab::harness::{load_config, run_scenario, RunOptions};
use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use cli::{synthesize, Cli, Command, Common};

const SEED_ENV: &str = "ATTRACTORLAB_SEED";

const USAGE: u8 = 1;
const RUNTIME: u8 = 2;

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| format!("{SEED_ENV}=`{s}` is not an unsigned 64-bit integer")),
        Err(_) => Ok(None),
    }
}

/// Applies `--seed`, then `ATTRACTORLAB_SEED`, then `--output-dir` on top of
/// a config document.
fn apply_overrides(doc: &mut Value, common: &Common) -> Result<(), String> {
    let Value::Object(obj) = doc else {
        return Ok(());
    };
    if let Some(seed) = common.master_seed.map(Some).map_or_else(env_seed, Ok)? {
        obj.insert("master_seed".into(), seed.into());
    }
    if let Some(dir) = &common.output_dir {
        obj.insert("output_dir".into(), dir.to_string_lossy().into_owned().into());
    }
    Ok(())
}

fn execute(doc: &str, jobs: Option<usize>) -> ExitCode {
    let config = match load_config(doc) {
        Ok(c) => c,
        Err(e) => return fail(USAGE, e),
    };
    log::info!("running {} scenario into {}", config.kind().as_str(), config.output_dir.display());
    match run_scenario(&config, &RunOptions { jobs }) {
        Ok(out) => {
            log::info!("wrote {} files", out.manifest.files.len() + 1);
            print!("{}", report::aligned_table(&attractorlab::harness::summary_csv(&out.summary)));
            ExitCode::SUCCESS
        }
        Err(e) if e.is_config() => fail(USAGE, e),
        Err(e) => fail(RUNTIME, e),
    }
}

fn run_file(path: &Path, common: &Common, jobs: Option<usize>) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(USAGE, format!("{}: {e}", path.display())),
    };
    // Overrides only apply to documents that parse; parse errors keep their
    // original positions.
    let mut doc: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(_) => return execute(&text, jobs),
    };
    if let Err(e) = apply_overrides(&mut doc, common) {
        return fail(USAGE, e);
    }
    execute(&doc.to_string(), jobs)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();

    match &cli.command {
        Command::Run { config, common } => run_file(config, common, cli.jobs),
        Command::Report { dir } => match report::summary_table(dir) {
            Ok(table) => {
                print!("{table}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(USAGE, format!("{}: {e}", dir.join("summary.csv").display())),
        },
        command => match synthesize(command) {
            Ok(Some((obj, common))) => {
                let mut doc = Value::Object(obj);
                if let Err(e) = apply_overrides(&mut doc, common) {
                    return fail(USAGE, e);
                }
                if let Value::Object(obj) = &mut doc {
                    obj.entry("master_seed").or_insert(0.into());
                }
                execute(&doc.to_string(), cli.jobs)
            }
            Ok(None) => unreachable!("run and report handled above"),
            Err(cli::UsageError(message)) => fail(USAGE, message),
        },
    }
}
