//! Command-line front end: Netpbm image I/O, experiment configuration,
//! experiment drivers and CSV traces.

pub mod config;
pub mod error;
pub mod experiment;
pub mod netpbm;
pub mod trace;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgAction, Command};

use config::{ExperimentConfig, Mode, KEYS};
use error::CliError;

fn command() -> Command {
    let modes: Vec<&'static str> = Mode::ALL.iter().map(|m| m.as_str()).collect();
    let mut cmd = Command::new("splitkit")
        .about("Primal-dual resolvent splitting experiments")
        .arg(
            Arg::new("mode")
                .help("experiment to run")
                .value_parser(clap::builder::PossibleValuesParser::new(modes)),
        )
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("key = value file applied before command-line overrides"),
        );
    for &(key, help) in KEYS.iter().filter(|(k, _)| *k != "mode") {
        cmd = cmd.arg(
            Arg::new(key)
                .long(key)
                .value_name("VALUE")
                .action(ArgAction::Set)
                .help(help),
        );
    }
    cmd
}

fn configure(matches: &clap::ArgMatches) -> error::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(Mode::Deblur);
    let mut mode_given = false;
    if let Some(path) = matches.get_one::<PathBuf>("config") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        mode_given = text
            .lines()
            .any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("mode"));
        cfg.apply_text(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    if let Some(mode) = matches.get_one::<String>("mode") {
        cfg.set("mode", mode)?;
        mode_given = true;
    }
    if !mode_given {
        return Err(CliError::Config("no mode given".into()));
    }
    for &(key, _) in KEYS.iter().filter(|(k, _)| *k != "mode") {
        if let Some(value) = matches.get_one::<String>(key) {
            cfg.set(key, value)?;
        }
    }
    Ok(cfg)
}

/// Parses `args` (including the program name), runs the experiment and
/// returns the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match configure(&matches).and_then(|cfg| experiment::run_experiment(&cfg)) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("splitkit: {e}");
            e.exit_code()
        }
    }
}
