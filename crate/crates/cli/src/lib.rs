//! Command-line drivers for Fermat-distance graphs, spectra and clustering.
//!
//! Each subcommand has a flat set of configuration keys; every key is also a
//! `--key VALUE` flag. See [`config::Experiment::keys`].

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgMatches, Command};

use config::{Experiment, ExperimentConfig};
use error::CliError;
use output::OutDir;

fn subcommand(exp: Experiment) -> Command {
    let mut cmd = Command::new(exp.command())
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("flat key = value file; flags override it"),
        )
        .arg(
            Arg::new("out-dir")
                .long("out-dir")
                .value_name("DIR")
                .help("output directory [default: out/<experiment>]"),
        );
    for key in exp.keys() {
        let help = if key.default.is_empty() {
            key.help.to_string()
        } else {
            format!("{} [default: {}]", key.help, key.default)
        };
        cmd = cmd.arg(Arg::new(key.key).long(key.key).value_name("VALUE").help(help));
    }
    cmd
}

pub fn cli() -> Command {
    let mut exp = Command::new("exp")
        .about("multi-stage experiments")
        .subcommand_required(true);
    let mut root = Command::new("fermat")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Fermat distances, graph Laplacians and spectral clustering")
        .subcommand_required(true);
    for e in Experiment::ALL {
        if e.is_exp() {
            exp = exp.subcommand(subcommand(e));
        } else {
            root = root.subcommand(subcommand(e));
        }
    }
    root.subcommand(exp)
}

fn resolve(exp: Experiment, m: &ArgMatches) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let text = match m.get_one::<String>("config") {
        Some(path) => Some(
            std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.into(),
                source,
            })?,
        ),
        None => None,
    };
    let overrides: Vec<(String, String)> = exp
        .keys()
        .into_iter()
        .filter_map(|k| m.get_one::<String>(k.key).map(|v| (k.key.to_string(), v.clone())))
        .collect();
    let cfg = ExperimentConfig::resolve(exp, text.as_deref(), &overrides)?;
    let out = m
        .get_one::<String>("out-dir")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out").join(exp.name()));
    Ok((cfg, out))
}

/// Runs one resolved configuration, writing into `out_dir`.
pub fn execute(cfg: &ExperimentConfig, out_dir: impl Into<PathBuf>) -> Result<Vec<PathBuf>, CliError> {
    let mut out = OutDir::create(out_dir)?;
    if cfg.experiment.is_exp() {
        experiments::run(cfg, &mut out)?;
    } else {
        commands::run(cfg, &mut out)?;
    }
    Ok(out.written().to_vec())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let (name, sub) = if name == "exp" {
        sub.subcommand().expect("exp subcommand is required")
    } else {
        (name, sub)
    };
    let exp = Experiment::ALL
        .into_iter()
        .find(|e| e.command() == name)
        .expect("every subcommand maps to an experiment");
    match resolve(exp, sub).and_then(|(cfg, out)| execute(&cfg, out)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
