//! `fock-filter <experiment> [--preset NAME] [--config FILE] [--seed U64]
//! [--out DIR] [--format table|structured]`
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure.

mod config;
mod error;
mod presets;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fock_filter::table::Table;
use fock_filter::Exec;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::run::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Comma-separated tables (`.csv`).
    Table,
    /// JSON documents (`.json`).
    Structured,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Table => "csv",
            Format::Structured => "json",
        }
    }

    fn render(self, t: &Table) -> String {
        match self {
            Format::Table => t.to_delimited(),
            Format::Structured => t.to_structured(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fock-filter", version, about = "Photon-number filter experiments")]
struct Cli {
    experiment: Experiment,
    /// Named parameter set (see --help for the list); defaults per experiment.
    #[arg(long, conflicts_with = "config", help = preset_help())]
    preset: Option<String>,
    /// TOML experiment config, e.g. a manifest written by an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for result files and the run manifest; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

fn preset_help() -> String {
    format!("Named parameter set: {}", presets::NAMES.join(", "))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => {
            presets::lookup(name).ok_or_else(|| CliError::config("--preset", format!("unknown preset `{name}`")))?
        }
        (None, None) => presets::lookup(presets::default_for(cli.experiment)).expect("default preset exists"),
    };
    if cfg.experiment != cli.experiment {
        return Err(CliError::config(
            "experiment",
            format!(
                "config describes `{}`, command line asked for `{}`",
                cfg.experiment.name(),
                cli.experiment.name()
            ),
        ));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.resolve()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::config("--out", format!("cannot write {}: {e}", path.display())))
}

fn emit(report: &Report, cfg: &ExperimentConfig, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            for (name, table) in &report.tables {
                write_file(dir, &format!("{name}.{}", format.extension()), &format.render(table))?;
            }
            write_file(dir, "manifest.toml", &cfg.to_toml())?;
            eprintln!("wrote {} result file(s) and manifest.toml to {}", report.tables.len(), dir.display());
        }
        None => {
            let mut text = String::new();
            match format {
                Format::Table => {
                    for (i, (name, table)) in report.tables.iter().enumerate() {
                        if i > 0 {
                            text.push('\n');
                        }
                        text.push_str(&format!("# {name}\n{}", table.to_delimited()));
                    }
                }
                Format::Structured => {
                    text.push_str("{\n");
                    for (i, (name, table)) in report.tables.iter().enumerate() {
                        let sep = if i + 1 == report.tables.len() { "" } else { "," };
                        let body = table.to_structured();
                        text.push_str(&format!("\"{name}\": {}{sep}\n", body.trim_end()));
                    }
                    text.push_str("}\n");
                }
            }
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(CliError::config("stdout", e.to_string()));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::config("--out", format!("cannot create {}: {e}", dir.display())))?;
    }
    let report = run::run(&cfg, Exec::default())?;
    emit(&report, &cfg, cli.out.as_deref(), cli.format)?;
    match report.failure {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fock-filter: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
