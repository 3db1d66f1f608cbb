//! `quadopo`: writes the data behind each figure as CSV, with a JSON
//! manifest per run. Exit status 0 on success, 2 for invalid input, 3 for
//! numerical failures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use quadopo::config::ParamsFile;
use quadopo::{Error, Result, SystemParams};
use serde_json::Value;

use args::{Cli, Command};
use output::{write_json, Manifest, Outputs};

fn run(cli: &Cli, argv: Vec<String>) -> Result<()> {
    let mut out = Outputs::new(&cli.common.out)?;
    let (name, file, params, settings) = match &cli.command {
        Command::Threshold => {
            let (file, p) = commands::resolve_params(&cli.common, None)?;
            let s = commands::threshold(&p, &mut out)?;
            ("threshold", file, p, s)
        }
        Command::Undepleted(a) => {
            let (file, p) = commands::resolve_params(&cli.common, None)?;
            ("undepleted", file, p, commands::undepleted(a, &mut out)?)
        }
        Command::Spectra(a) => {
            let (file, p) = commands::resolve_params(&cli.common, Some(0.987))?;
            ("spectra", file, p, commands::spectra(&p, a, &mut out)?)
        }
        Command::Scan(a) => {
            let (file, p) = commands::resolve_params(&cli.common, None)?;
            (
                "scan",
                file,
                p,
                commands::scan(&p, a, cli.common.inject, &mut out)?,
            )
        }
        Command::Cluster(a) => {
            let (file, p) = commands::resolve_params(&cli.common, None)?;
            ("cluster", file, p, commands::cluster(a, &mut out)?)
        }
        Command::Posp(a) => {
            let default_ratio = if a.cavity { Some(0.6472) } else { None };
            let (file, p) = commands::resolve_params(&cli.common, default_ratio)?;
            ("posp", file, p, commands::posp(&p, a, &mut out)?)
        }
        Command::AllFigures(a) => {
            let (file, p) = commands::resolve_params(&cli.common, None)?;
            (
                "all-figures",
                file,
                p,
                commands::all_figures(&cli.common, a, &mut out)?,
            )
        }
    };
    let manifest_name = format!("{name}.manifest.json");
    let outputs = out.written.clone();
    let manifest = Manifest {
        program: env!("CARGO_PKG_NAME"),
        code_version: env!("CARGO_PKG_VERSION"),
        subcommand: name.to_string(),
        argv,
        params: params_value(&file, &params)?,
        settings,
        outputs,
    };
    write_json(&out.path(&manifest_name), &manifest)
}

fn params_value(file: &ParamsFile, resolved: &SystemParams<f64>) -> Result<Value> {
    let to = |e: serde_json::Error| Error::Config(e.to_string());
    Ok(serde_json::json!({
        "input": serde_json::to_value(file).map_err(to)?,
        "resolved": serde_json::to_value(resolved).map_err(to)?,
    }))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else {
        3
    }
}
