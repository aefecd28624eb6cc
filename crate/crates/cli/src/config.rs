//! `--config FILE` support: TOML keys are turned into flags and spliced in
//! after the subcommand name, skipping any flag already on the command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, CommandFactory};

use crate::args::Cli;
use crate::error::{CliError, Result};

fn config_path(argv: &[OsString]) -> Result<Option<PathBuf>> {
    let mut iter = argv.iter().skip(1);
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return iter
                .next()
                .map(|v| Some(PathBuf::from(v)))
                .ok_or_else(|| CliError::usage("--config needs a file"));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Ok(Some(PathBuf::from(v)));
        }
    }
    Ok(None)
}

fn flag_tokens(flag: &str, takes_value: bool, value: &toml::Value, out: &mut Vec<OsString>) -> Result<()> {
    let scalar = |v: &toml::Value| -> Result<String> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            toml::Value::Boolean(b) => Ok(b.to_string()),
            other => Err(CliError::usage(format!(
                "config key `{flag}` has unsupported value {other}"
            ))),
        }
    };
    match value {
        toml::Value::Boolean(b) if !takes_value => {
            if *b {
                out.push(format!("--{flag}").into());
            }
        }
        toml::Value::Array(items) => {
            for item in items {
                out.push(format!("--{flag}").into());
                out.push(scalar(item)?.into());
            }
        }
        v => {
            out.push(format!("--{flag}").into());
            out.push(scalar(v)?.into());
        }
    }
    Ok(())
}

/// Returns `argv` with flags from the config file inserted after the subcommand.
pub fn expand_args(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;

    let cli = Cli::command();
    let names: Vec<String> = cli.get_subcommands().map(|c| c.get_name().to_owned()).collect();
    for key in table.keys() {
        if table[key].is_table() && !names.contains(key) {
            return Err(CliError::usage(format!(
                "config {}: unknown command table [{key}]",
                path.display()
            )));
        }
    }
    let Some(at) = argv
        .iter()
        .position(|a| names.iter().any(|n| a.to_str() == Some(n.as_str())))
    else {
        return Ok(argv);
    };
    let name = argv[at].to_string_lossy().into_owned();
    let sub = cli.find_subcommand(&name).expect("known subcommand");

    let given = |flag: &str| {
        argv.iter().any(|a| {
            let s = a.to_string_lossy();
            s == format!("--{flag}") || s.starts_with(&format!("--{flag}="))
        })
    };
    let arg_for = |flag: &str| {
        sub.get_arguments()
            .find(|a| a.get_long() == Some(flag))
            .map(|a| !matches!(a.get_action(), ArgAction::SetTrue | ArgAction::Count))
    };

    let mut injected = Vec::new();
    let global = table.iter().filter(|(_, v)| !v.is_table());
    for (key, value) in global {
        let flag = key.replace('_', "-");
        if flag == "config" {
            continue;
        }
        if let Some(takes_value) = arg_for(&flag) {
            if !given(&flag) {
                flag_tokens(&flag, takes_value, value, &mut injected)?;
            }
        }
    }
    if let Some(section) = table.get(&name).and_then(toml::Value::as_table) {
        for (key, value) in section {
            let flag = key.replace('_', "-");
            let takes_value = arg_for(&flag).ok_or_else(|| {
                CliError::usage(format!(
                    "config {}: `{name}` has no flag --{flag}",
                    path.display()
                ))
            })?;
            if !given(&flag) {
                flag_tokens(&flag, takes_value, value, &mut injected)?;
            }
        }
    }
    let mut out = argv[..=at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}
