//! `--config` support: a JSON object whose keys are long flag names supplies
//! defaults for flags not given on the command line.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::ArgMatches;
use serde_json::Value;

use crate::error::{CliError, Result};

/// Arguments to append so that config values fill in the flags the command
/// line left unset. Keys may use dashes or underscores.
pub fn config_args(path: &Path, matches: &ArgMatches) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
    let Value::Object(map) = value else {
        return Err(CliError::Data(format!("{}: expected a JSON object of flag values", path.display())));
    };
    let sub = matches.subcommand().map(|(_, m)| m);
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = key.replace('_', "-");
        let id = key.replace('-', "_");
        if id == "config" {
            return Err(CliError::Usage(format!("{}: config files cannot nest", path.display())));
        }
        let given = [Some(matches), sub]
            .into_iter()
            .flatten()
            .any(|m| m.try_contains_id(&id).unwrap_or(false) && m.value_source(&id) == Some(ValueSource::CommandLine));
        if given {
            continue;
        }
        match v {
            Value::Bool(true) => out.push(format!("--{flag}").into()),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => out.push(format!("--{flag}={n}").into()),
            Value::String(s) => out.push(format!("--{flag}={s}").into()),
            other => {
                return Err(CliError::Usage(format!(
                    "{}: value of {key:?} must be a string, number or boolean, got {other}",
                    path.display()
                )))
            }
        }
    }
    Ok(out)
}
