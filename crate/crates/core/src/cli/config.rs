//! `key = value` config files merged beneath flags and environment.
//!
//! Keys are long flag names (`lambda`, `batch-size`; underscores are accepted
//! for dashes). Blank lines and lines starting with `#` are ignored. A key
//! only applies to subcommands that have that flag; a value is used only
//! when neither the flag nor its `STYLERANK_*` variable is set.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::error::{Error, Result};

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::MalformedRow {
            line: n + 1,
            message: "expected key = value".into(),
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::MalformedRow {
                line: n + 1,
                message: "empty key".into(),
            });
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    std::env::var_os("STYLERANK_CONFIG")
}

/// Appends `--key value` for config entries the command line and
/// environment leave unset.
pub fn apply_config<C: CommandFactory>(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries = parse_config(&text)?;

    let root = C::command();
    let Some(sub) = args
        .iter()
        .skip(1)
        .find_map(|a| root.find_subcommand(a.to_string_lossy().as_ref()))
    else {
        return Ok(args);
    };
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| {
            a.to_str()?
                .strip_prefix("--")
                .map(|s| s.split('=').next().unwrap_or(s).to_string())
        })
        .collect();

    let mut out = args.clone();
    for (key, value) in entries {
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            continue;
        };
        if given.contains(&key) {
            continue;
        }
        if let Some(env) = arg.get_env() {
            if std::env::var_os(env).is_some() {
                continue;
            }
        }
        let takes_value = arg.get_action().takes_values();
        if takes_value {
            out.push(format!("--{key}").into());
            out.push(value.into());
        } else if matches!(value.as_str(), "true" | "1" | "yes") {
            out.push(format!("--{key}").into());
        }
    }
    Ok(out)
}
