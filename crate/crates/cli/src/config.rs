//! `--config <file>`: a JSON object whose keys are long flag names (with `-`
//! or `_`) is expanded into ordinary arguments. Flags given on the command
//! line win over the file. A `"command"` key supplies the subcommand when
//! none is given.

use std::collections::HashSet;
use std::ffi::OsString;
use std::path::PathBuf;

use serde_json::Value;

use crate::error::CliError;

pub const COMMANDS: [&str; 7] = [
    "simulate",
    "estimate",
    "select-r",
    "mc-study",
    "ruin",
    "curve",
    "subadd-check",
];

const SHORT_FLAGS: [(char, &str); 3] = [('o', "out"), ('v', "verbose"), ('q', "quiet")];

fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<PathBuf>, CliError> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            if i + 1 >= args.len() {
                return Err(CliError::Usage("--config needs a file path".into()));
            }
            let path = PathBuf::from(args.remove(i + 1));
            args.remove(i);
            return Ok(Some(path));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            let path = PathBuf::from(p);
            args.remove(i);
            return Ok(Some(path));
        }
        i += 1;
    }
    Ok(None)
}

fn given_flags(args: &[OsString]) -> HashSet<String> {
    let mut set = HashSet::new();
    for a in args.iter().skip(1) {
        let s = a.to_string_lossy();
        if let Some(long) = s.strip_prefix("--") {
            set.insert(long.split('=').next().unwrap_or("").to_string());
        } else if let Some(short) = s.strip_prefix('-') {
            for (c, long) in SHORT_FLAGS {
                if short.starts_with(c) {
                    set.insert(long.to_string());
                }
            }
        }
    }
    set
}

fn scalar(key: &str, v: &Value) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(CliError::Usage(format!(
            "config key `{key}`: unsupported value {v}"
        ))),
    }
}

fn flags_from_object(
    obj: &serde_json::Map<String, Value>,
    skip: &HashSet<String>,
) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (key, v) in obj {
        if key == "command" {
            continue;
        }
        let flag = key.replace('_', "-");
        if flag == "config" {
            return Err(CliError::Usage(
                "config files cannot include other config files".into(),
            ));
        }
        if skip.contains(&flag) {
            continue;
        }
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(format!("--{flag}").into()),
            Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(|x| scalar(key, x))
                    .collect::<Result<Vec<_>, _>>()?;
                out.push(format!("--{flag}={}", parts.join(",")).into());
            }
            other => out.push(format!("--{flag}={}", scalar(key, other)?).into()),
        }
    }
    Ok(out)
}

/// Rewrite `args` (including the program name) with the config file, if any,
/// folded in. The result is `[program, subcommand, config flags, user flags]`.
pub fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = take_config_path(&mut args)? else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
    let json: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("parsing config {}", path.display()), e))?;
    let Value::Object(obj) = json else {
        return Err(CliError::Usage(format!(
            "config {} must be a JSON object",
            path.display()
        )));
    };
    let skip = given_flags(&args);
    let config_flags = flags_from_object(&obj, &skip)?;

    let program = if args.is_empty() {
        OsString::from("ruin-adjust")
    } else {
        args.remove(0)
    };
    let pos = args.iter().position(|a| COMMANDS.iter().any(|c| a == c));
    let (sub, before, after) = match pos {
        Some(p) => {
            let after = args.split_off(p + 1);
            let sub = args.pop().expect("subcommand present");
            (sub, args, after)
        }
        None => match obj.get("command") {
            Some(Value::String(c)) => (OsString::from(c), args, Vec::new()),
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "config key `command` must be a string, got {other}"
                )))
            }
            None => {
                return Err(CliError::Usage(
                    "no subcommand given on the command line or in the config".into(),
                ))
            }
        },
    };
    let mut out = vec![program, sub];
    out.extend(config_flags);
    out.extend(before);
    out.extend(after);
    Ok(out)
}
