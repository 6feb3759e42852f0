//! Flat `key = value` run configs. A config file is spliced into the argument
//! list as `--key value` pairs ahead of the explicit flags, so flags given on
//! the command line win.

use std::path::Path;

use crate::error::{AppError, Result};

/// Parses `key = value` lines; `#` starts a comment line. Keys may not repeat.
pub fn parse_flat(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| AppError::bad(format!("config line {}: expected key = value", ln + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') {
            return Err(AppError::bad(format!("config line {}: bad key {k:?}", ln + 1)));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(AppError::bad(format!("config line {}: duplicate key {k:?}", ln + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn render_flat(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// `true` becomes a bare `--key`, `false` drops the key.
pub fn to_args(pairs: &[(String, String)]) -> Vec<String> {
    let mut args = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => args.push(format!("--{k}")),
            "false" => {}
            _ => args.push(format!("--{k}={v}")),
        }
    }
    args
}

/// Removes `--config FILE` (or `--config=FILE`) from `argv` and splices the
/// file's pairs in right after the subcommand.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| AppError::bad("--config needs a file"))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| AppError::io(&path, e))?;
    let injected = to_args(&parse_flat(&text)?);
    // argv[0] is the program, argv[1] the subcommand
    let at = rest.len().min(2);
    rest.splice(at..at, injected);
    Ok(rest)
}
