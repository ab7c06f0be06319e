//! Config-file support: a plain-text file of `key = value` lines mirroring
//! the command-line flags. Values from the file are injected as flags right
//! after the subcommand; keys also given explicitly on the command line are
//! skipped, so explicit flags win.

use std::fs;

/// Rewrites argv, expanding `--config FILE` into the file's flags.
pub fn inject_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut rest: Vec<String> = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(
                it.next()
                    .ok_or_else(|| "--config requires a file path".to_string())?,
            );
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };

    let text =
        fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected `key = value`", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("{path}:{}: empty key", i + 1));
        }
        let flag = format!("--{key}");
        // An explicit command-line flag overrides the file entirely.
        let given = rest
            .iter()
            .any(|a| *a == flag || a.strip_prefix(&flag).is_some_and(|r| r.starts_with('=')));
        if given {
            continue;
        }
        flags.push(flag);
        flags.push(value.trim().to_string());
    }

    // Insert after the leading program name and subcommand words (everything
    // up to the first token that looks like a flag).
    let at = rest
        .iter()
        .skip(1)
        .position(|a| a.starts_with('-'))
        .map(|p| p + 1)
        .unwrap_or(rest.len());
    let mut out = rest;
    out.splice(at..at, flags);
    Ok(out)
}
