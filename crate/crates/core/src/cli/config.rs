//! Flat `key = value` configuration files.
//!
//! Each key names a long flag of the chosen subcommand (`rho-x = 0.1` for
//! `--rho-x 0.1`). Values are appended to the command line only for flags
//! that are not already given there, so explicit flags always win.
//! `true` / `false` switch boolean flags on or leave them off.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{Error, Result};

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::InvalidParams(format!("config line {}: expected key = value", lineno + 1)));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::InvalidParams(format!("config line {}: empty key", lineno + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParams(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Value of `--config` in `args`, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// `args` with the config entries whose flags are absent appended.
pub fn merge(args: &[OsString], entries: &[(String, String)]) -> Vec<OsString> {
    let given = |key: &str| {
        let flag = format!("--{key}");
        let prefixed = format!("--{key}=");
        args.iter().any(|a| {
            let s = a.to_string_lossy();
            s == flag || s.starts_with(&prefixed)
        })
    };
    let mut out = args.to_vec();
    for (k, v) in entries {
        if k == "config" || given(k) {
            continue;
        }
        match v.as_str() {
            "true" => out.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{k}").into());
                out.push(v.into());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_and_merges() {
        let cfg = parse_config("# comment\nalpha = 0.5\nrho_w=0.1\n\nwith-mc = true\nlog = false\n").unwrap();
        assert_eq!(cfg.len(), 4);
        let args = os(&["sparse-lab", "mse-curve", "--alpha", "0.7"]);
        let merged = merge(&args, &cfg);
        assert_eq!(merged, os(&["sparse-lab", "mse-curve", "--alpha", "0.7", "--rho-w", "0.1", "--with-mc"]));
    }

    #[test]
    fn finds_config_flag() {
        assert_eq!(config_path(&os(&["x", "--config", "a.cfg"])), Some("a.cfg".into()));
        assert_eq!(config_path(&os(&["x", "--config=b.cfg"])), Some("b.cfg".into()));
        assert_eq!(config_path(&os(&["x"])), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config("alpha 0.5").is_err());
        assert!(parse_config("= 3").is_err());
    }
}
