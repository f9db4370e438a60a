//! Flat `key = value` run files.
//!
//! Keys are long flag names (`theta1`, `technical-power`, ...; underscores
//! are accepted). Blank lines and lines starting with `#` are ignored.
//! Values from the file are spliced into the argument list right after the
//! subcommand, so flags given on the command line take precedence.

use std::fs;
use std::path::Path;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", no + 1));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

pub fn render(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

fn flag_given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_value = format!("{flag}=");
    args.iter().any(|a| *a == flag || a.starts_with(&with_value))
}

/// Finds `--config PATH` in `args`, reads the file and returns the argument
/// list with its entries inserted after the subcommand at `args[sub]`.
pub fn splice(args: Vec<String>, subcommands: &[&str]) -> Result<Vec<String>, String> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let pairs = read(Path::new(&path))?;
    let Some(sub) = args.iter().position(|a| subcommands.contains(&a.as_str())) else {
        return Ok(args);
    };
    let mut out: Vec<String> = args[..=sub].to_vec();
    for (key, value) in pairs {
        if key == "config" || flag_given(&args, &key) {
            continue;
        }
        match value.as_str() {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => out.push(format!("--{key}={value}")),
        }
    }
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}

pub fn read(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}
