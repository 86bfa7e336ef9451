//! `key = value` config files. Every key names a long flag of the chosen
//! subcommand; flags given on the command line win over the file.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Pairs from a config file, keys normalised to flag spelling
/// (`window_years` -> `window-years`). Blank lines and `#` comments are
/// ignored.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(format!("line {}: bad key `{}`", i + 1, k.trim()));
        }
        if key == "config" {
            return Err(format!("line {}: config files cannot include other config files", i + 1));
        }
        let value = v.trim();
        let value = value.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(value);
        out.push((key, value.to_string()));
    }
    Ok(out)
}

fn flag_given(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_eq = format!("--{key}=");
    args.iter().any(|a| a.to_str().is_some_and(|s| s == flag || s.starts_with(&with_eq)))
}

fn config_path(args: &[OsString]) -> Result<Option<OsString>, CliError> {
    for (i, a) in args.iter().enumerate() {
        match a.to_str() {
            Some("--config") => {
                return args
                    .get(i + 1)
                    .cloned()
                    .map(Some)
                    .ok_or_else(|| CliError::Usage("--config needs a path".into()));
            }
            Some(s) if s.starts_with("--config=") => return Ok(Some(s["--config=".len()..].into())),
            _ => {}
        }
    }
    Ok(None)
}

/// Command line with the config file's settings spliced in right after the
/// subcommand, skipping any flag the user already gave.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(sub) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 1) else {
        return Ok(args);
    };
    let Some(path) = config_path(&args[sub + 1..])? else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config `{}`: {e}", Path::new(&path).display())))?;
    let pairs =
        parse_config(&text).map_err(|e| CliError::Usage(format!("config `{}` {e}", Path::new(&path).display())))?;
    let user = &args[sub + 1..];
    let mut injected = Vec::new();
    for (k, v) in pairs {
        if !flag_given(user, &k) {
            injected.push(OsString::from(format!("--{k}")));
            injected.push(OsString::from(v));
        }
    }
    let mut out = args[..=sub].to_vec();
    out.extend(injected);
    out.extend_from_slice(user);
    Ok(out)
}
