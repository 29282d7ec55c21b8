//! `--config FILE`: plain `key = value` lines, spliced in front of the
//! subcommand's own flags so that flags given on the command line win.

use std::ffi::OsString;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected `key = value`", n + 1))?;
        let (k, v) = (k.trim(), v.trim().trim_matches('"'));
        if k.is_empty() {
            return Err(format!("config line {}: empty key", n + 1));
        }
        pairs.push((k.trim_start_matches("--").to_owned(), v.to_owned()));
    }
    Ok(pairs)
}

/// Rewrites `argv` with the config entries inserted right after the subcommand.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => path = Some(it.next().ok_or("--config needs a file")?),
            Some(s) if s.starts_with("--config=") => path = Some(OsString::from(&s["--config=".len()..])),
            _ => rest.push(a),
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let pairs = parse(&text)?;
    // the subcommand is the first argument after the program name that is not a flag
    let Some(sub) = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|i| i + 1) else {
        return Ok(rest);
    };
    let injected = pairs.into_iter().flat_map(|(k, v)| [OsString::from(format!("--{k}")), OsString::from(v)]);
    let mut out: Vec<OsString> = rest[..=sub].to_vec();
    out.extend(injected);
    out.extend(rest[sub + 1..].iter().cloned());
    Ok(out)
}
