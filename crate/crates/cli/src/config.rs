//! `--config` files: flat `key = value` lines whose keys are long flag names.
//! Values are appended to the command line for every flag the user did not
//! pass explicitly, so flags always win.

use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, Command};

use crate::error::Failure;

const GLOBAL_VALUE_FLAGS: [&str; 2] = ["--config", "--run-log"];

pub fn parse(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = key.trim().trim_start_matches("--").to_owned();
        if key.is_empty() {
            return Err(Failure::usage(format!("config line {}: empty key", n + 1)));
        }
        pairs.push((key, value.trim().to_owned()));
    }
    Ok(pairs)
}

pub fn read(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Data(anyhow::Error::new(e).context(format!("reading config {}", path.display()))))?;
    parse(&text)
}

/// Value of `--config` in a raw argument list.
pub fn find_config_flag(argv: &[OsString]) -> Option<OsString> {
    find_flag_value(argv, "--config")
}

pub fn find_flag_value(argv: &[OsString], flag: &str) -> Option<OsString> {
    let prefix = format!("{flag}=");
    let mut iter = argv.iter().skip(1);
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == flag {
            return iter.next().cloned();
        }
        if let Some(v) = s.strip_prefix(&prefix) {
            return Some(v.into());
        }
    }
    None
}

/// First positional token, which names the subcommand.
pub fn find_subcommand(argv: &[OsString]) -> Option<String> {
    let mut iter = argv.iter().skip(1);
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if GLOBAL_VALUE_FLAGS.contains(&s.as_ref()) {
            iter.next();
            continue;
        }
        if !s.starts_with('-') {
            return Some(s.into_owned());
        }
    }
    None
}

fn flag_present(argv: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let prefix = format!("{flag}=");
    argv.iter().skip(1).any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&prefix)
    })
}

/// `argv` extended with the config values for flags it does not set.
pub fn inject(argv: &[OsString], pairs: &[(String, String)], command: &Command) -> Result<Vec<OsString>, Failure> {
    let sub = find_subcommand(argv).and_then(|name| command.find_subcommand(&name).cloned());
    let mut out = argv.to_vec();
    for (key, value) in pairs {
        if key == "config" {
            return Err(Failure::usage("a config file cannot set `config`"));
        }
        let arg = sub
            .iter()
            .flat_map(|s| s.get_arguments())
            .chain(command.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| Failure::usage(format!("unknown config key `{key}`")))?;
        if flag_present(argv, key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "1" | "yes" => out.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                other => return Err(Failure::usage(format!("config key `{key}` expects true/false, got `{other}`"))),
            },
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_lines() {
        let p = parse("# comment\nepochs = 3\n--seed=9\n\n").unwrap();
        assert_eq!(p, vec![("epochs".into(), "3".into()), ("seed".into(), "9".into())]);
        assert!(parse("epochs 3").is_err());
    }

    #[test]
    fn flags_win_and_unknown_keys_fail() {
        let cmd = crate::args::Cli::command();
        let argv = os(&["ctx2vec", "--config", "c.txt", "retrofit", "--alpha", "0.9"]);
        let pairs = vec![
            ("alpha".to_string(), "0.1".to_string()),
            ("beta".to_string(), "0.2".to_string()),
            ("dynamic-weights".to_string(), "true".to_string()),
        ];
        let out = inject(&argv, &pairs, &cmd).unwrap();
        assert_eq!(out[6..], os(&["--beta", "0.2", "--dynamic-weights"])[..]);
        let bad = vec![("epochs".to_string(), "2".to_string())];
        assert!(inject(&argv, &bad, &cmd).is_err());
    }

    #[test]
    fn subcommand_after_global_flags() {
        let argv = os(&["ctx2vec", "--run-log", "x", "nn", "--word", "a"]);
        assert_eq!(find_subcommand(&argv).as_deref(), Some("nn"));
        assert_eq!(find_flag_value(&argv, "--run-log"), Some("x".into()));
    }
}
