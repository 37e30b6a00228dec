//! `key=value` configuration files, spliced into the argument list so that
//! clap validates them exactly like flags.

use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Syntax { line: usize, text: String },
    Key(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(e) => write!(f, "config file: {e}"),
            Self::Syntax { line, text } => write!(
                f,
                "config file line {line}: expected key=value, got `{text}`"
            ),
            Self::Key(msg) => write!(f, "config file: {msg}"),
        }
    }
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Value of `--config` anywhere in the raw arguments.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Inserts the file's entries right after the subcommand name, so that flags
/// typed later on the command line override them.
pub fn splice(args: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(ConfigError::Io)?;
    let entries = parse(&text)?;

    let cmd = Cli::command();
    let Some((pos, sub)) = args.iter().enumerate().skip(1).find_map(|(i, a)| {
        cmd.find_subcommand(a.to_string_lossy().as_ref())
            .map(|s| (i, s.clone()))
    }) else {
        // No subcommand: let clap report it.
        return Ok(args);
    };

    let mut extra = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(ConfigError::Key("`config` cannot be nested".into()));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| {
                ConfigError::Key(format!("unknown key `{key}` for `{}`", sub.get_name()))
            })?;
        if arg.get_action().takes_values() {
            extra.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value.as_str() {
                "true" => extra.push(OsString::from(format!("--{key}"))),
                "false" => {}
                _ => {
                    return Err(ConfigError::Key(format!(
                        "`{key}` expects true or false, got `{value}`"
                    )))
                }
            }
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, extra);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_and_skips_comments() {
        let e = parse("# c\n\nn = 1024\nfunction=ramp\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("n".into(), "1024".into()),
                ("function".into(), "ramp".into())
            ]
        );
        assert!(matches!(
            parse("oops"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        std::fs::write(&p, "n=512\nraw-u=true\ntruncate-beta=false\n").unwrap();
        let args = os(&[
            "wavereg",
            "--config",
            p.to_str().unwrap(),
            "estimate",
            "--n",
            "256",
        ]);
        let out = splice(args).unwrap();
        let strs: Vec<String> = out
            .iter()
            .map(|s| s.to_string_lossy().into_owned())
            .collect();
        assert_eq!(&strs[4..], ["--n=512", "--raw-u", "--n", "256"]);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        std::fs::write(&p, "bogus=1\n").unwrap();
        let args = os(&["wavereg", "simulate", "--config", p.to_str().unwrap()]);
        assert!(matches!(splice(args), Err(ConfigError::Key(_))));
    }
}
