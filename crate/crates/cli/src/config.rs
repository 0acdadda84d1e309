//! `key = value` config files, spliced into argv ahead of the real flags so
//! that anything given on the command line wins.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

pub fn parse(text: &str) -> Result<ConfigFile> {
    let mut out = ConfigFile::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`", i + 1);
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        if key == "command" {
            out.command = Some(value);
        } else {
            out.entries.push((key, value));
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

impl ConfigFile {
    fn flags(&self) -> Vec<OsString> {
        let mut out = Vec::new();
        for (key, value) in &self.entries {
            match value.as_str() {
                "true" => out.push(format!("--{key}").into()),
                "false" => {}
                _ => out.push(format!("--{key}={value}").into()),
            }
        }
        out
    }
}

/// Path given by `--config FILE` or `--config=FILE`.
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

/// Inserts the file's flags right after the subcommand. When the command
/// line names none, the file's command and flags go first.
pub fn splice(args: Vec<OsString>, file: &ConfigFile, commands: &[String]) -> Vec<OsString> {
    let position = args
        .iter()
        .skip(1)
        .position(|a| commands.iter().any(|c| a == c.as_str()))
        .map(|i| i + 1);
    let mut out = args;
    match (position, &file.command) {
        (Some(i), _) => {
            let tail = out.split_off(i + 1);
            out.extend(file.flags());
            out.extend(tail);
        }
        (None, Some(command)) => {
            // globals are accepted after the subcommand too
            let tail = out.split_off(1.min(out.len()));
            out.push(command.into());
            out.extend(file.flags());
            out.extend(tail);
        }
        (None, None) => out.extend(file.flags()),
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
    fn parses_keys_comments_and_booleans() {
        let cfg = parse("# scan defaults\ncommand = scan\nn = 4\nepsilon_frac=0.5 # half\nquick = true\nverbose = false\n").unwrap();
        assert_eq!(cfg.command.as_deref(), Some("scan"));
        assert_eq!(cfg.flags(), os(&["--n=4", "--epsilon-frac=0.5", "--quick"]));
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(parse("n 4\n").is_err());
    }

    #[test]
    fn file_flags_precede_command_line_flags() {
        let cfg = parse("n = 4\n").unwrap();
        let commands = vec!["scan".to_string()];
        let args = splice(
            os(&["cclab", "--threads", "2", "scan", "--n", "5"]),
            &cfg,
            &commands,
        );
        assert_eq!(
            args,
            os(&["cclab", "--threads", "2", "scan", "--n=4", "--n", "5"])
        );
    }

    #[test]
    fn command_comes_from_file_when_missing() {
        let cfg = parse("command = scan\nseed = 7\n").unwrap();
        let args = splice(os(&["cclab", "--config", "x"]), &cfg, &["scan".to_string()]);
        assert_eq!(args, os(&["cclab", "scan", "--seed=7", "--config", "x"]));
    }

    #[test]
    fn finds_config_path_in_both_spellings() {
        assert_eq!(
            config_path(&os(&["a", "--config", "f.cfg"])),
            Some("f.cfg".into())
        );
        assert_eq!(
            config_path(&os(&["a", "--config=g.cfg"])),
            Some("g.cfg".into())
        );
        assert_eq!(config_path(&os(&["a", "scan"])), None);
    }
}
