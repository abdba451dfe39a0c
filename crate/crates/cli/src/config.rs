//! `--config PATH` support: `key=value` lines become long flags inserted
//! right after the subcommand name, ahead of the user's own flags, so the
//! command line overrides the file.

use std::collections::HashSet;

use crate::Failure;

/// Flags that exclude each other; a command-line choice of one drops the
/// other from the file.
const EXCLUSIVE: &[(&str, &str)] = &[("levels", "encoding-file")];

fn take_config_path(args: &mut Vec<String>) -> Result<Option<String>, Failure> {
    let mut found = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err(Failure::Usage("--config needs a path".into()));
            }
            found = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(path) = args[i].strip_prefix("--config=") {
            found = Some(path.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(found)
}

pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| Failure::Usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(Failure::Usage(format!("config line {}: empty key", n + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn expand(mut args: Vec<String>, cmd: &clap::Command) -> Result<Vec<String>, Failure> {
    let Some(path) = take_config_path(&mut args)? else {
        return Ok(args);
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| Failure::Domain(format!("cannot read config {path}: {e}")))?;
    let pairs = parse_pairs(&text)?;

    let Some((pos, sub)) = args.iter().enumerate().skip(1).find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s)))
    else {
        // no subcommand: let the parser report it
        return Ok(args);
    };
    let known_anywhere: HashSet<&str> =
        cmd.get_subcommands().flat_map(|s| s.get_arguments().filter_map(|a| a.get_long())).collect();
    let on_command_line: HashSet<&str> =
        args[pos + 1..].iter().filter_map(|a| a.strip_prefix("--")).map(|a| a.split('=').next().unwrap_or(a)).collect();

    let mut injected = Vec::new();
    for (key, value) in &pairs {
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            if known_anywhere.contains(key.as_str()) {
                continue;
            }
            return Err(Failure::Usage(format!("unknown config key `{key}`")));
        };
        // list-valued flags would append rather than replace
        let shadowed = on_command_line.contains(key.as_str())
            || EXCLUSIVE
                .iter()
                .any(|&(a, b)| (key == a && on_command_line.contains(b)) || (key == b && on_command_line.contains(a)));
        if shadowed {
            continue;
        }
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}"));
            injected.push(value.clone());
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => injected.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                other => return Err(Failure::Usage(format!("config key `{key}` is a switch, got `{other}`"))),
            }
        }
    }
    args.splice(pos + 1..pos + 1, injected);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn pairs_skip_comments() {
        let p = parse_pairs("# defaults\neta = 0.5\n\n--dim=16 # small\n").ok().unwrap();
        assert_eq!(p, vec![("eta".into(), "0.5".into()), ("dim".into(), "16".into())]);
        assert!(matches!(parse_pairs("eta 0.5"), Err(Failure::Usage(_))));
    }

    #[test]
    fn injects_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(&path, "eta=0.5\nquadrature=true\nrestarts=4\nlevels=0,1\n").unwrap();
        let args = argv(&format!("subchan fidelity --config {} --channel pd --encoding-file e.txt", path.display()));
        let out = expand(args, &crate::Cli::command()).ok().unwrap();
        assert_eq!(out, argv("subchan fidelity --eta 0.5 --quadrature --channel pd --encoding-file e.txt"));
    }

    #[test]
    fn unknown_key_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(&path, "colour=blue\n").unwrap();
        let args = argv(&format!("subchan fidelity --config={}", path.display()));
        assert!(matches!(expand(args, &crate::Cli::command()), Err(Failure::Usage(_))));
    }
}
