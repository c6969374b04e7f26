//! Run configuration: a `key = value` file merged with command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::failure::Failure;

/// Keys understood by the runner itself rather than by an experiment.
pub const RUNNER_KEYS: [&str; 4] = ["experiment", "seed", "out-dir", "threads"];

/// Parses `key = value` lines. `#` starts a comment; keys use `-` or `_`.
pub fn parse_file(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, Failure> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Failure::Validation(format!("{}:{}: expected `key = value`", origin.display(), i + 1))
        })?;
        let key = normalize(k.trim());
        if key.is_empty() {
            return Err(Failure::Validation(format!("{}:{}: empty key", origin.display(), i + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Failure::Validation(format!("{}:{}: duplicate key `{key}`", origin.display(), i + 1)));
        }
    }
    Ok(out)
}

pub fn normalize(key: &str) -> String {
    key.trim_start_matches("--").replace('_', "-")
}

/// Splits `--key value` pairs (or `--key=value`) following the experiment name.
pub fn parse_flags(args: &[String]) -> Result<BTreeMap<String, String>, Failure> {
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        if !a.starts_with("--") {
            return Err(Failure::Validation(format!("unexpected argument `{a}`; parameters are `--key value`")));
        }
        let (key, value) = match a.split_once('=') {
            Some((k, v)) => (normalize(k), v.to_string()),
            None => {
                let v = args
                    .get(i + 1)
                    .ok_or_else(|| Failure::Validation(format!("flag `{a}` needs a value")))?;
                i += 1;
                (normalize(a), v.clone())
            }
        };
        out.insert(key, value);
        i += 1;
    }
    Ok(out)
}

/// Fully resolved configuration for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub module: String,
    pub experiment: String,
    pub seed: u64,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub params: BTreeMap<String, String>,
}

/// Overrides from the fixed command-line flags.
#[derive(Debug, Default)]
pub struct Overrides {
    pub module: Option<String>,
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

/// Merges file values, then flags. Flags win.
pub fn resolve(
    file: BTreeMap<String, String>,
    flags: BTreeMap<String, String>,
    ov: Overrides,
) -> Result<RunConfig, Failure> {
    let mut all = file;
    all.extend(flags);
    let from_file = all.remove("experiment");
    let (module, experiment) = match (ov.module, ov.experiment) {
        (Some(m), Some(e)) => (m, e),
        (Some(_), None) | (None, Some(_)) => {
            return Err(Failure::Validation("give both a module and an experiment name".into()));
        }
        (None, None) => {
            let spec = from_file.ok_or_else(|| Failure::Validation("no experiment given".into()))?;
            let mut parts = spec.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(m), Some(e), None) => (m.to_string(), e.to_string()),
                _ => return Err(Failure::Validation(format!("experiment `{spec}` must be `<module> <name>`"))),
            }
        }
    };
    let seed = match (ov.seed, all.remove("seed")) {
        (Some(s), _) => s,
        (None, Some(s)) => s.parse().map_err(|_| Failure::Validation(format!("seed `{s}` is not an integer")))?,
        (None, None) => 0,
    };
    let threads = match (ov.threads, all.remove("threads")) {
        (Some(t), _) => t,
        (None, Some(t)) => t.parse().map_err(|_| Failure::Validation(format!("threads `{t}` is not an integer")))?,
        (None, None) => 1,
    };
    if threads == 0 {
        return Err(Failure::Validation("threads must be at least 1".into()));
    }
    let out_dir = match (ov.out_dir, all.remove("out-dir")) {
        (Some(d), _) => d,
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => PathBuf::from("bolab-out"),
    };
    Ok(RunConfig { module, experiment, seed, threads, out_dir, params: all })
}
