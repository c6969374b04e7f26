//! `bolab`: command-line runner for the numerical experiments.

mod artifacts;
mod config;
mod experiments;
mod failure;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use artifacts::Ctx;
use config::Overrides;
use failure::Failure;

#[derive(Parser)]
#[command(name = "bolab", version, about = "Benjamin-Ono, log-gas, transport and Euler experiments")]
struct Cli {
    /// Directory for artifacts [default: bolab-out].
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for every random draw of the run [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent replicas [default: 1].
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// List the experiments with their parameters.
    #[arg(long)]
    list: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment: `bolab run <module> <experiment> [--key value ...]`.
    Run {
        /// `key = value` file; command-line values take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `<module> <experiment>` (optional with a config file) then `--key value` pairs.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "ARGS")]
        args: Vec<String>,
    },
}

fn list() -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    for e in experiments::REGISTRY {
        writeln!(out, "{} {}: {}", e.module, e.name, e.about)?;
        for p in e.params {
            writeln!(out, "    --{} <{}>  {}", p.key, p.default, p.help)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let Some(Command::Run { config, args }) = cli.command else {
        return Err(Failure::Validation("nothing to do: use `bolab run <module> <experiment>` or `--list`".into()));
    };
    let names = args.iter().take(2).take_while(|a| !a.starts_with("--")).count();
    let mut positional = args[..names].iter().cloned();
    let (module, experiment) = (positional.next(), positional.next());
    let mut flags = config::parse_flags(&args[names..])?;
    // global flags written after the experiment name land in the trailing list
    let config = config.or_else(|| flags.remove("config").map(PathBuf::from));
    let mut ov = Overrides { module, experiment, seed: cli.seed, threads: cli.threads, out_dir: cli.out_dir };
    if let Some(s) = flags.remove("seed") {
        ov.seed = Some(s.parse().map_err(|_| Failure::Validation(format!("seed `{s}` is not an integer")))?);
    }
    if let Some(t) = flags.remove("threads") {
        ov.threads = Some(t.parse().map_err(|_| Failure::Validation(format!("threads `{t}` is not an integer")))?);
    }
    if let Some(d) = flags.remove("out-dir") {
        ov.out_dir = Some(PathBuf::from(d));
    }
    let file = match &config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            config::parse_file(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let rc = config::resolve(file, flags, ov)?;
    let exp = experiments::REGISTRY
        .iter()
        .find(|e| e.module == rc.module && e.name == rc.experiment)
        .ok_or_else(|| Failure::Validation(format!("unknown experiment `{} {}`; see --list", rc.module, rc.experiment)))?;
    let mut resolved = BTreeMap::new();
    for p in exp.params {
        resolved.insert(p.key.to_string(), p.default.to_string());
    }
    for (k, v) in &rc.params {
        if config::RUNNER_KEYS.contains(&k.as_str()) || !resolved.contains_key(k) {
            return Err(Failure::Validation(format!("unknown parameter `{k}` for `{} {}`", exp.module, exp.name)));
        }
        resolved.insert(k.clone(), v.clone());
    }
    std::fs::create_dir_all(&rc.out_dir)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", rc.out_dir.display())))?;
    let mut ctx = Ctx {
        module: rc.module.clone(),
        experiment: rc.experiment.clone(),
        seed: rc.seed,
        threads: rc.threads,
        out_dir: rc.out_dir.clone(),
        params: resolved.clone(),
        artifacts: Vec::new(),
    };
    let start = Instant::now();
    (exp.run)(&mut ctx)?;
    let manifest = serde_json::json!({
        "comment": ctx.header(),
        "experiment": format!("{} {}", rc.module, rc.experiment),
        "config": resolved,
        "seed": rc.seed,
        "threads": rc.threads,
        "versions": { "bolab": bolab::VERSION, "bolab-cli": env!("CARGO_PKG_VERSION") },
        "wall_time_seconds": start.elapsed().as_secs_f64(),
        "artifacts": ctx.artifacts.iter().map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned())).collect::<Vec<_>>(),
    });
    let path = rc.out_dir.join(format!("{}-{}-manifest.json", rc.module, rc.experiment));
    artifacts::write_atomic(&path, &artifacts::to_pretty(&manifest)?)?;
    for a in &ctx.artifacts {
        println!("{}", a.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.list {
        // a closed pipe is not an error for a listing
        let _ = list();
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let report = serde_json::json!({ "error": f.kind(), "message": f.message() });
            eprintln!("{report}");
            f.exit_code()
        }
    }
}
