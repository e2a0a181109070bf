use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use inertial_cli::{run, ExperimentConfig, ExperimentKind, RunError};

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    ExperimentKind::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown experiment {s:?}; expected one of {}", names.join(", "))
    })
}

/// Inertial-particle experiments: convergence rates of the diffusion
/// approximations and their long-time densities.
#[derive(Debug, Parser)]
#[command(name = "inertial", version)]
struct Cli {
    /// converge-weak-pde, converge-strong-mc, converge-weak-mc, longtime-2d or oracle-check
    #[arg(value_parser = parse_kind)]
    experiment: ExperimentKind,

    /// key = value file; command-line options override it
    #[arg(long)]
    config: Option<PathBuf>,

    /// comma-separated, e.g. 2^-3,2^-4,0.05
    #[arg(long)]
    eps: Option<String>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    paths: Option<usize>,

    /// naive drift only (weak-pde)
    #[arg(long)]
    no_correction: bool,

    /// worker threads; 0 uses all cores
    #[arg(long)]
    threads: Option<usize>,

    /// run every loop on the calling thread
    #[arg(long)]
    sequential: bool,

    /// any other key, as key=value; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// print the resolved configuration and exit
    #[arg(long)]
    print_config: bool,
}

impl Cli {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut o: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| o.push((k.to_string(), v));
        if let Some(v) = &self.eps {
            put("eps", v.clone());
        }
        if let Some(v) = self.seed {
            put("seed", v.to_string());
        }
        if let Some(v) = &self.out {
            put("out", v.display().to_string());
        }
        if let Some(v) = self.paths {
            put("paths", v.to_string());
        }
        if self.no_correction {
            put("no_correction", "true".into());
        }
        if let Some(v) = self.threads {
            put("threads", v.to_string());
        }
        if self.sequential {
            put("exec", "sequential".into());
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects key=value, got {kv:?}"))?;
            o.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(o)
    }
}

fn try_main() -> Result<ExitCode> {
    // usage errors count as execution errors: 2 is reserved for missed thresholds
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS });
        }
    };
    let text = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let cfg = ExperimentConfig::resolve(cli.experiment, text.as_deref(), &cli.overrides()?)?;
    if cli.print_config {
        print!("{}", cfg.to_text());
        return Ok(ExitCode::SUCCESS);
    }
    println!("{} config_hash={}", cfg.kind(), cfg.hash());
    match run(&cfg) {
        Ok(outcome) => {
            for c in outcome.checks() {
                println!("{c}");
            }
            println!("wrote {} files to {}", outcome.files.len(), cfg.out_dir().display());
            Ok(ExitCode::from(u8::try_from(outcome.exit_code()).unwrap_or(1)))
        }
        Err(e @ RunError::Partial(_)) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.into()),
    }
}

fn main() -> ExitCode {
    match try_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
