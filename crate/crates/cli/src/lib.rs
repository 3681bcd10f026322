//! Command-line pipeline: every subcommand reads a flat dotted-key config,
//! writes its artifacts, a `metrics.json` and a `manifest.json` into one
//! output directory, and can be rerun from that manifest.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod pipeline;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use thiserror::Error;

use config::Config;
use manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

/// Environment variable holding the default output root.
pub const OUT_ROOT_ENV: &str = "L3PPI_OUT_ROOT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<l3ppi::Error> for CliError {
    fn from(e: l3ppi::Error) -> Self {
        if e.is_data_error() {
            CliError::Data(e.to_string())
        } else if matches!(e, l3ppi::Error::InvalidArgument(_)) {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "l3ppi", version, about = "L3-path prompt learning for protein interaction networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Settings {
    /// JSON object of dotted config keys; flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Config keys as `--key value` or `--key=value`.
    #[arg(value_name = "--KEY VALUE", trailing_var_arg = true, allow_hyphen_values = true)]
    keys: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic complementarity network with embeddings.
    Synth(Settings),
    /// Path census: correlation and MI of #L_k with the labels.
    #[command(name = "validate-l3")]
    ValidateL3(Settings),
    /// Partition pairs into train/validation/test folds.
    Split(Settings),
    /// Pre-train the surrogate on L3 path samples.
    Pretrain(Settings),
    /// Tune the prompt bank and gating network.
    Tune(Settings),
    /// Evaluate a tuned head on the test fold.
    Eval(Settings),
    /// Run a strategy grid or a one-key sweep of tuning runs.
    Ablate(Settings),
    /// Repeat a run from its manifest.
    Rerun {
        manifest: PathBuf,
        /// Output directory (default: the recorded one with `-rerun` appended).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn settings_config(s: &Settings) -> Result<Config, CliError> {
    let mut cfg = Config::default();
    if let Some(path) = &s.config {
        cfg.merge_file(path)?;
    }
    cfg.apply_flags(&s.keys)?;
    Ok(cfg)
}

/// Resolves the output directory: `out`, else `$L3PPI_OUT_ROOT/<subcommand>`,
/// else `runs/<subcommand>`.
pub fn out_dir(cfg: &Config, subcommand: &str) -> PathBuf {
    match cfg.optional("out") {
        Some(p) => PathBuf::from(p),
        None => {
            let root = std::env::var_os(OUT_ROOT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
            root.join(subcommand)
        }
    }
}

/// Runs one subcommand with a fully resolved config and returns the output
/// directory.
pub fn execute(subcommand: &str, mut cfg: Config) -> Result<PathBuf, CliError> {
    let dir = out_dir(&cfg, subcommand);
    cfg.set("out", &dir.display().to_string())?;
    let manifest = RunManifest::new(subcommand, &cfg)?;
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    match subcommand {
        "synth" => commands::synth(&cfg, &dir)?,
        "validate-l3" => commands::validate_l3(&cfg, &dir)?,
        "split" => commands::split(&cfg, &dir)?,
        "pretrain" => commands::pretrain(&cfg, &dir)?,
        "tune" => commands::tune(&cfg, &dir)?,
        "eval" => commands::eval(&cfg, &dir)?,
        "ablate" => commands::ablate(&cfg, &dir)?,
        other => return Err(CliError::Config(format!("unknown subcommand `{other}`"))),
    }
    commands::write_json(&dir, "manifest.json", &manifest)?;
    Ok(dir)
}

/// Reruns the run recorded in `manifest_path`, writing into `out`.
pub fn rerun(manifest_path: &std::path::Path, out: Option<PathBuf>) -> Result<PathBuf, CliError> {
    let m = RunManifest::load(manifest_path)?;
    if m.tool != manifest::TOOL {
        return Err(CliError::Data(format!("manifest was written by `{}`", m.tool)));
    }
    m.verify_inputs()?;
    let mut cfg = m.to_config()?;
    let out = out.unwrap_or_else(|| PathBuf::from(format!("{}-rerun", cfg.str("out"))));
    cfg.set("out", &out.display().to_string())?;
    execute(&m.subcommand, cfg)
}

fn dispatch(cli: Cli) -> Result<PathBuf, CliError> {
    let (name, settings) = match &cli.command {
        Command::Synth(s) => ("synth", s),
        Command::ValidateL3(s) => ("validate-l3", s),
        Command::Split(s) => ("split", s),
        Command::Pretrain(s) => ("pretrain", s),
        Command::Tune(s) => ("tune", s),
        Command::Eval(s) => ("eval", s),
        Command::Ablate(s) => ("ablate", s),
        Command::Rerun { manifest, out } => return rerun(manifest, out.clone()),
    };
    execute(name, settings_config(settings)?)
}

fn command() -> clap::Command {
    let help = config::keys_help();
    let mut cmd = Cli::command().after_help(help.clone());
    for name in ["synth", "validate-l3", "split", "pretrain", "tune", "eval", "ablate"] {
        cmd = cmd.mut_subcommand(name, |c| c.after_help(help.clone()));
    }
    cmd
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = command()
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("l3ppi: {e}");
            e.exit_code()
        }
    }
}
