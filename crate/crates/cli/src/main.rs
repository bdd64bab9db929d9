mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::FileConfig;

/// Invariance and information-bottleneck benchmarks on linear SEMs.
#[derive(Parser, Debug)]
#[command(name = "ibirm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one CSV per training environment plus a manifest.
    Generate(Flags),
    /// Random hyperparameter search; writes the sweep and its summary.
    Sweep(Flags),
    /// Integrate the 2D gradient flows and check the learning-speed bounds.
    Dynamics(Flags),
    /// Run the entropy inequality checks.
    Entropy(Flags),
    /// Summarize one or more sweep CSV files.
    Report {
        #[command(flatten)]
        flags: Flags,
        /// Sweep CSV files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// ex1, ex1s, ex2, ex2s, ex3, ex3s, twod or xor.
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    envs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    queries: Option<usize>,
    #[arg(long)]
    seeds: Option<usize>,
    /// Comma-separated subset of erm,irm,iberm,ibirm.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any of the flag values; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

impl Flags {
    fn to_file_config(&self) -> FileConfig {
        FileConfig {
            example: self.example.clone(),
            envs: self.envs,
            seed: self.seed,
            queries: self.queries,
            seeds: self.seeds,
            methods: self.methods.clone(),
            out: self.out.clone(),
            p: self.p,
            gamma: self.gamma,
            eps: self.eps,
            dt: self.dt,
            ..Default::default()
        }
    }
}

/// Failure classes and their exit statuses.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Divergence(String),
    Io(String),
}

impl CliError {
    fn status(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Validation(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Divergence(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<ibirm_core::Error> for CliError {
    fn from(e: ibirm_core::Error) -> Self {
        match e {
            ibirm_core::Error::Divergence { .. } => CliError::Divergence(e.to_string()),
            ibirm_core::Error::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("IBIRM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Validation(format!("IBIRM_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (name, flags, files) = match &cli.command {
        Command::Generate(f) => ("generate", f, None),
        Command::Sweep(f) => ("sweep", f, None),
        Command::Dynamics(f) => ("dynamics", f, None),
        Command::Entropy(f) => ("entropy", f, None),
        Command::Report { flags, files } => ("report", flags, Some(files)),
    };
    let base = match &flags.config {
        Some(path) => FileConfig::load(path).map_err(CliError::Validation)?,
        None => FileConfig::default(),
    };
    let cfg = config::RunConfig::resolve(name, base.overlay(flags.to_file_config())).map_err(CliError::Validation)?;
    match name {
        "generate" => commands::generate(&cfg),
        "sweep" => commands::sweep(&cfg),
        "dynamics" => commands::dynamics(&cfg),
        "entropy" => commands::entropy(&cfg),
        _ => commands::report(&cfg, files.expect("report has files")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(CliError::Usage(String::new()).status());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ibirm: {e}");
            ExitCode::from(e.status())
        }
    }
}
