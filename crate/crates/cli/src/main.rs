//! `oqw`: experiments on linear open quantum walks.
//!
//! Every command writes CSV or JSON to stdout or, with `--out`, atomically to
//! a file. Exit status: 0 on success, 1 on numeric or validation failure,
//! 2 on usage errors.

mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "oqw", version, about = "Linear open quantum walk experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file (written atomically); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostModelArg {
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Dephasing,
    Depolarizing,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Power-iterated node distribution against the closed-form steady state.
    Steady {
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Master-equation profile against the drift-diffusion Gaussian.
    Profile {
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        omega: Option<f64>,
        /// A single step count; overrides --grid.
        #[arg(long)]
        steps: Option<usize>,
        /// Comma-separated step counts.
        #[arg(long, value_delimiter = ',', default_value = "100,150,200,250,300,350,400,450,500")]
        grid: Vec<usize>,
    },
    /// Channel realized by a walk, compared with the channel itself.
    Channel {
        #[arg(long, value_enum)]
        channel: Option<ChannelArg>,
        /// Dephasing probability or depolarizing strength.
        #[arg(long)]
        param: Option<f64>,
        #[arg(long, default_value_t = 2.0 / 3.0)]
        omega: f64,
        /// Iteration budget.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Random pure input state; `|+⟩` when omitted.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dilation and circuit evolution against direct evolution.
    Verify {
        /// Chain or general walk specification (JSON).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, default_value_t = 2)]
        dh: usize,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dilated dimensions and cost estimates across graph sizes.
    Resources {
        #[arg(long, default_value_t = 2)]
        dh: u64,
        /// Comma-separated graph sizes.
        #[arg(long = "G", value_delimiter = ',', default_value = "4,8,16,32")]
        graph_sizes: Vec<u64>,
        #[arg(long, default_value_t = 0.7)]
        omega: f64,
        /// Fixed step count; estimated from ω and |G| when omitted.
        #[arg(long)]
        steps: Option<u64>,
        /// Target success probability; sets ω to the smallest sufficient value.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, value_enum, default_value_t = CostModelArg::Linear)]
        cost_model: CostModelArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

/// Command output plus whether it counts as success.
pub struct Output {
    pub text: String,
    pub ok: bool,
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = commands::run(&cli.command);
    match result {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => write_atomic(path, &out.text),
                None => std::io::stdout().write_all(out.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("usage error: {msg}"),
                CliError::Failure(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(e.code())
        }
    }
}
