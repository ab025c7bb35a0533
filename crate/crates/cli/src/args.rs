//! Command-line surface and the `key = value` config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::CliError;
use crate::output::Format;

const AFTER_HELP: &str = "Defaults: quadrature M=512 doubling to 4096 with tol 1e-7; \
Monte Carlo 10^4 sweeps with 10^3 burn-in; seed 1.\n\
A config file (--config FILE, one `key = value` per line) supplies flags; \
flags on the command line win. TWOWELL_THREADS sets the worker count.";

#[derive(Debug, Parser)]
#[command(name = "twowell", version, about = "Two-well gradient model: free energies, exact sampling, duality")]
#[command(after_help = AFTER_HELP, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spin-wave free energies of the periodic patterns (infinite volume, or finite L with --L)
    Spinwave(SpinwaveArgs),
    /// Check the pattern gap inequality over a grid of p and stiffness ratios
    GapCheck(GapCheckArgs),
    /// Finite-L pattern free energies next to the pinned-Laplacian oracle
    FiniteFe(FiniteFeArgs),
    /// log Z and log Z* of a coupling configuration file
    Logz(LogzArgs),
    /// Run one (eta, kappa) Gibbs chain and print per-sweep observables
    Sample(SampleArgs),
    /// Scan p with ordered and disordered starts
    Scan(ScanArgs),
    /// Duality identity on random two-state couplings
    DualityCheck(DualityCheckArgs),
    /// Candidate transition points and the adjudicated orientation
    Pt(PtArgs),
    /// Exact enumeration at L = 2
    ExactEnum(ExactEnumArgs),
    /// Tail frequencies of the box tilt under the homogeneous Gaussian measure
    TiltCheck(TiltCheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spinwave(_) => "spinwave",
            Command::GapCheck(_) => "gap-check",
            Command::FiniteFe(_) => "finite-fe",
            Command::Logz(_) => "logz",
            Command::Sample(_) => "sample",
            Command::Scan(_) => "scan",
            Command::DualityCheck(_) => "duality-check",
            Command::Pt(_) => "pt",
            Command::ExactEnum(_) => "exact-enum",
            Command::TiltCheck(_) => "tilt-check",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Write results here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (default depends on the subcommand)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Config file with one `key = value` per line
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Quad {
    /// Initial points per axis (power of two >= 64)
    #[arg(long = "m", default_value_t = 512)]
    pub m: usize,
    /// Largest grid tried while doubling
    #[arg(long = "max-m", default_value_t = 4096)]
    pub max_m: usize,
    /// Stop doubling once successive values differ by less than this
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
}

impl Quad {
    pub fn spec(&self) -> twowell::spinwave::QuadratureSpec {
        twowell::spinwave::QuadratureSpec { initial: self.m, max: self.max_m, tol: self.tol }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpinwaveArgs {
    /// Pattern(s): O, D, UO, UD, MP, MA, comma separated, or `all`
    #[arg(long, default_value = "all")]
    pub pattern: String,
    /// p values: list `a,b,c` or range `start:stop:step`
    #[arg(long, default_value = "0.5")]
    pub p: String,
    #[arg(long = "kappa-o", default_value_t = 1.0)]
    pub kappa_o: f64,
    /// Defaults to 1 / kappa-o
    #[arg(long = "kappa-d")]
    pub kappa_d: Option<f64>,
    /// Finite torus side; omit for infinite volume
    #[arg(long = "L")]
    pub side: Option<usize>,
    #[command(flatten)]
    pub quad: Quad,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GapCheckArgs {
    #[arg(long, default_value = "0.05:0.95:0.05")]
    pub p: String,
    /// Ratios kappa_O / kappa_D; each is run with kappa_O kappa_D = 1
    #[arg(long, default_value = "1e2,1e4,1e6")]
    pub ratios: String,
    #[command(flatten)]
    pub quad: Quad,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FiniteFeArgs {
    #[arg(long, default_value = "all")]
    pub pattern: String,
    #[arg(long, default_value = "0.5")]
    pub p: String,
    #[arg(long = "kappa-o", default_value_t = 1.0)]
    pub kappa_o: f64,
    #[arg(long = "kappa-d")]
    pub kappa_d: Option<f64>,
    /// Torus sides, comma separated
    #[arg(long = "L", default_value = "2,4,8")]
    pub sides: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LogzArgs {
    /// kappa configuration file
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    #[arg(long = "L", default_value_t = 8)]
    pub side: usize,
    #[arg(long = "kappa-o", default_value_t = 100.0)]
    pub kappa_o: f64,
    #[arg(long = "kappa-d", default_value_t = 0.01)]
    pub kappa_d: f64,
    /// Measured sweeps per chain
    #[arg(long, default_value_t = 10_000)]
    pub sweeps: usize,
    /// Sweeps discarded before measuring
    #[arg(long, default_value_t = 1_000)]
    pub burnin: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value = "ordered")]
    pub init: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long = "p-grid", default_value = "0.84:0.98:0.01")]
    pub p_grid: String,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Seeds, comma separated
    #[arg(long, default_value = "1")]
    pub seeds: String,
    /// Where to write the JSON summary (stderr if omitted)
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DualityCheckArgs {
    #[arg(long = "L", default_value_t = 4)]
    pub side: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long = "kappa-o", default_value_t = 100.0)]
    pub kappa_o: f64,
    #[arg(long = "kappa-d", default_value_t = 0.01)]
    pub kappa_d: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PtArgs {
    #[arg(long = "kappa-o", default_value_t = 100.0)]
    pub kappa_o: f64,
    #[arg(long = "kappa-d", default_value_t = 0.01)]
    pub kappa_d: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExactEnumArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long = "kappa-o", default_value_t = 100.0)]
    pub kappa_o: f64,
    #[arg(long = "kappa-d", default_value_t = 0.01)]
    pub kappa_d: f64,
    /// Also run the chessboard check with this tolerance
    #[arg(long)]
    pub chessboard: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TiltCheckArgs {
    #[arg(long = "L", default_value_t = 8)]
    pub side: usize,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    #[arg(long, default_value = "0.1,0.2,0.4")]
    pub deltas: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

/// Numbers from `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |s: &str| CliError::Usage(format!("cannot parse number '{s}' in '{spec}'"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(s));
    let parts: Vec<&str> = spec.split(':').collect();
    let out: Vec<f64> = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(CliError::Usage(format!("range '{spec}' needs start <= stop and step > 0")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            // Round to the step's decimal precision so 0.05:0.95:0.05 gives 0.15, not 0.15000000000000002.
            (0..=n).map(|i| round_like(a + i as f64 * step, step)).collect()
        }
        [_] => spec.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<_, _>>()?,
        _ => return Err(CliError::Usage(format!("grid '{spec}' must be a list or start:stop:step"))),
    };
    if out.is_empty() {
        return Err(CliError::Usage(format!("grid '{spec}' is empty")));
    }
    Ok(out)
}

fn round_like(x: f64, step: f64) -> f64 {
    let digits = (-step.log10()).ceil().max(0.0) as i32 + 2;
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

pub fn parse_list<T: std::str::FromStr>(spec: &str, what: &str) -> Result<Vec<T>, CliError> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>().map_err(|_| CliError::Usage(format!("cannot parse {what} '{s}'"))))
        .collect()
}

/// Splices the contents of `--config FILE` in front of the explicit flags,
/// so that flags given on the command line override the file.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{path}:{}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "config" {
            return Err(CliError::Usage(format!("{path}:{}: nested config files are not supported", n + 1)));
        }
        extra.push(format!("--{k}"));
        extra.push(v.to_string());
    }
    // argv[0] is the program, argv[1] the subcommand.
    let at = 2.min(argv.len());
    let mut out = argv[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}
