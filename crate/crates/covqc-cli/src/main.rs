//! Command-line frontend for the covqc library: every analysis as a
//! reproducible subcommand emitting CSV or JSON.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing criterion,
//! 2 for usage, parameter and I/O errors.

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::{Display, Format};

#[derive(Parser)]
#[command(
    name = "covqc",
    version,
    about = "Sweeps and reports for low-rank irreducibly SU(2)-covariant channels"
)]
struct Cli {
    /// Display entropic quantities in bits instead of nats (rescales the
    /// emitted values only).
    #[arg(long, global = true)]
    bits: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// Qubit input, (l+1)-dimensional output.
    Cov1l,
    /// (l+1)-dimensional input, qubit output.
    Covl1,
    /// The two-parameter qutrit-to-qutrit family.
    Cov22,
}

impl FamilyArg {
    pub fn name(self) -> &'static str {
        match self {
            FamilyArg::Cov1l => "cov1l",
            FamilyArg::Covl1 => "covl1",
            FamilyArg::Cov22 => "cov22",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// PPT membership and smallest partial-transpose eigenvalue over a grid.
    PptRegion(PptRegionArgs),
    /// Certify or refute entanglement breaking at one parameter point.
    EbtCertify(EbtCertifyArgs),
    /// Minimum output entropy, Holevo information and minimizer labels.
    Moe(MoeArgs),
    /// Holevo information alone (thin variant of `moe`).
    Holevo(MoeArgs),
    /// Coherent-information scan over diagonal inputs of one channel.
    CoherentInfo(CoherentInfoArgs),
    /// Two-copy coherent-information experiment with scan certificate.
    Superactivation(SuperactivationArgs),
    /// Degradability witness at one parameter point.
    Degradability(PointArgs),
    /// Positivity of the linearly extended family beyond the channel simplex.
    Positivity(PositivityArgs),
    /// Monte Carlo twirl averages against their extreme-point targets.
    TwirlVerify(TwirlVerifyArgs),
    /// Kraus operators of a family channel as lossless JSON.
    KrausDump(PointArgs),
    /// Run the acceptance criteria and report every check.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct PptRegionArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Irrep label of the larger system (required for cov1l and covl1).
    #[arg(long)]
    pub l: Option<usize>,
    /// Grid points per parameter axis.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct EbtCertifyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: Option<f64>,
    /// Haar samples per twirl certificate.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args)]
pub struct MoeArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub l: Option<usize>,
    /// Evaluate a single point instead of sweeping.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Grid points per parameter axis for sweeps (default 101 for cov1l,
    /// 41 per axis for cov22).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct CoherentInfoArgs {
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub p: f64,
    /// Number of lambda grid points.
    #[arg(long, default_value_t = 10_001)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv emits the full scan, json the maximum plus its continuity bound.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct SuperactivationArgs {
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub p: f64,
    /// Number of lambda grid points for the single-copy scan.
    #[arg(long, default_value_t = 100_001)]
    pub grid: usize,
    /// Report file; a `.scan.csv` sibling with the full scan is written
    /// next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args)]
pub struct PointArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args)]
pub struct PositivityArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub l: Option<usize>,
    /// Evaluate a single point instead of sweeping.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Grid points per parameter axis for sweeps.
    #[arg(long, default_value_t = 41)]
    pub grid: usize,
    /// Random input states per grid point.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct TwirlVerifyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    /// Replace every check's tolerance (failures under an override that pass
    /// at the defaults are flagged as tolerance-induced).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Run a single criterion (1..=9) instead of the full gate.
    #[arg(long)]
    pub criterion: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug)]
pub enum CliError {
    Lib(covqc::Error),
    Io(io::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<covqc::Error> for CliError {
    fn from(e: covqc::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let display = Display::new(cli.bits);
    match &cli.command {
        Command::PptRegion(args) => commands::ppt_region(args, &display)?,
        Command::EbtCertify(args) => commands::ebt_certify(args, &display)?,
        Command::Moe(args) => commands::moe(args, &display, false)?,
        Command::Holevo(args) => commands::moe(args, &display, true)?,
        Command::CoherentInfo(args) => commands::coherent_info(args, &display)?,
        Command::Superactivation(args) => commands::superactivation(args, &display)?,
        Command::Degradability(args) => commands::degradability(args, &display)?,
        Command::Positivity(args) => commands::positivity(args, &display)?,
        Command::TwirlVerify(args) => commands::twirl_verify(args, &display)?,
        Command::KrausDump(args) => commands::kraus_dump(args, &display)?,
        Command::Verify(args) => return commands::verify(args, &display),
    }
    Ok(true)
}
