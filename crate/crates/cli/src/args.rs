use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "su2metro", version, about = "Optimal probes and Fisher-information analysis for SU(2) and SU(4) estimation")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Physics tolerance used for pass/fail decisions.
    #[arg(long, global = true, env = "SU2M_TOL", default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a probe state and report the metrology conditions.
    Probe(ProbeArgs),
    /// Print the condition report of a saved state.
    Check(CheckArgs),
    /// Order, closure and trivial-irrep data of a finite group.
    GroupInfo(GroupInfoArgs),
    /// tr F(t·n)⁻¹ along a direction.
    CrbCurve(CrbCurveArgs),
    /// Classical and moment-method Fisher traces along a direction.
    CfiCurve(CfiCurveArgs),
    /// A4 overlap of compass states over N.
    CompassScan(CompassScanArgs),
    /// SU(4) relations, invariants, conditions and QFIM.
    Su4Check(Su4CheckArgs),
    /// Spin Wigner function on a θ×φ grid.
    Wigner(WignerArgs),
    /// Run every acceptance criterion.
    VerifyAll(VerifyAllArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Ghz,
    Compass,
    Tetrahedral,
    S3Prism,
    S3Finetuned,
    Entangled,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisArg {
    X,
    Y,
    Z,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long, value_enum)]
    pub kind: ProbeKind,
    /// N = 2J.
    #[arg(long)]
    pub two_j: u32,
    /// Polar angle of the twirled coherent state (s3-prism).
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    /// Compass phases δx,δy,δz.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub deltas: Option<Vec<f64>>,
    /// GHZ axis.
    #[arg(long, value_enum, default_value = "z")]
    pub axis: AxisArg,
    /// Write the state here and print only the report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub state: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupArg {
    A4,
    S3,
}

#[derive(Args, Debug)]
pub struct GroupInfoArgs {
    #[arg(long, value_enum)]
    pub group: GroupArg,
    #[arg(long)]
    pub two_j: u32,
}

#[derive(Args, Debug)]
pub struct CrbCurveArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,1,1", allow_negative_numbers = true)]
    pub direction: Vec<f64>,
    #[arg(long, default_value_t = 3.1)]
    pub tmax: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeArg {
    Kl,
    Parity,
}

#[derive(Args, Debug)]
pub struct CfiCurveArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_enum, default_value = "kl")]
    pub scheme: SchemeArg,
    #[arg(long, value_delimiter = ',', default_value = "1,1,1", allow_negative_numbers = true)]
    pub direction: Vec<f64>,
    #[arg(long, default_value_t = 0.8)]
    pub tmax: f64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompassScanArgs {
    #[arg(long, default_value_t = 4)]
    pub nmin: u32,
    #[arg(long, default_value_t = 32)]
    pub nmax: u32,
    /// Also maximize the overlap over the three phases for each N.
    #[arg(long)]
    pub optimize_deltas: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Su4ProbeArg {
    Entangled,
    Twirled,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Su4SpaceArg {
    Defining,
    Tensor,
    Symmetric,
    Entangled,
}

#[derive(Args, Debug)]
pub struct Su4CheckArgs {
    #[arg(long, value_enum, default_value = "entangled")]
    pub probe: Su4ProbeArg,
    /// Space for the twirled probe.
    #[arg(long, value_enum, default_value = "entangled")]
    pub space: Su4SpaceArg,
}

#[derive(Args, Debug)]
pub struct WignerArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value_t = 181)]
    pub ntheta: usize,
    #[arg(long, default_value_t = 360)]
    pub nphi: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a gnuplot script that plots the CSV.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyAllArgs {
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}
