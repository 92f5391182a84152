//! Command-line arguments. Every subcommand's argument struct is also its
//! experiment-config record, so a run's echoed config can be replayed with
//! `mimo-cs run --config`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mimo_cs::array_channel::GridMode;
use mimo_cs::bounds::LogBase;
use mimo_cs::cs_analysis::{Rotation, DEFAULT_RANK_TOL};
use mimo_cs::recovery::Algorithm;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "mimo-cs",
    version,
    about = "Measurement-theory workbench for sparse MIMO channel estimation"
)]
pub struct Cli {
    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Maximum number of subsets an exhaustive routine may visit.
    /// Overrides MIMO_CS_BUDGET.
    #[arg(long, global = true)]
    pub budget: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Synthesize a channel and its angular representation.
    Synth(SynthArgs),
    /// Simulate Y = Wᴴ Q F + N for a synthesized channel.
    Measure(MeasureArgs),
    /// Build M_t, M_r, G_v and y_v for a synthesized channel.
    Vectorize(MeasureArgs),
    /// Exhaustive spark of a matrix.
    Spark(SparkArgs),
    /// Exhaustive RIP constant of a matrix.
    Rip(RipArgs),
    /// Randomized checks of the Kronecker lemmas and the unitarity suite.
    VerifyLemmas(LemmaArgs),
    /// Compare δ_k(G) with δ_k(GV) for random unitary V.
    Rotation(RotationArgs),
    /// BCH parity-check design.
    Bch(BchArgs),
    /// All closed-form bounds for one configuration.
    Bounds(BoundsArgs),
    /// The binomial-sum measurement count.
    MUnderbar(MUnderbarArgs),
    /// Standard binomial-coefficient bounds at (n, k).
    BinomialBounds(BinomialArgs),
    /// Ratio audit of m̲ and BCH counts against k² log(n/k)² (CSV).
    Audit(AuditArgs),
    /// Unscaled loose/tight curves (CSV).
    Fig1(Fig1Args),
    /// Sparse recovery from a system file.
    Recover(RecoverArgs),
    /// Synthesize, measure and recover in one go.
    E2e(E2eArgs),
    /// Replay an experiment config file.
    Run(RunArgs),
}

fn half() -> f64 {
    0.5
}
fn lambda() -> f64 {
    0.01
}
fn one() -> f64 {
    1.0
}
fn rank_tol() -> f64 {
    DEFAULT_RANK_TOL
}
fn omp_tol() -> f64 {
    1e-9
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayArgs {
    #[arg(long)]
    pub nt: usize,
    #[arg(long)]
    pub nr: usize,
    /// Transmit antenna spacing, in wavelengths.
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "half")]
    pub delta_t: f64,
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "half")]
    pub delta_r: f64,
    /// Carrier wavelength.
    #[arg(long, default_value_t = 0.01)]
    #[serde(default = "lambda")]
    pub lambda_c: f64,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridModeArg {
    #[default]
    Strict,
    OffGrid,
}

impl From<GridModeArg> for GridMode {
    fn from(g: GridModeArg) -> Self {
        match g {
            GridModeArg::Strict => GridMode::Strict,
            GridModeArg::OffGrid => GridMode::OffGrid,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub array: ArrayArgs,
    /// JSON array of paths; when absent, `--k` random on-grid paths are drawn.
    #[arg(long, conflicts_with_all = ["k", "seed"])]
    pub paths: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Path loss μ.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub mu: f64,
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub grid_mode: GridModeArg,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignArgs {
    /// JSON file with {"F": matrix, "W": matrix}; otherwise a Gaussian design is drawn.
    #[arg(long, conflicts_with_all = ["mt", "mr", "design_seed"])]
    pub design: Option<PathBuf>,
    #[arg(long)]
    pub mt: Option<usize>,
    #[arg(long)]
    pub mr: Option<usize>,
    #[arg(long)]
    pub design_seed: Option<u64>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseArgs {
    /// Per-entry standard deviation of the complex Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub noise_seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureArgs {
    /// Output of `synth`.
    #[arg(long)]
    pub channel: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub design: DesignArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSource {
    /// Matrix JSON file, or any JSON output holding one.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Field holding the matrix (looked up at top level, then under "result").
    #[arg(long)]
    pub key: Option<String>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparkArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: MatrixSource,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    #[serde(default = "rank_tol")]
    pub tol: f64,
    /// Only search subsets up to this size.
    #[arg(long)]
    pub max_size: Option<usize>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: MatrixSource,
    #[arg(long)]
    pub k: usize,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationArg {
    Identity,
    Dft,
    Haar,
}

impl From<RotationArg> for Rotation {
    fn from(r: RotationArg) -> Self {
        match r {
            RotationArg::Identity => Rotation::Identity,
            RotationArg::Dft => Rotation::Dft,
            RotationArg::Haar => Rotation::Haar,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = RotationArg::Haar)]
    pub rotation: RotationArg,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BchArgs {
    #[arg(long)]
    pub t: u32,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub shorten_to: Option<usize>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub nt: usize,
    #[arg(long)]
    pub nr: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub delta: f64,
    /// Sparsity-regime exponent ε.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub epsilon: f64,
    #[arg(long, default_value = "natural")]
    #[serde(default)]
    pub log_base: LogBase,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MUnderbarArgs {
    #[arg(long)]
    pub nt: usize,
    #[arg(long)]
    pub nr: usize,
    #[arg(long)]
    pub k: usize,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    FixedK,
    FixedN,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditArgs {
    #[arg(long, value_enum, default_value_t = SweepMode::FixedK)]
    pub mode: SweepMode,
    /// Fixed sparsity (fixed-k mode).
    #[arg(long)]
    pub k: Option<usize>,
    /// Fixed antenna count (fixed-n mode).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated grid of the swept parameter.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<usize>,
    #[arg(long, default_value = "natural")]
    #[serde(default)]
    pub log_base: LogBase,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Args {
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    /// fixed-k: the sparsity; n runs from k to --n-max.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// fixed-n: the antenna count; k runs from 1 to --k-max (default n).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, default_value = "natural")]
    #[serde(default)]
    pub log_base: LogBase,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgArg {
    #[default]
    L0,
    Omp,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Self {
        match a {
            AlgArg::L0 => Algorithm::L0Exhaustive,
            AlgArg::Omp => Algorithm::Omp,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverArgs {
    /// {"G": matrix, "y": vector, "k": int}, or a `vectorize` output (G_v, y_v).
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub alg: AlgArg,
    /// Sparsity; overrides the file's "k".
    #[arg(long)]
    pub k: Option<usize>,
    /// OMP stops once the residual norm drops to this.
    #[arg(long, default_value_t = 1e-9)]
    #[serde(default = "omp_tol")]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E2eArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub array: ArrayArgs,
    #[arg(long)]
    pub k: usize,
    /// Seed for the random on-grid paths.
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub mu: f64,
    #[arg(long)]
    pub mt: usize,
    #[arg(long)]
    pub mr: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub design_seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub alg: AlgArg,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

/// A complete, replayable run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Exhaustive-enumeration budget in effect for the run.
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(flatten)]
    pub command: Command,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        for argv in [
            &[
                "mimo-cs", "bounds", "--nt", "8", "--nr", "4", "--k", "2", "--delta", "0.3",
            ][..],
            &[
                "mimo-cs", "e2e", "--nt", "3", "--nr", "4", "--k", "2", "--mt", "3", "--mr", "3",
                "--alg", "omp",
            ],
            &["mimo-cs", "audit", "--k", "2", "--grid", "15,31"],
        ] {
            let cli = Cli::try_parse_from(argv).unwrap();
            let cfg = ExperimentConfig {
                schema_version: SCHEMA_VERSION,
                budget: Some(7),
                command: cli.command,
            };
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(
                serde_json::from_str::<ExperimentConfig>(&text).unwrap(),
                cfg,
                "{text}"
            );
        }
    }
}
