use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vpc_core::evaluation::{DEFAULT_DIST_THRESH_M, DEFAULT_ORIENT_THRESH_DEG, DEFAULT_TOP_X};
use vpc_core::synthworld::{SpeedProfile, WorldSpec};
use vpc_core::Strategy;

#[derive(Debug, Parser)]
#[command(name = "vpc", version, about = "Discover place classes along a robot trajectory and score them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a training trajectory into place classes.
    Partition(PartitionArgs),
    /// Score a partition with the proxy place classifier.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic train/test session pair.
    Synth(SynthArgs),
    /// Run several strategies over several seeds and tabulate the results.
    Compare(CompareArgs),
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|_| {
        format!("expected one of time, location, time-appearance, location-appearance; got {s:?}")
    })
}

#[derive(Debug, Args, Serialize)]
pub struct PartitionArgs {
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Strategy,
    #[arg(long)]
    pub classes: usize,
    /// Appearance features (VPCF, or CSV by extension); required by hybrids.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Appearance cluster count; defaults to --classes.
    #[arg(long)]
    pub k_appearance: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// k-means restarts; the lowest-WCSS run wins.
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[arg(long)]
    pub normalize_features: bool,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Partition CSV to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
pub struct ThresholdArgs {
    /// Maximum heading difference (degrees) of a ground-truth match.
    #[arg(long, default_value_t = DEFAULT_ORIENT_THRESH_DEG)]
    pub orient_thresh: f64,
    /// Maximum distance (meters) of a ground-truth match.
    #[arg(long, default_value_t = DEFAULT_DIST_THRESH_M)]
    pub dist_thresh: f64,
    /// X of the top-X success rate.
    #[arg(long, default_value_t = DEFAULT_TOP_X)]
    pub top: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub train_trajectory: PathBuf,
    #[arg(long)]
    pub train_features: PathBuf,
    #[arg(long)]
    pub train_partition: PathBuf,
    #[arg(long)]
    pub test_trajectory: PathBuf,
    #[arg(long)]
    pub test_features: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub thresholds: ThresholdArgs,
    /// Strategy name recorded in the report.
    #[arg(long, default_value = "unspecified")]
    pub label: String,
    /// Report JSON to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedKind {
    Constant,
    Variable,
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
pub struct WorldArgs {
    #[arg(long, default_value_t = 8)]
    pub n_places: usize,
    #[arg(long, default_value_t = 400)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 16)]
    pub feature_dim: usize,
    #[arg(long, value_enum, default_value_t = SpeedKind::Constant)]
    pub speed: SpeedKind,
    /// Lower speed bound (m/s) of the variable profile.
    #[arg(long, default_value_t = 0.2)]
    pub min_speed: f64,
    /// Upper speed bound (m/s) of the variable profile.
    #[arg(long, default_value_t = 5.0)]
    pub max_speed: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Drive the loop twice.
    #[arg(long)]
    pub revisit: bool,
    #[arg(long, default_value_t = 100.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.25)]
    pub place_length_spread: f64,
}

impl WorldArgs {
    pub fn spec(&self, seed: u64) -> WorldSpec {
        WorldSpec {
            speed_profile: match self.speed {
                SpeedKind::Constant => SpeedProfile::Constant,
                SpeedKind::Variable => SpeedProfile::Variable {
                    min_speed: self.min_speed,
                    max_speed: self.max_speed,
                },
            },
            feature_noise_sigma: self.noise_sigma,
            revisit: self.revisit,
            radius_m: self.radius,
            place_length_spread: self.place_length_spread,
            ..WorldSpec::new(self.n_places, self.n_samples, self.feature_dim, seed)
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub world: WorldArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SessionFileArgs {
    #[arg(long)]
    pub train_trajectory: Option<PathBuf>,
    #[arg(long)]
    pub train_features: Option<PathBuf>,
    #[arg(long)]
    pub test_trajectory: Option<PathBuf>,
    #[arg(long)]
    pub test_features: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Sessions from files; when absent a synthetic world is generated per
    /// seed from the world flags.
    #[command(flatten)]
    #[serde(flatten)]
    pub files: SessionFileArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub world: WorldArgs,
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_strategy,
        default_value = "time,location,time-appearance,location-appearance"
    )]
    pub strategies: Vec<Strategy>,
    #[arg(long)]
    pub classes: usize,
    #[arg(long)]
    pub k_appearance: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[arg(long)]
    pub normalize_features: bool,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub thresholds: ThresholdArgs,
    /// Table JSON to write; the text table always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
