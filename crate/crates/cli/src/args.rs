use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use soilsense_core::imaging::Rect;

#[derive(Debug, Parser)]
#[command(name = "soilsense", version, about = "Soiling detection toolkit for PV panels")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Service/site configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured data directory.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Site timezone (IANA name) used for day boundaries.
    #[arg(long, global = true)]
    pub timezone: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic sensor stream and its ground truth.
    Simulate(SimulateArgs),
    /// Run the ingestion service until interrupted.
    Serve(ServeArgs),
    /// Rebuild a data directory from raw logs.
    Replay(ReplayArgs),
    /// Daily/monthly tables, plots and a summary from derived blockage points.
    Analyze(AnalyzeArgs),
    /// Black-pixel dust classification of a panel image.
    ClassifyImage(ClassifyArgs),
    /// Dark-blob detector writing predictions as CSV.
    Detect(DetectArgs),
    /// Match predictions against VOC annotations by IoU.
    EvalIou(EvalArgs),
    /// Fit deposition and angle constants to blockage targets.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in scenario name or a scenario TOML file.
    pub scenario: String,
    /// Output directory for stream.jsonl, truth.csv and scenario.toml.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Sample interval in seconds.
    #[arg(long)]
    pub interval: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub http: Option<String>,
    /// Line-protocol listener address.
    #[arg(long)]
    pub tcp: Option<String>,
    #[arg(long)]
    pub no_tcp: bool,
    /// Alert rules, one JSON object per line.
    #[arg(long)]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// A raw log file, a raw/ directory or a data directory.
    pub source: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Period {
    Daily,
    Monthly,
    All,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Derived CSV file, derived/ directory or data directory.
    pub derived: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Period::All)]
    pub period: Period,
    /// Restrict to one node.
    #[arg(long)]
    pub node: Option<String>,
    /// First local date to include (YYYY-MM-DD).
    #[arg(long)]
    pub from: Option<chrono::NaiveDate>,
    /// Last local date to include.
    #[arg(long)]
    pub to: Option<chrono::NaiveDate>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Region of interest x,y,w,h.
    #[arg(long)]
    pub crop: Option<Rect>,
    /// 3x3 box blur before enhancement.
    #[arg(long)]
    pub denoise: bool,
    /// Background-division radius.
    #[arg(long, default_value_t = 15)]
    pub radius: usize,
    /// Skip background division.
    #[arg(long)]
    pub no_enhance: bool,
    /// Pixels below this gray level are black.
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
}

#[derive(Debug, Args)]
pub struct PostArgs {
    /// Base URL of a running service; the result goes to a datastream.
    #[arg(long)]
    pub post: Option<String>,
    #[arg(long, default_value = "cam-1")]
    pub node: String,
    /// Timestamp for the posted value (RFC 3339); defaults to now.
    #[arg(long)]
    pub ts: Option<String>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// PNM, PNG or JPEG image.
    pub image: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Write the binary image (PGM).
    #[arg(long)]
    pub save_binary: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub post: PostArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    pub image: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Smallest blob kept, in pixels.
    #[arg(long, default_value_t = 20)]
    pub min_area: usize,
    #[arg(long, default_value = "droppings")]
    pub label: String,
    /// Defaults to the image file stem.
    #[arg(long)]
    pub image_id: Option<String>,
    /// Prediction CSV; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub post: PostArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV with image_id,label,xmin,ymin,xmax,ymax[,confidence].
    pub predictions: PathBuf,
    /// Directory of VOC XML annotations (or a single file).
    pub annotations: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Targets TOML.
    pub targets: PathBuf,
    /// Scenario to fit against; defaults to the targets' base preset.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Fitted scenario TOML.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
