use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iwisdm::presets::{ComplexityLevel, PresetName, SingleFrameKind};
use iwisdm::value::Attribute;

#[derive(Debug, Parser)]
#[command(
    name = "iwisdm",
    version,
    about = "Generate, score and serve compositional visual decision-making tasks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a complexity benchmark.
    Generate(GenerateArgs),
    /// Generate trials of a named preset task.
    Preset(PresetArgs),
    /// Generate one-frame sanity trials.
    Singleframe(SingleFrameArgs),
    /// Score a responses file against a dataset.
    Score(ScoreArgs),
    /// Serve the human session API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Master seed; IWISDM_SEED overrides it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset directory; defaults to datasets/<label>.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write trial.json files only.
    #[arg(long)]
    pub no_render: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(ComplexityLevel))]
    pub complexity: ComplexityLevel,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub num: u64,
    /// Most distractors per object frame, up to 3.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(0..=3))]
    pub distractors: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttributeArg {
    Category,
    Location,
    Identity,
}

impl From<AttributeArg> for Attribute {
    fn from(a: AttributeArg) -> Attribute {
        match a {
            AttributeArg::Category => Attribute::Category,
            AttributeArg::Location => Attribute::Location,
            AttributeArg::Identity => Attribute::Identity,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PresetArgs {
    /// dms, ctxdm or nback:K
    #[arg(long, value_parser = clap::value_parser!(PresetName))]
    pub task: PresetName,
    #[arg(long, value_enum, default_value_t = AttributeArg::Category)]
    pub attr: AttributeArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub num: u64,
    /// Frame count; each preset has its own default.
    #[arg(long)]
    pub frames: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SingleFrameArgs {
    #[arg(long, value_parser = clap::value_parser!(SingleFrameKind))]
    pub kind: SingleFrameKind,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub num: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// JSON lines, or CSV when the name ends in .csv.
    #[arg(long)]
    pub responses: PathBuf,
    /// Accept answers naming exactly one pool token anywhere in the text.
    #[arg(long)]
    pub lenient: bool,
    /// Write uniformly random responses to --responses first, then score them.
    #[arg(long)]
    pub simulate_random: bool,
    /// Report path; defaults to <responses>.report.json.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Seed for --simulate-random; IWISDM_SEED overrides it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Directory whose subdirectories are datasets.
    #[arg(long, default_value = "datasets")]
    pub datasets: PathBuf,
    /// Sessions are stored under <run-dir>/sessions.
    #[arg(long, default_value = "runs")]
    pub run_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}
