use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hitpredict_core::learners::{ClassWeight, Variant};

#[derive(Debug, Parser)]
#[command(name = "hitpredict", version, about = "Predict hit songs from Spotify audio features")]
pub struct Cli {
    /// TOML file mirroring command flags. Top-level keys apply to every
    /// command that accepts them; a `[train]` table applies to `train`, and
    /// so on. Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// More logging (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Crawl playlists and write a track records file.
    Ingest(IngestArgs),
    /// Append hit labels to a records file.
    Label(LabelArgs),
    /// Split a labeled file and train one model.
    Train(TrainArgs),
    /// Score a model on one partition of its split.
    Evaluate(EvaluateArgs),
    /// Sweep a hyperparameter grid and report every cell.
    Gridsearch(GridArgs),
    /// Generate a synthetic labeled dataset.
    Synth(SynthArgs),
    /// Combine evaluation reports into one comparison table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Lr,
    Dt,
    Rf,
    Xgb,
    Nn,
}

impl From<ModelKind> for Variant {
    fn from(m: ModelKind) -> Self {
        match m {
            ModelKind::Lr => Variant::Lr,
            ModelKind::Dt => Variant::Dt,
            ModelKind::Rf => Variant::Rf,
            ModelKind::Xgb => Variant::Xgb,
            ModelKind::Nn => Variant::Nn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitKind {
    /// 60/20/20 train/validation/test.
    ThreeWay,
    /// Three-way split applied within each class.
    Stratified,
    /// Train/test only, test share from --test-fraction (default 0.30).
    NnTwoWay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Partition {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightKind {
    None,
    Balanced,
}

impl From<WeightKind> for ClassWeight {
    fn from(w: WeightKind) -> Self {
        match w {
            WeightKind::None => ClassWeight::None,
            WeightKind::Balanced => ClassWeight::Balanced,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Playlist list: one id per line, optional description after the id, `#` comments.
    #[arg(long)]
    pub playlists: PathBuf,
    /// Records file to write (.csv, or .jsonl for JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Replay recorded transcripts from this directory instead of calling the API.
    #[arg(long, value_name = "DIR")]
    pub offline_fixtures: Option<PathBuf>,
    /// Keep tracks released in this inclusive range, e.g. `2010..` or `2010..2019`.
    #[arg(long)]
    pub year_filter: Option<String>,
    /// Write the build summary as JSON here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value = hitpredict_ingest::DEFAULT_API_BASE)]
    pub api_base: String,
    #[arg(long, default_value = hitpredict_ingest::DEFAULT_TOKEN_URL)]
    pub token_url: String,
    /// Batch requests in flight at once.
    #[arg(long, default_value_t = 1)]
    pub concurrency: usize,
    /// Attempts per request before giving up.
    #[arg(long, default_value_t = 5)]
    pub max_attempts: u32,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// A track is a hit when its popularity is strictly above this.
    #[arg(long, default_value_t = hitpredict_core::dataset::DEFAULT_HIT_THRESHOLD)]
    pub threshold: i32,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct HyperParams {
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub iterations: Option<f64>,
    /// Tree depth limit; 0 means unlimited for dt and rf.
    #[arg(long)]
    pub max_depth: Option<f64>,
    #[arg(long)]
    pub min_samples_split: Option<f64>,
    #[arg(long)]
    pub max_features: Option<f64>,
    #[arg(long)]
    pub n_estimators: Option<f64>,
    /// Bootstrap resampling for rf (0 or 1).
    #[arg(long)]
    pub bootstrap: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub min_child_weight: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<f64>,
    #[arg(long)]
    pub epochs: Option<f64>,
    #[arg(long)]
    pub hidden1: Option<f64>,
    #[arg(long)]
    pub hidden2: Option<f64>,
    /// Any other hyperparameter as NAME=VALUE; repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

impl HyperParams {
    pub fn pairs(&self) -> Vec<(String, f64)> {
        let named = [
            ("learning_rate", self.learning_rate),
            ("iterations", self.iterations),
            ("max_depth", self.max_depth),
            ("min_samples_split", self.min_samples_split),
            ("max_features", self.max_features),
            ("n_estimators", self.n_estimators),
            ("bootstrap", self.bootstrap),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("min_child_weight", self.min_child_weight),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("hidden1", self.hidden1),
            ("hidden2", self.hidden2),
        ];
        named
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_owned(), v)))
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to nn-two-way for nn and three-way otherwise.
    #[arg(long, value_enum)]
    pub split: Option<SplitKind>,
    #[arg(long, default_value_t = hitpredict_core::dataset::TWO_WAY_TEST_FRACTION)]
    pub test_fraction: f64,
    /// Score at or above which a track is predicted a hit.
    #[arg(long, default_value_t = 0.5)]
    pub decision_threshold: f64,
    #[arg(long, value_enum, default_value_t = WeightKind::None)]
    pub class_weight: WeightKind,
    #[command(flatten)]
    pub params: HyperParams,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to the model path with a `.manifest.json` suffix.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Also write the split's row indices as JSON.
    #[arg(long)]
    pub export_indices: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, required_unless_present = "confusion")]
    pub model: Option<PathBuf>,
    #[arg(long = "in", value_name = "FILE", required_unless_present = "confusion")]
    pub input: Option<PathBuf>,
    /// Defaults to validation, or test when the split has no validation part.
    #[arg(long, value_enum)]
    pub partition: Option<Partition>,
    /// Override the model's decision threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Seed for permutation importance; defaults to the model's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip feature importance for tree ensembles.
    #[arg(long)]
    pub no_importance: bool,
    /// Evaluate a stored confusion matrix instead of a model.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["model", "input"])]
    pub confusion: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub roc_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelKind::Nn)]
    pub model: ModelKind,
    /// JSON or TOML map from hyperparameter name to a list of values.
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub split: Option<SplitKind>,
    #[arg(long, default_value_t = hitpredict_core::dataset::TWO_WAY_TEST_FRACTION)]
    pub test_fraction: f64,
    #[arg(long, value_enum, default_value_t = WeightKind::None)]
    pub class_weight: WeightKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = hitpredict_core::synth::DEFAULT_ROWS)]
    pub n: usize,
    #[arg(long, default_value_t = hitpredict_core::synth::DEFAULT_HITS)]
    pub hits: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Evaluation report JSON files.
    #[arg(long = "reports", value_name = "FILE", num_args = 1.., required = true)]
    pub reports: Vec<PathBuf>,
    /// `.csv` for CSV, anything else for a markdown table; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
