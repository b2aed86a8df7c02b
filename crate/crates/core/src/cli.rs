//! Command-line front end: `train`, `transform`, `evaluate`, `compare`, `plot`.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{load_csv, write_table, Dataset, LabelColumn, Scaling};
use crate::error::{Error, Result};
use crate::eval::{cube_root_dims, knn_cv_accuracy, pca_project, EvalReport};
use crate::evolution::{self, EvolutionState, GenerationStats, RunConfig};
use crate::exec::{with_threads, Execution};
use crate::fitness::Normalisation;
use crate::gp::{Embedding, Individual};
use crate::neighbors::NeighborIndex;
use crate::viz::{render_scatter, scatter_rows, ScatterSpec};

pub const MODEL_FORMAT: &str = "gpmal-model/1";
pub const MODEL_FILE: &str = "model.txt";
pub const EMBEDDING_FILE: &str = "embedding.csv";
pub const HISTORY_FILE: &str = "history.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Exit code for invocation mistakes.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for unreadable or invalid input data.
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gpmal", version, about = "Manifold learning with multi-tree genetic programming")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a mapping and write the model, embedding and fitness history.
    Train(TrainArgs),
    /// Apply a trained model to a dataset.
    Transform(TransformArgs),
    /// Cross-validated k-NN accuracy of an embedding CSV.
    Evaluate(EvaluateArgs),
    /// Compare evolved embeddings against PCA at one dimensionality.
    Compare(CompareArgs),
    /// Render a 2-D embedding CSV as an SVG scatter plot.
    Plot(PlotArgs),
}

/// Output dimensionality: a number, or `cr` for the rounded cube root of d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dims {
    Fixed(usize),
    CubeRoot,
}

impl Dims {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            Dims::Fixed(t) => t,
            Dims::CubeRoot => cube_root_dims(d).max(1),
        }
    }
}

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("cr") {
            return Ok(Dims::CubeRoot);
        }
        match s.parse::<usize>() {
            Ok(t) if t >= 1 => Ok(Dims::Fixed(t)),
            _ => Err(format!("expected a positive integer or 'cr', got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Label column: a header name, `last`, or `none`.
    #[arg(long, default_value = "none")]
    pub label: String,
}

impl DataArgs {
    fn label_column(&self) -> LabelColumn {
        LabelColumn::parse(&self.label)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvolutionArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long = "pop")]
    pub population_size: Option<usize>,
    /// Neighbour block parameter.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long = "crossover")]
    pub crossover_rate: Option<f64>,
    #[arg(long = "mutation")]
    pub mutation_rate: Option<f64>,
    #[arg(long = "elitism")]
    pub elitism_count: Option<usize>,
    #[arg(long = "tournament")]
    pub tournament_size: Option<usize>,
    #[arg(long)]
    pub min_depth: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub p_feat: Option<f64>,
    /// Divide summed similarity by n*eta (`selected-pairs`) or n^2 (`squared-instances`).
    #[arg(long, value_parser = parse_normalisation)]
    pub normalisation: Option<Normalisation>,
    /// Worker threads for fitness evaluation.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_normalisation(s: &str) -> std::result::Result<Normalisation, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| "expected 'selected-pairs' or 'squared-instances'".to_string())
}

impl EvolutionArgs {
    /// Applies the overrides on top of the defaults.
    pub fn config(&self, t: usize) -> RunConfig {
        let mut c = RunConfig {
            t,
            ..RunConfig::default()
        };
        macro_rules! set {
            ($($field:ident),*) => {$( if let Some(v) = self.$field { c.$field = v; } )*};
        }
        set!(
            seed,
            generations,
            population_size,
            k,
            theta,
            crossover_rate,
            mutation_rate,
            elitism_count,
            tournament_size,
            min_depth,
            max_depth,
            p_feat,
            normalisation
        );
        c
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output dimensionality, or `cr`.
    #[arg(short = 't', long = "dims", default_value = "2")]
    pub t: Dims,
    #[command(flatten)]
    pub evolution: EvolutionArgs,
    /// Output directory.
    #[arg(long, default_value = "gpmal-out")]
    pub out: PathBuf,
    /// Also write `model.folded.txt` with constant subtrees collapsed.
    #[arg(long)]
    pub fold: bool,
    /// Also write the neighbour orderings as `neighbors.csv`.
    #[arg(long)]
    pub dump_neighbors: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Output embedding CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Embedding (or any numeric) CSV with a label column.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "last")]
    pub label: String,
    #[arg(long, default_value_t = crate::eval::DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, default_value_t = crate::eval::DEFAULT_KNN)]
    pub knn: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "embedding")]
    pub method: String,
    /// Write the report as JSON here; a `.csv` extension writes a summary row instead.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "last")]
    pub label: String,
    #[arg(short = 't', long = "dims", default_value = "2")]
    pub t: Dims,
    /// Comma-separated evolution seeds.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    /// Seed for the fold assignment shared by every method.
    #[arg(long, default_value_t = 0)]
    pub cv_seed: u64,
    #[arg(long, default_value_t = crate::eval::DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, default_value_t = crate::eval::DEFAULT_KNN)]
    pub knn: usize,
    #[command(flatten)]
    pub evolution: EvolutionArgs,
    /// Fit the PCA baseline on the scaled features (as GP sees them) or on the raw file values.
    #[arg(long, value_enum, default_value = "scaled")]
    pub pca_input: PcaInput,
    /// Output CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PcaInput {
    Scaled,
    Raw,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Embedding CSV; the first two numeric columns are plotted.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "last")]
    pub label: String,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
    /// Output SVG; `x,y,label` rows go next to it with a `.csv` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: String,
    pub sha256: String,
    pub n: usize,
    pub d: usize,
    pub label: LabelColumn,
    pub feature_names: Vec<String>,
}

/// Everything needed to regenerate a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub config: RunConfig,
    pub dataset: DatasetInfo,
    pub scaling: Scaling,
    pub eta: usize,
    pub best_fitness: f64,
}

/// A model file: manifest plus one tree per output dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub manifest: Manifest,
    pub individual: Individual,
}

impl Model {
    pub fn to_text(&self) -> Result<String> {
        Ok(format!(
            "# {MODEL_FORMAT}\n# {}\n{}",
            serde_json::to_string(&self.manifest)?,
            self.individual.to_text()
        ))
    }

    pub fn parse(text: &str) -> Result<Model> {
        let manifest_line = text
            .lines()
            .filter_map(|l| l.strip_prefix('#'))
            .map(str::trim)
            .find(|l| l.starts_with('{'))
            .ok_or_else(|| Error::Model("missing manifest header line".into()))?;
        let manifest: Manifest = serde_json::from_str(manifest_line)?;
        let individual = Individual::parse(text)?;
        if individual.t() != manifest.config.t {
            return Err(Error::Model(format!(
                "manifest declares {} trees, file has {}",
                manifest.config.t,
                individual.t()
            )));
        }
        Ok(Model {
            manifest,
            individual,
        })
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::parse(&text)
    }

    /// Scales raw data with the stored parameters and embeds it.
    pub fn transform(&self, raw: &Dataset) -> Result<Embedding> {
        self.individual.check_features(raw.d())?;
        let scaled = self.manifest.scaling.apply(raw)?;
        Ok(self.individual.embed(&scaled))
    }
}

/// Result of the scale, index and evolve pipeline.
#[derive(Debug, Clone)]
pub struct Trained {
    pub scaled: Dataset,
    pub scaling: Scaling,
    pub eta: usize,
    pub state: EvolutionState,
    pub embedding: Embedding,
}

pub fn train_dataset(
    raw: &Dataset,
    cfg: &RunConfig,
    exec: Execution,
    progress: impl FnMut(&GenerationStats),
) -> Result<Trained> {
    cfg.validate_for(raw)?;
    let (scaled, scaling) = raw.scale_min_max();
    let index = NeighborIndex::build(&scaled, cfg.k, exec);
    let state = evolution::run(cfg, &scaled, &index, exec, progress)?;
    let embedding = state.best_ever.embed(&scaled);
    Ok(Trained {
        eta: index.eta(),
        scaled,
        scaling,
        state,
        embedding,
    })
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes an embedding with `dim<j>` columns and an optional `label` column.
pub fn write_embedding(path: &Path, emb: &Embedding, labels: Option<&[String]>) -> Result<()> {
    let mut header: Vec<String> = (0..emb.t()).map(|j| format!("dim{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    let rows = emb.rows().enumerate().map(|(i, r)| {
        let mut row: Vec<String> = r.iter().map(f64::to_string).collect();
        if let Some(l) = labels {
            row.push(l[i].clone());
        }
        row
    });
    write_table(path, &header, rows)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn require_labels(ds: &Dataset) -> Result<&[usize]> {
    ds.labels()
        .ok_or_else(|| Error::Config("this command needs a label column (--label)".into()))
}

/// Paths written by [`cmd_train`].
#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub model: PathBuf,
    pub embedding: PathBuf,
    pub history: PathBuf,
    pub manifest: PathBuf,
    pub best_fitness: f64,
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainArtifacts> {
    let label = args.data.label_column();
    let raw = load_csv(&args.data.data, &label)?;
    let cfg = args.evolution.config(args.t.resolve(raw.d()));
    cfg.validate_for(&raw)?;
    create_dir(&args.out)?;

    let history_path = args.out.join(HISTORY_FILE);
    let mut history = String::new();
    let every = (cfg.generations / 20).max(1);
    let trained = with_threads(args.evolution.threads, || {
        train_dataset(&raw, &cfg, Execution::Parallel, |g| {
            history.push_str(&serde_json::to_string(g).expect("stats serialise"));
            history.push('\n');
            if g.generation % every == 0 || g.generation == cfg.generations {
                log::info!(
                    "generation {:>5}  best {:.6}  mean {:.6}",
                    g.generation,
                    g.best,
                    g.mean
                );
            }
        })
    })?;
    write_file(&history_path, &history)?;

    let manifest = Manifest {
        format: MODEL_FORMAT.into(),
        config: cfg,
        dataset: DatasetInfo {
            path: args.data.data.display().to_string(),
            sha256: sha256_file(&args.data.data)?,
            n: raw.n(),
            d: raw.d(),
            label,
            feature_names: raw.feature_names().to_vec(),
        },
        scaling: trained.scaling.clone(),
        eta: trained.eta,
        best_fitness: trained.state.best_fitness(),
    };
    let model = Model {
        manifest,
        individual: trained.state.best_ever.clone(),
    };
    let model_path = args.out.join(MODEL_FILE);
    write_file(&model_path, &model.to_text()?)?;
    if args.fold {
        let folded = Individual::new(
            model.individual.trees.iter().map(|t| t.fold_constants()).collect(),
        );
        write_file(&args.out.join("model.folded.txt"), &folded.to_text())?;
    }
    if args.dump_neighbors {
        NeighborIndex::build(&trained.scaled, model.manifest.config.k, Execution::Parallel)
            .write_debug_csv(&args.out.join("neighbors.csv"))?;
    }
    let manifest_path = args.out.join(MANIFEST_FILE);
    write_file(
        &manifest_path,
        &(serde_json::to_string_pretty(&model.manifest)? + "\n"),
    )?;
    let embedding_path = args.out.join(EMBEDDING_FILE);
    write_embedding(&embedding_path, &trained.embedding, raw.label_strings().as_deref())?;

    Ok(TrainArtifacts {
        model: model_path,
        embedding: embedding_path,
        history: history_path,
        manifest: manifest_path,
        best_fitness: model.manifest.best_fitness,
    })
}

pub fn cmd_transform(args: &TransformArgs) -> Result<Embedding> {
    let model = Model::load(&args.model)?;
    let raw = load_csv(&args.data.data, &args.data.label_column())?;
    let emb = model.transform(&raw)?;
    write_embedding(&args.out, &emb, raw.label_strings().as_deref())?;
    Ok(emb)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvalReport> {
    let ds = load_csv(&args.data, &LabelColumn::parse(&args.label))?;
    let labels = require_labels(&ds)?;
    let emb = Embedding::new(ds.n(), ds.d(), ds.features().to_vec());
    let mut report = knn_cv_accuracy(&emb, labels, args.folds, args.knn, args.seed, Execution::Parallel)?;
    report.dataset = dataset_name(&args.data);
    report.method = args.method.clone();
    if let Some(out) = &args.out {
        if out.extension().is_some_and(|e| e == "csv") {
            write_table(out, &report.csv_header(), [report.csv_row()])?;
        } else {
            write_file(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
        }
    }
    Ok(report)
}

/// One row per method: accuracy per seed and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub dataset: String,
    pub method: String,
    pub t: usize,
    pub per_seed: Vec<f64>,
}

impl CompareRow {
    pub fn mean(&self) -> f64 {
        self.per_seed.iter().sum::<f64>() / self.per_seed.len() as f64
    }
}

/// Settings shared by every method in a comparison.
#[derive(Debug, Clone)]
pub struct CompareSettings {
    pub folds: usize,
    pub knn: usize,
    pub cv_seed: u64,
    pub pca_input: PcaInput,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings {
            folds: crate::eval::DEFAULT_FOLDS,
            knn: crate::eval::DEFAULT_KNN,
            cv_seed: 0,
            pca_input: PcaInput::Scaled,
        }
    }
}

pub fn compare_rows(
    raw: &Dataset,
    name: &str,
    cfg: &RunConfig,
    seeds: &[u64],
    settings: &CompareSettings,
    exec: Execution,
) -> Result<Vec<CompareRow>> {
    let CompareSettings { folds, knn, cv_seed, pca_input } = *settings;
    let labels = require_labels(raw)?;
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let mut gp = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let cfg = RunConfig { seed, ..cfg.clone() };
        let trained = train_dataset(raw, &cfg, exec, |_| {})?;
        let report = knn_cv_accuracy(&trained.embedding, labels, folds, knn, cv_seed, exec)?;
        log::info!("seed {seed}: fitness {:.6}, accuracy {:.4}", trained.state.best_fitness(), report.mean);
        gp.push(report.mean);
    }
    let pca_data = match pca_input {
        PcaInput::Scaled => raw.scale_min_max().0,
        PcaInput::Raw => raw.clone(),
    };
    let pca = knn_cv_accuracy(&pca_project(&pca_data, cfg.t)?, labels, folds, knn, cv_seed, exec)?;
    Ok(vec![
        CompareRow {
            dataset: name.into(),
            method: "gp-mal".into(),
            t: cfg.t,
            per_seed: gp,
        },
        CompareRow {
            dataset: name.into(),
            method: "pca".into(),
            t: cfg.t,
            per_seed: vec![pca.mean; seeds.len()],
        },
    ])
}

pub fn cmd_compare(args: &CompareArgs) -> Result<Vec<CompareRow>> {
    let raw = load_csv(&args.data, &LabelColumn::parse(&args.label))?;
    let cfg = args.evolution.config(args.t.resolve(raw.d()));
    cfg.validate_for(&raw)?;
    let rows = with_threads(args.evolution.threads, || {
        compare_rows(
            &raw,
            &dataset_name(&args.data),
            &cfg,
            &args.seeds,
            &CompareSettings {
                folds: args.folds,
                knn: args.knn,
                cv_seed: args.cv_seed,
                pca_input: args.pca_input,
            },
            Execution::Parallel,
        )
    })?;
    let mut header: Vec<String> = ["dataset", "method", "t", "mean"].map(String::from).to_vec();
    header.extend(args.seeds.iter().map(|s| format!("seed_{s}")));
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.dataset.clone(), r.method.clone(), r.t.to_string(), r.mean().to_string()];
            v.extend(r.per_seed.iter().map(f64::to_string));
            v
        })
        .collect();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = writeln!(lock, "{}", header.join(","));
    for r in &table {
        let _ = writeln!(lock, "{}", r.join(","));
    }
    if let Some(out) = &args.out {
        write_table(out, &header, table)?;
    }
    Ok(rows)
}

pub fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let ds = load_csv(&args.data, &LabelColumn::parse(&args.label))?;
    let emb = Embedding::new(ds.n(), ds.d(), ds.features().to_vec());
    let mut spec = ScatterSpec::from_embedding(&emb, ds.labels(), ds.class_names())?
        .with_title(args.title.clone().unwrap_or_else(|| dataset_name(&args.data)));
    spec.width = args.width;
    spec.height = args.height;
    write_file(&args.out, &render_scatter(&spec))?;
    let header = ["x", "y", "label"].map(String::from);
    write_table(&args.out.with_extension("csv"), &header, scatter_rows(&spec))
}

/// Runs a parsed command, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a).map(|art| {
            println!("best fitness {:.6}; model written to {}", art.best_fitness, art.model.display());
        }),
        Command::Transform(a) => cmd_transform(a).map(|e| {
            println!("embedded {} rows into {} dimensions: {}", e.n(), e.t(), a.out.display());
        }),
        Command::Evaluate(a) => cmd_evaluate(a).map(|r| {
            println!("{}", serde_json::to_string_pretty(&r).expect("report serialises"));
        }),
        Command::Compare(a) => cmd_compare(a).map(|_| ()),
        Command::Plot(a) => cmd_plot(a).map(|()| println!("wrote {}", a.out.display())),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_data_error() {
                EXIT_DATA
            } else {
                EXIT_USAGE
            }
        }
    }
}

/// Parses `args` and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parse() {
        assert_eq!("cr".parse::<Dims>().unwrap(), Dims::CubeRoot);
        assert_eq!("3".parse::<Dims>().unwrap(), Dims::Fixed(3));
        assert!("0".parse::<Dims>().is_err());
        assert!("x".parse::<Dims>().is_err());
        assert_eq!(Dims::CubeRoot.resolve(500), 8);
    }

    #[test]
    fn overrides_apply_on_defaults() {
        let cli = Cli::try_parse_from([
            "gpmal", "train", "--data", "x.csv", "-t", "3", "--pop", "64", "--generations", "5",
            "--seed", "9", "--normalisation", "squared-instances",
        ])
        .unwrap();
        let Command::Train(a) = cli.command else { panic!() };
        let cfg = a.evolution.config(a.t.resolve(10));
        assert_eq!((cfg.t, cfg.population_size, cfg.generations, cfg.seed), (3, 64, 5, 9));
        assert_eq!(cfg.normalisation, Normalisation::SquaredInstances);
        assert_eq!(cfg.tournament_size, 7);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["gpmal", "train"]), EXIT_USAGE);
        assert_eq!(main_with_args(["gpmal", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_with_args(["gpmal", "--help"]), 0);
    }

    #[test]
    fn missing_file_is_a_data_error() {
        assert_eq!(
            main_with_args(["gpmal", "train", "--data", "/nonexistent/file.csv", "--out", "/tmp/x"]),
            EXIT_DATA
        );
    }
}
