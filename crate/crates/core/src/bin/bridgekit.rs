use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bridgekit::gbdt::{self, ParamGrid};
use bridgekit::ingest::Dialect;
use bridgekit::pairgen::PairConfig;
use bridgekit::pipeline::{self, PipelineConfig, PipelineError};
use bridgekit::stats;

#[derive(Parser)]
#[command(name = "bridgekit", version, about = "Bridging-anaphora corpus toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a corpus file to canonical JSONL.
    Convert {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        dialect: Option<Dialect>,
    },
    /// Harmonize a corpus file; writes canonical JSONL and a JSON report.
    Harmonize {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        dialect: Option<Dialect>,
        #[arg(long)]
        exclusions: Option<PathBuf>,
    },
    /// Build a balanced pair dataset.
    Pairs {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        dialect: Option<Dialect>,
        /// Comma-separated pronoun tags.
        #[arg(long, value_delimiter = ',')]
        pronoun_tags: Option<Vec<String>>,
    },
    /// Grid-search with cross-validation and train a model.
    Train {
        data: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// JSON hyperparameter grid; the default grid otherwise.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = gbdt::DEFAULT_LEMMA_TOP_K)]
        lemma_top_k: usize,
    },
    /// Evaluate a model and the random baseline on a dataset.
    Eval {
        model: PathBuf,
        data: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        baseline_p: f64,
        #[arg(long, default_value_t = 5)]
        baseline_runs: usize,
    },
    /// Gain and permutation importance as CSV.
    Importance {
        model: PathBuf,
        data: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Residuals, distributions and confident errors.
    Analyze {
        /// Harmonized documents.
        docs: PathBuf,
        /// Pair dataset for residuals and error mining.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = stats::DEFAULT_TAU)]
        tau: f64,
        #[arg(long, default_value_t = stats::DEFAULT_DISPLAY_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        adjusted: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the whole pipeline from a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
    },
}

fn stage(stage: &'static str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage { stage, message: e.to_string() }
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| stage("output", e))?;
    }
    std::fs::write(path, text).map_err(|e| stage("output", format!("{}: {e}", path.display())))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(&serde_json::to_value(v).expect("serializable")).expect("serializable")
}

fn execute(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Convert { input, out, dialect } => {
            let n = pipeline::convert_file(&input, dialect, &out)?;
            eprintln!("{n} documents written to {}", out.display());
        }
        Command::Harmonize { input, out, report, dialect, exclusions } => {
            let options = pipeline::load_exclusions(exclusions.as_deref())?;
            let r = pipeline::harmonize_file(&input, dialect, &options, &out, &report)?;
            eprint!("{r}");
            if !r.unresolved_entity_types.is_empty() {
                eprintln!("warning: unknown entity types: {}", r.unresolved_entity_types.join(", "));
            }
        }
        Command::Pairs { input, out, seed, csv, dialect, pronoun_tags } => {
            let mut config = PairConfig::default();
            if let Some(tags) = pronoun_tags {
                config.pronoun_tags = tags.into_iter().collect();
            }
            let ds = pipeline::pairs_file(&input, dialect, seed, &config, &out, csv.as_deref())?;
            for w in &ds.provenance.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("{} pairs written to {}", ds.len(), out.display());
        }
        Command::Train { data, out, seed, grid, folds, lemma_top_k } => {
            let grid = match grid {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))?;
                    serde_json::from_str::<ParamGrid>(&text).map_err(|e| PipelineError::Config(e.to_string()))?
                }
                None => ParamGrid::default(),
            };
            let ds = pipeline::read_dataset(&data)?;
            let (model, cv) = pipeline::train_dataset(&ds, &grid, folds, seed, lemma_top_k)?;
            write(&out, model.to_json())?;
            println!("{}", json(&cv.best));
            eprintln!("best mean F1 {:.4}", cv.best_mean_f1);
        }
        Command::Eval { model, data, seed, baseline_p, baseline_runs } => {
            let model = pipeline::read_model(&model)?;
            let ds = pipeline::read_dataset(&data)?;
            let metrics = gbdt::evaluate(&model, &ds).map_err(|e| stage("evaluate", e))?;
            let baseline = gbdt::random_baseline(&ds, baseline_p, baseline_runs, seed).map_err(|e| stage("baseline", e))?;
            println!("{}", json(&serde_json::json!({ "model": metrics, "baseline": baseline })));
        }
        Command::Importance { model, data, seed, repeats, out_dir } => {
            let model = pipeline::read_model(&model)?;
            let ds = pipeline::read_dataset(&data)?;
            let gain = gbdt::gain_importance(&model);
            let mda = gbdt::mda_importance(&model, &ds, repeats, seed).map_err(|e| stage("importance", e))?;
            write(&out_dir.join("gain.csv"), pipeline::importance_csv(&gain))?;
            write(&out_dir.join("mda.csv"), pipeline::importance_csv(&mda))?;
            print!("{}", pipeline::importance_csv(&gain));
        }
        Command::Analyze { docs, data, model, tau, threshold, adjusted, out_dir } => {
            let docs = pipeline::read_file(&docs, None)?;
            let pairs = stats::entity_pair_distribution(&docs, threshold).map_err(|e| stage("distributions", e))?;
            let anaphors = stats::anaphor_entity_distribution(&docs);
            let subtypes = stats::subtype_distribution(&docs);
            write(&out_dir.join("pair_types.csv"), pairs.to_csv())?;
            write(&out_dir.join("anaphor_types.csv"), anaphors.to_csv())?;
            write(&out_dir.join("subtypes.csv"), subtypes.to_csv())?;
            print!("{}\n{}\n{}", pairs.to_text(), anaphors.to_text(), subtypes.to_text());
            let table = match &data {
                Some(p) => stats::definiteness_contingency(&pipeline::read_dataset(p)?),
                None => stats::corpus_definiteness_contingency(&docs, &PairConfig::default()),
            }
            .map_err(|e| stage("residuals", e))?;
            let residuals = stats::chi_square_residuals(&table, adjusted).map_err(|e| stage("residuals", e))?;
            write(&out_dir.join("residuals.csv"), residuals.to_csv())?;
            print!("\n{}", residuals.to_text());
            if let (Some(m), Some(d)) = (&model, &data) {
                let model = pipeline::read_model(m)?;
                let errors = stats::confident_errors(&model, &pipeline::read_dataset(d)?, tau).map_err(|e| stage("errors", e))?;
                write(&out_dir.join("confident_errors.csv"), stats::confident_errors_csv(&errors))?;
                println!("\n{} confident errors below {tau}", errors.len());
            }
        }
        Command::Run { config, seed, output_dir, folds, tau } => {
            let mut config = PipelineConfig::load(&config)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(d) = output_dir {
                config.output_dir = d;
            }
            if let Some(k) = folds {
                config.cv_folds = k;
            }
            if let Some(t) = tau {
                config.tau = t;
            }
            let out = pipeline::run(&config)?;
            print!("{}", out.report.to_text());
            eprintln!("outputs in {}", out.dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
