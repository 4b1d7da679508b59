//! Config-driven orchestration behind the `bridgekit` binary.
//!
//! A run reads every corpus partition, harmonizes it, builds balanced pair
//! datasets (training = train + dev, evaluation = test), selects
//! hyperparameters by cross-validation, trains one model per corpus,
//! evaluates every model on every evaluation set next to a random baseline
//! and writes importance, residual, distribution and error tables. Outputs are
//! collected in `run-<hash>.partial/` and renamed to `run-<hash>/` once every
//! stage has succeeded; the hash is taken over the resolved config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gbdt::{
    self, cross_validate, encode, evaluate, gain_importance, mda_importance, random_baseline, BaselineMetrics,
    CvResult, GbdtModel, HyperParams, Importance, Metrics, ParamGrid,
};
use crate::harmonize::{harmonize_corpus, ExclusionList, HarmonizeOptions, HarmonizeReport};
use crate::ingest::{emit_canonical, read_documents, Dialect, IngestError};
use crate::model::Document;
use crate::pairgen::{build_balanced_dataset, PairConfig, PairDataset, PairLabel, DEFAULT_PRONOUN_TAGS};
use crate::stats::{
    self, anaphor_entity_distribution, chi_square_residuals, confident_errors, definiteness_contingency,
    entity_pair_distribution, subtype_distribution, ConfidentError, ContingencyTable2x2, Distribution,
    PairTypeDistribution, ResidualTable,
};

/// Overrides `output_dir` when set.
pub const OUTPUT_DIR_ENV: &str = "BRIDGEKIT_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: IngestError,
    },
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Parse { .. } => 2,
            PipelineError::Stage { .. } => 3,
        }
    }

    fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage { stage, message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub name: String,
    /// Inferred from each file's extension when absent.
    #[serde(default)]
    pub dialect: Option<Dialect>,
    #[serde(default)]
    pub train: Vec<PathBuf>,
    #[serde(default)]
    pub dev: Vec<PathBuf>,
    #[serde(default)]
    pub test: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSource {
    /// Balanced pair datasets.
    #[default]
    Dataset,
    /// Every mention of the harmonized corpus.
    Corpus,
}

fn default_pronoun_tags() -> Vec<String> {
    DEFAULT_PRONOUN_TAGS.iter().map(|s| s.to_string()).collect()
}
fn default_top_k() -> usize {
    gbdt::DEFAULT_LEMMA_TOP_K
}
fn default_folds() -> usize {
    5
}
fn default_baseline_p() -> f64 {
    1.0 / 3.0
}
fn default_five() -> usize {
    5
}
fn default_tau() -> f64 {
    stats::DEFAULT_TAU
}
fn default_threshold() -> f64 {
    stats::DEFAULT_DISPLAY_THRESHOLD
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpora: Vec<CorpusConfig>,
    /// Required; drives sampling, folds, baseline and permutations.
    pub seed: u64,
    #[serde(default)]
    pub exclusions: Option<PathBuf>,
    #[serde(default = "default_pronoun_tags")]
    pub pronoun_tags: Vec<String>,
    #[serde(default = "default_top_k")]
    pub lemma_top_k: usize,
    #[serde(default)]
    pub grid: ParamGrid,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_baseline_p")]
    pub baseline_p: f64,
    #[serde(default = "default_five")]
    pub baseline_runs: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_five")]
    pub mda_repeats: usize,
    #[serde(default = "default_threshold")]
    pub display_threshold: f64,
    #[serde(default)]
    pub adjusted_residuals: bool,
    #[serde(default)]
    pub residual_source: ResidualSource,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    /// Parse a config, resolving relative paths against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut config: PipelineConfig =
            serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for c in &mut config.corpora {
            c.train.iter_mut().chain(&mut c.dev).chain(&mut c.test).for_each(resolve);
        }
        if let Some(p) = &mut config.exclusions {
            resolve(p);
        }
        resolve(&mut config.output_dir);
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        if self.corpora.is_empty() {
            return fail("no corpora configured".into());
        }
        let mut names = std::collections::BTreeSet::new();
        for c in &self.corpora {
            if c.name.is_empty() || !c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-') {
                return fail(format!("corpus name `{}` must be [A-Za-z0-9_-]+", c.name));
            }
            if !names.insert(&c.name) {
                return fail(format!("duplicate corpus name `{}`", c.name));
            }
            if c.train.is_empty() || c.test.is_empty() {
                return fail(format!("corpus `{}` needs train and test files", c.name));
            }
            for p in c.train.iter().chain(&c.dev).chain(&c.test) {
                if !p.is_file() {
                    return fail(format!("corpus `{}`: {} does not exist", c.name, p.display()));
                }
                if c.dialect.is_none() && Dialect::from_path(p).is_none() {
                    return fail(format!("cannot infer the dialect of {}", p.display()));
                }
            }
        }
        if let Some(p) = &self.exclusions {
            if !p.is_file() {
                return fail(format!("exclusion list {} does not exist", p.display()));
            }
        }
        if self.grid.expand().is_empty() {
            return fail("hyperparameter grid is empty".into());
        }
        for hp in self.grid.expand() {
            hp.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        if self.cv_folds < 2 {
            return fail("cv_folds must be at least 2".into());
        }
        if !(0.0..=1.0).contains(&self.baseline_p) || self.baseline_runs == 0 || self.mda_repeats == 0 {
            return fail("baseline_p must lie in [0,1]; baseline_runs and mda_repeats must be positive".into());
        }
        Ok(())
    }

    pub fn pair_config(&self) -> PairConfig {
        PairConfig {
            pronoun_tags: self.pronoun_tags.iter().cloned().collect(),
            derive_missing: true,
        }
    }

    /// Canonical JSON (sorted keys).
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string_pretty(&value).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_json().as_bytes()))[..16].to_string()
    }
}

fn parse_error(path: &Path, source: IngestError) -> PipelineError {
    PipelineError::Parse { path: path.display().to_string(), source }
}

/// Read one file in the given or inferred dialect.
pub fn read_file(path: &Path, dialect: Option<Dialect>) -> Result<Vec<Document>, PipelineError> {
    let dialect = dialect
        .or_else(|| Dialect::from_path(path))
        .ok_or_else(|| PipelineError::Config(format!("cannot infer the dialect of {}", path.display())))?;
    read_documents(path, dialect).map_err(|e| parse_error(path, e))
}

fn read_files(paths: &[PathBuf], dialect: Option<Dialect>) -> Result<Vec<Document>, PipelineError> {
    let mut docs = Vec::new();
    for p in paths {
        docs.extend(read_file(p, dialect)?);
    }
    Ok(docs)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| PipelineError::stage("output", format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| PipelineError::stage("output", format!("{}: {e}", path.display())))
}

/// Convert any dialect to canonical JSONL; returns the document count.
pub fn convert_file(input: &Path, dialect: Option<Dialect>, output: &Path) -> Result<usize, PipelineError> {
    let docs = read_file(input, dialect)?;
    write(output, emit_canonical(&docs))?;
    Ok(docs.len())
}

pub fn load_exclusions(path: Option<&Path>) -> Result<HarmonizeOptions, PipelineError> {
    let Some(path) = path else {
        return Ok(HarmonizeOptions::default());
    };
    let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    let exclusions = ExclusionList::parse(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    Ok(HarmonizeOptions { exclusions })
}

/// Harmonize a file to canonical JSONL and write the report as JSON.
pub fn harmonize_file(
    input: &Path,
    dialect: Option<Dialect>,
    options: &HarmonizeOptions,
    output: &Path,
    report_path: &Path,
) -> Result<HarmonizeReport, PipelineError> {
    let docs = read_file(input, dialect)?;
    let (docs, report) = harmonize_corpus(&docs, options);
    write(output, emit_canonical(&docs))?;
    write(report_path, to_json(&report))?;
    Ok(report)
}

/// Build a balanced dataset from a document file and write it as JSONL
/// (and CSV when `csv` is given).
pub fn pairs_file(
    input: &Path,
    dialect: Option<Dialect>,
    seed: u64,
    config: &PairConfig,
    output: &Path,
    csv: Option<&Path>,
) -> Result<PairDataset, PipelineError> {
    let docs = read_file(input, dialect)?;
    let mut ds = build_balanced_dataset(&docs, seed, config).map_err(|e| PipelineError::stage("pairs", e))?;
    ds.provenance.corpus = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    write(output, ds.to_jsonl())?;
    if let Some(path) = csv {
        write(path, dataset_csv(&ds)?)?;
    }
    Ok(ds)
}

fn dataset_csv(ds: &PairDataset) -> Result<Vec<u8>, PipelineError> {
    let mut buf = Vec::new();
    ds.write_csv(&mut buf).map_err(|e| PipelineError::stage("pairs", e))?;
    Ok(buf)
}

pub fn read_dataset(path: &Path) -> Result<PairDataset, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    PairDataset::from_jsonl(&text).map_err(|e| PipelineError::stage("dataset", format!("{}: {e}", path.display())))
}

pub fn read_model(path: &Path) -> Result<GbdtModel, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    GbdtModel::from_json(&text).map_err(|e| PipelineError::stage("model", format!("{}: {e}", path.display())))
}

/// Select hyperparameters by cross-validation, then fit on the whole
/// dataset.
pub fn train_dataset(
    ds: &PairDataset,
    grid: &ParamGrid,
    folds: usize,
    seed: u64,
    lemma_top_k: usize,
) -> Result<(GbdtModel, CvResult), PipelineError> {
    let cv = cross_validate(ds, grid, folds, seed, lemma_top_k).map_err(|e| PipelineError::stage("cross-validation", e))?;
    let enc = encode(ds, None, lemma_top_k).map_err(|e| PipelineError::stage("train", e))?;
    let model = gbdt::train(&enc.x, &enc.y, &enc.schema, &cv.best, seed).map_err(|e| PipelineError::stage("train", e))?;
    Ok((model, cv))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

pub fn importance_csv(imp: &Importance) -> String {
    let second = if imp.measure == "gain" { "share" } else { "std" };
    let count = if imp.measure == "gain" { "splits" } else { "repeats" };
    let mut out = format!("feature,{},{second},{count}\n", imp.measure);
    for r in imp.ranked() {
        let _ = writeln!(out, "{},{},{},{}", r.feature, r.score, r.secondary, r.count);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetCounts {
    pub corpus: String,
    pub partition: String,
    pub documents: usize,
    pub tokens: usize,
    pub bridging: usize,
    pub coref: usize,
    pub none: usize,
    pub max_distance: usize,
    pub skipped_backward_links: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub model: String,
    pub eval_set: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub eval_set: String,
    pub metrics: BaselineMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub model: String,
    pub eval_set: String,
    pub gain: Importance,
    pub mda: Importance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub corpus: String,
    pub source: ResidualSource,
    pub table: ContingencyTable2x2,
    pub residuals: ResidualTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub corpus: String,
    /// Over every harmonized document of the corpus.
    pub pair_types: PairTypeDistribution,
    /// Over the harmonized evaluation documents.
    pub anaphor_types: Distribution,
    pub subtypes: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub model: String,
    pub eval_set: String,
    pub tau: f64,
    pub errors: Vec<ConfidentError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSelection {
    pub corpus: String,
    pub best: HyperParams,
    pub best_mean_f1: f64,
    pub cv: CvResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub config_hash: String,
    pub harmonize: BTreeMap<String, HarmonizeReport>,
    pub datasets: Vec<DatasetCounts>,
    pub model_selection: Vec<ModelSelection>,
    pub evaluation: Vec<EvalRow>,
    pub baselines: Vec<BaselineRow>,
    pub importance: Vec<ImportanceReport>,
    pub residuals: Vec<ResidualReport>,
    pub distributions: Vec<DistributionReport>,
    pub confident_errors: Vec<ErrorReport>,
}

impl RunReport {
    pub fn metrics(&self, model: &str, eval_set: &str) -> Option<&Metrics> {
        self.evaluation
            .iter()
            .find(|r| r.model == model && r.eval_set == eval_set)
            .map(|r| &r.metrics)
    }

    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "run {}\n", self.config_hash);
        for (corpus, r) in &self.harmonize {
            let _ = writeln!(out, "== harmonization: {corpus}\n{r}");
        }
        let _ = writeln!(out, "== datasets");
        let _ = writeln!(out, "{:<12}{:<8}{:>10}{:>10}{:>10}{:>10}", "corpus", "part", "bridging", "coref", "none", "max_dist");
        for d in &self.datasets {
            let _ = writeln!(
                out,
                "{:<12}{:<8}{:>10}{:>10}{:>10}{:>10}",
                d.corpus, d.partition, d.bridging, d.coref, d.none, d.max_distance
            );
        }
        let _ = writeln!(out, "\n== classification (positive class)");
        let _ = writeln!(out, "{:<12}{:<12}{:>8}{:>8}{:>8}", "model", "eval", "P", "R", "F");
        for r in &self.evaluation {
            let m = &r.metrics;
            let _ = writeln!(out, "{:<12}{:<12}{:>8.2}{:>8.2}{:>8.2}", r.model, r.eval_set, m.precision, m.recall, m.f1);
        }
        for b in &self.baselines {
            let m = &b.metrics;
            let _ = writeln!(out, "{:<12}{:<12}{:>8.2}{:>8.2}{:>8.2}", "random", b.eval_set, m.precision, m.recall, m.f1);
        }
        for imp in &self.importance {
            let _ = writeln!(out, "\n== importance: {} (mda on {})", imp.model, imp.eval_set);
            let mda: BTreeMap<&str, f64> = imp.mda.rows.iter().map(|r| (r.feature.as_str(), r.score)).collect();
            for r in imp.gain.ranked().into_iter().take(10) {
                let _ = writeln!(out, "{:<16}{:>10.4}{:>10.4}", r.feature, r.score, mda.get(r.feature.as_str()).copied().unwrap_or(0.0));
            }
        }
        for r in &self.residuals {
            let _ = writeln!(out, "\n== definiteness residuals: {}\n{}", r.corpus, r.residuals.to_text());
        }
        for d in &self.distributions {
            let _ = writeln!(out, "== anaphor entity types: {}\n{}", d.corpus, d.anaphor_types.to_text());
            let _ = writeln!(out, "== subtypes: {}\n{}", d.corpus, d.subtypes.to_text());
            let _ = writeln!(out, "== antecedent/anaphor types: {}\n{}", d.corpus, d.pair_types.to_text());
        }
        for e in &self.confident_errors {
            let _ = writeln!(out, "== confident errors: {} on {} (p < {}): {}", e.model, e.eval_set, e.tau, e.errors.len());
        }
        out
    }
}

struct CorpusData {
    name: String,
    train_docs: Vec<Document>,
    eval_docs: Vec<Document>,
    train: PairDataset,
    eval: PairDataset,
}

fn stage_harmonize(
    config: &PipelineConfig,
    options: &HarmonizeOptions,
    dir: &Path,
    report: &mut RunReport,
) -> Result<Vec<CorpusData>, PipelineError> {
    let pair_config = config.pair_config();
    let mut corpora = Vec::new();
    for c in &config.corpora {
        let mut total = HarmonizeReport::default();
        let mut parts = Vec::new();
        for (partition, files) in [("train", &c.train), ("dev", &c.dev), ("test", &c.test)] {
            let docs = read_files(files, c.dialect)?;
            let (docs, r) = harmonize_corpus(&docs, options);
            write(&dir.join(format!("harmonized/{}_{partition}.jsonl", c.name)), emit_canonical(&docs))?;
            total.absorb(r);
            parts.push(docs);
        }
        write(&dir.join(format!("harmonize_{}.json", c.name)), to_json(&total))?;
        report.harmonize.insert(c.name.clone(), total);

        let test = parts.pop().expect("three partitions");
        let mut train_docs = parts.concat();
        train_docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        let mut built = Vec::new();
        for (partition, docs) in [("train", &train_docs), ("eval", &test)] {
            let mut ds = build_balanced_dataset(docs, config.seed, &pair_config)
                .map_err(|e| PipelineError::stage("pairs", format!("{} {partition}: {e}", c.name)))?;
            ds.provenance.corpus = c.name.clone();
            ds.provenance.partition = partition.to_string();
            write(&dir.join(format!("datasets/{}_{partition}.jsonl", c.name)), ds.to_jsonl())?;
            write(&dir.join(format!("datasets/{}_{partition}.csv", c.name)), dataset_csv(&ds)?)?;
            report.datasets.push(DatasetCounts {
                corpus: c.name.clone(),
                partition: partition.to_string(),
                documents: docs.len(),
                tokens: docs.iter().map(|d| d.tokens.len()).sum(),
                bridging: ds.count(PairLabel::Bridging),
                coref: ds.count(PairLabel::Coref),
                none: ds.count(PairLabel::None),
                max_distance: ds.provenance.max_distance,
                skipped_backward_links: ds.provenance.skipped_backward_links,
                warnings: ds.provenance.warnings.clone(),
            });
            built.push(ds);
        }
        let eval = built.pop().expect("eval dataset");
        let train = built.pop().expect("train dataset");
        corpora.push(CorpusData { name: c.name.clone(), train_docs, eval_docs: test, train, eval });
    }
    Ok(corpora)
}

fn run_stages(config: &PipelineConfig, dir: &Path) -> Result<RunReport, PipelineError> {
    let options = load_exclusions(config.exclusions.as_deref())?;
    let mut report = RunReport {
        config: config.clone(),
        config_hash: config.hash(),
        harmonize: BTreeMap::new(),
        datasets: Vec::new(),
        model_selection: Vec::new(),
        evaluation: Vec::new(),
        baselines: Vec::new(),
        importance: Vec::new(),
        residuals: Vec::new(),
        distributions: Vec::new(),
        confident_errors: Vec::new(),
    };
    let corpora = stage_harmonize(config, &options, dir, &mut report)?;

    let mut models = Vec::new();
    for c in &corpora {
        let (model, cv) = train_dataset(&c.train, &config.grid, config.cv_folds, config.seed, config.lemma_top_k)?;
        write(&dir.join(format!("models/{}.json", c.name)), model.to_json())?;
        report.model_selection.push(ModelSelection {
            corpus: c.name.clone(),
            best: cv.best.clone(),
            best_mean_f1: cv.best_mean_f1,
            cv,
        });
        models.push(model);
    }

    let mut metrics_csv = String::from("model,eval_set,tp,fp,fn,tn,precision,recall,f1\n");
    for (c, model) in corpora.iter().zip(&models) {
        for e in &corpora {
            let m = evaluate(model, &e.eval).map_err(|err| PipelineError::stage("evaluate", err))?;
            let _ = writeln!(
                metrics_csv,
                "{},{},{},{},{},{},{},{},{}",
                c.name, e.name, m.tp, m.fp, m.fn_, m.tn, m.precision, m.recall, m.f1
            );
            report.evaluation.push(EvalRow { model: c.name.clone(), eval_set: e.name.clone(), metrics: m });
            let errors = confident_errors(model, &e.eval, config.tau).map_err(|err| PipelineError::stage("errors", err))?;
            write(
                &dir.join(format!("errors/{}_on_{}.csv", c.name, e.name)),
                stats::confident_errors_csv(&errors),
            )?;
            report.confident_errors.push(ErrorReport {
                model: c.name.clone(),
                eval_set: e.name.clone(),
                tau: config.tau,
                errors,
            });
        }
    }
    for e in &corpora {
        let b = random_baseline(&e.eval, config.baseline_p, config.baseline_runs, config.seed)
            .map_err(|err| PipelineError::stage("baseline", err))?;
        let _ = writeln!(metrics_csv, "random,{},,,,,{},{},{}", e.name, b.precision, b.recall, b.f1);
        report.baselines.push(BaselineRow { eval_set: e.name.clone(), metrics: b });
    }
    write(&dir.join("metrics.csv"), metrics_csv)?;

    for (c, model) in corpora.iter().zip(&models) {
        let gain = gain_importance(model);
        let mda = mda_importance(model, &c.eval, config.mda_repeats, config.seed)
            .map_err(|err| PipelineError::stage("importance", err))?;
        write(&dir.join(format!("importance/{}_gain.csv", c.name)), importance_csv(&gain))?;
        write(&dir.join(format!("importance/{}_mda.csv", c.name)), importance_csv(&mda))?;
        report.importance.push(ImportanceReport { model: c.name.clone(), eval_set: c.name.clone(), gain, mda });
    }

    for c in &corpora {
        let table = match config.residual_source {
            ResidualSource::Dataset => {
                let mut all = c.train.clone();
                all.examples.extend(c.eval.examples.iter().cloned());
                definiteness_contingency(&all)
            }
            ResidualSource::Corpus => {
                let docs: Vec<Document> = c.train_docs.iter().chain(&c.eval_docs).cloned().collect();
                stats::corpus_definiteness_contingency(&docs, &config.pair_config())
            }
        }
        .map_err(|err| PipelineError::stage("residuals", err))?;
        let residuals =
            chi_square_residuals(&table, config.adjusted_residuals).map_err(|err| PipelineError::stage("residuals", err))?;
        write(&dir.join(format!("stats/{}_residuals.csv", c.name)), residuals.to_csv())?;
        report.residuals.push(ResidualReport { corpus: c.name.clone(), source: config.residual_source, table, residuals });

        let all_docs: Vec<Document> = c.train_docs.iter().chain(&c.eval_docs).cloned().collect();
        let pair_types = entity_pair_distribution(&all_docs, config.display_threshold)
            .map_err(|err| PipelineError::stage("distributions", err))?;
        let anaphor_types = anaphor_entity_distribution(&c.eval_docs);
        let subtypes = subtype_distribution(&c.eval_docs);
        write(&dir.join(format!("stats/{}_pair_types.csv", c.name)), pair_types.to_csv())?;
        write(&dir.join(format!("stats/{}_anaphor_types.csv", c.name)), anaphor_types.to_csv())?;
        write(&dir.join(format!("stats/{}_subtypes.csv", c.name)), subtypes.to_csv())?;
        report.distributions.push(DistributionReport { corpus: c.name.clone(), pair_types, anaphor_types, subtypes });
    }

    write(&dir.join("report.json"), to_json(&report))?;
    write(&dir.join("report.txt"), report.to_text())?;
    Ok(report)
}

#[derive(Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub report: RunReport,
}

/// Execute every stage. On failure the `.partial` directory is kept.
pub fn run(config: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    let mut config = config.clone();
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
        config.output_dir = PathBuf::from(dir);
    }
    config.validate()?;
    let name = format!("run-{}", config.hash());
    let final_dir = config.output_dir.join(&name);
    let partial = config.output_dir.join(format!("{name}.partial"));
    for d in [&partial, &final_dir] {
        if d.exists() {
            fs::remove_dir_all(d).map_err(|e| PipelineError::stage("output", format!("{}: {e}", d.display())))?;
        }
    }
    write(&partial.join("config.resolved.json"), config.to_canonical_json())?;
    let report = run_stages(&config, &partial)?;
    fs::rename(&partial, &final_dir).map_err(|e| PipelineError::stage("output", format!("{}: {e}", final_dir.display())))?;
    Ok(RunOutput { dir: final_dir, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_mandatory() {
        let err = PipelineConfig::from_json(r#"{"corpora": []}"#, Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("seed"));
    }

    #[test]
    fn relative_paths_resolve_against_the_config() {
        let c = PipelineConfig::from_json(
            r#"{"seed": 3, "corpora": [{"name": "g", "train": ["a.brk"], "test": ["/abs/b.brk"]}]}"#,
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(c.corpora[0].train[0], PathBuf::from("/cfg/a.brk"));
        assert_eq!(c.corpora[0].test[0], PathBuf::from("/abs/b.brk"));
        assert_eq!(c.output_dir, PathBuf::from("/cfg/runs"));
        assert_eq!(c.hash().len(), 16);
        assert!(matches!(c.validate(), Err(PipelineError::Config(_))));
    }
}
