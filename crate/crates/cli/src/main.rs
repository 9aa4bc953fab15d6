//! `leace`: fit, apply and evaluate linear concept erasers on embedding files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use leace_core::clustering::{kmeans, KMeansOptions};
use leace_core::eraser::{fit_pc1_baseline, fit_with_rtol, ConceptLabels, LeaceEraser};
use leace_core::io::{self, EmbeddingFormat};
use leace_core::json::{format_f64, to_string_pretty};
use leace_core::linalg::{pca, Matrix};
use leace_core::metrics::{ari, pearson, purity, recall_at_k, Similarity};
use leace_core::synth::{generate, sweep_confounder_strength, SyntheticConfig};
use leace_core::{Error, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Seed used by every subcommand when `--seed` is not given.
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "leace", version, about = "Least-squares linear concept erasure for embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an eraser from embeddings and concept labels.
    Fit {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Eraser file to write (JSON).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = leace_core::config::DEFAULT_RTOL)]
        rtol: f64,
    },
    /// Apply a fitted eraser. Writes CSV when `--out` ends in `.csv`, EMBX otherwise.
    Apply {
        #[arg(long)]
        eraser: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// k-means purity and ARI against gold labels, before and after erasure.
    EvalCluster {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        gold: PathBuf,
        /// Cluster counts to try (repeatable); defaults to the number of gold categories.
        #[arg(long = "k")]
        k: Vec<usize>,
    },
    /// Recall@k of paired rows, before and after erasure.
    EvalRetrieve {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long = "recall-at", default_values_t = [1, 10])]
        recall_at: Vec<usize>,
        #[arg(long, value_enum, default_value_t = SimilarityArg::Cosine)]
        similarity: SimilarityArg,
    },
    /// Explained-variance ratios and principal-component scores.
    Pca {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, default_value_t = 2)]
        components: usize,
        /// Labels to attach to the score rows and summarize PC1 by.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// CSV of per-row component scores.
        #[arg(long)]
        scores_out: Option<PathBuf>,
        /// Also write the PC1-removal baseline eraser.
        #[arg(long)]
        eraser_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic corpus from a spec file.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        /// Directory for embeddings.embx, concept.txt, gold.txt and pairs.txt.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the spec file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recall@1 improvement against source-loading strength.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        strengths: Vec<f64>,
        /// Seeds per strength, counting up from the spec's seed.
        #[arg(long, default_value_t = 3)]
        replicates: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    embeddings: PathBuf,
    /// Fitted eraser to evaluate.
    #[arg(long, conflicts_with = "labels")]
    eraser: Option<PathBuf>,
    /// Concept labels; an eraser is fit on the evaluated rows.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = leace_core::config::DEFAULT_RTOL)]
    rtol: f64,
    /// Scale rows to unit length before anything else.
    #[arg(long)]
    normalize_rows: bool,
    /// Metrics JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityArg {
    Cosine,
    Dot,
}

impl From<SimilarityArg> for Similarity {
    fn from(s: SimilarityArg) -> Self {
        match s {
            SimilarityArg::Cosine => Similarity::Cosine,
            SimilarityArg::Dot => Similarity::Dot,
        }
    }
}

/// Input files read so far, with digests for the run metadata.
#[derive(Default)]
struct Inputs(BTreeMap<String, Value>);

impl Inputs {
    fn read(&mut self, role: &str, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.0.insert(role.to_string(), json!({ "path": path.display().to_string(), "sha256": digest }));
        Ok(bytes)
    }

    fn embeddings(&mut self, path: &Path) -> Result<Matrix> {
        io::parse_embeddings(&self.read("embeddings", path)?, EmbeddingFormat::Auto)
    }

    fn labels(&mut self, role: &str, path: &Path, rows: usize) -> Result<ConceptLabels> {
        let labels = io::parse_labels(&self.read(role, path)?)?;
        if labels.len() != rows {
            return Err(Error::Validation(format!(
                "{} has {} labels but the embeddings have {rows} rows",
                path.display(),
                labels.len()
            )));
        }
        Ok(labels)
    }

    fn metadata(self, command: &str, seed: Option<u64>) -> Value {
        json!({
            "tool": "leace",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": seed,
            "inputs": self.0,
        })
    }
}

fn emit(out: Option<&Path>, report: &Value) -> Result<()> {
    let text = to_string_pretty(report);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Embeddings plus the eraser to evaluate, if any.
fn prepare(eval: &EvalArgs, inputs: &mut Inputs) -> Result<(Matrix, Option<LeaceEraser>, Option<ConceptLabels>)> {
    let mut x = inputs.embeddings(&eval.embeddings)?;
    let concept = match &eval.labels {
        Some(p) => Some(inputs.labels("labels", p, x.rows())?),
        None => None,
    };
    let loaded = match &eval.eraser {
        Some(p) => Some(LeaceEraser::from_bytes(&inputs.read("eraser", p)?)?),
        None => None,
    };
    if eval.normalize_rows {
        x = x.normalize_rows();
    }
    let eraser = match (loaded, &concept) {
        (Some(e), _) => Some(e),
        (None, Some(c)) => Some(fit_with_rtol(&x, c, eval.rtol)?),
        (None, None) => None,
    };
    Ok((x, eraser, concept))
}

fn eraser_summary(e: &LeaceEraser, fitted: bool) -> Value {
    json!({
        "source": if fitted { "fit" } else { "file" },
        "dim": e.dim(),
        "arity": e.arity(),
        "erased_rank": e.erased_rank(),
        "idempotence_error": e.idempotence_error(),
    })
}

fn eval_cluster(eval: EvalArgs, gold: PathBuf, ks: Vec<usize>) -> Result<()> {
    let mut inputs = Inputs::default();
    let (x, eraser, concept) = prepare(&eval, &mut inputs)?;
    let gold = inputs.labels("gold", &gold, x.rows())?;
    let ks = if ks.is_empty() { vec![gold.arity()] } else { ks };

    let opts = KMeansOptions::default();
    let block = |m: &Matrix| -> Result<Value> {
        let mut rows = Vec::with_capacity(ks.len());
        for &k in &ks {
            let r = kmeans(m, k, eval.seed, &opts)?;
            let mut entry = json!({
                "k": k,
                "purity": purity(&r.assignments, gold.codes())?,
                "ari": ari(&r.assignments, gold.codes())?,
                "inertia": r.inertia,
                "iterations": r.iterations,
            });
            if let Some(c) = &concept {
                entry["concept_ari"] = json!(ari(&r.assignments, c.codes())?);
            }
            rows.push(entry);
        }
        Ok(Value::Array(rows))
    };

    let mut report = json!({
        "rows": x.rows(),
        "dim": x.cols(),
        "normalize_rows": eval.normalize_rows,
        "before": block(&x)?,
    });
    if let Some(e) = &eraser {
        report["after"] = block(&e.apply(&x)?)?;
        report["eraser"] = eraser_summary(e, eval.eraser.is_none());
    }
    report["metadata"] = inputs.metadata("eval-cluster", Some(eval.seed));
    emit(eval.out.as_deref(), &report)
}

fn eval_retrieve(eval: EvalArgs, pairs: PathBuf, ks: Vec<usize>, similarity: Similarity) -> Result<()> {
    let mut inputs = Inputs::default();
    let (x, eraser, _) = prepare(&eval, &mut inputs)?;
    let pairs = io::parse_pairs(&inputs.read("pairs", &pairs)?)?;
    let block = |m: &Matrix| -> Result<Value> {
        let r = recall_at_k(m, &pairs, None, &ks, similarity)?;
        let ranked: Vec<usize> = r.ranks.iter().flatten().copied().collect();
        let mean_rank = ranked.iter().sum::<usize>() as f64 / ranked.len().max(1) as f64;
        Ok(json!({ "recall_at": r.recall_at, "mean_rank": mean_rank, "queries": r.ranks.len() }))
    };
    let mut report = json!({
        "rows": x.rows(),
        "dim": x.cols(),
        "pairs": pairs.len(),
        "similarity": match similarity { Similarity::Cosine => "cosine", Similarity::Dot => "dot" },
        "normalize_rows": eval.normalize_rows,
        "before": block(&x)?,
    });
    if let Some(e) = &eraser {
        report["after"] = block(&e.apply(&x)?)?;
        report["eraser"] = eraser_summary(e, eval.eraser.is_none());
    }
    report["metadata"] = inputs.metadata("eval-retrieve", Some(eval.seed));
    emit(eval.out.as_deref(), &report)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn run_pca(
    embeddings: PathBuf,
    components: usize,
    labels: Option<PathBuf>,
    scores_out: Option<PathBuf>,
    eraser_out: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut inputs = Inputs::default();
    let x = inputs.embeddings(&embeddings)?;
    let labels = match &labels {
        Some(p) => Some(inputs.labels("labels", p, x.rows())?),
        None => None,
    };
    let max_k = x.cols().min(x.rows().saturating_sub(1));
    let p = pca(&x, components.min(max_k).max(1))?;
    let scores = p.transform(&x)?;

    let mut report = json!({
        "rows": x.rows(),
        "dim": x.cols(),
        "explained_variance": p.explained_variance,
        "explained_variance_ratio": p.explained_variance_ratio,
        "pc1_ratio": p.explained_variance_ratio[0],
    });
    if let Some(l) = &labels {
        let mut sums = vec![(0.0, 0usize); l.arity()];
        for (i, &c) in l.codes().iter().enumerate() {
            sums[c].0 += scores[(i, 0)];
            sums[c].1 += 1;
        }
        let by_label: BTreeMap<&str, f64> =
            l.categories().iter().zip(&sums).map(|(name, (s, n))| (name.as_str(), s / *n as f64)).collect();
        report["pc1_mean_by_label"] = json!(by_label);
    }

    if let Some(path) = &scores_out {
        let mut text = String::from("row");
        for j in 0..scores.cols() {
            text.push_str(&format!(",pc{}", j + 1));
        }
        if labels.is_some() {
            text.push_str(",label");
        }
        text.push('\n');
        for (i, row) in scores.row_iter().enumerate() {
            text.push_str(&i.to_string());
            for v in row {
                text.push(',');
                text.push_str(&format_f64(*v));
            }
            if let Some(l) = &labels {
                text.push(',');
                text.push_str(&csv_field(l.label(i)));
            }
            text.push('\n');
        }
        std::fs::write(path, text)?;
    }
    if let Some(path) = &eraser_out {
        std::fs::write(path, fit_pc1_baseline(&x)?.to_bytes())?;
    }
    report["metadata"] = inputs.metadata("pca", None);
    emit(out.as_deref(), &report)
}

fn read_spec(inputs: &mut Inputs, path: &Path) -> Result<SyntheticConfig> {
    SyntheticConfig::from_json(&inputs.read("spec", path)?)
}

fn run_synth(spec: PathBuf, out: PathBuf, seed: Option<u64>) -> Result<()> {
    let mut inputs = Inputs::default();
    let mut cfg = read_spec(&mut inputs, &spec)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let corpus = generate(&cfg.resolve()?)?;
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("embeddings.embx"), io::write_embx(&corpus.x))?;
    std::fs::write(out.join("concept.txt"), io::write_labels(&corpus.concept))?;
    std::fs::write(out.join("gold.txt"), io::write_labels(&corpus.gold))?;
    std::fs::write(out.join("pairs.txt"), io::write_pairs(&corpus.pairs))?;
    let report = json!({
        "rows": corpus.x.rows(),
        "dim": corpus.x.cols(),
        "pairs": corpus.pairs.len(),
        "files": ["embeddings.embx", "concept.txt", "gold.txt", "pairs.txt"],
        "metadata": inputs.metadata("synth", Some(cfg.seed)),
    });
    emit(None, &report)
}

fn run_sweep(spec: PathBuf, strengths: Vec<f64>, replicates: u64, out: Option<PathBuf>) -> Result<()> {
    if replicates == 0 {
        return Err(Error::Validation("--replicates must be at least 1".into()));
    }
    let mut inputs = Inputs::default();
    let base = read_spec(&mut inputs, &spec)?.resolve()?;
    let mut rows = Vec::new();
    for r in 0..replicates {
        rows.extend(sweep_confounder_strength(&base.with_seed(base.seed + r), &strengths)?);
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.pc1_ratio).collect();
    let gains: Vec<f64> = rows.iter().map(|r| r.improvement()).collect();
    let correlation = match pearson(&ratios, &gains) {
        Ok(r) => json!(r),
        Err(Error::DegenerateInput(_)) => Value::Null,
        Err(e) => return Err(e),
    };
    let table: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "strength": r.strength,
                "seed": r.seed,
                "pc1_ratio": r.pc1_ratio,
                "recall_before": r.recall_before,
                "recall_after": r.recall_after,
                "improvement": r.improvement(),
            })
        })
        .collect();
    let report = json!({
        "rows": table,
        "pearson_pc1_ratio_vs_improvement": correlation,
        "metadata": inputs.metadata("sweep", Some(base.seed)),
    });
    emit(out.as_deref(), &report)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit { embeddings, labels, out, rtol } => {
            let mut inputs = Inputs::default();
            let x = inputs.embeddings(&embeddings)?;
            let c = inputs.labels("labels", &labels, x.rows())?;
            let eraser = fit_with_rtol(&x, &c, rtol)?;
            std::fs::write(out, eraser.to_bytes())?;
            Ok(())
        }
        Command::Apply { eraser, embeddings, out } => {
            let mut inputs = Inputs::default();
            let e = LeaceEraser::from_bytes(&inputs.read("eraser", &eraser)?)?;
            let x = inputs.embeddings(&embeddings)?;
            io::write_embeddings(&out, &e.apply(&x)?, EmbeddingFormat::Auto)
        }
        Command::EvalCluster { eval, gold, k } => eval_cluster(eval, gold, k),
        Command::EvalRetrieve { eval, pairs, recall_at, similarity } => {
            eval_retrieve(eval, pairs, recall_at, similarity.into())
        }
        Command::Pca { embeddings, components, labels, scores_out, eraser_out, out } => {
            run_pca(embeddings, components, labels, scores_out, eraser_out, out)
        }
        Command::Synth { spec, out, seed } => run_synth(spec, out, seed),
        Command::Sweep { spec, strengths, replicates, out } => run_sweep(spec, strengths, replicates, out),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) | Error::NotPsd { .. } | Error::DegenerateInput(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("leace: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
