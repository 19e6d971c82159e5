use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use alcs::corpus::{load_corpus, CorpusFormat};
use alcs::harness::{
    emit_report, run_experiment, sweep_lsi_dims, ExperimentSpec, ReportFormat, ReprSpec, DEFAULT_SWEEP_DIMS,
};
use alcs::representations::{
    fit_vocabulary, load_embeddings, lsi_fit, lsi_project, similarity_view, tfidf, FeatureMatrix, MatrixKind,
    DEFAULT_MIN_DF,
};
use alcs::selection::{default_dist_min, dwds_select, SelectionConfig, DEFAULT_K};
use alcs::{Error, Result};

#[derive(Parser)]
#[command(
    name = "alcs",
    version,
    about = "Cold-start active learning experiments for text classification"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Bow,
    Lsi,
}

#[derive(Subcommand)]
enum Command {
    /// Run a cross-validated experiment from a JSON spec.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// csv or json; inferred from the extension of --out when omitted.
        #[arg(long)]
        format: Option<ReportFormat>,
    },
    /// Select instances to label from a whole corpus.
    Select {
        /// bow, lsi(<d>) or embedding(<tag>)
        #[arg(long, default_value = "bow")]
        repr: ReprSpec,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        /// Defaults to the representation kind's default.
        #[arg(long)]
        dist_min: Option<f64>,
        #[arg(long)]
        corpus: PathBuf,
        /// DVEC file for embedding representations.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MIN_DF)]
        min_df: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a representation on a corpus and write it as DVEC.
    Represent {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Latent dimensions for lsi.
        #[arg(long)]
        dims: Option<usize>,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MIN_DF)]
        min_df: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep LSI dimensions for classification against raw BoW.
    SweepLsi {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP_DIMS)]
        dims: Vec<usize>,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        format: Option<ReportFormat>,
    },
}

fn bow(corpus: &PathBuf, min_df: usize) -> Result<FeatureMatrix> {
    let corpus = load_corpus(corpus, CorpusFormat::from_path(corpus))?;
    let texts: Vec<&str> = corpus.documents().iter().map(|d| d.text.as_str()).collect();
    let vocab = fit_vocabulary(&texts, min_df)?;
    log::info!("{} documents, {} terms", texts.len(), vocab.len());
    Ok(tfidf(&texts, &vocab))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { spec, out, format } => {
            let spec = ExperimentSpec::from_file(&spec)?;
            let report = run_experiment(&spec)?;
            emit_report(&report, &out, format.unwrap_or_else(|| ReportFormat::from_path(&out)))
        }
        Command::SweepLsi {
            dims,
            spec,
            out,
            format,
        } => {
            let spec = ExperimentSpec::from_file(&spec)?;
            let report = sweep_lsi_dims(&spec, &dims)?;
            emit_report(&report, &out, format.unwrap_or_else(|| ReportFormat::from_path(&out)))
        }
        Command::Select {
            repr,
            budget,
            k,
            dist_min,
            corpus,
            embeddings,
            min_df,
            out,
        } => {
            let features = match &repr {
                ReprSpec::Bow => bow(&corpus, min_df)?,
                ReprSpec::Lsi(d) => {
                    let x = bow(&corpus, min_df)?;
                    lsi_project(&lsi_fit(&x, *d)?, &x)?
                }
                ReprSpec::Embedding(_) => {
                    let path = embeddings.ok_or_else(|| {
                        Error::InvalidArgument("embedding selection needs --embeddings <file.dvec>".into())
                    })?;
                    load_embeddings(path)?
                }
            };
            let cfg = SelectionConfig::new(budget, k, dist_min.unwrap_or_else(|| default_dist_min(repr.kind())))?;
            let result = dwds_select(&similarity_view(&features), &cfg)?;
            if result.exhausted {
                log::warn!("pool exhausted after {} of {budget} instances", result.selected.len());
            }
            let json = serde_json::json!({
                "repr": repr,
                "config": cfg,
                "selected": result.selected,
                "exhausted": result.exhausted,
                "audit": result.audit,
            });
            std::fs::write(&out, serde_json::to_vec_pretty(&json)?).map_err(|e| Error::io(out, e))
        }
        Command::Represent {
            kind,
            dims,
            corpus,
            min_df,
            out,
        } => {
            let x = bow(&corpus, min_df)?;
            let matrix = match kind {
                Kind::Bow => FeatureMatrix::dense(MatrixKind::Bow, x.to_dense()),
                Kind::Lsi => {
                    let d = dims.ok_or_else(|| Error::InvalidArgument("--kind lsi needs --dims".into()))?;
                    lsi_project(&lsi_fit(&x, d)?, &x)?
                }
            };
            alcs::representations::save_embeddings(&matrix, &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
