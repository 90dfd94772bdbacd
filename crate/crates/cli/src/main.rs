//! `advection`: command-line pipelines over the advection toolkit.
//!
//! Exit codes: 0 success, 1 user error (bad input, missing artifacts),
//! 2 internal error.

mod config;
mod emit;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use advection_core::*;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "advection", version, about = "Topical advection pipelines for diachronic corpora")]
struct Cli {
    /// Directory for run metadata and default artifact locations.
    #[arg(long, global = true, default_value = "run")]
    run_dir: PathBuf,
    /// Corpus cache path (default: $ADVECTION_CACHE, then <run-dir>/corpus.bin).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// TOML run config; values set there override the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelFlags {
    /// Context window on each side of the target.
    #[arg(long, default_value_t = 10)]
    window: u32,
    /// Topic size: number of top context words kept.
    #[arg(long, default_value_t = 75)]
    m: usize,
    /// Minimum raw occurrences per period (or per concatenated stream when
    /// smoothing) for a word to participate.
    #[arg(long, default_value_t = 100)]
    threshold: u64,
    /// Corpus smoothing for topic estimation: none|adjacent|window:N.
    #[arg(long, default_value = "none")]
    smooth: String,
    /// Which words get advection values: auto|marked|all.
    #[arg(long, default_value = "auto")]
    targets: String,
}

#[derive(Args, Clone)]
struct LdaFlags {
    /// Number of latent topics.
    #[arg(long, default_value_t = 500)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Maximum Gibbs sweeps.
    #[arg(long, default_value_t = 5000)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Default for LdaFlags {
    fn default() -> Self {
        Self {
            k: 500,
            alpha: 0.1,
            beta: 0.1,
            iters: 5000,
            seed: 0,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse, clean, and bin a corpus; cache it and write corpus stats.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        /// Override the manifest's format: vertical|plain.
        #[arg(long)]
        format: Option<String>,
        /// Stopword list (newline-delimited), overriding the manifest.
        #[arg(long)]
        stopwords: Option<PathBuf>,
        /// OCR-error list (newline-delimited), overriding the manifest.
        #[arg(long)]
        ocr_errors: Option<PathBuf>,
        /// Output CSV (default <run-dir>/corpus-stats.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-period frequency table as CSV.
    Freq {
        /// Token class to tabulate: all|noun (marked target class).
        #[arg(long, default_value = "all")]
        class: String,
        /// Output CSV (default <run-dir>/freqs.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Topic vectors (top-m PPMI contexts) for one period.
    Topics {
        #[arg(long)]
        period: String,
        /// Restrict the dump to one target word.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        model: ModelFlags,
        /// Output CSV (default <run-dir>/topics.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train LDA models and persist them as flat files.
    LdaTrain {
        /// Train for one period only (default: every period).
        #[arg(long)]
        period: Option<String>,
        #[command(flatten)]
        lda: LdaFlags,
        #[command(flatten)]
        model: ModelFlags,
        /// Output path (single period) or directory (all periods).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Advection series over every eligible (word, period pair).
    Advect {
        /// ppmi|lda
        #[arg(long, default_value = "ppmi")]
        variant: String,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        lda: LdaFlags,
        /// Output CSV (default <run-dir>/advection.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regress log change on advection.
    Eval {
        /// period|pooled
        #[arg(long, default_value = "period")]
        by: String,
        /// Advection CSV to evaluate (default <run-dir>/advection.csv).
        #[arg(long)]
        records: Option<PathBuf>,
        /// Output CSV (default <run-dir>/eval.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Advection-adjusted frequency series for one word.
    Adjust {
        #[arg(long)]
        word: String,
        /// Advection CSV (default <run-dir>/advection.csv).
        #[arg(long)]
        records: Option<PathBuf>,
        /// Output CSV (default <run-dir>/series.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Innovation test: does a new word enter on a rising topic?
    Innovate {
        /// Entry period of the candidate word(s); default: last period.
        #[arg(long)]
        entry: Option<String>,
        /// Candidate word (repeatable). Without it, words first occurring
        /// in the entry period are detected automatically.
        #[arg(long = "word")]
        words: Vec<String>,
        /// Periods concatenated for topic estimation, ending at entry.
        #[arg(long, default_value_t = 4)]
        entry_window: usize,
        /// Preceding period pairs to trace.
        #[arg(long, default_value_t = 10)]
        history: usize,
        #[command(flatten)]
        model: ModelFlags,
        /// Output JSON (default <run-dir>/reports.json).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional tidy CSV of histories for band plots.
        #[arg(long)]
        plot_csv: Option<PathBuf>,
    },
    /// Synthetic corpus generators.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Sample a topic-mixture corpus from a TOML spec.
    Mixture {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the vertical files and generated manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Replace a growing fraction of a word's occurrences with a synonym.
    Inject {
        #[arg(long)]
        word: String,
        #[arg(long)]
        synonym: String,
        /// linear | s-curve:<steepness>
        #[arg(long, default_value = "linear")]
        shape: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomize every token position within one period.
    Shuffle {
        #[arg(long)]
        period: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    // Exit codes: 0 ok, 1 user error, 2 internal. Flag mistakes are user
    // errors, so clap's default exit code of 2 is remapped.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn cache_path(cli: &Cli) -> PathBuf {
    cli.cache
        .clone()
        .or_else(|| std::env::var_os("ADVECTION_CACHE").map(PathBuf::from))
        .unwrap_or_else(|| cli.run_dir.join("corpus.bin"))
}

fn save_cache(path: &Path, corpus: &PeriodCorpus) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let out = std::io::BufWriter::new(std::fs::File::create(path)?);
    bincode::serialize_into(out, corpus)
        .map_err(|e| Error::Config(format!("cache write failed: {e}")))
}

fn load_cache(path: &Path) -> Result<PeriodCorpus> {
    let file = std::fs::File::open(path).map_err(|_| {
        Error::Config(format!(
            "no corpus cache at {}; run `advection ingest` (or `synth`) first",
            path.display()
        ))
    })?;
    let mut corpus: PeriodCorpus = bincode::deserialize_from(std::io::BufReader::new(file))
        .map_err(|e| Error::Config(format!("corrupt corpus cache: {e}")))?;
    corpus.vocab_mut().rebuild_index();
    Ok(corpus)
}

fn parse_smoothing(s: &str) -> Result<Smoothing> {
    match s {
        "none" => Ok(Smoothing::None),
        "adjacent" => Ok(Smoothing::Adjacent),
        other => match other.strip_prefix("window:") {
            Some(n) => {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::Config(format!("bad smoothing window `{other}`")))?;
                if n < 1 {
                    return Err(Error::Config("smoothing window must be >= 1".into()));
                }
                Ok(Smoothing::Window(n))
            }
            None => Err(Error::Config(format!(
                "unknown smoothing `{other}` (use none|adjacent|window:N)"
            ))),
        },
    }
}

fn parse_targets(s: &str) -> Result<TargetScope> {
    match s {
        "auto" => Ok(TargetScope::Auto),
        "marked" | "noun" => Ok(TargetScope::MarkedOnly),
        "all" => Ok(TargetScope::All),
        other => Err(Error::Config(format!(
            "unknown target scope `{other}` (use auto|marked|all)"
        ))),
    }
}

/// Assembles the model config from flags, then lets the run-config file
/// override individual values.
fn advection_config(
    variant: &str,
    model: &ModelFlags,
    lda: &LdaFlags,
    overrides: &config::RunConfig,
) -> Result<AdvectionConfig> {
    let variant = match overrides.variant.as_deref().unwrap_or(variant) {
        "ppmi" => Variant::Ppmi,
        "lda" => Variant::Lda,
        other => {
            return Err(Error::Config(format!(
                "unknown variant `{other}` (use ppmi|lda)"
            )))
        }
    };
    let smooth = overrides.smooth.as_deref().unwrap_or(&model.smooth);
    Ok(AdvectionConfig {
        variant,
        smoothing: parse_smoothing(smooth)?,
        window: overrides.window.unwrap_or(model.window),
        m: overrides.m.unwrap_or(model.m),
        threshold: overrides.threshold.unwrap_or(model.threshold),
        targets: parse_targets(&model.targets)?,
        lda: LdaParams {
            k: overrides.k.unwrap_or(lda.k),
            alpha: overrides.alpha.unwrap_or(lda.alpha),
            beta: overrides.beta.unwrap_or(lda.beta),
            max_iters: overrides.iters.unwrap_or(lda.iters),
            seed: overrides.seed.unwrap_or(lda.seed),
            ..LdaParams::default()
        },
    })
}

fn write_metadata(run_dir: &Path, command: &str, config: serde_json::Value) -> Result<()> {
    std::fs::create_dir_all(run_dir)?;
    let payload = serde_json::json!({
        "tool": "advection",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    });
    let out = std::fs::File::create(run_dir.join("run-metadata.json"))?;
    serde_json::to_writer_pretty(out, &payload)
        .map_err(|e| Error::Config(format!("metadata write failed: {e}")))?;
    Ok(())
}

fn topic_stream(corpus: &PeriodCorpus, pi: usize, smoothing: Smoothing) -> Vec<&CleanDocument> {
    match smoothing {
        Smoothing::None => corpus.concat_window(pi, 1),
        Smoothing::Adjacent => corpus.concat_adjacent(pi),
        Smoothing::Window(n) => corpus.concat_window(pi, n),
    }
}

fn run(cli: Cli) -> Result<()> {
    let overrides = config::load_run_config(cli.config.as_deref())?;
    let cache = cache_path(&cli);
    match &cli.command {
        Command::Ingest {
            manifest,
            format,
            stopwords,
            ocr_errors,
            out,
        } => {
            let mut loaded = config::load_manifest(manifest, format.as_deref())?;
            if let Some(p) = stopwords {
                loaded.filter.stopwords = read_list(p)?;
            }
            if let Some(p) = ocr_errors {
                loaded.filter.ocr_errors = read_list(p)?;
            }
            let raw = parse_corpus(&loaded.groups, loaded.format)?;
            let cleaned = preprocess_all(&raw, &loaded.filter);
            let corpus = bin_periods(cleaned, &loaded.periods)?;
            save_cache(&cache, &corpus)?;
            let out = out
                .clone()
                .unwrap_or_else(|| cli.run_dir.join("corpus-stats.csv"));
            emit::write_corpus_stats(&out, &corpus.stats())?;
            write_metadata(
                &cli.run_dir,
                "ingest",
                serde_json::json!({
                    "manifest": manifest,
                    "cache": cache,
                    "documents": (0..corpus.periods().len())
                        .map(|i| corpus.documents(i).len())
                        .sum::<usize>(),
                    "stats": out,
                }),
            )?;
            eprintln!(
                "ingested {} periods into {}",
                corpus.periods().len(),
                cache.display()
            );
            Ok(())
        }
        Command::Freq { class, out } => {
            let corpus = load_cache(&cache)?;
            let class = match class.as_str() {
                "all" => TokenClass::All,
                "noun" | "target" | "marked" => TokenClass::Targets,
                other => {
                    return Err(Error::Config(format!(
                        "unknown token class `{other}` (use all|noun)"
                    )))
                }
            };
            let table = count_frequencies(&corpus, class);
            let out = out.clone().unwrap_or_else(|| cli.run_dir.join("freqs.csv"));
            emit::write_freqs(&out, &table)?;
            write_metadata(
                &cli.run_dir,
                "freq",
                serde_json::json!({"class": format!("{class:?}"), "out": out, "cache": cache}),
            )?;
            Ok(())
        }
        Command::Topics {
            period,
            target,
            model,
            out,
        } => {
            let corpus = load_cache(&cache)?;
            let cfg = advection_config("ppmi", model, &LdaFlags::default(), &overrides)?;
            let pi = corpus
                .period_index(period)
                .ok_or_else(|| Error::Config(format!("unknown period id `{period}`")))?;
            let docs = topic_stream(&corpus, pi, cfg.smoothing);
            let marked = match cfg.targets {
                TargetScope::MarkedOnly => true,
                TargetScope::All => false,
                TargetScope::Auto => corpus.has_marked_targets(),
            };
            let matrix = build_cooccurrence(
                &docs,
                corpus.vocab(),
                &CoocConfig {
                    window: cfg.window,
                    threshold: cfg.threshold,
                    targets: if marked {
                        TargetSelector::MarkedOnly
                    } else {
                        TargetSelector::All
                    },
                },
                period,
            )?;
            let weighted = advection_core::ppmi(&matrix);
            let mut topics = Vec::new();
            match target {
                Some(word) => {
                    let id = corpus
                        .vocab()
                        .get(word)
                        .ok_or_else(|| Error::UnknownWord(word.clone()))?;
                    topics.push(topic_vector(&weighted, corpus.vocab(), id, cfg.m)?);
                }
                None => {
                    let mut rows: Vec<_> = weighted.rows().collect();
                    rows.sort_by(|a, b| corpus.vocab().word(*a).cmp(corpus.vocab().word(*b)));
                    for row in rows {
                        topics.push(topic_vector(&weighted, corpus.vocab(), row, cfg.m)?);
                    }
                }
            }
            let out = out.clone().unwrap_or_else(|| cli.run_dir.join("topics.csv"));
            emit::write_topics(&out, &topics)?;
            write_metadata(
                &cli.run_dir,
                "topics",
                serde_json::json!({
                    "period": period, "m": cfg.m, "threshold": cfg.threshold,
                    "window": cfg.window, "smooth": cfg.smoothing.to_string(), "out": out,
                }),
            )?;
            Ok(())
        }
        Command::LdaTrain {
            period,
            lda,
            model,
            out,
        } => {
            let corpus = load_cache(&cache)?;
            let cfg = advection_config("lda", model, lda, &overrides)?;
            let params = LdaParams {
                threshold: cfg.threshold,
                ..cfg.lda.clone()
            };
            let period_indices: Vec<usize> = match period {
                Some(p) => vec![corpus
                    .period_index(p)
                    .ok_or_else(|| Error::Config(format!("unknown period id `{p}`")))?],
                None => (0..corpus.periods().len()).collect(),
            };
            let mut written = Vec::new();
            for pi in period_indices {
                let docs = topic_stream(&corpus, pi, cfg.smoothing);
                let trained = train_lda(&docs, corpus.vocab(), &params)?;
                let path = match (out, period) {
                    (Some(p), Some(_)) => p.clone(),
                    (Some(dir), None) => dir.join(format!("model-{}.tsv", corpus.periods()[pi])),
                    (None, _) => cli
                        .run_dir
                        .join(format!("model-{}.tsv", corpus.periods()[pi])),
                };
                if let Some(parent) = path.parent() {
                    if !parent.as_os_str().is_empty() {
                        std::fs::create_dir_all(parent)?;
                    }
                }
                trained.save(&path)?;
                eprintln!(
                    "period {}: {} iterations, vocab {}",
                    corpus.periods()[pi],
                    trained.iterations_run,
                    trained.words().len()
                );
                written.push(path);
            }
            write_metadata(
                &cli.run_dir,
                "lda-train",
                serde_json::json!({
                    "k": params.k, "alpha": params.alpha, "beta": params.beta,
                    "iters": params.max_iters, "seed": params.seed,
                    "threshold": params.threshold, "models": written,
                }),
            )?;
            Ok(())
        }
        Command::Advect {
            variant,
            model,
            lda,
            out,
        } => {
            let corpus = load_cache(&cache)?;
            let cfg = advection_config(variant, model, lda, &overrides)?;
            let table = count_frequencies(&corpus, TokenClass::All);
            let records = advection_series(&corpus, &table, &cfg)?;
            let out = out
                .clone()
                .unwrap_or_else(|| cli.run_dir.join("advection.csv"));
            emit::write_advection(&out, &records)?;
            write_metadata(
                &cli.run_dir,
                "advect",
                serde_json::json!({
                    "variant": cfg.variant.to_string(),
                    "smooth": cfg.smoothing.to_string(),
                    "window": cfg.window, "m": cfg.m, "threshold": cfg.threshold,
                    "lda_seed": cfg.lda.seed, "records": records.len(), "out": out,
                }),
            )?;
            eprintln!("{} advection records -> {}", records.len(), out.display());
            Ok(())
        }
        Command::Eval { by, records, out } => {
            let records_path = records
                .clone()
                .unwrap_or_else(|| cli.run_dir.join("advection.csv"));
            let records = emit::read_advection(&records_path)?;
            let grouping = match by.as_str() {
                "period" => Grouping::PerPeriod,
                "pooled" => Grouping::Pooled,
                other => {
                    return Err(Error::Config(format!(
                        "unknown grouping `{other}` (use period|pooled)"
                    )))
                }
            };
            let evals = eval_r2(&records, grouping);
            let out = out.clone().unwrap_or_else(|| cli.run_dir.join("eval.csv"));
            emit::write_eval(&out, &evals)?;
            write_metadata(
                &cli.run_dir,
                "eval",
                serde_json::json!({"by": by, "records": records_path, "out": out}),
            )?;
            Ok(())
        }
        Command::Adjust { word, records, out } => {
            let corpus = load_cache(&cache)?;
            let table = count_frequencies(&corpus, TokenClass::All);
            let records_path = records
                .clone()
                .unwrap_or_else(|| cli.run_dir.join("advection.csv"));
            let records = emit::read_advection(&records_path)?;
            // Accept the bare word when the corpus marks a target class.
            let resolved = if table.contains(word) {
                word.clone()
            } else {
                let marked = format!("{word}{TARGET_SUFFIX}");
                if table.contains(&marked) {
                    marked
                } else {
                    return Err(Error::UnknownWord(word.clone()));
                }
            };
            let series = adjusted_series(&table, &records, &resolved)?;
            let out = out.clone().unwrap_or_else(|| cli.run_dir.join("series.csv"));
            emit::write_series(&out, &series)?;
            write_metadata(
                &cli.run_dir,
                "adjust",
                serde_json::json!({"word": resolved, "records": records_path, "out": out}),
            )?;
            Ok(())
        }
        Command::Innovate {
            entry,
            words,
            entry_window,
            history,
            model,
            out,
            plot_csv,
        } => {
            let corpus = load_cache(&cache)?;
            let table = count_frequencies(&corpus, TokenClass::All);
            let entry = entry
                .clone()
                .or_else(|| corpus.periods().last().cloned())
                .ok_or_else(|| Error::Config("corpus has no periods".into()))?;
            let entry_idx = corpus
                .period_index(&entry)
                .ok_or_else(|| Error::Config(format!("unknown period id `{entry}`")))?;
            let params = InnovationParams {
                history_depth: *history,
                entry_window: *entry_window,
                cooc_window: overrides.window.unwrap_or(model.window),
                m: overrides.m.unwrap_or(model.m),
                threshold: overrides.threshold.unwrap_or(model.threshold),
            };
            let candidates: Vec<String> = if words.is_empty() {
                detect_innovations(&table, entry_idx, params.threshold)
            } else {
                words.clone()
            };
            if candidates.is_empty() {
                return Err(Error::Domain(format!(
                    "no candidate innovations found for period `{entry}`"
                )));
            }
            let mut reports = Vec::new();
            let mut skipped = Vec::new();
            for word in &candidates {
                match innovation_test(&corpus, &table, word, &entry, &params) {
                    Ok(report) => reports.push(report),
                    // Explicitly requested words fail loudly; auto-detected
                    // candidates may simply lack usable history.
                    Err(e) if words.is_empty() => skipped.push(format!("{word}: {e}")),
                    Err(e) => return Err(e),
                }
            }
            for s in &skipped {
                eprintln!("skipped {s}");
            }
            let out = out
                .clone()
                .unwrap_or_else(|| cli.run_dir.join("reports.json"));
            emit::write_innovation_reports(&out, &reports)?;
            if let Some(plot) = plot_csv {
                emit::write_innovation_plot(plot, &reports)?;
            }
            let ttest = innovation_ttest(&reports);
            write_metadata(
                &cli.run_dir,
                "innovate",
                serde_json::json!({
                    "entry": entry, "entry_window": params.entry_window,
                    "history": params.history_depth, "words": candidates,
                    "reports": reports.len(), "out": out,
                    "ttest": ttest.map(|t| serde_json::json!({
                        "t": t.t, "df": t.df, "p_one_sided": t.p_greater,
                    })),
                }),
            )?;
            for r in &reports {
                println!(
                    "{}\t{}\tentry {:.4}\tmean {:.4}\tci [{:.4}, {:.4}]\t{}",
                    r.word, r.entry_period, r.entry_advection, r.mean, r.ci_low, r.ci_high, r.class
                );
            }
            if let Some(t) = ttest {
                println!(
                    "one-sample t over {} z-scores: t = {:.3}, df = {}, one-sided p = {:.4}",
                    reports.iter().filter(|r| r.z.is_some()).count(),
                    t.t,
                    t.df,
                    t.p_greater
                );
            }
            Ok(())
        }
        Command::Synth(synth) => run_synth(&cli, synth, &cache),
    }
}

fn read_list(path: &Path) -> Result<std::collections::HashSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Ingest {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

/// Words whose first occurrence is the entry period and which are frequent
/// enough there to have a topic.
fn detect_innovations(table: &FrequencyTable, entry_idx: usize, threshold: u64) -> Vec<String> {
    let mut out = Vec::new();
    for id in table.words_sorted() {
        if table.raw_by_id(id, entry_idx) < threshold {
            continue;
        }
        if (0..entry_idx).any(|p| table.raw_by_id(id, p) > 0) {
            continue;
        }
        out.push(table.word(id).to_string());
    }
    out
}

fn run_synth(cli: &Cli, synth: &SynthCommand, cache: &Path) -> Result<()> {
    match synth {
        SynthCommand::Mixture { spec, seed, out } => {
            let mixture = config::load_synth_spec(spec, *seed)?;
            let (corpus, _) = generate_mixture(&mixture)?;
            emit::write_vertical_corpus(out, &corpus)?;
            save_cache(cache, &corpus)?;
            write_metadata(
                &cli.run_dir,
                "synth mixture",
                serde_json::json!({
                    "spec": spec, "seed": mixture.seed, "out": out,
                    "periods": corpus.periods(), "cache": cache,
                }),
            )?;
            eprintln!(
                "generated {} periods, {} total tokens -> {}",
                corpus.periods().len(),
                (0..corpus.periods().len())
                    .map(|i| corpus.token_total(i))
                    .sum::<u64>(),
                out.display()
            );
            Ok(())
        }
        SynthCommand::Inject {
            word,
            synonym,
            shape,
            seed,
            out,
        } => {
            let corpus = load_cache(cache)?;
            let periods = corpus.periods().to_vec();
            let schedule = match shape.as_str() {
                "linear" => ReplacementSchedule::linear(word, synonym, &periods),
                other => match other.strip_prefix("s-curve:") {
                    Some(k) => {
                        let steepness: f64 = k
                            .parse()
                            .map_err(|_| Error::Config(format!("bad s-curve steepness `{k}`")))?;
                        ReplacementSchedule::s_curve(word, synonym, &periods, steepness)
                    }
                    None => {
                        return Err(Error::Config(format!(
                            "unknown shape `{other}` (use linear|s-curve:<steepness>)"
                        )))
                    }
                },
            };
            let injected = inject_synonym(corpus, &schedule, *seed)?;
            emit::write_vertical_corpus(out, &injected)?;
            save_cache(cache, &injected)?;
            write_metadata(
                &cli.run_dir,
                "synth inject",
                serde_json::json!({
                    "word": word, "synonym": synonym, "shape": shape,
                    "seed": seed, "out": out, "cache": cache,
                }),
            )?;
            Ok(())
        }
        SynthCommand::Shuffle { period, seed, out } => {
            let corpus = load_cache(cache)?;
            let shuffled = shuffle_period(corpus, period, *seed)?;
            emit::write_vertical_corpus(out, &shuffled)?;
            save_cache(cache, &shuffled)?;
            write_metadata(
                &cli.run_dir,
                "synth shuffle",
                serde_json::json!({
                    "period": period, "seed": seed, "out": out, "cache": cache,
                }),
            )?;
            Ok(())
        }
    }
}
