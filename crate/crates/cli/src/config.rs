//! TOML configuration: the corpus manifest, the synthetic-corpus spec, and
//! the run config that overrides command-line flags.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use advection_core::{
    DocLength, Error, FilterConfig, FormatSpec, MixtureSpec, Result, SourceGroup, TopicSpec,
};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// "vertical" or "plain".
    pub format: String,
    /// Period ids in chronological order.
    pub periods: Vec<String>,
    /// Newline-delimited stopword file, relative to the manifest.
    pub stopwords: Option<PathBuf>,
    /// Newline-delimited OCR-error file, relative to the manifest.
    pub ocr_errors: Option<PathBuf>,
    pub use_lemma: Option<bool>,
    pub min_word_len: Option<usize>,
    pub drop_capitalized: Option<bool>,
    /// Content-POS tag prefixes; empty disables POS filtering.
    pub content_pos: Option<Vec<String>>,
    /// Target-class tag prefixes (marked with the target suffix).
    pub target_pos: Option<Vec<String>>,
    pub sources: Vec<ManifestSource>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestSource {
    pub period: String,
    /// File glob, relative to the manifest's directory.
    pub glob: String,
    pub genre: Option<String>,
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Ingest {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn read_word_list(path: &Path) -> Result<HashSet<String>> {
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

pub struct LoadedManifest {
    pub format: FormatSpec,
    pub periods: Vec<String>,
    pub groups: Vec<SourceGroup>,
    pub filter: FilterConfig,
}

pub fn load_manifest(path: &Path, format_override: Option<&str>) -> Result<LoadedManifest> {
    let manifest: Manifest = read_toml(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let format_str = format_override.unwrap_or(manifest.format.as_str());
    let format = match format_str {
        "vertical" | "vertical-tsv" => FormatSpec::VerticalTsv,
        "plain" | "plain-text" => FormatSpec::PlainText,
        other => {
            return Err(Error::Config(format!(
                "unknown corpus format `{other}` (use vertical|plain)"
            )))
        }
    };

    let mut groups = Vec::new();
    for source in &manifest.sources {
        if !manifest.periods.contains(&source.period) {
            return Err(Error::Config(format!(
                "source glob `{}` is mapped to undeclared period `{}`",
                source.glob, source.period
            )));
        }
        let pattern = base.join(&source.glob);
        let pattern_str = pattern.to_string_lossy().to_string();
        let mut files: Vec<PathBuf> = glob::glob(&pattern_str)
            .map_err(|e| Error::Config(format!("bad glob `{}`: {e}", source.glob)))?
            .filter_map(|entry| entry.ok())
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::Config(format!(
                "glob `{}` matched no files",
                source.glob
            )));
        }
        groups.push(SourceGroup {
            period: source.period.clone(),
            genre: source.genre.clone(),
            files,
        });
    }

    let mut filter = FilterConfig::default();
    if let Some(p) = &manifest.stopwords {
        filter.stopwords = read_word_list(&base.join(p))?;
    }
    if let Some(p) = &manifest.ocr_errors {
        filter.ocr_errors = read_word_list(&base.join(p))?;
    }
    if let Some(v) = manifest.use_lemma {
        filter.use_lemma = v;
    }
    if let Some(v) = manifest.min_word_len {
        filter.min_word_len = v;
    }
    if let Some(v) = manifest.drop_capitalized {
        filter.drop_capitalized = v;
    }
    if let Some(v) = &manifest.content_pos {
        filter.content_pos = v.iter().map(|s| s.to_lowercase()).collect();
    }
    if let Some(v) = &manifest.target_pos {
        filter.target_pos = v.iter().map(|s| s.to_lowercase()).collect();
    }

    Ok(LoadedManifest {
        format,
        periods: manifest.periods,
        groups,
        filter,
    })
}

/// Synthetic-corpus spec. Topics either list words explicitly or ask for a
/// generated vocabulary (`prefix` + `count`, with optional frequency bands).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub periods: Vec<String>,
    pub topics: Vec<SynthTopic>,
    /// One weight row per period, one entry per topic, each row summing to 1.
    pub weights: Vec<Vec<f64>>,
    pub docs_per_period: usize,
    pub doc_len: SynthDocLen,
    pub block_len: Option<usize>,
    pub seed: Option<u64>,
    pub label_genres: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthTopic {
    pub name: String,
    pub words: Option<Vec<(String, f64)>>,
    pub prefix: Option<String>,
    pub count: Option<usize>,
    pub bands: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SynthDocLen {
    Fixed(usize),
    Range { min: usize, max: usize },
}

pub fn load_synth_spec(path: &Path, seed_override: Option<u64>) -> Result<MixtureSpec> {
    let spec: SynthSpec = read_toml(path)?;
    let mut topics = Vec::new();
    for t in &spec.topics {
        let words = match (&t.words, &t.prefix, t.count) {
            (Some(words), _, _) => words.clone(),
            (None, Some(prefix), Some(count)) => {
                let bands = t.bands.clone().unwrap_or_else(|| vec![1.0]);
                (0..count)
                    .map(|i| {
                        (
                            advection_core::synth::indexed_word(prefix, i),
                            bands[i % bands.len()],
                        )
                    })
                    .collect()
            }
            _ => {
                return Err(Error::Config(format!(
                    "topic `{}` needs either `words` or `prefix` + `count`",
                    t.name
                )))
            }
        };
        topics.push(TopicSpec {
            name: t.name.clone(),
            words,
        });
    }
    Ok(MixtureSpec {
        periods: spec.periods,
        topics,
        weights: spec.weights,
        docs_per_period: spec.docs_per_period,
        doc_len: match spec.doc_len {
            SynthDocLen::Fixed(n) => DocLength::Fixed(n),
            SynthDocLen::Range { min, max } => DocLength::Uniform(min, max),
        },
        block_len: spec.block_len.unwrap_or(25),
        seed: seed_override.or(spec.seed).unwrap_or(0),
        label_genres: spec.label_genres.unwrap_or(false),
    })
}

/// Optional run config; any field present here overrides the corresponding
/// command-line flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub window: Option<u32>,
    pub m: Option<usize>,
    pub threshold: Option<u64>,
    pub smooth: Option<String>,
    pub variant: Option<String>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
}

pub fn load_run_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => read_toml(p),
        None => Ok(RunConfig::default()),
    }
}
