//! Quantifying how much of a word's frequency change is carried by the
//! motion of its topic.
//!
//! For every target word in a diachronic corpus, the library estimates a
//! "topic" (the top-m context words by PPMI, or a latent LDA topic mixture)
//! per time period and computes the word's *advection*: the weighted mean
//! log frequency change of its topic words. Advection serves as a baseline
//! for frequency change, can be subtracted out of a series to expose the
//! residual (putatively selection-driven) component, and flags new words
//! that enter the lexicon on a rising topic.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`]: ingest vertical/plain files, clean tokens, bin periods.
//! 2. [`counts`]: per-period frequencies, pmw normalization, log change.
//! 3. [`cooccurrence`]: windowed counting, PPMI, topic vectors, APSyn.
//! 4. [`lda`]: collapsed-Gibbs topic models and the LDA advection variant.
//! 5. [`advection`]: advection series and descriptive-power evaluation.
//! 6. [`timeseries`]: series adjustment, residuals, innovation testing.
//! 7. [`synth`]: seeded generators for validation corpora.

pub mod advection;
pub mod cooccurrence;
pub mod corpus;
pub mod counts;
pub mod error;
pub mod lda;
pub mod stats;
pub mod synth;
pub mod timeseries;
pub mod vocab;

pub use advection::{
    advection_series, eval_r2, genre_divergence, ppmi_advection, weighted_mean, AdvectionConfig,
    AdvectionRecord, GenreDistribution, GroupEval, Grouping, Smoothing, TargetScope, Variant,
};
pub use cooccurrence::{
    apsyn, build_cooccurrence, ppmi, topic_vector, CoocConfig, CooccurrenceMatrix, PpmiMatrix,
    TargetSelector, TopicVector,
};
pub use corpus::{
    bin_periods, parse_corpus, preprocess, preprocess_all, CleanDocument, CleanTokens,
    CorpusStatRow, FilterConfig, FormatSpec, PeriodCorpus, RawDocument, RawToken, SourceGroup,
    NUM_PLACEHOLDER, TARGET_SUFFIX,
};
pub use counts::{
    change_measures, count_frequencies, log_change, ChangeMeasures, FrequencyTable, TokenClass,
};
pub use error::{Error, Result};
pub use lda::{lda_advection, train_lda, GibbsSampler, LdaModel, LdaParams};
pub use synth::{
    generate_mixture, inject_synonym, shuffle_period, unigram_counts, DocLength, GroundTruth,
    MixtureSpec, ReplacementSchedule, ScheduleShape, TopicSpec,
};
pub use timeseries::{
    adjust, adjusted_series, innovation_test, innovation_ttest, reform, residuals,
    AdjustedSeries, Classification, InnovationParams, InnovationReport,
};
pub use vocab::{Vocab, WordId};
