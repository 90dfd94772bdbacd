//! Advection-based decomposition of word frequency series: adjusted log
//! changes, reformed series, per-period regression residuals, and the
//! lexical-innovation test.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::advection::{ppmi_advection_participating, AdvectionRecord};
use crate::cooccurrence::{build_cooccurrence, ppmi, topic_vector, CoocConfig, TopicVector};
use crate::corpus::PeriodCorpus;
use crate::counts::{log_change, FrequencyTable};
use crate::error::{Error, Result};
use crate::stats;

/// Elementwise `x = c - d`: the change left after removing the topic's
/// motion.
pub fn adjust(changes: &[f64], advections: &[f64]) -> Result<Vec<f64>> {
    if changes.len() != advections.len() {
        return Err(Error::Domain(format!(
            "adjust: {} changes vs {} advection values",
            changes.len(),
            advections.len()
        )));
    }
    Ok(changes
        .iter()
        .zip(advections)
        .map(|(c, d)| c - d)
        .collect())
}

/// Reconstructs a pmw series as exp(a1 + cumulative sum of adjusted
/// changes), a1 = ln(initial pmw). The result has one value per change.
pub fn reform(initial_pmw: f64, adjusted: &[f64]) -> Result<Vec<f64>> {
    if initial_pmw <= 0.0 {
        return Err(Error::Domain(format!(
            "reform requires a positive initial frequency, got {initial_pmw}"
        )));
    }
    let a1 = initial_pmw.ln();
    let mut cum = 0.0;
    Ok(adjusted
        .iter()
        .map(|x| {
            cum += x;
            (a1 + cum).exp()
        })
        .collect())
}

/// The full decomposition of one word's frequency series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdjustedSeries {
    pub word: String,
    pub periods: Vec<String>,
    /// Row (a): pmw frequency per period.
    pub pmw: Vec<f64>,
    /// Row (c): log change per period pair, aligned to `periods[1..]`.
    pub log_changes: Vec<f64>,
    /// Row (d): advection per pair; None where the word had no record.
    pub advections: Vec<Option<f64>>,
    /// Row (x): adjusted change, with missing advection treated as 0.
    pub adjusted: Vec<f64>,
    /// Row (y): reformed series, `reformed[0]` being the initial pmw.
    pub reformed: Vec<f64>,
}

impl AdjustedSeries {
    /// Row (b): natural log of the pmw frequency.
    pub fn log_freq(&self, period_idx: usize) -> f64 {
        self.pmw[period_idx].ln()
    }
}

/// Builds the decomposition for `word` from its frequency series and the
/// advection records of a pipeline run.
pub fn adjusted_series(
    table: &FrequencyTable,
    records: &[AdvectionRecord],
    word: &str,
) -> Result<AdjustedSeries> {
    let periods = table.periods().to_vec();
    let pmw: Vec<f64> = (0..periods.len()).map(|i| table.pmw(word, i)).collect();
    let log_changes: Vec<f64> = table
        .change_series(word)?
        .into_iter()
        .map(|(_, c)| c)
        .collect();
    let by_period: HashMap<&str, f64> = records
        .iter()
        .filter(|r| r.word == word)
        .map(|r| (r.period.as_str(), r.advection))
        .collect();
    let advections: Vec<Option<f64>> = periods[1..]
        .iter()
        .map(|p| by_period.get(p.as_str()).copied())
        .collect();
    let filled: Vec<f64> = advections.iter().map(|d| d.unwrap_or(0.0)).collect();
    let adjusted = adjust(&log_changes, &filled)?;
    let mut reformed = reform(pmw[0], &adjusted)?;
    reformed.insert(0, pmw[0]);
    Ok(AdjustedSeries {
        word: word.to_string(),
        periods,
        pmw,
        log_changes,
        advections,
        adjusted,
        reformed,
    })
}

/// Residuals of log change regressed on advection across the words of one
/// period. Positive means the word is doing better than its topic predicts.
/// None for degenerate groups (fewer than three records or no variance).
pub fn residuals(records: &[AdvectionRecord]) -> Option<HashMap<String, f64>> {
    let x: Vec<f64> = records.iter().map(|r| r.advection).collect();
    let y: Vec<f64> = records.iter().map(|r| r.log_change).collect();
    let fit = stats::ols(&x, &y)?;
    Some(
        records
            .iter()
            .map(|r| {
                let predicted = fit.intercept + fit.slope * r.advection;
                (r.word.clone(), r.log_change - predicted)
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Above,
    Within,
    Below,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Above => write!(f, "above"),
            Classification::Within => write!(f, "within"),
            Classification::Below => write!(f, "below"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnovationParams {
    /// Number of preceding period pairs to evaluate.
    pub history_depth: usize,
    /// Periods concatenated (ending at the entry period) for topic
    /// estimation.
    pub entry_window: usize,
    pub cooc_window: u32,
    pub m: usize,
    pub threshold: u64,
}

impl Default for InnovationParams {
    fn default() -> Self {
        Self {
            history_depth: 10,
            entry_window: 4,
            cooc_window: 10,
            m: 75,
            threshold: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnovationReport {
    pub word: String,
    pub entry_period: String,
    /// Topic frozen once from the entry window.
    pub topic: TopicVector,
    /// (period, advection) for the usable preceding pairs, oldest first.
    pub history: Vec<(String, f64)>,
    pub entry_advection: f64,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// None when the history has zero variance and the entry value differs
    /// from its mean.
    pub z: Option<f64>,
    pub class: Classification,
    pub degenerate_sd: bool,
}

/// Tests whether a word entering the corpus at `entry_period` does so on a
/// rising topic. The topic is estimated once from the entry window; its
/// advection is then traced over up to `history_depth` preceding period
/// pairs, excluding context words with no occurrences in a pair, and the
/// entry-pair value is compared against the 95% confidence interval of the
/// history mean.
pub fn innovation_test(
    corpus: &PeriodCorpus,
    table: &FrequencyTable,
    word: &str,
    entry_period: &str,
    params: &InnovationParams,
) -> Result<InnovationReport> {
    let entry = corpus
        .period_index(entry_period)
        .ok_or_else(|| Error::Config(format!("unknown period id `{entry_period}`")))?;
    if entry == 0 {
        return Err(Error::Domain(
            "entry period has no predecessor to compute a change against".into(),
        ));
    }
    for p in 0..entry {
        if table.raw(word, p) > 0 {
            return Err(Error::Domain(format!(
                "`{word}` already occurs in period `{}`; not an innovation at `{entry_period}`",
                corpus.periods()[p]
            )));
        }
    }
    if table.raw(word, entry) == 0 {
        return Err(Error::Domain(format!(
            "`{word}` does not occur in its claimed entry period `{entry_period}`"
        )));
    }

    // Freeze the topic from the entry window.
    let docs = corpus.concat_window(entry, params.entry_window);
    let label = format!(
        "{}..{}",
        corpus.periods()[(entry + 1).saturating_sub(params.entry_window)],
        entry_period
    );
    let cfg = CoocConfig {
        window: params.cooc_window,
        threshold: params.threshold,
        targets: crate::cooccurrence::TargetSelector::All,
    };
    let matrix = build_cooccurrence(&docs, corpus.vocab(), &cfg, &label)?;
    let weighted = ppmi(&matrix);
    let id = corpus
        .vocab()
        .get(word)
        .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    let topic = topic_vector(&weighted, corpus.vocab(), id, params.m)?;
    if topic.contexts.is_empty() {
        return Err(Error::Domain(format!(
            "`{word}` has no positively associated context words in {label}"
        )));
    }

    let advection_at = |t: usize| -> Result<Option<f64>> {
        ppmi_advection_participating(&topic, |w| {
            let prev = table.pmw(w, t - 1);
            let curr = table.pmw(w, t);
            if prev == 0.0 && curr == 0.0 {
                return None;
            }
            Some(
                log_change(
                    prev,
                    curr,
                    table.smoothing_unit(t - 1),
                    table.smoothing_unit(t),
                )
                .expect("pmw values are nonnegative"),
            )
        })
    };

    let mut history = Vec::new();
    let first_pair = entry.saturating_sub(params.history_depth).max(1);
    for t in first_pair..entry {
        if let Some(a) = advection_at(t)? {
            history.push((corpus.periods()[t].clone(), a));
        }
    }
    if history.len() < 2 {
        return Err(Error::InsufficientHistory {
            word: word.to_string(),
            usable: history.len(),
        });
    }
    let entry_advection = advection_at(entry)?.ok_or_else(|| {
        Error::Domain(format!(
            "no context word of `{word}` participates in the entry pair"
        ))
    })?;

    let values: Vec<f64> = history.iter().map(|(_, a)| *a).collect();
    let summary = classify_entry(&values, entry_advection);
    Ok(InnovationReport {
        word: word.to_string(),
        entry_period: entry_period.to_string(),
        topic,
        history,
        entry_advection,
        mean: summary.mean,
        sd: summary.sd,
        ci_low: summary.ci_low,
        ci_high: summary.ci_high,
        z: summary.z,
        class: summary.class,
        degenerate_sd: summary.degenerate_sd,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EntrySummary {
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: Option<f64>,
    pub class: Classification,
    pub degenerate_sd: bool,
}

/// Compares an entry value against the 95% t-interval of the history mean.
/// A zero-variance history degenerates to strict comparison against the
/// mean; z is then defined (as 0) only when the entry equals the mean.
pub fn classify_entry(history: &[f64], entry: f64) -> EntrySummary {
    let mean = stats::mean(history);
    let sd = stats::sample_sd(history);
    let n = history.len() as f64;
    let (ci_low, ci_high, z, degenerate_sd) = if sd > 0.0 {
        let half = stats::t_critical(0.95, n - 1.0) * sd / n.sqrt();
        (mean - half, mean + half, Some((entry - mean) / sd), false)
    } else {
        (mean, mean, (entry == mean).then_some(0.0), true)
    };
    let class = if entry > ci_high {
        Classification::Above
    } else if entry < ci_low {
        Classification::Below
    } else {
        Classification::Within
    };
    EntrySummary {
        mean,
        sd,
        ci_low,
        ci_high,
        z,
        class,
        degenerate_sd,
    }
}

/// One-sample t-test that the mean entry z-score is above zero. Reports
/// without a finite z are skipped; None when fewer than two remain or the
/// z-scores have no variance.
pub fn innovation_ttest(reports: &[InnovationReport]) -> Option<stats::TTest> {
    let zs: Vec<f64> = reports.iter().filter_map(|r| r.z).collect();
    stats::one_sample_t_greater(&zs, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advection::{Smoothing, Variant};

    const TOL: f64 = 1e-9;

    #[test]
    fn adjust_reference_pairs() {
        // Exact log changes from the pmw series, two-decimal advection.
        let c2 = (151.5f64 / 71.2).ln();
        let c4 = (118.3f64 / 226.3).ln();
        let x = adjust(&[c2, c4], &[0.45, -0.42]).unwrap();
        assert!((x[0] - 0.30).abs() < 0.01);
        assert!((x[1] - (-0.23)).abs() < 0.01);

        let c = [0.1, -0.2, 0.3];
        let same = adjust(&c, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(same.as_slice(), &c);

        assert!(adjust(&[0.1], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn reform_reference_row() {
        let y = reform(69.2, &[0.09, 0.30, 0.10, -0.23]).unwrap();
        let expected = [75.53, 102.08, 112.99, 90.15];
        for (got, want) in y.iter().zip(expected) {
            assert!((got - want).abs() < 0.5, "got {got}, want {want}");
        }
    }

    #[test]
    fn reform_identity_cases() {
        let flat = reform(42.0, &[0.0, 0.0, 0.0]).unwrap();
        assert!(flat.iter().all(|v| (v - 42.0).abs() < TOL));

        // Reforming from unadjusted changes reproduces the series.
        let pmw = [10.0_f64, 25.0, 5.0, 5.0, 80.0];
        let changes: Vec<f64> = pmw.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        let reformed = reform(pmw[0], &changes).unwrap();
        for (got, want) in reformed.iter().zip(&pmw[1..]) {
            assert!((got - want).abs() < TOL);
        }

        assert!(reform(0.0, &[0.1]).is_err());
        assert!(reform(-3.0, &[0.1]).is_err());
    }

    fn record(word: &str, x: f64, y: f64) -> AdvectionRecord {
        AdvectionRecord {
            word: word.into(),
            period: "p".into(),
            log_change: y,
            advection: x,
            variant: Variant::Ppmi,
            smoothing: Smoothing::None,
        }
    }

    #[test]
    fn residuals_closed_form() {
        // (0,0), (1,1), (2,0): slope 0, intercept 1/3.
        let records = vec![
            record("w0", 0.0, 0.0),
            record("w1", 1.0, 1.0),
            record("w2", 2.0, 0.0),
        ];
        let res = residuals(&records).unwrap();
        assert!((res["w0"] + 1.0 / 3.0).abs() < TOL);
        assert!((res["w1"] - 2.0 / 3.0).abs() < TOL);
        assert!((res["w2"] + 1.0 / 3.0).abs() < TOL);
        let sum: f64 = res.values().sum();
        assert!(sum.abs() < TOL, "residuals must sum to zero");

        // A word exactly on the fitted line has residual zero.
        let on_line = vec![
            record("a", 0.0, 1.0),
            record("b", 1.0, 2.0),
            record("c", 2.0, 3.0),
            record("d", 3.0, 4.0),
        ];
        let res = residuals(&on_line).unwrap();
        assert!(res.values().all(|r| r.abs() < TOL));

        assert!(residuals(&records[..2]).is_none());
    }

    #[test]
    fn classify_entry_edge_rules() {
        // History all equal to the entry value: within, z = 0.
        let s = classify_entry(&[0.3, 0.3, 0.3, 0.3], 0.3);
        assert_eq!(s.class, Classification::Within);
        assert_eq!(s.z, Some(0.0));
        assert!(s.degenerate_sd);

        // Flat history, higher entry: strict comparison says above, z is
        // undefined.
        let s = classify_entry(&[0.0, 0.0, 0.0, 0.0], 0.5);
        assert_eq!(s.class, Classification::Above);
        assert_eq!(s.z, None);
        assert!(s.degenerate_sd);

        let s = classify_entry(&[0.0, 0.0, 0.0, 0.0], -0.5);
        assert_eq!(s.class, Classification::Below);

        // Normal history: the CI uses the t quantile of the mean.
        let history = [0.1, -0.1, 0.2, 0.0, -0.2];
        let s = classify_entry(&history, 0.0);
        let n = history.len() as f64;
        let half = crate::stats::t_critical(0.95, n - 1.0) * s.sd / n.sqrt();
        assert!((s.ci_high - (s.mean + half)).abs() < TOL);
        assert!((s.ci_low - (s.mean - half)).abs() < TOL);
        assert_eq!(s.class, Classification::Within);
        assert!(!s.degenerate_sd);
    }

    /// Raising the entry value never moves the classification downward.
    #[test]
    fn classification_is_monotone_in_entry() {
        let rank = |c: Classification| match c {
            Classification::Below => 0,
            Classification::Within => 1,
            Classification::Above => 2,
        };
        let histories: Vec<Vec<f64>> = vec![
            vec![0.05, -0.1, 0.3, 0.12, -0.07],
            vec![1.0, 1.0, 1.0],
            vec![-0.4, 0.4],
            vec![0.0, 0.0, 0.001, -0.001],
        ];
        for history in &histories {
            let mut prev = 0;
            let mut entry = -2.0;
            while entry <= 2.0 {
                let r = rank(classify_entry(history, entry).class);
                assert!(r >= prev, "classification fell at entry {entry}");
                prev = r;
                entry += 0.01;
            }
        }
    }

    #[test]
    fn ttest_reference_values() {
        let mk = |z: Option<f64>| InnovationReport {
            word: "w".into(),
            entry_period: "p".into(),
            topic: TopicVector {
                target: "w".into(),
                period: "p".into(),
                contexts: vec![("c".into(), 1.0)],
            },
            history: vec![],
            entry_advection: 0.0,
            mean: 0.0,
            sd: 1.0,
            ci_low: 0.0,
            ci_high: 0.0,
            z,
            class: Classification::Within,
            degenerate_sd: false,
        };
        let reports: Vec<InnovationReport> =
            [0.5, 1.5, 1.0].iter().map(|&z| mk(Some(z))).collect();
        let t = innovation_ttest(&reports).unwrap();
        assert!((t.t - 3.464102).abs() < 1e-5);
        assert_eq!(t.df, 2.0);
        assert!((t.p_greater - 0.0371).abs() < 1e-3);

        // Symmetric about zero: t = 0, one-sided p = 0.5.
        let sym: Vec<InnovationReport> = [-1.0, 1.0].iter().map(|&z| mk(Some(z))).collect();
        let t = innovation_ttest(&sym).unwrap();
        assert_eq!(t.t, 0.0);
        assert!((t.p_greater - 0.5).abs() < 1e-9);

        // All equal: zero variance, undefined.
        let flat: Vec<InnovationReport> = [1.0, 1.0, 1.0].iter().map(|&z| mk(Some(z))).collect();
        assert!(innovation_ttest(&flat).is_none());

        // Non-finite z reports are skipped.
        let mixed: Vec<InnovationReport> = vec![mk(None), mk(Some(0.5)), mk(Some(1.5))];
        assert!(innovation_ttest(&mixed).is_some());
    }
}
