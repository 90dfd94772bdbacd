//! Artifact writers: tidy CSV outputs for external plotting and the JSON
//! innovation reports. All writers emit rows in a deterministic order so
//! identical runs produce byte-identical files.

use std::path::Path;

use advection_core::{
    AdvectionRecord, AdjustedSeries, CorpusStatRow, Error, FrequencyTable, GroupEval,
    InnovationReport, PeriodCorpus, Result, Smoothing, TopicVector, Variant,
};

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

pub fn write_corpus_stats(path: &Path, rows: &[CorpusStatRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["period", "genre", "tokens", "types"]).map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.period.as_str(),
            r.genre.as_str(),
            &r.tokens.to_string(),
            &r.types.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn io_err(e: csv::Error) -> Error {
    Error::Config(format!("csv write failed: {e}"))
}

pub fn write_freqs(path: &Path, table: &FrequencyTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["word", "period", "raw", "pmw"]).map_err(io_err)?;
    for id in table.words_sorted() {
        for (pi, period) in table.periods().iter().enumerate() {
            w.write_record([
                table.word(id),
                period,
                &table.raw_by_id(id, pi).to_string(),
                &num(table.pmw_by_id(id, pi)),
            ])
            .map_err(io_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_topics(path: &Path, topics: &[TopicVector]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["target", "period", "rank", "context", "ppmi"]).map_err(io_err)?;
    for topic in topics {
        for (rank, (context, weight)) in topic.contexts.iter().enumerate() {
            w.write_record([
                topic.target.as_str(),
                topic.period.as_str(),
                &(rank + 1).to_string(),
                context,
                &num(*weight),
            ])
            .map_err(io_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_advection(path: &Path, records: &[AdvectionRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["word", "period", "log_change", "advection"]).map_err(io_err)?;
    for r in records {
        w.write_record([
            r.word.as_str(),
            r.period.as_str(),
            &num(r.log_change),
            &num(r.advection),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_advection(path: &Path) -> Result<Vec<AdvectionRecord>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Config(format!("{}: {e} (run `advect` first?)", path.display())))?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        let field = |j: usize| -> Result<&str> {
            row.get(j).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: "expected word,period,log_change,advection".into(),
            })
        };
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("bad number `{s}`"),
            })
        };
        out.push(AdvectionRecord {
            word: field(0)?.to_string(),
            period: field(1)?.to_string(),
            log_change: parse(field(2)?)?,
            advection: parse(field(3)?)?,
            variant: Variant::Ppmi,
            smoothing: Smoothing::None,
        });
    }
    Ok(out)
}

pub fn write_eval(path: &Path, evals: &[GroupEval]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["period", "r2", "p", "n"]).map_err(io_err)?;
    for e in evals {
        w.write_record([
            e.group.as_str(),
            &e.r2.map(num).unwrap_or_default(),
            &e.p.map(num).unwrap_or_default(),
            &e.n.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series(path: &Path, series: &AdjustedSeries) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "period",
        "pmw",
        "log_freq",
        "log_change",
        "advection",
        "adjusted",
        "reformed",
    ])
    .map_err(io_err)?;
    for (i, period) in series.periods.iter().enumerate() {
        let (change, advection, adjusted) = if i == 0 {
            (String::new(), String::new(), String::new())
        } else {
            (
                num(series.log_changes[i - 1]),
                series.advections[i - 1].map(num).unwrap_or_default(),
                num(series.adjusted[i - 1]),
            )
        };
        w.write_record([
            period.as_str(),
            &num(series.pmw[i]),
            &num(series.log_freq(i)),
            &change,
            &advection,
            &adjusted,
            &num(series.reformed[i]),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_innovation_reports(path: &Path, reports: &[InnovationReport]) -> Result<()> {
    #[derive(serde::Serialize)]
    struct JsonReport<'a> {
        word: &'a str,
        entry_period: &'a str,
        topic: Vec<(&'a str, f64)>,
        history: Vec<(&'a str, f64)>,
        mean: f64,
        sd: f64,
        ci_low: f64,
        ci_high: f64,
        z: Option<f64>,
        class: String,
    }
    let payload: Vec<JsonReport> = reports
        .iter()
        .map(|r| JsonReport {
            word: &r.word,
            entry_period: &r.entry_period,
            topic: r
                .topic
                .contexts
                .iter()
                .map(|(w, v)| (w.as_str(), *v))
                .collect(),
            history: r
                .history
                .iter()
                .map(|(p, v)| (p.as_str(), *v))
                .collect(),
            mean: r.mean,
            sd: r.sd,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            z: r.z,
            class: r.class.to_string(),
        })
        .collect();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let out = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(out, &payload)
        .map_err(|e| Error::Config(format!("json write failed: {e}")))?;
    Ok(())
}

/// Tidy per-period rows for band plots of innovation histories.
pub fn write_innovation_plot(path: &Path, reports: &[InnovationReport]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "word", "period", "advection", "is_entry", "mean", "ci_low", "ci_high",
    ])
    .map_err(io_err)?;
    for r in reports {
        for (period, value) in &r.history {
            w.write_record([
                r.word.as_str(),
                period,
                &num(*value),
                "0",
                &num(r.mean),
                &num(r.ci_low),
                &num(r.ci_high),
            ])
            .map_err(io_err)?;
        }
        w.write_record([
            r.word.as_str(),
            r.entry_period.as_str(),
            &num(r.entry_advection),
            "1",
            &num(r.mean),
            &num(r.ci_low),
            &num(r.ci_high),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a generated corpus back out as vertical files (one per period and
/// genre, `##` document delimiters, empty POS field) plus a manifest that
/// ingests them. Genre labels survive the round trip through the manifest's
/// per-glob genre field.
pub fn write_vertical_corpus(dir: &Path, corpus: &PeriodCorpus) -> Result<()> {
    use std::collections::BTreeMap;
    use std::io::Write;

    std::fs::create_dir_all(dir)?;
    // (period, genre-or-empty) -> file name
    let mut manifest_groups: Vec<(String, String, String)> = Vec::new();
    for (pi, period) in corpus.periods().iter().enumerate() {
        let mut by_genre: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (di, doc) in corpus.documents(pi).iter().enumerate() {
            by_genre
                .entry(doc.genre.as_deref().unwrap_or(""))
                .or_default()
                .push(di);
        }
        if by_genre.is_empty() {
            by_genre.insert("", Vec::new());
        }
        for (genre, doc_indices) in by_genre {
            let file = if genre.is_empty() {
                format!("{period}.vrt")
            } else {
                format!("{period}.{genre}.vrt")
            };
            let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join(&file))?);
            for di in doc_indices {
                writeln!(out, "## doc {di}")?;
                for &tok in &corpus.documents(pi)[di].tokens {
                    let word = corpus.vocab().word(tok);
                    writeln!(out, "{word}\t{word}\t")?;
                }
            }
            manifest_groups.push((period.clone(), genre.to_string(), file));
        }
    }
    let mut manifest = String::from("format = \"vertical\"\nperiods = [");
    manifest.push_str(
        &corpus
            .periods()
            .iter()
            .map(|p| format!("\"{p}\""))
            .collect::<Vec<_>>()
            .join(", "),
    );
    manifest.push_str("]\nmin_word_len = 1\ndrop_capitalized = false\n");
    for (period, genre, file) in &manifest_groups {
        manifest.push_str(&format!(
            "\n[[sources]]\nperiod = \"{period}\"\nglob = \"{file}\"\n"
        ));
        if !genre.is_empty() {
            manifest.push_str(&format!("genre = \"{genre}\"\n"));
        }
    }
    std::fs::write(dir.join("manifest.toml"), manifest)?;
    Ok(())
}
