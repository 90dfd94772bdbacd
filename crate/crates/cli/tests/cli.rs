//! End-to-end tests of the `advection` binary: the full synth -> ingest ->
//! advect -> eval -> adjust -> innovate workflow, artifact schemas, run
//! determinism, and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_advection"))
}

fn work_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("advection-cli-tests")
        .join(format!("{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(dir: &Path, args: &[&str]) -> Output {
    let out = bin().current_dir(dir).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(dir: &Path, args: &[&str]) -> i32 {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

const SPEC: &str = r#"
periods = ["1900", "1910", "1920"]
docs_per_period = 300
doc_len = 200
block_len = 40
seed = 42
label_genres = true
weights = [[0.7, 0.3], [0.5, 0.5], [0.25, 0.75]]

[[topics]]
name = "acad"
prefix = "aca"
count = 80
bands = [1.0, 2.0, 4.0]

[[topics]]
name = "spok"
prefix = "spo"
count = 80
bands = [1.0, 2.0, 4.0]
"#;

fn prepare_corpus(dir: &Path) {
    std::fs::write(dir.join("mix.toml"), SPEC).unwrap();
    run_ok(
        dir,
        &["synth", "mixture", "--spec", "mix.toml", "--out", "corpus"],
    );
    run_ok(
        dir,
        &["ingest", "--manifest", "corpus/manifest.toml"],
    );
}

fn read(dir: &Path, rel: &str) -> String {
    std::fs::read_to_string(dir.join(rel)).unwrap()
}

#[test]
fn full_pipeline_produces_declared_artifacts() {
    let dir = work_dir("pipeline");
    prepare_corpus(&dir);

    let stats = read(&dir, "run/corpus-stats.csv");
    assert!(stats.starts_with("period,genre,tokens,types\n"));
    let token_total: u64 = stats
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(token_total, 3 * 300 * 200);

    run_ok(&dir, &["freq", "--class", "all", "--out", "run/freqs.csv"]);
    let freqs = read(&dir, "run/freqs.csv");
    assert!(freqs.starts_with("word,period,raw,pmw\n"));
    assert_eq!(freqs.lines().count(), 1 + 160 * 3);

    run_ok(
        &dir,
        &[
            "advect",
            "--variant",
            "ppmi",
            "--smooth",
            "adjacent",
            "--threshold",
            "60",
        ],
    );
    let advection = read(&dir, "run/advection.csv");
    assert!(advection.starts_with("word,period,log_change,advection\n"));
    assert_eq!(advection.lines().count(), 1 + 160 * 2);

    run_ok(&dir, &["eval", "--by", "period"]);
    let eval = read(&dir, "run/eval.csv");
    assert!(eval.starts_with("period,r2,p,n\n"));
    assert_eq!(eval.lines().count(), 3);
    // The mixture drifts every period, so advection must explain most
    // variance in both pairs.
    for line in eval.lines().skip(1) {
        let r2: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(r2 > 0.5, "weak fit in {line}");
    }

    run_ok(&dir, &["adjust", "--word", "acaaaa"]);
    let series = read(&dir, "run/series.csv");
    assert!(series.starts_with("period,pmw,log_freq,log_change,advection,adjusted,reformed\n"));
    assert_eq!(series.lines().count(), 4);
    let first_row: Vec<&str> = series.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first_row[0], "1900");
    assert_eq!(first_row[3], ""); // no change into the first period
    assert_eq!(first_row[1], first_row[6]); // reformed starts at the pmw value

    assert!(dir.join("run/run-metadata.json").exists());
    let metadata: serde_json::Value =
        serde_json::from_str(&read(&dir, "run/run-metadata.json")).unwrap();
    assert_eq!(metadata["tool"], "advection");
    assert_eq!(metadata["command"], "adjust");
}

#[test]
fn rerunning_identical_config_is_byte_identical() {
    let dir = work_dir("determinism");
    prepare_corpus(&dir);
    let args = [
        "advect",
        "--variant",
        "ppmi",
        "--smooth",
        "adjacent",
        "--threshold",
        "60",
        "--out",
        "run/a1.csv",
    ];
    run_ok(&dir, &args);
    let mut args2 = args;
    args2[args.len() - 1] = "run/a2.csv";
    run_ok(&dir, &args2);
    assert_eq!(read(&dir, "run/a1.csv"), read(&dir, "run/a2.csv"));

    // Regenerating the corpus from scratch reproduces it exactly.
    run_ok(
        &dir,
        &["synth", "mixture", "--spec", "mix.toml", "--out", "corpus-b"],
    );
    assert_eq!(
        read(&dir, "corpus/1900.acad.vrt"),
        read(&dir, "corpus-b/1900.acad.vrt")
    );

    // The LDA variant is seed-deterministic end to end.
    let lda_args = [
        "advect", "--variant", "lda", "--k", "6", "--iters", "40", "--seed", "11",
        "--threshold", "60", "--out",
    ];
    run_ok(&dir, &[&lda_args[..], &["run/l1.csv"]].concat());
    run_ok(&dir, &[&lda_args[..], &["run/l2.csv"]].concat());
    assert_eq!(read(&dir, "run/l1.csv"), read(&dir, "run/l2.csv"));
}

#[test]
fn innovation_reports_follow_schema() {
    let dir = work_dir("innovate");
    // Six periods; the "rising" topic jumps at the last one.
    let spec = r#"
periods = ["p1", "p2", "p3", "p4", "p5", "p6"]
docs_per_period = 300
doc_len = 200
block_len = 40
seed = 9
weights = [
  [0.8, 0.2], [0.8, 0.2], [0.8, 0.2], [0.8, 0.2], [0.8, 0.2], [0.5, 0.5],
]

[[topics]]
name = "base"
prefix = "bas"
count = 80

[[topics]]
name = "rising"
prefix = "ris"
count = 80
"#;
    std::fs::write(dir.join("mix.toml"), spec).unwrap();
    run_ok(
        &dir,
        &["synth", "mixture", "--spec", "mix.toml", "--out", "corpus"],
    );
    // A brand-new word appears inside the rising topic at p6 only: append
    // documents of it interleaved with rising-topic words to the period
    // file before ingestion.
    let p6 = dir.join("corpus/p6.vrt");
    let mut extra = String::new();
    for doc in 0..80 {
        extra.push_str(&format!("## extra doc {doc}\n"));
        for i in 0..40 {
            let word = if i % 2 == 0 {
                "neoword".to_string()
            } else {
                format!("ris{}", ["aaa", "aab", "aac", "aad"][(doc + i) % 4])
            };
            extra.push_str(&format!("{word}\t{word}\t\n"));
        }
    }
    let mut contents = std::fs::read_to_string(&p6).unwrap();
    contents.push_str(&extra);
    std::fs::write(&p6, contents).unwrap();

    run_ok(&dir, &["ingest", "--manifest", "corpus/manifest.toml"]);
    run_ok(
        &dir,
        &[
            "innovate",
            "--entry",
            "p6",
            "--entry-window",
            "2",
            "--history",
            "4",
            "--threshold",
            "60",
            "--plot-csv",
            "run/hist.csv",
        ],
    );
    let reports: serde_json::Value = serde_json::from_str(&read(&dir, "run/reports.json")).unwrap();
    let reports = reports.as_array().unwrap();
    assert!(!reports.is_empty(), "auto-detection found no candidates");
    let neo = reports
        .iter()
        .find(|r| r["word"] == "neoword")
        .expect("neoword must be detected as an innovation");
    for key in [
        "word",
        "entry_period",
        "topic",
        "history",
        "mean",
        "sd",
        "ci_low",
        "ci_high",
        "z",
        "class",
    ] {
        assert!(neo.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(neo["entry_period"], "p6");
    assert!(neo["topic"].as_array().unwrap().len() <= 75);
    // It enters on a sharply rising topic.
    assert_eq!(neo["class"], "above");

    let hist = read(&dir, "run/hist.csv");
    assert!(hist.starts_with("word,period,advection,is_entry,mean,ci_low,ci_high\n"));
    assert!(hist.lines().any(|l| l.contains(",1,")));

    // Bad schedule shape on inject: clean user error.
    assert_eq!(
        exit_code(
            &dir,
            &[
                "synth", "inject", "--word", "risaaa", "--synonym", "xnew", "--shape",
                "bogus", "--out", "corpus2",
            ],
        ),
        1
    );
}

#[test]
fn exit_codes_and_errors() {
    let dir = work_dir("errors");
    // Missing cache: user error 1 with a pointer to ingest.
    assert_eq!(exit_code(&dir, &["advect"]), 1);
    // Bad flag value: user error 1.
    assert_eq!(exit_code(&dir, &["eval", "--by", "bogus"]), 1);
    // Unknown flag (clap error): remapped to user error 1.
    assert_eq!(exit_code(&dir, &["advect", "--no-such-flag"]), 1);
    // Help is not an error.
    assert_eq!(exit_code(&dir, &["--help"]), 0);

    // Bad manifest: undeclared period.
    std::fs::write(
        dir.join("bad.toml"),
        "format = \"vertical\"\nperiods = [\"a\"]\n[[sources]]\nperiod = \"zzz\"\nglob = \"*.vrt\"\n",
    )
    .unwrap();
    assert_eq!(
        exit_code(&dir, &["ingest", "--manifest", "bad.toml"]),
        1
    );
}
