use std::path::Path;
use std::process::{Command, Output};

use haemoscreen::persistence::{read_cohort, ImportDescriptor};

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haemoscreen"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_writes_twin_cohorts_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let cfg = write_config(
            dir,
            r#"{"seed": 3, "population": {"healthy": 100, "diseases": {"AAA": 100}}}"#,
        );
        let o = bin(dir, &["--config", &cfg, "generate"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["VPD_H.jsonl", "VPD_AAA.jsonl"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        assert_eq!(
            x,
            std::fs::read(b.path().join(name)).unwrap(),
            "{name} differs"
        );
        let records = read_cohort(&a.path().join(name)).unwrap();
        assert_eq!(records.len(), 100);
        assert!(records
            .iter()
            .all(|r| r.cohort.tag() == &name[4..name.len() - 6]));
    }
    let jsonl: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "jsonl")
        })
        .collect();
    assert_eq!(jsonl.len(), 2);
}

#[test]
fn sweep_writes_metric_tables_and_is_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"seed": 5, "population": {"healthy": 24, "diseases": {"SAS": 24}}}"#,
    );
    assert!(bin(dir.path(), &["--config", &cfg, "generate"])
        .status
        .success());
    let o = bin(dir.path(), &["--config", &cfg, "sweep", "--methods", "nb"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for metric in ["f1", "sensitivity", "specificity"] {
        let text = std::fs::read_to_string(dir.path().join(format!("SAS_{metric}.csv"))).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "combination,NB");
        assert_eq!(lines.len(), 64);
        assert!(lines[1..].iter().all(|l| l
            .rsplit(',')
            .next()
            .unwrap()
            .split('.')
            .nth(1)
            .unwrap()
            .len()
            == 4));
    }
    let before = std::fs::read(dir.path().join("SAS_report.json")).unwrap();
    let again = bin(dir.path(), &["--config", &cfg, "sweep", "--methods", "nb"]);
    assert!(again.status.success());
    assert!(String::from_utf8_lossy(&again.stdout).contains("up to date"));
    assert_eq!(
        before,
        std::fs::read(dir.path().join("SAS_report.json")).unwrap()
    );

    let o = bin(
        dir.path(),
        &[
            "--config",
            &cfg,
            "summarize",
            "--disease",
            "sas",
            "--methods",
            "nb",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("SAS_count_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
}

#[test]
fn flagged_cells_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"seed": 5, "population": {"healthy": 24, "diseases": {"CAS": 24}},
            "learners": {"lr": {"max_iterations": 1}}}"#,
    );
    assert!(bin(dir.path(), &["--config", &cfg, "generate"])
        .status
        .success());
    let o = bin(
        dir.path(),
        &[
            "--config",
            &cfg,
            "sweep",
            "--methods",
            "lr",
            "--combos",
            "q1+p1",
        ],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let table = std::fs::read_to_string(dir.path().join("CAS_f1.csv")).unwrap();
    assert_eq!(table.lines().nth(1), Some("\"Q1, P1\",NA"));
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let no_seed = bin(dir.path(), &["generate"]);
    assert_eq!(no_seed.status.code(), Some(1));
    let missing = bin(dir.path(), &["--seed", "1", "sweep", "--disease", "aaa"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("VPD_H.jsonl"));
    let no_grid = bin(
        dir.path(),
        &["--seed", "1", "gridsearch", "--methods", "svm"],
    );
    assert_eq!(no_grid.status.code(), Some(1));
    let bad_flag = bin(dir.path(), &["--seed", "1", "sweep", "--disease", "flu"]);
    assert_eq!(bad_flag.status.code(), Some(1));
}

#[test]
fn import_vpd_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"seed": 9, "population": {"healthy": 5, "diseases": {"PAD": 5}}}"#,
    );
    assert!(bin(
        dir.path(),
        &["--config", &cfg, "generate", "--disease", "pad"]
    )
    .status
    .success());
    let cohort = dir.path().join("VPD_PAD.jsonl");
    let table = dir.path().join("pad.csv");
    let desc = dir.path().join("pad.json");
    let o = bin(
        dir.path(),
        &[
            "export-vpd",
            cohort.to_str().unwrap(),
            "--table",
            table.to_str().unwrap(),
            "--descriptor",
            desc.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let original = std::fs::read(&cohort).unwrap();
    let imported = tempfile::tempdir().unwrap();
    let o = bin(
        imported.path(),
        &[
            "import-vpd",
            table.to_str().unwrap(),
            "--descriptor",
            desc.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(imported.path().join("VPD_PAD.jsonl")).unwrap(),
        original
    );

    let mut d = ImportDescriptor::load(&desc).unwrap();
    d.sites.remove("P3L");
    let bad_desc = dir.path().join("bad.json");
    std::fs::write(&bad_desc, serde_json::to_string(&d).unwrap()).unwrap();
    let o = bin(
        imported.path(),
        &[
            "import-vpd",
            table.to_str().unwrap(),
            "--descriptor",
            bad_desc.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("P3L"), "{}", stderr(&o));

    let text = std::fs::read_to_string(&table).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[3].split(',').map(String::from).collect();
    cells[20] = "NaN".into();
    lines[3] = cells.join(",");
    let nan_table = dir.path().join("nan.csv");
    std::fs::write(&nan_table, lines.join("\n")).unwrap();
    let o = bin(
        imported.path(),
        &[
            "import-vpd",
            nan_table.to_str().unwrap(),
            "--descriptor",
            desc.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row 2:"), "{}", stderr(&o));
}
