//! End-to-end runs of the `tagproj` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tagproj::synthetic::{mirrored_corpus, SyntheticConfig};

fn tagproj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tagproj")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a synthetic corpus with `phrases` aligned phrases. The target is
/// annotated unless `plain` is set.
fn corpus_dir(root: &Path, phrases: usize, plain: bool) -> std::path::PathBuf {
    let corpus = mirrored_corpus(&SyntheticConfig {
        phrases,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let dir = root.join("corpus");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("source.conll"), corpus.source().to_conll()).unwrap();
    if plain {
        fs::write(dir.join("target.txt"), corpus.target().to_plain()).unwrap();
    } else {
        fs::write(dir.join("target.conll"), corpus.target().to_conll()).unwrap();
    }
    dir
}

const TINY: &str = r#"{"h1":[8],"h2":[4],"epochs":[1],"k":[5],"r":[1]}"#;

#[test]
fn repr_writes_one_csv_per_side() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = corpus_dir(tmp.path(), 20, true);
    let prefix = tmp.path().join("vec");
    let o = tagproj(&["repr", s(&dir), "--mode", "binary", "--out", s(&prefix)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for side in ["source", "target"] {
        let text = fs::read_to_string(tmp.path().join(format!("vec.{side}.csv"))).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("word,mode,v0,"), "{header}");
        for line in lines {
            // word, mode, then one value per phrase
            assert_eq!(line.split(',').count(), 20 + 2, "{line}");
            assert!(line.contains(",binary,"));
        }
    }
}

#[test]
fn missing_source_file_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("target.txt"), "a b\n").unwrap();
    let o = tagproj(&["repr", s(tmp.path()), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("source.conll not found"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);
}

#[test]
fn usage_errors_exit_nonzero() {
    for args in [
        &["repr", "c", "--mode", "foo", "--out", "x"][..],
        &["run", "c", "--k", "1"],
        &["run", "c", "--h1", "0"],
        &["sweep", "c"],
    ] {
        let o = tagproj(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn run_needs_annotated_target_for_projection() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = corpus_dir(tmp.path(), 20, true);
    let o = tagproj(&["run", s(&dir), "--h1", "8", "--h2", "4", "--epochs", "1", "--k", "2", "--r", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("target.conll"), "{}", stderr(&o));

    let o = tagproj(&[
        "run", s(&dir), "--h1", "8", "--h2", "4", "--epochs", "1", "--k", "2", "--r", "2", "--eval", "holdout",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("id,h1,h2,epochs,k,r,precision_mean"));
    assert!(lines[1].starts_with("1,8,4,1,2,2,"));
}

#[test]
fn sweep_writes_one_row_per_configuration() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = corpus_dir(tmp.path(), 60, false);

    let grid = tmp.path().join("one.json");
    fs::write(&grid, TINY).unwrap();
    let out = tmp.path().join("one.csv");
    let o = tagproj(&["sweep", s(&dir), "--grid", s(&grid), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 2);
    assert!(stderr(&o).contains("[1/1]"));

    let grid = tmp.path().join("two.json");
    fs::write(&grid, r#"{"h1":[8],"h2":[4],"epochs":[1],"k":[5,50],"r":[1]}"#).unwrap();
    let out = tmp.path().join("two.csv");
    let o = tagproj(&["sweep", s(&dir), "--grid", s(&grid), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let ks: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(ks, ["5", "50"]);
}

#[test]
fn malformed_grid_leaves_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = corpus_dir(tmp.path(), 20, false);
    for (name, body) in [
        ("syntax.json", "{ not json"),
        ("unknown.json", r#"{"depth":[2]}"#),
        ("bad_k.json", r#"{"h1":[8],"h2":[4],"epochs":[1],"k":[1],"r":[1]}"#),
        ("too_many_folds.json", r#"{"h1":[8],"h2":[4],"epochs":[1],"k":[5,21],"r":[1]}"#),
    ] {
        let grid = tmp.path().join(name);
        fs::write(&grid, body).unwrap();
        let out = tmp.path().join(format!("{name}.csv"));
        let o = tagproj(&["sweep", s(&dir), "--grid", s(&grid), "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(1), "{name}");
        assert!(!out.exists(), "{name} left {}", out.display());
    }
}

#[test]
fn report_renders_and_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = tmp.path().join("sweep.csv");
    fs::write(
        &sweep,
        "id,h1,h2,epochs,k,r,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std\n\
         2,50,35,10,50,20,0.5,0.01,0.25,0.02,0.3333,0.015\n\
         1,640,160,10,10,10,0.8,0.1,0.7,0.05,0.75,0.07\n",
    )
    .unwrap();

    let o = tagproj(&["report", s(&sweep), "--percent"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "| id | h1-size | h2-size | Epoch | k | r | Precision | Recall | F1-score |\n\
         |---|---|---|---|---|---|---|---|---|\n\
         | 1 | 640 | 160 | 10 | 10 | 10 | 80.00 ± 10.00 | 70.00 ± 5.00 | 75.00 ± 7.00 |\n\
         | 2 | 50 | 35 | 10 | 50 | 20 | 50.00 ± 1.00 | 25.00 ± 2.00 | 33.33 ± 1.50 |\n"
    );

    let first = tmp.path().join("first.csv");
    let o = tagproj(&["report", s(&sweep), "--format", "csv", "--out", s(&first)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let second = tmp.path().join("second.csv");
    let o = tagproj(&["report", s(&first), "--format", "csv", "--out", s(&second)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn report_edge_cases() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.csv");
    fs::write(
        &empty,
        "id,h1,h2,epochs,k,r,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std\n",
    )
    .unwrap();
    let o = tagproj(&["report", s(&empty)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);

    let no_std = tmp.path().join("no_std.csv");
    fs::write(
        &no_std,
        "id,h1,h2,epochs,k,r,precision_mean,recall_mean,recall_std,f1_mean,f1_std\n1,1,1,1,2,1,0,0,0,0,0\n",
    )
    .unwrap();
    let o = tagproj(&["report", s(&no_std)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("precision_std"), "{}", stderr(&o));

    let o = tagproj(&["report", s(&tmp.path().join("absent.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not found"));
}
