use std::path::Path;
use std::process::{Command, Output};

fn auxclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auxclust"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = auxclust(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn corpus(dir: &Path) -> std::path::PathBuf {
    let corpus = dir.join("corpus");
    ok(&[
        "gen-corpus", "--docs", "30", "--classes", "3", "--noise-attrs", "2", "--seed", "4", "--out", p(&corpus),
    ]);
    corpus
}

#[test]
fn end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus(dir.path());
    assert!(corpus.join("truth.csv").exists());
    let index = dir.path().join("index.json");

    let line = ok(&["cluster", "--corpus", p(&corpus), "--k", "3", "--seed", "4", "--out", p(&index)]);
    assert!(line.starts_with("30 docs, k=3, refinement moved "), "{line}");

    let eval = ok(&["evaluate", "--index", p(&index), "--truth", p(&corpus.join("truth.csv"))]);
    assert!(eval.starts_with("metric,stage1,final,delta\npurity,"), "{eval}");
    assert!(!eval.contains('\r'));

    let gini = ok(&["report", "--index", p(&index)]);
    assert!(gini.starts_with("attribute,pr_0,pr_1,pr_2,gini,usable\n"), "{gini}");
    let labels = ok(&["report", "--index", p(&index), "--table", "labels"]);
    assert!(labels.starts_with("cluster,method,rank,label,score\n"), "{labels}");

    let classes = ok(&["classify", "--index", p(&index)]);
    assert_eq!(classes.lines().count(), 31);
    assert!(classes.starts_with("doc_id,cluster,classes\n"));

    let text = std::fs::read_to_string(corpus.join("doc0000.txt")).unwrap();
    for extra in [&[][..], &["--global"][..]] {
        let mut args = vec!["query", "--index", p(&index), "--text", &text, "--top", "3"];
        args.extend_from_slice(extra);
        let hits = ok(&args);
        let mut lines = hits.lines();
        assert_eq!(lines.next(), Some("rank,doc_id,similarity,classes"));
        assert!(lines.next().unwrap().starts_with("1,doc0000.txt,1,"), "{hits}");
    }
}

#[test]
fn repeated_runs_write_identical_indexes() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus(dir.path());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        ok(&["cluster", "--corpus", p(&corpus), "--k", "3", "--seed", "9", "--label-method", "presence", "--out", p(out)]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let out = auxclust(&["cluster", "--corpus", p(&missing), "--k", "2", "--seed", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"format_version\": 99}").unwrap();
    let out = auxclust(&["classify", "--index", p(&bad)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));

    let corpus = corpus(dir.path());
    let out = auxclust(&["cluster", "--corpus", p(&corpus), "--k", "31", "--seed", "1", "--out", p(&dir.path().join("i.json"))]);
    assert!(!out.status.success());
}

#[test]
fn empty_corpus_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = auxclust(&["cluster", "--corpus", p(dir.path()), "--k", "1", "--seed", "0", "--out", p(&dir.path().join("i.json"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty corpus"));
}
