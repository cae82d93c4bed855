use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lscd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lscd")).args(args).output().expect("spawn lscd")
}

fn ok(args: &[&str]) -> String {
    let out = lscd(args);
    assert!(
        out.status.success(),
        "lscd {args:?} failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, seed: &str) -> PathBuf {
    let out = dir.join("synth");
    ok(&["synth-gen", "--out-dir", p(&out), "--planted-changes", "5", "--seed", seed]);
    out
}

/// Numbers in the evaluation table, skipping the header.
fn table_values(stdout: &str) -> Vec<String> {
    stdout.lines().skip(1).flat_map(|l| l.split_whitespace().skip(1).map(str::to_string).collect::<Vec<_>>()).collect()
}

#[test]
fn synthetic_pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let s = synth(tmp.path(), "2");
    let graphs = tmp.path().join("graphs");
    let gold = tmp.path().join("gold.tsv");
    ok(&["wug-build", "--uses", p(&s.join("uses.tsv")), "--judgments", p(&s.join("judgments.tsv")), "--graph-dir", p(&graphs)]);
    ok(&["wug-cluster", "--graph-dir", p(&graphs), "--seed", "1"]);
    ok(&["gold-scores", "--graph-dir", p(&graphs), "--out", p(&gold)]);
    let agree = ok(&["agreement", "--graph-dir", p(&graphs)]);
    assert!(agree.contains("alpha 0."), "{agree}");

    let targets = s.join("annotated.txt");
    let c1l = s.join("c1.lemma.txt");
    let c2l = s.join("c2.lemma.txt");
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("sgns", vec!["--c1".into(), p(&c1l).into(), "--c2".into(), p(&c2l).into(), "--dim".into(), "30".into(), "--window".into(), "5".into()]),
        ("freq", vec!["--c1".into(), p(&c1l).into(), "--c2".into(), p(&c2l).into()]),
        ("profile", vec!["--c1".into(), p(&s.join("c1.conllu")).into(), "--c2".into(), p(&s.join("c2.conllu")).into()]),
        ("minority", vec![]),
        ("random", vec!["--seed".into(), "4".into()]),
    ];
    for (system, extra) in runs {
        let dir = tmp.path().join(system);
        let mut args: Vec<&str> = vec!["baseline", system, "--targets", p(&targets), "--out-dir", p(&dir)];
        args.extend(extra.iter().map(String::as_str));
        ok(&args);
        let table = ok(&["evaluate", "--gold", p(&gold), "--submission", p(&dir), "--phase", "2"]);
        let values = table_values(&table);
        assert!(!values.is_empty());
        for v in values.iter().filter(|v| *v != "--") {
            let x: f64 = v.parse().unwrap_or_else(|_| panic!("{system}: non-numeric `{v}` in\n{table}"));
            assert!(x.is_finite());
        }
    }
    let sweep = ok(&["sweep", "--gold", p(&gold), "--graded", p(&tmp.path().join("sgns/graded.tsv"))]);
    assert!(sweep.starts_with("max F1"));
}

#[test]
fn gold_as_submission_scores_perfectly() {
    let tmp = tempfile::tempdir().unwrap();
    let gold = tmp.path().join("gold.tsv");
    std::fs::write(
        &gold,
        "lemma\tchange_graded\tchange_binary\tgain\tloss\tcompare\n\
         a\t0.1\t0\t0\t0\t-3.5\n b\t0.8\t1\t1\t0\t-1.5\n c\t0.3\t0\t0\t0\t-3.0\n d\t0.9\t1\t0\t1\t-1.2\n e\t0.5\t1\t1\t1\t-2.0\n"
            .replace("\n ", "\n"),
    )
    .unwrap();
    let sub = tmp.path().join("sub");
    std::fs::create_dir(&sub).unwrap();
    let text = std::fs::read_to_string(&gold).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    for (file, col) in [("graded.tsv", 1), ("binary.tsv", 2), ("gain.tsv", 3), ("loss.tsv", 4), ("compare.tsv", 5)] {
        let body: String = rows.iter().map(|r| format!("{}\t{}\n", r[0], r[col])).collect();
        std::fs::write(sub.join(file), body).unwrap();
    }
    let report = tmp.path().join("report.tsv");
    let table = ok(&["evaluate", "--gold", p(&gold), "--submission", p(&sub), "--out", p(&report)]);
    let values = table_values(&table);
    assert_eq!(values.len(), 11);
    assert!(values.iter().all(|v| v == "1.000"), "{table}");
    assert!(std::fs::read_to_string(report).unwrap().starts_with("# lscd"));

    // dropping the obligatory phase-2 file invalidates the submission
    std::fs::remove_file(sub.join("binary.tsv")).unwrap();
    let out = lscd(&["evaluate", "--gold", p(&gold), "--submission", p(&sub), "--phase", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid submission"));
    ok(&["evaluate", "--gold", p(&gold), "--submission", p(&sub), "--phase", "1"]);

    // a graded file missing one gold word is rejected, naming the word
    std::fs::write(sub.join("graded.tsv"), "a\t0.1\nb\t0.8\nc\t0.3\nd\t0.9\n").unwrap();
    let out = lscd(&["evaluate", "--gold", p(&gold), "--submission", p(&sub), "--phase", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(": e"));
}

#[test]
fn outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = synth(a.path(), "5");
    let sb = synth(b.path(), "5");
    for f in ["c1.conllu", "c2.lemma.txt", "c1.token.txt", "planted.tsv", "uses.tsv", "judgments.tsv"] {
        assert_eq!(std::fs::read(sa.join(f)).unwrap(), std::fs::read(sb.join(f)).unwrap(), "{f}");
    }
    for (s, root) in [(&sa, a.path()), (&sb, b.path())] {
        let g = root.join("g");
        ok(&["wug-build", "--uses", p(&s.join("uses.tsv")), "--judgments", p(&s.join("judgments.tsv")), "--graph-dir", p(&g)]);
        ok(&["wug-cluster", "--graph-dir", p(&g)]);
        ok(&["baseline", "random", "--targets", p(&s.join("annotated.txt")), "--out-dir", p(&root.join("r")), "--seed", "9"]);
    }
    let lemma = std::fs::read_to_string(sa.join("annotated.txt")).unwrap().lines().nth(1).unwrap().to_string();
    assert_eq!(
        std::fs::read(a.path().join("g").join(&lemma).join("clusters.tsv")).unwrap(),
        std::fs::read(b.path().join("g").join(&lemma).join("clusters.tsv")).unwrap()
    );
    assert_eq!(std::fs::read(a.path().join("r/graded.tsv")).unwrap(), std::fs::read(b.path().join("r/graded.tsv")).unwrap());
    let head = std::fs::read_to_string(a.path().join("r/graded.tsv")).unwrap();
    assert!(head.starts_with("# lscd ") && head.lines().next().unwrap().ends_with("seed=9"));
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let s = synth(tmp.path(), "1");
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!("# targets run\nc1 = {}\nc2 = {}\nmin1 = 100000\nout = {}\n", p(&s.join("c1.conllu")), p(&s.join("c2.conllu")), p(&tmp.path().join("t.txt"))),
    )
    .unwrap();
    let none = ok(&["--config", p(&cfg), "targets", "--min2", "1"]);
    assert!(none.starts_with("0 targets"), "{none}");
    let some = ok(&["--config", p(&cfg), "targets", "--min1", "50", "--min2", "50"]);
    assert!(!some.starts_with("0 targets"), "{some}");
    let words = std::fs::read_to_string(tmp.path().join("t.txt")).unwrap();
    assert!(words.lines().count() > 10);
}

#[test]
fn exit_codes() {
    assert_eq!(lscd(&["--help"]).status.code(), Some(0));
    let unknown = lscd(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(!unknown.stderr.is_empty());
    assert_eq!(lscd(&["targets", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(lscd(&["evaluate", "--gold", "/nonexistent/gold.tsv", "--random-reps", "2"]).status.code(), Some(1));

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.tsv");
    std::fs::write(&bad, "lemma\tchange_graded\tchange_binary\nx\tabc\t1\n").unwrap();
    let out = lscd(&["evaluate", "--gold", p(&bad), "--random-reps", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"), "{}", String::from_utf8_lossy(&out.stderr));
}
