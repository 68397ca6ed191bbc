use std::path::{Path, PathBuf};

use nagatree::cli::run;
use nagatree::io::{parse_metric, parse_tree, parse_values};
use nagatree::report::{RunReport, TraceDoc};
use nagatree_core::fixtures::gen_binary_leaves;
use serde_json::Value;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn nagatree(args: &[&str], stdin: &str) -> Out {
    let argv = std::iter::once("nagatree")
        .chain(args.iter().copied())
        .map(String::from)
        .collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Out {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn ok(args: &[&str], stdin: &str) -> String {
    let o = nagatree(args, stdin);
    assert_eq!(o.code, 0, "{args:?} failed: {}", o.stderr);
    o.stdout
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(text: &str) -> RunReport {
    serde_json::from_str(text).unwrap()
}

fn write_x2(dir: &Path) -> PathBuf {
    let p = path(dir, "x2.metric");
    std::fs::write(
        &p,
        ok(&["gen", "--family", "binary-leaves", "--n", "2"], ""),
    )
    .unwrap();
    p
}

/// Report without the fields that legitimately differ between runs.
fn stable(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("timing_ms");
    obj.remove("command");
    v
}

#[test]
fn analyze_binary_leaves() {
    let dir = tempfile::tempdir().unwrap();
    let x2 = write_x2(dir.path());
    let r = report(&ok(&["analyze", "--input", s(&x2)], ""));
    let n = r.nagata.unwrap();
    assert_eq!(n.constant.exact, "1");
    assert!(n.is_ultrametric && n.is_zero_hyperbolic);
    assert_eq!(
        (n.separation.exact.as_str(), n.diameter.exact.as_str()),
        ("2", "4")
    );
    assert!(r.input_digest.unwrap().starts_with("sha256:"));
}

#[test]
fn generated_cycle_piped_into_analyze() {
    let metric = ok(&["gen", "--family", "cycle", "--n", "4"], "");
    let r = report(&ok(&["analyze"], &metric));
    let n = r.nagata.unwrap();
    assert_eq!(n.constant.exact, "2");
    assert!(!n.is_zero_hyperbolic);
    let again = report(&ok(&["analyze", "--input", "-"], &metric));
    assert_eq!(again.input_digest, r.input_digest);
}

#[test]
fn json_metric_input_matches_matrix_input() {
    let matrix = ok(&["gen", "--family", "adic", "--k", "3"], "");
    let json = ok(
        &["gen", "--family", "adic", "--k", "3", "--format", "json"],
        "",
    );
    let a = parse_metric(matrix.as_bytes(), "m").unwrap();
    let b = parse_metric(json.as_bytes(), "j").unwrap();
    assert_eq!(a, b);
    let numbers = r#"{"points": ["p", "q"], "distances": [[0, 1.5], [1.5, 0]]}"#;
    let r = report(&ok(&["analyze"], numbers));
    assert_eq!(r.nagata.unwrap().diameter.exact, "3/2");
}

#[test]
fn build_nagata_report_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let x2 = write_x2(dir.path());
    let (tree, rep) = (path(dir.path(), "t.json"), path(dir.path(), "r.json"));
    ok(
        &[
            "build-nagata",
            "--input",
            s(&x2),
            "--out",
            s(&tree),
            "--report",
            s(&rep),
        ],
        "",
    );
    let r = report(&std::fs::read_to_string(&rep).unwrap());
    let d = r.distortion.unwrap();
    assert_eq!(d.distortion.exact, "2");
    let c = r.construction.unwrap();
    assert_eq!(
        (c.method.as_str(), c.bound.exact.as_str(), c.levels),
        ("nagata", "6", Some(2))
    );

    let x = parse_metric(&std::fs::read(&x2).unwrap(), "x2").unwrap();
    let t = parse_tree(&std::fs::read(&tree).unwrap(), "t", &x).unwrap();
    assert_eq!(t.len(), 4);
    let again = report(&ok(&["analyze", "--input", s(&x2), "--tree", s(&tree)], ""));
    assert_eq!(again.distortion.unwrap(), d);
}

#[test]
fn build_nagata_root_flag() {
    let dir = tempfile::tempdir().unwrap();
    let x2 = write_x2(dir.path());
    let r = report(&ok(
        &["build-nagata", "--input", s(&x2), "--root", "11"],
        "",
    ));
    assert_eq!(r.construction.unwrap().root.as_deref(), Some("11"));
    let bad = nagatree(&["build-nagata", "--input", s(&x2), "--root", "zz"], "");
    assert_eq!(bad.code, 2);
    assert!(bad.stderr.contains("UnknownLabel"));
}

#[test]
fn build_gupta_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let metric = path(dir.path(), "ts.metric");
    ok(
        &[
            "gen",
            "--family",
            "random-treeset",
            "--n",
            "15",
            "--seed",
            "7",
            "--out",
            s(&metric),
        ],
        "",
    );
    let (tree, trace) = (path(dir.path(), "t.json"), path(dir.path(), "trace.json"));
    let r = report(&ok(
        &[
            "build-gupta",
            "--input",
            s(&metric),
            "--out",
            s(&tree),
            "--trace",
            s(&trace),
        ],
        "",
    ));
    let d = r.distortion.unwrap();
    assert!(d.distortion.approx < 8.0);
    let trace: TraceDoc = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(
        trace.components.len(),
        r.construction.unwrap().components.unwrap()
    );
    let emitted: usize = trace.components.iter().map(|c| c.tree_edges.len()).sum();
    assert_eq!(emitted, 14);
    for comp in &trace.components {
        for check in &comp.checks {
            for side in check.sides.iter().flatten() {
                assert_eq!(side.terms.len() + 1, side.path.len());
            }
        }
    }
    let again = report(&ok(
        &["analyze", "--input", s(&metric), "--tree", s(&tree)],
        "",
    ));
    assert_eq!(again.distortion.unwrap(), d);
}

#[test]
fn build_gupta_rejects_cycle() {
    let metric = ok(&["gen", "--family", "cycle", "--n", "4"], "");
    let o = nagatree(&["build-gupta"], &metric);
    assert_eq!(o.code, 2);
    let err: Value = serde_json::from_str(&o.stderr).unwrap();
    assert_eq!(err["error"], "NotZeroHyperbolic");
}

#[test]
fn search_methods_agree_on_x2() {
    let dir = tempfile::tempdir().unwrap();
    let x2 = write_x2(dir.path());
    for method in ["exhaustive", "bnb", "local"] {
        let r = report(&ok(
            &["search-opt", "--input", s(&x2), "--method", method],
            "",
        ));
        let sr = r.search.unwrap();
        assert_eq!(sr.best_distortion.exact, "2", "{method}");
        assert_eq!(r.distortion.unwrap().distortion.exact, "2");
        assert_eq!(sr.complete, method != "local");
    }
    let sym = report(&ok(
        &[
            "search-opt",
            "--input",
            s(&x2),
            "--method",
            "exhaustive",
            "--symmetric",
        ],
        "",
    ));
    assert!(sym.search.unwrap().trees_examined < 16);
}

#[test]
fn search_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let metric = path(dir.path(), "r.metric");
    ok(
        &[
            "gen",
            "--family",
            "random-metric",
            "--n",
            "7",
            "--seed",
            "11",
            "--out",
            s(&metric),
        ],
        "",
    );
    let mut seen: Option<(Value, String)> = None;
    for threads in ["1", "2", "8"] {
        let tree = path(dir.path(), &format!("t{threads}.json"));
        let rep = ok(
            &[
                "--threads",
                threads,
                "search-opt",
                "--input",
                s(&metric),
                "--method",
                "exhaustive",
                "--out",
                s(&tree),
            ],
            "",
        );
        let now = (stable(&rep), std::fs::read_to_string(&tree).unwrap());
        if let Some(prev) = &seen {
            assert_eq!(prev, &now, "threads={threads}");
        }
        seen = Some(now);
    }
}

#[test]
fn local_search_is_seeded() {
    let metric = ok(
        &[
            "gen",
            "--family",
            "random-metric",
            "--n",
            "12",
            "--seed",
            "2",
        ],
        "",
    );
    let a = ok(
        &[
            "search-opt",
            "--method",
            "local",
            "--seed",
            "5",
            "--budget",
            "20",
        ],
        &metric,
    );
    let b = ok(
        &[
            "search-opt",
            "--method",
            "local",
            "--seed",
            "5",
            "--budget",
            "20",
        ],
        &metric,
    );
    assert_eq!(stable(&a), stable(&b));
}

#[test]
fn extend_restricts_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let metric = path(dir.path(), "x3.metric");
    ok(
        &[
            "gen",
            "--family",
            "binary-leaves",
            "--n",
            "3",
            "--out",
            s(&metric),
        ],
        "",
    );
    let (sub, vals, out) = (
        path(dir.path(), "sub"),
        path(dir.path(), "vals"),
        path(dir.path(), "out"),
    );
    std::fs::write(&sub, "000\n011\n111\n").unwrap();
    std::fs::write(&vals, "0 0\n6 0\n4.8 1.2\n").unwrap();
    for method in ["nagata", "gupta"] {
        let r = report(&ok(
            &[
                "extend",
                "--input",
                s(&metric),
                "--subset",
                s(&sub),
                "--values",
                s(&vals),
                "--method",
                method,
                "--out",
                s(&out),
            ],
            "",
        ));
        let e = r.extension.unwrap();
        assert!(e.achieved_lip <= e.guaranteed_lip.approx * (1.0 + 1e-9));
        let rows = parse_values(&std::fs::read(&out).unwrap(), "out").unwrap();
        let x = gen_binary_leaves(3).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[x.index_of("000").unwrap()], vec![0.0, 0.0]);
        assert_eq!(rows[x.index_of("011").unwrap()], vec![6.0, 0.0]);
        assert_eq!(rows[x.index_of("111").unwrap()], vec![4.8, 1.2]);
    }
}

#[test]
fn extend_rejects_non_lipschitz_input() {
    let dir = tempfile::tempdir().unwrap();
    let x2 = write_x2(dir.path());
    let (sub, vals) = (path(dir.path(), "sub"), path(dir.path(), "vals"));
    std::fs::write(&sub, "00\n10\n").unwrap();
    std::fs::write(&vals, "0\n3\n").unwrap();
    let o = nagatree(
        &[
            "extend",
            "--input",
            s(&x2),
            "--subset",
            s(&sub),
            "--values",
            s(&vals),
        ],
        "",
    );
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("NotLipschitz"));
}

#[test]
fn gen_is_deterministic() {
    let a = ok(
        &[
            "gen",
            "--family",
            "random-ultrametric",
            "--n",
            "30",
            "--seed",
            "9",
        ],
        "",
    );
    let b = ok(
        &[
            "gen",
            "--family",
            "random-ultrametric",
            "--n",
            "30",
            "--seed",
            "9",
        ],
        "",
    );
    let c = ok(
        &[
            "gen",
            "--family",
            "random-ultrametric",
            "--n",
            "30",
            "--seed",
            "10",
        ],
        "",
    );
    assert_eq!(a, b);
    assert_ne!(a, c);
    let e33 = parse_metric(
        ok(&["gen", "--family", "example33", "--N", "3"], "").as_bytes(),
        "e",
    )
    .unwrap();
    assert_eq!(e33.len(), 8);
}

#[test]
fn input_errors_exit_two() {
    let cases: [(&[&str], &str, &str); 7] = [
        (&["frobnicate"], "", "UnknownCommand"),
        (&["analyze", "--bogus"], "", "BadFlag"),
        (&["gen", "--family", "nope", "--n", "3"], "", "BadFlag"),
        (&["gen", "--family", "cycle", "--n", "2"], "", "OutOfRange"),
        (&["analyze"], "2\na\nb\n0 1\n2 0\n", "AsymmetricMatrix"),
        (&["analyze"], "2\na\nb\n0 x\nx 0\n", "ParseRational"),
        (&["analyze"], "2\na\nb\n0 1\n", "FormatError"),
    ];
    for (args, stdin, kind) in cases {
        let o = nagatree(args, stdin);
        assert_eq!(o.code, 2, "{args:?}");
        let err: Value = serde_json::from_str(&o.stderr).unwrap_or_else(|_| panic!("{}", o.stderr));
        assert_eq!(err["error"], kind, "{args:?}: {}", o.stderr);
    }
}

#[test]
fn bound_violations_map_to_exit_three() {
    let e: nagatree::Error = nagatree_core::Error::BoundViolation("x".into()).into();
    assert_eq!(e.exit_code(), 3);
    assert_eq!(e.kind(), "BoundViolation");
    let e: nagatree::Error = nagatree_core::Error::EmptySpace.into();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn help_exits_zero() {
    let o = nagatree(&["--help"], "");
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("search-opt"));
}
