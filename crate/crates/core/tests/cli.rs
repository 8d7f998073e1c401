use std::process::Command;

use outfn::cli::run;
use serde_json::Value;

fn outfn(args: &[&str]) -> outfn::cli::Report {
    run(std::iter::once("outfn").chain(args.iter().copied()))
}

#[test]
fn norm_and_automorphism_checks() {
    assert_eq!(outfn(&["norm", "a->ab, b->a"]).stdout, "2\n");
    assert_eq!(outfn(&["norm", "a->aba, b->ba, c->ca"]).stdout, "3\n");
    assert_eq!(outfn(&["is-aut", "a->ab, b->a"]).stdout, "YES\n");
    assert_eq!(outfn(&["is-aut", "a->aa, b->b"]).stdout, "NO\n");
    let r = outfn(&["norm", "a->aa, b->b"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.starts_with("error:"));
}

#[test]
fn usage_errors() {
    assert_eq!(outfn(&["frobnicate"]).code, 2);
    assert_eq!(outfn(&["norm"]).code, 2);
    assert_eq!(outfn(&["norm", "a->ab, b->x"]).code, 1);
    assert_eq!(outfn(&["irreducible", "a->ab, b->a", "--mu", "3/0"]).code, 1);
    assert_eq!(outfn(&["irreducible", "a->ab, b->a", "--mu", "2"]).code, 1);
    assert_eq!(outfn(&["conjugate", "a->ab, b->a", "a->b, b->a, c->c"]).code, 1);
}

#[test]
fn irreducible_reports_partition() {
    let r = outfn(&["irreducible", "a->b, b->a"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("REDUCIBLE\n"));
    assert!(r.stdout.contains("{a} {b}"));
    let r = outfn(&["irreducible", "a->ab, b->a, c->c"]);
    assert!(r.stdout.contains("{c}"));
}

#[test]
fn structured_output_matches_text() {
    for args in [
        vec!["irreducible", "a->b, b->a"],
        vec!["conjugate", "a->ab, b->a", "a->ba, b->a"],
        vec!["conjugate", "a->ab, b->a", "a->A, b->B", "--mu", "21/10"],
        vec!["visibly-reducible", "a->ab, b->a"],
        vec!["is-aut", "a->ab, b->a"],
    ] {
        let human = outfn(&args);
        let mut with_json = vec!["--json"];
        with_json.extend(&args);
        let record: Value = serde_json::from_str(&outfn(&with_json).stdout).unwrap();
        for field in ["command", "verdict", "witness", "members", "max_norm", "elapsed"] {
            assert!(record.get(field).is_some(), "{field} missing for {args:?}");
        }
        let verdict = record["verdict"].as_str().unwrap();
        assert_eq!(human.stdout.lines().next().unwrap(), verdict, "{args:?}");
        assert_eq!(record["command"], args[0]);
    }
}

#[test]
fn generators_are_deterministic_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let first = outfn(&["cmt-gens", "2", "--cache-dir", path]);
    let second = outfn(&["cmt-gens", "2", "--cache-dir", path]);
    let fresh = outfn(&["cmt-gens", "2"]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, fresh.stdout);
    assert!(outfn::cmt::cache_path(dir.path(), 2).exists());
    let lines: Vec<&str> = first.stdout.lines().collect();
    assert_eq!(lines[0].parse::<usize>().unwrap(), lines.len() - 1);
    let transvection = outfn::OuterAutomorphism::parse("a->ab, b->b").unwrap();
    let gens: Vec<_> = lines[1..].iter().map(|l| outfn::OuterAutomorphism::parse(l).unwrap()).collect();
    assert!(gens.iter().any(|g| g.outer_equal(&transvection)));
}

#[test]
fn displacement_reads_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("rose.txt");
    let x = outfn::cvmetric::MarkedMetricGraph::rose(vec![
        outfn::Rational::new(1.into(), 3.into()),
        outfn::Rational::new(2.into(), 3.into()),
    ])
    .unwrap();
    std::fs::write(&file, x.to_string()).unwrap();
    let r = outfn(&["displacement", "a->b, b->a", "--graph", file.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout, "2\n");
    assert_eq!(outfn(&["displacement", "a->ab, b->a"]).stdout, "2\n");
}

#[test]
fn fold_prints_the_subgroup_graph() {
    let r = outfn(&["fold", "ab,aba"]);
    assert!(r.stdout.starts_with("vertices 1\n"));
    let r = outfn(&["fold", "baB"]);
    assert!(r.stdout.starts_with("vertices 2\n"));
}

#[test]
fn binary_end_to_end() {
    let exe = env!("CARGO_BIN_EXE_outfn");
    let out = Command::new(exe).args(["norm", "a->ab, b->a"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "2\n");
    let out = Command::new(exe).args(["conjugate", "a->ab, b->a", "a->A, b->B", "--mu", "21/10"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().next(), Some("NO"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("members"));
    let out = Command::new(exe).arg("bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
