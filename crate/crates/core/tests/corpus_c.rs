//! The corpus programs against independent oracles.

mod common;

use std::collections::BTreeMap;

use aweave::dsl::{parse_aspects, run_aspects};
use aweave::frontend::parse;
use aweave::weave::Session;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn centralities(out: &str) -> Vec<f64> {
    out.lines().map(|l| l.parse().unwrap()).collect()
}

#[test]
fn betweenness_matches_path_enumeration() {
    if !common::have_cc() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("bc");
    common::cc(&[&common::corpus("betweenness.c")], &bin, &[]);
    let graph = dir.path().join("g.txt");
    let g = graph.to_str().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..20 {
        let v = rng.random_range(1..=10);
        let e = rng.random_range(0..=v + 5);
        let (text, edges) = common::random_graph(&mut rng, v, e);
        std::fs::write(&graph, &text).unwrap();
        let got = centralities(&common::stdout(&common::run(&bin, &[g], &[])));
        let want = common::brute_betweenness(v, &edges);
        assert_eq!(got.len(), v);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-6, "case {case}: {got:?} vs {want:?}\n{text}");
        }
    }

    for (text, want) in [
        ("3 2\n0 1 1\n1 2 1\n", vec![0.0, 1.0, 0.0]),
        ("4 3\n0 1 2\n0 2 2\n0 3 2\n", vec![3.0, 0.0, 0.0, 0.0]),
        ("1 0\n", vec![0.0]),
    ] {
        std::fs::write(&graph, text).unwrap();
        assert_eq!(centralities(&common::stdout(&common::run(&bin, &[g], &[]))), want);
    }
    for bad in ["2 1\n0 0 1\n", "2 1\n0 1 -1\n", "2 2\n0 1 1\n", "x"] {
        std::fs::write(&graph, bad).unwrap();
        assert_eq!(common::run(&bin, &[g], &[]).status.code(), Some(1), "{bad:?}");
    }
}

#[test]
fn float_betweenness_stays_close() {
    if !common::have_cc() {
        return;
    }
    let src = common::corpus("betweenness.c");
    let mut s = Session::new(parse(&common::read(&src), "betweenness.c").unwrap());
    let prog = parse_aspects(
        "aspectdef FloatBc\n  call CreateTypedVersion(func = \"betweenness\")\n  call Multiversion(\"main\", \"betweenness\", \"betweenness,betweenness_f\", \"knob\")\nend\n",
    )
    .unwrap();
    run_aspects(&prog, &mut s, None, &BTreeMap::new()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let woven = common::write_woven(dir.path(), "bc.c", &s);
    let bin = dir.path().join("bc");
    common::cc(&[&woven, &dir.path().join("aw_runtime.c")], &bin, &[]);

    let graph = dir.path().join("g.txt");
    let g = graph.to_str().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let (text, _) = common::random_graph(&mut rng, 200, 600);
        std::fs::write(&graph, text).unwrap();
        let env = |k| [("AW_knob", k), ("AW_KNOB_FILE", "/nonexistent")];
        let d = centralities(&common::stdout(&common::run(&bin, &[g], &env("0"))));
        let f = centralities(&common::stdout(&common::run(&bin, &[g], &env("1"))));
        let top = d.iter().cloned().fold(0.0, f64::max);
        for (a, b) in d.iter().zip(&f) {
            assert!((a - b).abs() <= 1e-2 * a.abs().max(1e-3 * top), "{a} vs {b}");
        }
        assert!(spearman(&d, &f) >= 0.99);
    }
}

/// Rank correlation with average ranks for ties.
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(x: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
        let mut r = vec![0.0; x.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn corpus_builds_without_warnings() {
    if !common::have_cc() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    for path in common::corpus_files() {
        let out = std::process::Command::new("cc")
            .args(["-std=c99", "-pedantic", "-Wall", "-Wextra", "-Werror", "-fopenmp", "-c"])
            .arg(&path)
            .arg("-o")
            .arg(dir.path().join("x.o"))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}:\n{}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}
