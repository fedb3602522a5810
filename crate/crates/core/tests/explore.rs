mod common;

use std::collections::BTreeMap;

use aweave::autotune::parse_knowledge;
use aweave::explore::{
    expand_ranges, run_exploration, stats_of, to_csv, version_key, ExploreConfig, ExploreError, Range, VersionCache,
    VersionOptions,
};
use aweave::frontend::parse;
use proptest::prelude::*;

const FAKE: &str = r#"
sources = ["unused.c"]
repetitions = 4
output = "k.csv"

[knobs]
threads = { geometric = { start = 1, factor = 2, count = 7 } }
size = { values = [10, 20, 40] }

[fake]
base = 2.0
noise = 0.1
seed = 9
exponents = { threads = -1.0, size = 1.0 }
power = 25.0
"#;

#[test]
fn geometric_range() {
    let r = Range::Geometric { start: 1, factor: 2, count: 7 };
    assert_eq!(r.expand().unwrap(), [1, 2, 4, 8, 16, 32, 64]);
    assert!(Range::Values(vec![]).expand().is_err());
    assert!(Range::Geometric { start: 3, factor: 10, count: 40 }.expand().is_err());
}

#[test]
fn fake_exploration_covers_every_configuration() {
    let cfg = ExploreConfig::parse(FAKE).unwrap();
    let res = run_exploration(&cfg, std::path::Path::new(".")).unwrap();
    assert_eq!(res.rows.len(), 7 * 3);
    // name order, last knob fastest
    assert_eq!(res.knobs, ["size", "threads"]);
    assert_eq!(res.rows[1].config["threads"], 2);
    assert_eq!(res.rows[7].config["size"], 20);
    for row in &res.rows {
        assert_eq!(row.times.len(), 4);
        let ideal = 2.0 * row.config["size"] as f64 / row.config["threads"] as f64;
        for (t, e) in row.times.iter().zip(row.energies.as_ref().unwrap()) {
            assert!((t / ideal - 1.0).abs() <= 0.1 + 1e-12);
            assert!((e - 25.0 * t).abs() <= 1e-9 * e);
        }
    }
    // same seed, same numbers
    assert_eq!(run_exploration(&cfg, std::path::Path::new(".")).unwrap(), res);

    let kb = parse_knowledge(&to_csv(&res)).unwrap();
    assert_eq!(kb.points.len(), 21);
    assert_eq!(kb.metrics, ["time", "energy"]);
    for (p, row) in kb.points.iter().zip(&res.rows) {
        let s = stats_of(&row.times);
        assert_eq!(p.metrics["time"].mean, s.mean);
        assert_eq!(p.metrics["time"].stddev, s.stddev);
    }
}

#[test]
fn config_errors() {
    assert!(matches!(ExploreConfig::parse("sources = []\noutput = \"x\"\nbogus = 1\n"), Err(ExploreError::Config(_))));
    let no_power = FAKE.replace("power = 25.0\n", "");
    let res = run_exploration(&ExploreConfig::parse(&no_power).unwrap(), std::path::Path::new(".")).unwrap();
    assert!(res.rows.iter().all(|r| r.energies.is_none()));
    assert!(!to_csv(&res).contains("energy"));
}

proptest! {
    #[test]
    fn stats_match_two_pass_oracle(xs in prop::collection::vec(0.001f64..1e3, 1..20)) {
        let s = stats_of(&xs);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        prop_assert!((s.mean - mean).abs() <= 1e-12 * mean);
        prop_assert!((s.stddev - var.sqrt()).abs() <= 1e-9 * (1.0 + var.sqrt()));
        prop_assert!(s.min <= s.mean && s.mean <= s.max);
        prop_assert_eq!(s.min, xs.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn product_size(a in 1usize..5, b in 1usize..5, c in 1u32..5) {
        let mut knobs = BTreeMap::new();
        knobs.insert("a".to_string(), Range::Values((0..a as i64).collect()));
        knobs.insert("b".to_string(), Range::Values((0..b as i64).collect()));
        knobs.insert("c".to_string(), Range::Geometric { start: 1, factor: 3, count: c });
        let all = expand_ranges(&knobs).unwrap();
        prop_assert_eq!(all.len(), a * b * c as usize);
        let distinct: std::collections::BTreeSet<_> = all.iter().collect();
        prop_assert_eq!(distinct.len(), all.len());
    }
}

const PROG: &str = r#"#include <stdio.h>
#include <stdlib.h>
int main(int argc, char **argv)
{
    const char *k = getenv("AW_k");
    FILE *f = fopen(argv[1], "r");
    if (!f || !k || atoi(k) != AW_k)
        return 3;
    fclose(f);
    printf("%d\n", AW_k);
    return AW_k == 13;
}
"#;

#[test]
fn real_exploration_and_failures() {
    if !common::have_cc() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.c"), PROG).unwrap();
    std::fs::write(dir.path().join("input.txt"), "x").unwrap();
    let cfg = "sources = [\"p.c\"]\nrepetitions = 2\noutput = \"out.csv\"\nrun_args = [\"input.txt\"]\n[knobs]\nk = { values = [1, 2, 3] }\n";
    let res = run_exploration(&ExploreConfig::parse(cfg).unwrap(), dir.path()).unwrap();
    assert_eq!(res.rows.len(), 3);
    assert!(res.rows.iter().all(|r| r.times.len() == 2 && r.times.iter().all(|t| *t > 0.0)));

    let bad = cfg.replace("[1, 2, 3]", "[13]");
    assert!(matches!(
        run_exploration(&ExploreConfig::parse(&bad).unwrap(), dir.path()),
        Err(ExploreError::NonzeroExit { code: 1, .. })
    ));
    let broken = cfg.replace("p.c", "missing.c");
    assert!(run_exploration(&ExploreConfig::parse(&broken).unwrap(), dir.path()).is_err());
    let no_cc = format!("compiler = \"no-such-cc {{src}} -o {{out}}\"\n{cfg}");
    assert!(matches!(
        run_exploration(&ExploreConfig::parse(&no_cc).unwrap(), dir.path()),
        Err(ExploreError::CompilerNotFound(_))
    ));
}

#[test]
fn version_cache_hits_on_same_key() {
    if !common::have_cc() {
        return;
    }
    let src = common::read(&common::corpus("overlap.c"));
    let ast = parse(&src, "overlap.c").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cache = VersionCache::new(dir.path().join("cache"));
    let opts = VersionOptions { flags: vec!["-O2".into(), "-lm".into()], defines: vec![] };
    let first = cache.compile(&ast, "measure_overlap", &opts).unwrap();
    assert!(!first.cache_hit && first.library.is_file());
    let again = cache.compile(&ast, "measure_overlap", &opts).unwrap();
    assert!(again.cache_hit);
    assert_eq!(again.key, first.key);

    // flag order does not matter, flags and defines do
    let swapped = VersionOptions { flags: vec!["-lm".into(), "-O2".into()], defines: vec![] };
    assert!(cache.compile(&ast, "measure_overlap", &swapped).unwrap().cache_hit);
    let defined = VersionOptions { defines: vec![("N".into(), "4".into())], ..opts.clone() };
    let other = cache.compile(&ast, "measure_overlap", &defined).unwrap();
    assert!(!other.cache_hit);
    assert_ne!(other.key, first.key);
    let closure = std::fs::read_to_string(dir.path().join("cache").join(&first.key).join("src.c")).unwrap();
    assert_eq!(version_key(&closure, &opts), first.key);
    assert!(closure.contains("cross_overlap") && closure.contains("gauss_overlap") && !closure.contains("int main"));

    assert!(matches!(
        cache.compile(&ast, "nowhere", &opts),
        Err(ExploreError::ClosureExtractionFailed { .. })
    ));
}
