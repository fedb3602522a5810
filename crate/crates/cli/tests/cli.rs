use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn aweave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aweave")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = aweave(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn corpus(name: &str) -> String {
    root().join("corpus").join(name).display().to_string()
}

fn p(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn weave_writes_report_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let aspect = root().join("aspects/empty.aw").display().to_string();
    let out = p(&dir, "nested/out.c");
    let report = p(&dir, "report.csv");
    let metrics = p(&dir, "metrics.csv");
    let input = corpus("betweenness.c");
    let args = ["weave", "--aspect", &aspect, "--in", &input, "--out", &out, "--report", &report, "--metrics", &metrics];
    ok(&args);
    ok(&args);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(&input).unwrap());
    let r = std::fs::read_to_string(&report).unwrap();
    assert_eq!(r.lines().next(), Some("File,Selects,Attributes,Actions,Inserts,NativeSLoC"));
    assert_eq!(r.lines().count(), 3);
    let m = std::fs::read_to_string(&metrics).unwrap();
    assert!(m.starts_with("File,AspectSLoC,Aspects,InputSLoC,InputFuncs,WovenSLoC,WovenFuncs,DeltaSLoC,DeltaFuncs\n"));
    let row: Vec<&str> = m.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], row[5]);
    assert_eq!(&row[7..], ["0", "0"]);
}

#[test]
fn weave_predefined_entry() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(&dir, "o.c");
    let input = corpus("betweenness.c");
    ok(&["weave", "--entry", "CloneCallTree", "--arg", "func=betweenness", "--arg", "suffix=_copy", "--in", &input, "--out", &out]);
    assert!(std::fs::read_to_string(&out).unwrap().contains("void betweenness_copy(void)"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus("betweenness.c");
    let copy = p(&dir, "b.c");
    std::fs::copy(&input, &copy).unwrap();
    for args in [
        vec!["parallelize", "--in", &copy, "--out", &copy],
        vec!["weave", "--entry", "NoSuchAspect", "--in", &input, "--out", "x.c"],
        vec!["weave", "--in", &input, "--out", "x.c"],
        vec!["multiversion", "--in", &input, "--out", "x.c", "--call", "main", "--versions", "a", "--knob", "k"],
        vec!["sloc"],
    ] {
        assert_eq!(aweave(&args).status.code(), Some(2), "{args:?}");
    }
    // the input survived
    assert_eq!(std::fs::read_to_string(&copy).unwrap(), std::fs::read_to_string(&input).unwrap());
    assert_eq!(aweave(&["bogus"]).status.code(), Some(2));
}

#[test]
fn failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = p(&dir, "bad.c");
    std::fs::write(&bad, "int f(a, b) int a; int b; { return a; }\n").unwrap();
    let o = aweave(&["detect-memo", "--in", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.c"));
    assert_eq!(aweave(&["detect-memo", "--in", &p(&dir, "missing.c")]).status.code(), Some(1));
    let out = p(&dir, "o.c");
    let o = aweave(&["memoize", "--in", &corpus("fixtures/purity.c"), "--out", &out, "--fn", "next_id"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn detect_memo_and_memoize() {
    let dir = tempfile::tempdir().unwrap();
    let purity = corpus("fixtures/purity.c");
    let found = ok(&["detect-memo", "--in", &purity]);
    let mut names: Vec<&str> = found.lines().collect();
    names.sort();
    assert_eq!(names, ["clamp", "fact", "gcd", "norm3", "poly", "square"]);
    let out = p(&dir, "m.c");
    ok(&["memoize", "--in", &corpus("betweenness.c"), "--out", &out, "--fn", "compute_metric", "--table-size", "64", "--policy", "keep"]);
    assert!(dir.path().join("aw_memo_compute_metric.c").is_file());
    assert!(dir.path().join("aw_memo_compute_metric.h").is_file());
}

#[test]
fn parallelize_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(&dir, "o.c");
    let report = p(&dir, "r.json");
    ok(&["parallelize", "--in", &corpus("fixtures/two_loops.c"), "--out", &out, "--report", &report]);
    let r = std::fs::read_to_string(&report).unwrap();
    assert!(r.contains("\"loops\""));
    assert!(r.contains("loop-carried-dependence"));
    assert_eq!(std::fs::read_to_string(&out).unwrap().matches("#pragma omp parallel for").count(), 1);

    let out2 = p(&dir, "o2.c");
    ok(&["parallelize", "--in", &corpus("overlap.c"), "--out", &out2, "--outermost"]);
    let woven = std::fs::read_to_string(&out2).unwrap();
    assert_eq!(woven.lines().filter(|l| l.trim_start().starts_with("#pragma omp")).count(), 1);
}

#[test]
fn multiversion_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let typed = p(&dir, "t.c");
    ok(&["weave", "--entry", "CreateTypedVersion", "--arg", "func=measure_overlap", "--in", &corpus("overlap.c"), "--out", &typed]);
    let out = p(&dir, "mv.c");
    ok(&["multiversion", "--in", &typed, "--out", &out, "--call", "main:measure_overlap", "--versions", "measure_overlap,measure_overlap_f", "--knob", "version"]);
    let woven = std::fs::read_to_string(&out).unwrap();
    assert!(woven.contains("aw_knob(\"version\")"));
    assert!(dir.path().join("aw_runtime.c").is_file());
}

#[test]
fn explore_then_tune() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(&dir, "e.toml");
    std::fs::write(
        &cfg,
        "sources = [\"x.c\"]\noutput = \"out/k.csv\"\n[knobs]\nthreads = { values = [1, 2, 4] }\n[fake]\nbase = 8.0\nnoise = 0.0\nseed = 1\nexponents = { threads = -1.0 }\npower = 10.0\n",
    )
    .unwrap();
    ok(&["explore", "--config", &cfg]);
    let kb = p(&dir, "out/k.csv");
    assert_eq!(std::fs::read_to_string(&kb).unwrap().lines().count(), 4);
    let knobs = p(&dir, "knobs.txt");
    let picked = ok(&["tune", "--knowledge", &kb, "--rank", "min:time", "--knob-file", &knobs]);
    assert_eq!(picked, "threads=4\n");
    assert_eq!(std::fs::read_to_string(&knobs).unwrap(), "threads=4\n");
    // time >= 3 keeps 1 and 2; energy is time * 10 in every row
    assert_eq!(ok(&["tune", "--knowledge", &kb, "--constraint", "time>=3:1", "--rank", "min:energy"]), "threads=2\n");
    // observed four times slower: threads=4 now takes 8
    let o = ok(&["tune", "--knowledge", &kb, "--constraint", "time<=5:1", "--rank", "max:time", "--observe", "time=8"]);
    assert_eq!(o, "threads=4\n");
    assert_eq!(aweave(&["tune", "--knowledge", &kb, "--rank", "median:time"]).status.code(), Some(2));
    assert_eq!(aweave(&["tune", "--knowledge", &kb, "--rank", "min:power"]).status.code(), Some(1));
}

#[test]
fn sloc_and_version_compile() {
    let o = ok(&["sloc", &corpus("fixtures/nested.c"), &root().join("aspects/empty.aw").display().to_string()]);
    assert_eq!(o.lines().count(), 2);
    assert!(o.lines().all(|l| l.split('\t').next().unwrap().parse::<u64>().is_ok()));

    if Command::new("cc").arg("--version").output().is_err() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let cache = p(&dir, "cache");
    let args = ["version-compile", "--in", &corpus("overlap.c"), "--fn", "gauss_overlap", "--flags", "-O2 -lm", "-D", "N=3", "--cache", &cache];
    let first = aweave(&args);
    assert!(first.status.success());
    assert!(String::from_utf8_lossy(&first.stderr).starts_with("compiled"));
    let second = aweave(&args);
    assert!(String::from_utf8_lossy(&second.stderr).starts_with("cache hit"));
    assert_eq!(first.stdout, second.stdout);
    assert!(Path::new(String::from_utf8_lossy(&first.stdout).trim()).is_file());
}
