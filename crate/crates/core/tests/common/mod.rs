//! Helpers shared by the integration tests and the acceptance gate:
//! paths, a C toolchain wrapper and independent oracles.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aweave::autotune::{parse_knowledge, Direction, KnowledgeBase, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("repo root")
}

pub fn corpus(name: &str) -> PathBuf {
    repo_root().join("corpus").join(name)
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Every C file of the corpus, fixtures included.
pub fn corpus_files() -> Vec<PathBuf> {
    let mut out = Vec::new();
    for dir in [repo_root().join("corpus"), repo_root().join("corpus/fixtures")] {
        for e in std::fs::read_dir(&dir).expect("corpus dir") {
            let p = e.expect("entry").path();
            if p.extension().is_some_and(|x| x == "c") {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

pub fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

/// Compiles `sources` into `out`; panics with the compiler log on failure.
pub fn cc(sources: &[&Path], out: &Path, flags: &[&str]) {
    let o = Command::new("cc")
        .args(["-std=c99", "-O2", "-Wall", "-Wextra"])
        .args(flags)
        .args(sources)
        .arg("-o")
        .arg(out)
        .arg("-lm")
        .output()
        .expect("cc runs");
    assert!(o.status.success(), "cc failed:\n{}", String::from_utf8_lossy(&o.stderr));
}

pub fn run(bin: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(bin);
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("program runs")
}

pub fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

/// Writes the session's output and support files into `dir`.
pub fn write_woven(dir: &Path, name: &str, s: &aweave::weave::Session) -> PathBuf {
    for (f, text) in s.support_files() {
        std::fs::write(dir.join(f), text).expect("support file");
    }
    let p = dir.join(name);
    std::fs::write(&p, s.ast().emit()).expect("woven file");
    p
}

// ---------------------------------------------------------------------------
// autotuner oracle

/// Exhaustive selection by sorting every point on
/// (longest satisfied prefix of the priority-ordered constraints,
///  violation of the first constraint when that prefix is empty,
///  rank, knobs).
/// Returns (point, dropped priorities largest first, feasible).
pub fn oracle_select(kb: &KnowledgeBase, p: &Problem) -> (usize, Vec<u32>, bool) {
    let mean = |i: usize, m: &str| kb.points[i].metrics[m].mean;
    let rank = |i: usize| -> f64 { p.rank.terms.iter().map(|(m, w)| w * mean(i, m)).sum() };
    let prefix = |i: usize| {
        p.constraints.iter().take_while(|c| c.holds(mean(i, &c.metric))).count()
    };
    let n = kb.points.len();
    let cs = &p.constraints;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        let by_prefix = prefix(b).cmp(&prefix(a));
        let by_viol = if cs.is_empty() || prefix(a) > 0 || prefix(b) > 0 {
            std::cmp::Ordering::Equal
        } else {
            cs[0].violation(mean(a, &cs[0].metric)).total_cmp(&cs[0].violation(mean(b, &cs[0].metric)))
        };
        let by_rank = match p.rank.direction {
            Direction::Maximize => rank(b).total_cmp(&rank(a)),
            Direction::Minimize => rank(a).total_cmp(&rank(b)),
        };
        by_prefix.then(by_viol).then(by_rank).then_with(|| kb.points[a].knobs.cmp(&kb.points[b].knobs))
    });
    let best = idx[0];
    let k = prefix(best);
    if cs.is_empty() {
        return (best, vec![], true);
    }
    let kept = k.max(1);
    let dropped: Vec<u32> = cs[kept..].iter().rev().map(|c| c.priority).collect();
    (best, dropped, k > 0)
}

/// A random knowledge base and problem: up to 12 points, up to 3
/// constraints, values on a coarse grid so ties and infeasible cases occur.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (String, Vec<String>, String) {
    let metrics = ["time", "energy", "error"];
    let n_metrics = rng.random_range(1..=3);
    let n_points = rng.random_range(1..=12);
    let mut configs = std::collections::BTreeSet::new();
    while configs.len() < n_points {
        configs.insert((rng.random_range(0..4), rng.random_range(0..4)));
    }
    let mut csv = String::from("knob:a,knob:b");
    for m in &metrics[..n_metrics] {
        csv.push_str(&format!(",metric:{m}:mean"));
    }
    csv.push('\n');
    let mut rows: Vec<_> = configs.into_iter().collect();
    // row order must not matter
    for i in (1..rows.len()).rev() {
        rows.swap(i, rng.random_range(0..=i));
    }
    for (a, b) in rows {
        csv.push_str(&format!("{a},{b}"));
        for _ in 0..n_metrics {
            csv.push_str(&format!(",{}", f64::from(rng.random_range(0..20u32)) * 0.25));
        }
        csv.push('\n');
    }
    let n_cons = rng.random_range(0..=3);
    let mut prios: Vec<u32> = (1..=5).collect();
    for i in (1..prios.len()).rev() {
        prios.swap(i, rng.random_range(0..=i));
    }
    let mut cons = Vec::new();
    for prio in &prios[..n_cons] {
        let m = metrics[rng.random_range(0..n_metrics)];
        let rel = if rng.random_bool(0.5) { "<=" } else { ">=" };
        let t = f64::from(rng.random_range(0..20u32)) * 0.25;
        cons.push(format!("{m}{rel}{t}:{prio}"));
    }
    let dir = if rng.random_bool(0.5) { "max" } else { "min" };
    let terms: Vec<String> = (0..rng.random_range(1..=2))
        .map(|_| {
            let m = metrics[rng.random_range(0..n_metrics)];
            let w = [0.5, 1.0, 2.0][rng.random_range(0..3)];
            format!("{m}*{w}")
        })
        .collect();
    (csv, cons, format!("{dir}:{}", terms.join("+")))
}

pub fn build_problem(cons: &[String], rank: &str) -> Problem {
    Problem::new(cons.iter().map(|c| c.parse().unwrap()).collect(), rank.parse().unwrap()).unwrap()
}

pub fn instance(seed: u64) -> (KnowledgeBase, Problem, String, Vec<String>, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (csv, cons, rank) = random_instance(&mut rng);
    let kb = parse_knowledge(&csv).unwrap();
    let p = build_problem(&cons, &rank);
    (kb, p, csv, cons, rank)
}

/// Multiplies every metric value in a knowledge CSV by `c`.
pub fn scale_csv(csv: &str, c: f64) -> String {
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    let knob_cols = header.split(',').filter(|h| h.starts_with("knob:")).count();
    let mut out = format!("{header}\n");
    for l in lines {
        let cells: Vec<String> = l
            .split(',')
            .enumerate()
            .map(|(i, v)| if i < knob_cols { v.to_string() } else { (v.parse::<f64>().unwrap() * c).to_string() })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Multiplies the threshold of each `metric<=t:p` constraint by `c`.
pub fn scale_constraints(cons: &[String], c: f64) -> Vec<String> {
    cons.iter()
        .map(|s| {
            let (body, prio) = s.rsplit_once(':').unwrap();
            let op = if body.contains("<=") { "<=" } else { ">=" };
            let (m, t) = body.split_once(op).unwrap();
            format!("{m}{op}{}:{prio}", t.parse::<f64>().unwrap() * c)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// C type oracle

/// A C type described at the declarator level.
#[derive(Debug, Clone)]
pub struct TypeSpec {
    pub quals: Vec<&'static str>,
    /// Specifier words in the order they are spelled.
    pub words: Vec<&'static str>,
    /// Per pointer level: const, volatile, restrict.
    pub pointers: Vec<(bool, bool, bool)>,
    pub arrays: Vec<String>,
}

pub const BASES: &[&[&str]] = &[
    &["double"],
    &["float"],
    &["int"],
    &["char"],
    &["long", "double"],
    &["unsigned", "long"],
    &["short", "int"],
    &["unsigned", "char"],
    &["long", "long"],
    &["void"],
];

pub fn random_type(rng: &mut ChaCha8Rng) -> TypeSpec {
    let mut words: Vec<&'static str> = BASES[rng.random_range(0..BASES.len())].to_vec();
    if rng.random_bool(0.3) {
        words.reverse();
    }
    let mut quals = Vec::new();
    if rng.random_bool(0.3) {
        quals.push("const");
    }
    if rng.random_bool(0.15) {
        quals.push("volatile");
    }
    if rng.random_bool(0.3) {
        quals.reverse();
    }
    let pointers = (0..rng.random_range(0..3))
        .map(|_| (rng.random_bool(0.3), rng.random_bool(0.1), rng.random_bool(0.2)))
        .collect();
    let arrays = (0..rng.random_range(0..3))
        .map(|_| ["4", "", "N", "2 * N"][rng.random_range(0..4)].to_string())
        .collect();
    TypeSpec { quals, words, pointers, arrays }
}

impl TypeSpec {
    /// Spelled the way a programmer might: qualifiers and specifiers in
    /// the generated order, spaces around `*`.
    pub fn spelling(&self) -> String {
        let mut s: Vec<String> = self.quals.iter().chain(&self.words).map(|w| w.to_string()).collect();
        for (c, v, r) in &self.pointers {
            s.push("*".into());
            if *c {
                s.push("const".into());
            }
            if *v {
                s.push("volatile".into());
            }
            if *r {
                s.push("restrict".into());
            }
        }
        let mut out = s.join(" ");
        for a in &self.arrays {
            out.push_str(&format!(" [{a}]"));
        }
        out
    }

    /// Canonical text after replacing base `old` by `new`.
    pub fn expected_after(&self, old: &str, new: &str) -> String {
        const ORDER: &[&str] = &["signed", "unsigned", "short", "long", "char", "int", "float", "double", "void"];
        let mut words = self.words.clone();
        words.sort_by_key(|w| ORDER.iter().position(|o| o == w));
        let mut base = words.join(" ");
        if base == old {
            base = new.to_string();
        }
        let mut out = String::new();
        for q in ["const", "volatile"] {
            if self.quals.contains(&q) {
                out.push_str(q);
                out.push(' ');
            }
        }
        out.push_str(&base);
        for (c, v, r) in &self.pointers {
            out.push('*');
            for (on, name) in [(c, "const"), (v, "volatile"), (r, "restrict")] {
                if *on {
                    out.push(' ');
                    out.push_str(name);
                }
            }
        }
        for a in &self.arrays {
            out.push_str(&format!("[{a}]"));
        }
        out
    }
}

pub fn types_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// memo table oracle

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Hit,
    Miss,
}

/// Hand simulation of a direct-mapped table over `f64` arguments.
/// Returns the outcome of each call and the eviction count.
pub fn simulate_memo(args: &[f64], size: u32, keep: bool) -> (Vec<Outcome>, u64) {
    let mut table: BTreeMap<u64, u64> = BTreeMap::new();
    let mut evictions = 0;
    let mut out = Vec::new();
    for a in args {
        let bits = a.to_bits();
        let slot = aweave::strategies::memo_slot(&a.to_ne_bytes(), size);
        match table.get(&slot) {
            Some(b) if *b == bits => out.push(Outcome::Hit),
            Some(_) => {
                out.push(Outcome::Miss);
                if !keep {
                    table.insert(slot, bits);
                    evictions += 1;
                }
            }
            None => {
                out.push(Outcome::Miss);
                table.insert(slot, bits);
            }
        }
    }
    (out, evictions)
}

// ---------------------------------------------------------------------------
// shipped aspects

/// A file of `aspects/` with the input and arguments named in its header
/// (`// in: path` and `// args: k=v ...`).
pub struct ShippedAspect {
    pub path: PathBuf,
    pub input: PathBuf,
    pub args: BTreeMap<String, String>,
}

pub fn shipped_aspects() -> Vec<ShippedAspect> {
    let dir = repo_root().join("aspects");
    let mut out = Vec::new();
    for e in std::fs::read_dir(&dir).expect("aspects dir") {
        let path = e.expect("entry").path();
        if path.extension().is_none_or(|x| x != "aw") {
            continue;
        }
        let text = read(&path);
        let input = text
            .lines()
            .find_map(|l| l.strip_prefix("// in: "))
            .unwrap_or_else(|| panic!("{} has no `// in:` line", path.display()));
        let args = text
            .lines()
            .find_map(|l| l.strip_prefix("// args: "))
            .map(|a| {
                a.split_whitespace()
                    .map(|kv| {
                        let (k, v) = kv.split_once('=').expect("k=v");
                        (k.to_string(), v.to_string())
                    })
                    .collect()
            })
            .unwrap_or_default();
        out.push(ShippedAspect { input: repo_root().join(input.trim()), path, args });
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    out
}

impl ShippedAspect {
    pub fn name(&self) -> String {
        self.path.file_name().unwrap().to_string_lossy().into_owned()
    }

    /// Weaves the aspect into its input; returns the input tree, the
    /// session and the aspect program.
    pub fn weave(&self) -> (aweave::frontend::Ast, aweave::weave::Session, aweave::dsl::AspectProgram) {
        let program = aweave::dsl::parse_aspects(&read(&self.path)).unwrap();
        let src = read(&self.input);
        let input = aweave::frontend::parse(&src, &self.input.display().to_string()).unwrap();
        let mut s = aweave::weave::Session::new(input.clone());
        aweave::dsl::run_aspects(&program, &mut s, None, &self.args)
            .unwrap_or_else(|e| panic!("{}: {e}", self.name()));
        (input, s, program)
    }
}

/// Cost of an edge in the betweenness program.
pub fn edge_cost(w: f64) -> f64 {
    (10.0 * (w * w + 1.0).sqrt()).floor() / 4.0
}

/// Random undirected graph in the betweenness input format, no parallel
/// edges or self loops. Returns the text and the edge list.
pub fn random_graph(rng: &mut ChaCha8Rng, v: usize, e: usize) -> (String, Vec<(usize, usize, f64)>) {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut tries = 0;
    while edges.len() < e && tries < 10 * e + 10 && v > 1 {
        tries += 1;
        let a = rng.random_range(0..v);
        let b = rng.random_range(0..v);
        if a == b || edges.iter().any(|&(x, y, _)| (x, y) == (a.min(b), a.max(b))) {
            continue;
        }
        edges.push((a.min(b), a.max(b), rng.random_range(1..5) as f64 * 0.5));
    }
    let mut text = format!("{v} {}\n", edges.len());
    for (a, b, w) in &edges {
        text.push_str(&format!("{a} {b} {w}\n"));
    }
    (text, edges)
}

/// Betweenness by enumerating every simple path between every pair.
pub fn brute_betweenness(v: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut adj = vec![Vec::new(); v];
    for &(a, b, w) in edges {
        adj[a].push((b, edge_cost(w)));
        adj[b].push((a, edge_cost(w)));
    }
    fn walk(adj: &[Vec<(usize, f64)>], at: usize, t: usize, len: f64, path: &mut Vec<usize>, out: &mut Vec<(f64, Vec<usize>)>) {
        if at == t {
            out.push((len, path.clone()));
            return;
        }
        for &(n, c) in &adj[at] {
            if !path.contains(&n) {
                path.push(n);
                walk(adj, n, t, len + c, path, out);
                path.pop();
            }
        }
    }
    let mut score = vec![0.0; v];
    for s in 0..v {
        for t in s + 1..v {
            let mut paths = Vec::new();
            walk(&adj, s, t, 0.0, &mut vec![s], &mut paths);
            let Some(best) = paths.iter().map(|p| p.0).reduce(f64::min) else { continue };
            let shortest: Vec<_> = paths.iter().filter(|p| p.0 == best).collect();
            for p in &shortest {
                for &x in &p.1[1..p.1.len() - 1] {
                    score[x] += 1.0 / shortest.len() as f64;
                }
            }
        }
    }
    score
}

// ---------------------------------------------------------------------------
// memoized C drivers

/// Hit, miss and eviction counts from the `memo` stats line.
pub fn parse_stats(line: &str) -> (u64, u64, u64) {
    let field = |k: &str| -> u64 {
        let at = line.find(&format!("{k}=")).unwrap_or_else(|| panic!("no {k} in `{line}`")) + k.len() + 1;
        line[at..].split(|c: char| !c.is_ascii_digit()).next().unwrap().parse().unwrap()
    };
    (field("hits"), field("misses"), field("evictions"))
}

pub const TWICE: &str = "#include <stdio.h>\n#include <stdlib.h>\n\ndouble twice(double x)\n{\n    return 2.0 * x;\n}\n\nint main(int argc, char **argv)\n{\n    int i;\n    for (i = 1; i < argc; i++)\n        printf(\"%.17g\\n\", twice(atof(argv[i])));\n    return 0;\n}\n";

/// Builds TWICE memoized with a table of `size`; returns the binary.
pub fn twice_binary(dir: &Path, size: u32) -> std::path::PathBuf {
    use aweave::strategies::{memoize, MemoConfig, MemoPolicy};
    let mut s = aweave::weave::Session::new(aweave::frontend::parse(TWICE, "twice.c").unwrap());
    memoize(&mut s, &MemoConfig::new("twice", size, MemoPolicy::Replace)).unwrap();
    let woven = write_woven(dir, "twice.c", &s);
    let bin = dir.join(format!("twice{size}"));
    cc(&[&woven, &dir.join("aw_memo_twice.c")], &bin, &[]);
    bin
}

/// Outcome of each call, recovered by running every prefix of `args`.
pub fn outcomes(bin: &Path, args: &[&str], policy: &str) -> Vec<Outcome> {
    let mut prev = 0;
    let mut out = Vec::new();
    for n in 1..=args.len() {
        let o = run(bin, &args[..n], &[("AW_MEMO_STATS", "1"), ("AW_MEMO_POLICY_twice", policy)]);
        let (hits, misses, evictions) = parse_stats(&String::from_utf8_lossy(&o.stderr));
        assert_eq!(hits + misses, n as u64);
        if policy == "keep" {
            assert_eq!(evictions, 0);
        }
        out.push(if hits > prev { Outcome::Hit } else { Outcome::Miss });
        prev = hits;
    }
    out
}

