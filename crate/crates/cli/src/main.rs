//! `aweave`: weave aspects into C sources, run the built-in strategies,
//! explore knob spaces and pick operating points.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use aweave::autotune::{self, FeedbackState, Problem};
use aweave::dsl::{self, AspectProgram};
use aweave::explore::{self, ExploreConfig, VersionCache, VersionOptions};
use aweave::frontend::{self, count_sloc, Ast};
use aweave::fsutil::atomic_write;
use aweave::strategies::{self, MemoConfig, MemoPolicy};
use aweave::weave::{static_metrics, Session, METRICS_HEADER, REPORT_HEADER};

#[derive(Parser)]
#[command(name = "aweave", version, about = "Source-to-source aspect weaving for C")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an aspect program on a C file.
    Weave(WeaveArgs),
    /// List the functions safe to memoize.
    DetectMemo {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Add OpenMP pragmas to the loops proven parallel.
    Parallelize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON verdict for every for loop.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Keep only the outermost parallel pragmas.
        #[arg(long)]
        outermost: bool,
    },
    /// Route the calls of a function through a result table.
    Memoize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value_t = 1024)]
        table_size: u32,
        #[arg(long, default_value = "replace")]
        policy: MemoPolicy,
        /// Memoize even when the function is not detected as pure.
        #[arg(long)]
        force: bool,
        /// Start with memoization switched off.
        #[arg(long)]
        disabled: bool,
    },
    /// Dispatch the calls `caller:callee` between versions on a knob.
    Multiversion {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `caller:callee`: every call of `callee` inside `caller`.
        #[arg(long)]
        call: String,
        /// Comma-separated versions; the callee itself is version 0.
        #[arg(long)]
        versions: String,
        #[arg(long)]
        knob: String,
    },
    /// Build and measure every knob configuration of a config file.
    Explore {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pick the best operating point of a knowledge CSV.
    Tune(TuneArgs),
    /// Compile one function (and what it calls) into a cached shared library.
    VersionCompile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        flags: String,
        /// `NAME=VALUE` compile-time define.
        #[arg(short = 'D', long = "define")]
        defines: Vec<String>,
        #[arg(long, default_value = ".aweave-cache")]
        cache: PathBuf,
        #[arg(long, default_value = explore::DEFAULT_SHARED_COMPILER)]
        compiler: String,
    },
    /// Count logical source lines of C files or aspect files.
    Sloc {
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct WeaveArgs {
    /// Aspect file; may be omitted when --entry names a predefined aspect.
    #[arg(long)]
    aspect: Option<PathBuf>,
    /// Aspect to run (default: the first in the file).
    #[arg(long)]
    entry: Option<String>,
    /// `name=value` input of the entry aspect.
    #[arg(long = "arg")]
    args: Vec<String>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Weave counters (CSV); a row is appended when the file already has the header.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Size metrics of input vs woven (CSV); appended like --report.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    knowledge: PathBuf,
    /// `metric<=value:priority` or `metric>=value:priority`.
    #[arg(long = "constraint")]
    constraints: Vec<String>,
    /// `max:metric[*w][+...]` or `min:...`.
    #[arg(long)]
    rank: String,
    #[arg(long)]
    knob_file: Option<PathBuf>,
    /// `metric=value` run-time observation of the selected point.
    #[arg(long = "observe")]
    observations: Vec<String>,
    #[arg(long, default_value_t = autotune::DEFAULT_WINDOW)]
    window: usize,
}

/// Errors that are the caller's fault rather than the input's.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Weave(a) => weave(a),
        Command::DetectMemo { input } => {
            let ast = read_c(&input)?;
            for f in strategies::detect_memoizable(&ast) {
                println!("{f}");
            }
            Ok(())
        }
        Command::Parallelize { input, out, report, outermost } => {
            check_distinct(&input, &out)?;
            let mut s = Session::new(read_c(&input)?);
            let r = strategies::auto_parallelize(&mut s);
            let disabled = if outermost { strategies::disable_nested_parallel_pragmas(&mut s) } else { 0 };
            write(&out, &s.ast().emit())?;
            if let Some(p) = report {
                write(&p, &(serde_json::to_string_pretty(&r)? + "\n"))?;
            }
            eprintln!(
                "{}: {} of {} loops parallelized{}",
                input.display(),
                r.accepted(),
                r.loops.len(),
                if outermost { format!(", {disabled} nested pragmas disabled") } else { String::new() }
            );
            Ok(())
        }
        Command::Memoize { input, out, function, table_size, policy, force, disabled } => {
            check_distinct(&input, &out)?;
            let mut s = Session::new(read_c(&input)?);
            let mut cfg = MemoConfig::new(&function, table_size, policy);
            cfg.force = force;
            cfg.enabled_by_default = !disabled;
            let m = strategies::memoize(&mut s, &cfg)?;
            finish_session(s, &out)?;
            eprintln!("{}: wrapper {} with {} and {}", input.display(), m.wrapper, m.header, m.source);
            Ok(())
        }
        Command::Multiversion { input, out, call, versions, knob } => {
            check_distinct(&input, &out)?;
            let (caller, callee) =
                call.split_once(':').ok_or_else(|| usage(format!("--call `{call}` is not `caller:callee`")))?;
            let mut s = Session::new(read_c(&input)?);
            let program = AspectProgram { aspects: Vec::new() };
            let args = BTreeMap::from([
                ("func".to_string(), caller.to_string()),
                ("callee".to_string(), callee.to_string()),
                ("versions".to_string(), versions),
                ("knob".to_string(), knob),
            ]);
            dsl::run_aspects(&program, &mut s, Some("Multiversion"), &args)?;
            finish_session(s, &out)
        }
        Command::Explore { config } => {
            let cfg = ExploreConfig::load(&config)?;
            let base = config.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let result = explore::run_exploration(&cfg, base)?;
            let out = base.join(&cfg.output);
            write(&out, &explore::to_csv(&result))?;
            eprintln!("{}: {} configurations x {} runs", out.display(), result.rows.len(), cfg.repetitions);
            Ok(())
        }
        Command::Tune(a) => tune(a),
        Command::VersionCompile { input, function, flags, defines, cache, compiler } => {
            let ast = read_c(&input)?;
            let mut opts = VersionOptions { flags: flags.split_whitespace().map(String::from).collect(), defines: vec![] };
            for d in defines {
                let (k, v) = d.split_once('=').unwrap_or((d.as_str(), ""));
                if k.is_empty() {
                    return Err(usage(format!("-D `{d}` has no name")));
                }
                opts.defines.push((k.to_string(), v.to_string()));
            }
            let v = VersionCache::new(cache).with_compiler(&compiler).compile(&ast, &function, &opts)?;
            eprintln!("{} {function} [{}]", if v.cache_hit { "cache hit" } else { "compiled" }, &v.key[..16]);
            println!("{}", v.library.display());
            Ok(())
        }
        Command::Sloc { files } => {
            if files.is_empty() {
                return Err(usage("no files given"));
            }
            for f in files {
                let text = read(&f)?;
                let n = if f.extension().is_some_and(|e| e == "aw") {
                    dsl::parse_aspects(&text).with_context(|| f.display().to_string())?.sloc()
                } else {
                    count_sloc(&parse_c(&text, &f)?) as u64
                };
                println!("{n}\t{}", f.display());
            }
            Ok(())
        }
    }
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
}

fn parse_c(text: &str, p: &Path) -> Result<Ast> {
    let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
    frontend::parse(text, &name).with_context(|| p.display().to_string())
}

fn read_c(p: &Path) -> Result<Ast> {
    parse_c(&read(p)?, p)
}

/// Creates missing parent directories, then writes atomically.
fn write(p: &Path, text: &str) -> Result<()> {
    if let Some(d) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display()))?;
    }
    atomic_write(p, text.as_bytes()).with_context(|| format!("cannot write {}", p.display()))
}

/// Refuses to overwrite an input.
fn check_distinct(input: &Path, out: &Path) -> Result<()> {
    let same = match (input.canonicalize(), out.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if same {
        return Err(usage(format!("--out would overwrite the input {}", input.display())));
    }
    Ok(())
}

/// Writes the woven unit and its support files next to it.
fn finish_session(s: Session, out: &Path) -> Result<()> {
    let (ast, _, support) = s.into_parts();
    write(out, &ast.emit())?;
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    for (name, text) in support {
        write(&dir.join(name), &text)?;
    }
    Ok(())
}

/// Writes `header` + `row`, or appends `row` when `p` already starts
/// with `header`.
fn write_row(p: &Path, header: &str, row: &str) -> Result<()> {
    let mut text = match fs::read_to_string(p) {
        Ok(old) if old.lines().next() == Some(header) => old,
        _ => format!("{header}\n"),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text.push_str(row);
    text.push('\n');
    write(p, &text)
}

fn weave(a: WeaveArgs) -> Result<()> {
    check_distinct(&a.input, &a.out)?;
    let (program, label) = match &a.aspect {
        Some(p) => {
            let text = read(p)?;
            let prog = dsl::parse_aspects(&text).with_context(|| p.display().to_string())?;
            (prog, p.file_name().unwrap_or_default().to_string_lossy().into_owned())
        }
        None => {
            let entry = a.entry.as_deref().ok_or_else(|| usage("give --aspect or a predefined --entry"))?;
            if dsl::predefined(entry).is_none() {
                return Err(usage(format!("`{entry}` is not a predefined aspect")));
            }
            (AspectProgram { aspects: Vec::new() }, entry.to_string())
        }
    };
    let mut args = BTreeMap::new();
    for kv in &a.args {
        let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("--arg `{kv}` is not name=value")))?;
        args.insert(k.trim().to_string(), v.to_string());
    }
    let input = read_c(&a.input)?;
    let mut s = Session::new(input.clone());
    let context = a.aspect.as_ref().map_or_else(|| label.clone(), |p| p.display().to_string());
    dsl::run_aspects(&program, &mut s, a.entry.as_deref(), &args)
        .with_context(|| format!("{context} on {}", a.input.display()))?;
    let report = *s.report();
    let woven = s.ast().clone();
    finish_session(s, &a.out)?;
    if let Some(p) = &a.report {
        write_row(p, REPORT_HEADER, &report.csv_row(&label))?;
    }
    if let Some(p) = &a.metrics {
        let m = static_metrics(&input, &woven, program.sloc(), program.aspects.len() as u64);
        write_row(p, METRICS_HEADER, &m.csv_row(&label))?;
    }
    eprintln!(
        "{}: selects={} attributes={} actions={} inserts={} native_sloc={}",
        a.out.display(),
        report.selects,
        report.attributes,
        report.actions,
        report.inserts,
        report.native_sloc
    );
    Ok(())
}

fn tune(a: TuneArgs) -> Result<()> {
    let kb = autotune::load_knowledge(&a.knowledge)?;
    let constraints = a
        .constraints
        .iter()
        .map(|c| c.parse().map_err(|e: autotune::TuneError| usage(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let rank = a.rank.parse().map_err(|e: autotune::TuneError| usage(e.to_string()))?;
    let problem = Problem::new(constraints, rank).map_err(|e| usage(e.to_string()))?;
    let mut pick = autotune::select_best(&kb, &problem, None)?;
    if !a.observations.is_empty() {
        let mut fb = FeedbackState::new(&kb, a.window);
        fb.set_active(&kb.points[pick.point]);
        for o in &a.observations {
            let (m, v) = o.split_once('=').ok_or_else(|| usage(format!("--observe `{o}` is not metric=value")))?;
            let v: f64 = v.trim().parse().map_err(|_| usage(format!("--observe `{o}`: not a number")))?;
            fb.observe(m.trim(), v)?;
        }
        pick = autotune::select_best(&kb, &problem, Some(&fb))?;
    }
    let point = &kb.points[pick.point];
    if !pick.dropped.is_empty() {
        eprintln!("relaxed constraints with priority {:?}", pick.dropped);
    }
    if !pick.feasible {
        eprintln!("no point meets the priority-1 constraint; returning the closest");
    }
    print!("{}", autotune::knob_file_text(point));
    if let Some(p) = &a.knob_file {
        autotune::write_knob_file(point, p)?;
    }
    Ok(())
}
