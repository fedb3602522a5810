use std::collections::BTreeMap;

use crate::frontend::{syntax, CType};
use crate::strategies::{
    auto_parallelize, change_precision, change_type, clone_call_tree, create_typed_version,
    disable_nested_parallel_pragmas, memoize, mixed_precision_versions, multiversion, MemoConfig, MemoPolicy,
    PrecisionMap,
};
use crate::weave::{JoinPoint, JpKind, SelectChain, Session, Step, Value, FilterOp};

/// Builtin actions: name, min and max argument count, required target
/// kind (`None` = any or none).
const BUILTINS: &[(&str, usize, usize, Option<JpKind>)] = &[
    ("changeType", 2, 2, None),
    ("changePrecision", 0, 2, Some(JpKind::Function)),
    ("cloneCallTree", 1, 1, Some(JpKind::Function)),
    ("createTypedVersion", 1, 3, Some(JpKind::Function)),
    ("mixedPrecision", 0, 1, Some(JpKind::Function)),
    ("multiversion", 2, 2, Some(JpKind::Call)),
    ("memoize", 0, 3, Some(JpKind::Function)),
    ("disable", 0, 0, Some(JpKind::Pragma)),
    ("autoParallelize", 0, 0, None),
    ("disableNestedParallelPragmas", 0, 0, None),
    ("requireRuntime", 0, 0, None),
];

pub(crate) fn builtin_arity(name: &str) -> Option<(usize, usize)> {
    BUILTINS.iter().find(|b| b.0 == name).map(|b| (b.1, b.2))
}

/// A strategy callable by name as an aspect (`call Memoize(...)` or as the
/// entry aspect). An aspect of the same name in the program shadows it.
#[derive(Debug, Clone, Copy)]
pub struct Predefined {
    pub name: &'static str,
    /// Inputs in positional order with their defaults.
    pub inputs: &'static [(&'static str, Option<&'static str>)],
    pub summary: &'static str,
}

pub const PREDEFINED: &[Predefined] = &[
    Predefined {
        name: "ChangePrecision",
        inputs: &[("func", None), ("old", Some("double")), ("new", Some("float"))],
        summary: "retype a function's declarations, literals and libm calls",
    },
    Predefined {
        name: "CloneCallTree",
        inputs: &[("func", None), ("suffix", None)],
        summary: "clone a function and everything it calls",
    },
    Predefined {
        name: "CreateTypedVersion",
        inputs: &[("func", None), ("suffix", Some("_f")), ("old", Some("double")), ("new", Some("float"))],
        summary: "clone a call tree and change the precision of the clones",
    },
    Predefined {
        name: "MixedPrecision",
        inputs: &[("func", None), ("limit", Some("8"))],
        summary: "generate mixed-precision versions of a call tree",
    },
    Predefined {
        name: "Memoize",
        inputs: &[("func", None), ("size", Some("1024")), ("policy", Some("replace")), ("force", Some("false"))],
        summary: "route calls through a memoization table",
    },
    Predefined {
        name: "Multiversion",
        inputs: &[("func", None), ("callee", None), ("versions", None), ("knob", None)],
        summary: "dispatch calls of `callee` inside `func` between versions on a knob",
    },
    Predefined {
        name: "AutoParallelize",
        inputs: &[],
        summary: "add OpenMP pragmas to every loop proven parallel",
    },
    Predefined {
        name: "DisableNestedParallelPragmas",
        inputs: &[],
        summary: "comment out parallel pragmas nested in a parallel loop",
    },
];

pub fn predefined(name: &str) -> Option<&'static Predefined> {
    PREDEFINED.iter().find(|p| p.name == name)
}

fn text(args: &[Value], i: usize, default: &str) -> String {
    args.get(i).map_or_else(|| default.to_string(), Value::to_string)
}

fn number(args: &[Value], i: usize, default: i64, what: &str) -> Result<i64, String> {
    match args.get(i) {
        None => Ok(default),
        Some(Value::Int(n)) => Ok(*n),
        Some(v) => v.to_string().trim().parse().map_err(|_| format!("{what} must be a number, got `{v}`")),
    }
}

fn flag(args: &[Value], i: usize) -> Result<bool, String> {
    match args.get(i) {
        None => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(v) => match v.to_string().as_str() {
            "true" | "1" => Ok(true),
            "false" | "0" | "" => Ok(false),
            other => Err(format!("expected true or false, got `{other}`")),
        },
    }
}

fn list(v: &Value) -> Vec<String> {
    match v {
        Value::List(l) => l.clone(),
        other => other.to_string().split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
    }
}

fn function_name(s: &Session, jp: JoinPoint) -> String {
    syntax::function_name(s.ast(), jp.node)
}

/// Runs builtin action `name` on `target`.
pub(crate) fn run_builtin(
    s: &mut Session,
    name: &str,
    args: &[Value],
    target: Option<JoinPoint>,
) -> Result<(), String> {
    let spec = BUILTINS.iter().find(|b| b.0 == name).ok_or_else(|| format!("unknown action `{name}`"))?;
    let jp = match (spec.3, target) {
        (None, t) => t,
        (Some(k), Some(t)) if t.kind == k => Some(t),
        (Some(k), t) => {
            return Err(format!(
                "`{name}` needs a {k} join point, got {}",
                t.map_or("none".to_string(), |t| t.kind.to_string())
            ))
        }
    };
    let e = |e: crate::strategies::StrategyError| e.to_string();
    match name {
        "changeType" => {
            let jp = jp.filter(|j| matches!(j.kind, JpKind::Decl | JpKind::Function)).ok_or_else(|| {
                "`changeType` needs a decl or function join point".to_string()
            })?;
            let attr = if jp.kind == JpKind::Decl { "type" } else { "returnType" };
            let cur = CType::parse(&s.attribute(jp, attr).map_err(|e| e.to_string())?.to_string())
                .map_err(|e| e.to_string())?;
            let new = change_type(&cur, &text(args, 0, ""), &text(args, 1, ""));
            if new != cur {
                s.set_type(jp, &new).map_err(|e| e.to_string())?;
            }
            Ok(())
        }
        "changePrecision" => {
            let f = function_name(s, jp.expect("checked"));
            let map = PrecisionMap::new(&text(args, 0, "double"), &text(args, 1, "float")).map_err(e)?;
            change_precision(s, &f, &map).map_err(e)
        }
        "cloneCallTree" => {
            let f = function_name(s, jp.expect("checked"));
            clone_call_tree(s, &f, &text(args, 0, "")).map(drop).map_err(e)
        }
        "createTypedVersion" => {
            let f = function_name(s, jp.expect("checked"));
            create_typed_version(s, &f, &text(args, 0, ""), &text(args, 1, "double"), &text(args, 2, "float"))
                .map(drop)
                .map_err(e)
        }
        "mixedPrecision" => {
            let f = function_name(s, jp.expect("checked"));
            let limit = number(args, 0, 8, "limit")?;
            let limit = usize::try_from(limit).map_err(|_| "limit must not be negative".to_string())?;
            mixed_precision_versions(s, &f, limit).map(drop).map_err(e)
        }
        "multiversion" => {
            let versions = list(&args[0]);
            multiversion(s, jp.expect("checked").node, &versions, &text(args, 1, "")).map_err(e)
        }
        "memoize" => {
            let f = function_name(s, jp.expect("checked"));
            let size = number(args, 0, 1024, "table size")?;
            let size = u32::try_from(size).map_err(|_| format!("table size {size} out of range"))?;
            let policy: MemoPolicy = text(args, 1, "replace").parse().map_err(e)?;
            let mut cfg = MemoConfig::new(&f, size, policy);
            cfg.force = flag(args, 2)?;
            memoize(s, &cfg).map(drop).map_err(e)
        }
        "disable" => {
            s.comment_out_pragma(jp.expect("checked").node);
            Ok(())
        }
        "autoParallelize" => {
            auto_parallelize(s);
            Ok(())
        }
        "disableNestedParallelPragmas" => {
            disable_nested_parallel_pragmas(s);
            Ok(())
        }
        "requireRuntime" => {
            crate::strategies::runtime::require_runtime(s);
            crate::strategies::multiversion::ensure_include(s, crate::strategies::runtime::RUNTIME_HEADER_NAME)
                .map_err(e)
        }
        _ => unreachable!("builtin table and dispatch agree"),
    }
}

/// Runs a predefined aspect with fully bound inputs.
pub(crate) fn run_predefined(s: &mut Session, p: &Predefined, inputs: &BTreeMap<String, Value>) -> Result<(), String> {
    let get = |n: &str| inputs.get(n).cloned().unwrap_or(Value::Str(String::new()));
    let function = |s: &mut Session| -> Result<JoinPoint, String> {
        let name = get("func").to_string();
        let f = syntax::find_function(s.ast(), &name).ok_or_else(|| format!("function `{name}` not found"))?;
        Ok(JoinPoint { kind: JpKind::Function, node: f })
    };
    match p.name {
        "ChangePrecision" => {
            let f = function(s)?;
            run_builtin(s, "changePrecision", &[get("old"), get("new")], Some(f))
        }
        "CloneCallTree" => {
            let f = function(s)?;
            run_builtin(s, "cloneCallTree", &[get("suffix")], Some(f))
        }
        "CreateTypedVersion" => {
            let f = function(s)?;
            run_builtin(s, "createTypedVersion", &[get("suffix"), get("old"), get("new")], Some(f))
        }
        "MixedPrecision" => {
            let f = function(s)?;
            run_builtin(s, "mixedPrecision", &[get("limit")], Some(f))
        }
        "Memoize" => {
            let f = function(s)?;
            run_builtin(s, "memoize", &[get("size"), get("policy"), get("force")], Some(f))
        }
        "Multiversion" => {
            let chain = SelectChain::new(vec![
                Step::with(JpKind::Function, "name", FilterOp::Eq, get("func")),
                Step::with(JpKind::Call, "name", FilterOp::Eq, get("callee")),
            ]);
            let tuples = s.select(&chain).map_err(|e| e.to_string())?;
            if tuples.is_empty() {
                return Err(format!("no call to `{}` inside `{}`", get("callee"), get("func")));
            }
            let knob = get("knob").to_string();
            for (i, t) in tuples.iter().enumerate() {
                let k = if i == 0 { knob.clone() } else { format!("{knob}_{}", i + 1) };
                run_builtin(s, "multiversion", &[get("versions"), Value::Str(k)], Some(t[1]))?;
            }
            Ok(())
        }
        "AutoParallelize" => run_builtin(s, "autoParallelize", &[], None),
        "DisableNestedParallelPragmas" => run_builtin(s, "disableNestedParallelPragmas", &[], None),
        other => unreachable!("predefined aspect `{other}` has no implementation"),
    }
}
