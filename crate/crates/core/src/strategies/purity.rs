use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::syntax;
use crate::frontend::{Ast, NodeId, NodeKind};

use super::access::{accesses_under, declared_names};

/// Library functions treated as side-effect free.
pub const PURE_LIBRARY: &[&str] = &[
    "sqrt", "sqrtf", "fabs", "fabsf", "pow", "powf", "exp", "expf", "exp2", "exp2f", "log",
    "logf", "log2", "log2f", "log10", "log10f", "sin", "sinf", "cos", "cosf", "tan", "tanf",
    "asin", "asinf", "acos", "acosf", "atan", "atanf", "atan2", "atan2f", "sinh", "sinhf",
    "cosh", "coshf", "tanh", "tanhf", "floor", "floorf", "ceil", "ceilf", "round", "roundf",
    "trunc", "truncf", "fmod", "fmodf", "fmin", "fminf", "fmax", "fmaxf", "hypot", "hypotf",
    "cbrt", "cbrtf", "erf", "erff", "abs", "labs",
];

/// Per-function side-effect facts.
#[derive(Debug, Clone, Default)]
pub struct FunctionFacts {
    pub name: String,
    /// Why the function is impure, if it is.
    pub impure_reason: Option<String>,
    pub reads_mutable_global: bool,
    pub callees: BTreeSet<String>,
}

/// Mutable (non-const) file-scope variables.
pub(crate) fn mutable_globals(ast: &Ast) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for c in ast.children(ast.root()) {
        if !ast.is_live(c) || ast.kind(c) != NodeKind::Declaration {
            continue;
        }
        let specs = syntax::spec_tokens(ast, c);
        if specs.iter().any(|t| t.text == "typedef") {
            continue;
        }
        for d in syntax::declarators(ast, c) {
            let info = syntax::declarator_info(ast, d);
            if info.params.is_some() {
                continue;
            }
            let ty = syntax::declared_type(ast, c, Some(d));
            let constant = ty.qualifiers.iter().any(|q| q == "const") && ty.pointers.is_empty()
                || ty.pointers.last().is_some_and(|p| p.is_const);
            if let (Some(name), false) = (info.name, constant) {
                out.insert(name);
            }
        }
    }
    out
}

fn facts_for(ast: &Ast, f: NodeId, globals: &BTreeSet<String>) -> FunctionFacts {
    let name = syntax::function_name(ast, f);
    let mut facts = FunctionFacts {
        name,
        ..Default::default()
    };
    let Some(body) = syntax::function_body(ast, f) else {
        return facts;
    };
    let mut locals: BTreeSet<String> = syntax::function_params(ast, f)
        .iter()
        .filter_map(|p| syntax::param_name(ast, *p))
        .collect();
    locals.extend(declared_names(ast, body));
    // arrays owned by the function (writes into them stay local)
    let mut local_arrays = BTreeSet::new();
    for d in ast.descendants(body) {
        if ast.kind(d) != NodeKind::Declaration {
            continue;
        }
        if syntax::storage_classes(ast, d).iter().any(|s| s == "static") {
            facts.impure_reason.get_or_insert_with(|| "static local state".into());
        }
        for decl in syntax::declarators(ast, d) {
            let info = syntax::declarator_info(ast, decl);
            if let (Some(n), false) = (info.name, info.arrays.is_empty()) {
                local_arrays.insert(n);
            }
        }
    }
    for a in accesses_under(ast, body) {
        let is_local = locals.contains(&a.var);
        if a.is_write() {
            if a.indirect {
                facts.impure_reason.get_or_insert_with(|| format!("writes through `{}`", a.var));
            } else if !a.subscripts.is_empty() && !local_arrays.contains(&a.var) {
                facts
                    .impure_reason
                    .get_or_insert_with(|| format!("writes through `{}[...]`", a.var));
            } else if !is_local {
                facts
                    .impure_reason
                    .get_or_insert_with(|| format!("writes global `{}`", a.var));
            }
        } else if !is_local && globals.contains(&a.var) {
            facts.reads_mutable_global = true;
        }
    }
    for c in ast.descendants(body) {
        if ast.kind(c) == NodeKind::Call {
            facts.callees.insert(syntax::call_name(ast, c));
        }
    }
    facts
}

/// Side-effect analysis of every defined function, closed over calls.
pub fn analyze(ast: &Ast) -> BTreeMap<String, FunctionFacts> {
    let globals = mutable_globals(ast);
    let mut facts: BTreeMap<String, FunctionFacts> = ast
        .functions()
        .into_iter()
        .filter(|f| ast.is_live(*f))
        .map(|f| {
            let ff = facts_for(ast, f, &globals);
            (ff.name.clone(), ff)
        })
        .collect();
    loop {
        let mut changed = false;
        let snapshot = facts.clone();
        for ff in facts.values_mut() {
            for callee in &ff.callees {
                match snapshot.get(callee) {
                    Some(cf) => {
                        if ff.impure_reason.is_none() && cf.impure_reason.is_some() {
                            ff.impure_reason = Some(format!("calls impure `{callee}`"));
                            changed = true;
                        }
                        if !ff.reads_mutable_global && cf.reads_mutable_global {
                            ff.reads_mutable_global = true;
                            changed = true;
                        }
                    }
                    None if PURE_LIBRARY.contains(&callee.as_str()) => {}
                    None => {
                        if ff.impure_reason.is_none() {
                            ff.impure_reason = Some(format!("calls unknown `{callee}`"));
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return facts;
        }
    }
}

/// Names of side-effect-free defined functions.
pub fn pure_functions(ast: &Ast) -> BTreeSet<String> {
    analyze(ast)
        .into_values()
        .filter(|f| f.impure_reason.is_none())
        .map(|f| f.name)
        .collect()
}

/// Functions whose results depend only on their scalar arguments: pure,
/// no reads of mutable globals (directly or via callees), an arithmetic
/// return type and at least one parameter, all arithmetic scalars.
/// Returned in definition order.
pub fn detect_memoizable(ast: &Ast) -> Vec<String> {
    let facts = analyze(ast);
    ast.functions()
        .into_iter()
        .filter(|f| ast.is_live(*f))
        .filter(|f| {
            let name = syntax::function_name(ast, *f);
            let Some(ff) = facts.get(&name) else { return false };
            let params = syntax::function_params(ast, *f);
            ff.impure_reason.is_none()
                && !ff.reads_mutable_global
                && syntax::return_type(ast, *f).is_arithmetic()
                && !params.is_empty()
                && params
                    .iter()
                    .all(|p| syntax::param_type(ast, *p).is_arithmetic())
        })
        .map(|f| syntax::function_name(ast, f))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    #[test]
    fn fixpoint_over_calls() {
        let src = r#"
#include <math.h>
int counter;
double f(double x) { return x * x; }
double h(double x) { return f(x) + sqrt(x); }
void g(int v) { counter = v; }
double k(double x) { g(1); return x; }
double r(double x) { return x + counter; }
double p(double *v) { return v[0]; }
"#;
        let ast = parse(src, "t.c").unwrap();
        assert_eq!(detect_memoizable(&ast), ["f", "h"]);
        let pure = pure_functions(&ast);
        assert!(pure.contains("r") && pure.contains("p"));
        assert!(!pure.contains("g") && !pure.contains("k"));
    }

    #[test]
    fn local_arrays_are_fine_but_params_are_not() {
        let src = "double s(double x) { double t[4]; int i; for (i = 0; i < 4; i++) t[i] = x * i; return t[3]; }\nvoid w(double *o, int n) { o[n] = 1.0; }\n";
        let ast = parse(src, "t.c").unwrap();
        let a = analyze(&ast);
        assert!(a["s"].impure_reason.is_none());
        assert!(a["w"].impure_reason.is_some());
    }

    #[test]
    fn statics_and_io_are_impure() {
        let src = "#include <stdio.h>\nint c(int x) { static int n; return x + n; }\nint d(int x) { printf(\"%d\", x); return x; }\n";
        let ast = parse(src, "t.c").unwrap();
        assert!(detect_memoizable(&ast).is_empty());
    }
}
