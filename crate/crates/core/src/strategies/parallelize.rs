//! Loop-level parallelization: a conservative dependence test for
//! canonical `for` loops and OpenMP pragma insertion.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::frontend::syntax;
use crate::frontend::{Ast, NodeId, NodeKind, TokenKind};
use crate::weave::Session;

use super::access::{accesses_under, declared_names, expr_items, Access, Item, Role};
use super::purity::{pure_functions, PURE_LIBRARY};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub op: String,
    pub var: String,
}

/// Verdict for one `for` loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LoopVerdict {
    /// `function:L<line>`.
    pub loop_id: String,
    pub function: String,
    pub line: u32,
    pub parallelizable: bool,
    /// Rejection category, absent for accepted loops.
    pub reason: Option<String>,
    /// Human-readable explanation of the rejection.
    pub detail: Option<String>,
    pub reductions: Vec<Reduction>,
    pub private_vars: Vec<String>,
    /// Pragma inserted for the loop.
    pub pragma: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParallelizationReport {
    pub loops: Vec<LoopVerdict>,
}

impl ParallelizationReport {
    pub fn accepted(&self) -> usize {
        self.loops.iter().filter(|l| l.parallelizable).count()
    }
}

struct Reject(&'static str, String);

fn reject<T>(reason: &'static str, detail: impl Into<String>) -> Result<T, Reject> {
    Err(Reject(reason, detail.into()))
}

/// Analyzes every `for` loop of every function and puts
/// `#pragma omp parallel for` (with `private` and `reduction` clauses) in
/// front of each loop found safe. Nested accepted loops all get a pragma;
/// see [`disable_nested_parallel_pragmas`].
pub fn auto_parallelize(s: &mut Session) -> ParallelizationReport {
    let report = analyze_loops(s.ast());
    let ast = s.ast();
    let loops: Vec<NodeId> = all_for_loops(ast);
    for (l, v) in loops.into_iter().zip(&report.loops) {
        if let Some(p) = &v.pragma {
            s.attach_pragma(l, p);
        }
    }
    report
}

fn all_for_loops(ast: &Ast) -> Vec<NodeId> {
    ast.functions()
        .into_iter()
        .filter(|f| ast.is_live(*f))
        .flat_map(|f| ast.descendants(f))
        .filter(|n| ast.is_live(*n) && ast.kind(*n) == NodeKind::For)
        .collect()
}

/// Verdicts for every `for` loop, in source order, without changing code.
pub fn analyze_loops(ast: &Ast) -> ParallelizationReport {
    let mut pure: BTreeSet<String> = pure_functions(ast);
    pure.extend(PURE_LIBRARY.iter().map(|s| s.to_string()));
    let mut loops = Vec::new();
    for l in all_for_loops(ast) {
        let func = ast
            .ancestors(l)
            .find(|a| ast.kind(*a) == NodeKind::Function)
            .expect("loop inside a function");
        let fname = syntax::function_name(ast, func);
        let line = ast.line(l).unwrap_or(0);
        let mut v = LoopVerdict {
            loop_id: format!("{fname}:L{line}"),
            function: fname,
            line,
            parallelizable: false,
            reason: None,
            detail: None,
            reductions: Vec::new(),
            private_vars: Vec::new(),
            pragma: None,
        };
        match analyze_loop(ast, func, l, &pure) {
            Ok((reductions, privates)) => {
                v.parallelizable = true;
                v.pragma = Some(pragma_for(&reductions, &privates));
                v.reductions = reductions;
                v.private_vars = privates;
            }
            Err(Reject(reason, detail)) => {
                v.reason = Some(reason.to_string());
                v.detail = Some(detail);
            }
        }
        loops.push(v);
    }
    ParallelizationReport { loops }
}

fn pragma_for(reductions: &[Reduction], privates: &[String]) -> String {
    let mut p = "#pragma omp parallel for".to_string();
    if !privates.is_empty() {
        p.push_str(&format!(" private({})", privates.join(", ")));
    }
    let mut by_op: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for r in reductions {
        by_op.entry(r.op.as_str()).or_default().push(r.var.as_str());
    }
    for op in ["+", "*", "min", "max"] {
        if let Some(vars) = by_op.get(op) {
            p.push_str(&format!(" reduction({op}:{})", vars.join(", ")));
        }
    }
    p
}

// ---- header -----------------------------------------------------------

fn is_punct(it: &Item, s: &str) -> bool {
    matches!(it, Item::Tok(t, TokenKind::Punct) if t == s)
}

fn var_name(it: &Item) -> Option<&str> {
    match it {
        Item::Var(_, n) => Some(n),
        _ => None,
    }
}

/// True when the items neither assign nor call.
fn side_effect_free(items: &[Item]) -> bool {
    !items.iter().any(|i| {
        matches!(i, Item::Tok(t, TokenKind::Punct)
            if ["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", "++", "--"].contains(&t.as_str()))
            || matches!(i, Item::Call(..))
    })
}

fn names_in(items: &[Item]) -> BTreeSet<String> {
    items.iter().filter_map(var_name).map(str::to_string).collect()
}

struct Header {
    iv: String,
    /// Variables the bound and the step depend on.
    invariant: BTreeSet<String>,
}

fn canonical_header(ast: &Ast, l: NodeId) -> Result<Header, Reject> {
    let parts = syntax::for_parts(ast, l);
    let bad = |what: &str| reject("non-canonical-header", what.to_string());
    let mut invariant = BTreeSet::new();
    let iv = match parts.init {
        None => return bad("missing initialization"),
        Some(init) if ast.kind(init) == NodeKind::Declaration => {
            let ds = syntax::declarators(ast, init);
            if ds.len() != 1 {
                return bad("initialization declares several variables");
            }
            let info = syntax::declarator_info(ast, ds[0]);
            match (info.name, info.init) {
                (Some(n), Some(_)) if info.pointers.is_empty() && info.arrays.is_empty() => n,
                _ => return bad("initialization does not set a scalar"),
            }
        }
        Some(init) => {
            let items = expr_items(ast, init);
            match items.as_slice() {
                [Item::Var(_, n), eq, rest @ ..] if is_punct(eq, "=") && !rest.is_empty() && side_effect_free(rest) => {
                    n.clone()
                }
                _ => return bad("initialization is not `i = expr`"),
            }
        }
    };
    let Some(cond) = parts.cond else { return bad("missing condition") };
    let items = expr_items(ast, cond);
    match items.as_slice() {
        [Item::Var(_, n), op, rest @ ..]
            if *n == iv
                && ["<", "<=", ">", ">="].iter().any(|o| is_punct(op, o))
                && !rest.is_empty()
                && side_effect_free(rest)
                && !names_in(rest).contains(&iv) =>
        {
            invariant.extend(names_in(rest));
        }
        _ => return bad("condition is not `i < bound` (or <=, >, >=)"),
    }
    let Some(step) = parts.step else { return bad("missing increment") };
    let items = expr_items(ast, step);
    let ok = match items.as_slice() {
        [Item::Var(_, n), op] | [op, Item::Var(_, n)] => *n == iv && (is_punct(op, "++") || is_punct(op, "--")),
        [Item::Var(_, n), op, rest @ ..] if is_punct(op, "+=") || is_punct(op, "-=") => {
            let ok = *n == iv && !rest.is_empty() && side_effect_free(rest) && !names_in(rest).contains(&iv);
            invariant.extend(names_in(rest));
            ok
        }
        [Item::Var(_, n), eq, Item::Var(_, m), op, rest @ ..] if is_punct(eq, "=") && (is_punct(op, "+") || is_punct(op, "-")) => {
            let ok = *n == iv && *m == iv && !rest.is_empty() && side_effect_free(rest) && !names_in(rest).contains(&iv);
            invariant.extend(names_in(rest));
            ok
        }
        _ => false,
    };
    if !ok {
        return bad("increment is not `i++`, `i += c` or `i = i + c`");
    }
    Ok(Header { iv, invariant })
}

// ---- body ---------------------------------------------------------------

fn is_parallel_for(text: &str) -> bool {
    let words: Vec<&str> = text.trim_start_matches('#').split_whitespace().collect();
    words.first() == Some(&"pragma") && words.get(1) == Some(&"omp") && words.contains(&"parallel") && words.contains(&"for")
}

fn first_word(ast: &Ast, stmt: NodeId) -> Option<String> {
    ast.own_tokens(stmt).find(|t| !t.is_trivia()).map(|t| t.text.clone())
}

fn early_exit(ast: &Ast, body: NodeId) -> Option<String> {
    let mut nodes = vec![body];
    nodes.extend(ast.descendants(body));
    for n in nodes {
        match ast.kind(n) {
            NodeKind::Return => return Some("`return` inside the loop".into()),
            NodeKind::ExprStmt => match first_word(ast, n).as_deref() {
                Some("goto") => return Some("`goto` inside the loop".into()),
                Some("break") => {
                    let nested = ast
                        .ancestors(n)
                        .take_while(|a| *a != body)
                        .any(|a| ast.kind(a).is_loop() || ast.kind(a) == NodeKind::Switch);
                    let at_body = n == body;
                    if at_body || !nested {
                        return Some("`break` leaves the loop".into());
                    }
                }
                _ => {}
            },
            _ => {}
        }
    }
    None
}

type AccessKey = (NodeId, usize);

fn key(a: &Access) -> AccessKey {
    (a.expr, a.pos)
}

/// Expression node that is a whole statement (`x = ...;`), if `expr` is one.
fn statement_expr(ast: &Ast, expr: NodeId) -> bool {
    ast.parent(expr).is_some_and(|p| ast.kind(p) == NodeKind::ExprStmt)
}

/// Depth-0 binary operators of an operand list.
fn top_level_ops(items: &[Item]) -> Vec<String> {
    let mut depth = 0i32;
    let mut ops = Vec::new();
    for (i, it) in items.iter().enumerate() {
        if let Item::Tok(t, TokenKind::Punct) = it {
            match t.as_str() {
                "(" | "[" => depth += 1,
                ")" | "]" => depth -= 1,
                _ if depth == 0 && i > 0 => ops.push(t.clone()),
                _ => {}
            }
        }
    }
    ops
}

fn squash(items: &[Item]) -> String {
    items
        .iter()
        .map(|i| match i {
            Item::Tok(t, _) => t.clone(),
            Item::Var(_, n) => n.clone(),
            Item::Call(c, _) => format!("<call{}>", c.index()),
        })
        .collect()
}

/// Recognizes one write of `v` as a reduction update. Returns the
/// operator and the reads of `v` the update consumes.
fn reduction_form(ast: &Ast, w: &Access, all: &[Access]) -> Option<(String, Vec<AccessKey>)> {
    let v = &w.var;
    if !w.subscripts.is_empty() || w.indirect || w.pos != 0 || !statement_expr(ast, w.expr) {
        return None;
    }
    let items = expr_items(ast, w.expr);
    let rest = &items[2..];
    let mentions_v = |its: &[Item]| its.iter().any(|i| var_name(i) == Some(v));
    let reads_in = |expr: NodeId| -> Vec<AccessKey> {
        all.iter()
            .filter(|a| a.var == *v && (a.expr == expr || ast.is_ancestor(expr, a.expr)) && key(a) != key(w))
            .map(key)
            .collect()
    };
    let no_call_reads = |its: &[Item]| {
        its.iter().all(|i| match i {
            Item::Call(c, _) => reads_in(*c).is_empty(),
            _ => true,
        })
    };
    match w.op.as_deref()? {
        op @ ("+=" | "-=" | "*=") => {
            if mentions_v(rest) || !no_call_reads(rest) {
                return None;
            }
            let red = if op == "*=" { "*" } else { "+" };
            Some((red.to_string(), Vec::new()))
        }
        "=" => {
            // s = s + e, s = s - e, s = e + s, s = s * e
            if let [Item::Var(_, n), op, e @ ..] = rest {
                if n == v && !e.is_empty() && !mentions_v(e) && no_call_reads(e) {
                    let ops = top_level_ops(e);
                    let first = key_of_pos(w.expr, 2);
                    if (is_punct(op, "+") || is_punct(op, "-"))
                        && ops.iter().all(|o| ["+", "-", "*", "/", "%"].contains(&o.as_str()))
                    {
                        return Some(("+".into(), vec![first]));
                    }
                    if is_punct(op, "*") && ops.iter().all(|o| o == "*") {
                        return Some(("*".into(), vec![first]));
                    }
                }
            }
            if let [e @ .., op, Item::Var(_, n)] = rest {
                let ops = top_level_ops(e);
                if n == v
                    && is_punct(op, "+")
                    && !e.is_empty()
                    && !mentions_v(e)
                    && no_call_reads(e)
                    && ops.iter().all(|o| ["*", "/", "%"].contains(&o.as_str()))
                {
                    return Some(("+".into(), vec![key_of_pos(w.expr, items.len() - 1)]));
                }
            }
            // s = fmax(s, e)
            if let [Item::Call(c, name)] = rest {
                let red = match name.as_str() {
                    "fmax" | "fmaxf" => "max",
                    "fmin" | "fminf" => "min",
                    _ => return conditional_form(ast, w, all),
                };
                let args = syntax::call_args(ast, *c);
                if args.len() != 2 {
                    return None;
                }
                let is_v = |e: NodeId| matches!(expr_items(ast, e).as_slice(), [Item::Var(_, n)] if n == v);
                let (vs, es): (Vec<NodeId>, Vec<NodeId>) = args.iter().partition(|a| is_v(**a));
                if vs.len() != 1 || !reads_in(es[0]).is_empty() {
                    return None;
                }
                return Some((red.into(), reads_in(vs[0])));
            }
            conditional_form(ast, w, all)
        }
        _ => None,
    }
}

fn key_of_pos(expr: NodeId, pos: usize) -> AccessKey {
    (expr, pos)
}

/// `if (e > s) s = e;` (max) and `if (e < s) s = e;` (min), either operand
/// order in the condition.
fn conditional_form(ast: &Ast, w: &Access, all: &[Access]) -> Option<(String, Vec<AccessKey>)> {
    let v = &w.var;
    let stmt = ast.parent(w.expr)?;
    let mut holder = ast.parent(stmt)?;
    if ast.kind(holder) == NodeKind::Compound {
        if syntax::sub_statements(ast, holder).len() != 1 {
            return None;
        }
        holder = ast.parent(holder)?;
    }
    if ast.kind(holder) != NodeKind::If || syntax::sub_statements(ast, holder).len() != 1 {
        return None;
    }
    let cond = ast.children(holder).find(|c| ast.kind(*c) == NodeKind::Expr)?;
    let items = expr_items(ast, w.expr);
    let value = squash(&items[2..]);
    let citems = expr_items(ast, cond);
    let ops: Vec<usize> = citems
        .iter()
        .enumerate()
        .filter(|(_, i)| ["<", ">", "<=", ">="].iter().any(|o| is_punct(i, o)))
        .map(|(k, _)| k)
        .collect();
    let [k] = ops.as_slice() else { return None };
    let (lhs, rhs) = (&citems[..*k], &citems[*k + 1..]);
    let is_v = |its: &[Item]| matches!(its, [Item::Var(_, n)] if n == v);
    let greater = is_punct(&citems[*k], ">") || is_punct(&citems[*k], ">=");
    let red = if is_v(rhs) && squash(lhs) == value {
        if greater { "max" } else { "min" }
    } else if is_v(lhs) && squash(rhs) == value {
        if greater { "min" } else { "max" }
    } else {
        return None;
    };
    if items[2..].iter().any(|i| var_name(i) == Some(v)) {
        return None;
    }
    let reads: Vec<AccessKey> = all
        .iter()
        .filter(|a| a.var == *v && a.expr == cond)
        .map(key)
        .collect();
    Some((red.into(), reads))
}

/// Largest statement around `expr` that runs whenever `expr` runs up to
/// it: climbs plain blocks and nested `for` inits, stops at branches and
/// loop bodies (or at `body`).
fn straight_line_scope(ast: &Ast, expr: NodeId, body: NodeId) -> NodeId {
    let mut cur = expr;
    while cur != body {
        let Some(p) = ast.parent(cur) else { break };
        let ok = match ast.kind(p) {
            NodeKind::Compound | NodeKind::ExprStmt | NodeKind::Declaration | NodeKind::Declarator => true,
            NodeKind::For => syntax::for_parts(ast, p).init == Some(cur),
            _ => false,
        };
        if !ok {
            break;
        }
        cur = p;
    }
    cur
}

/// Checks that `v`'s value does not flow out of the loop: after the loop
/// (and around enclosing loops) the first use of `v` must overwrite it.
fn dead_after(ast: &Ast, func: NodeId, l: NodeId, v: &str) -> bool {
    let order: Vec<NodeId> = ast.descendants(func);
    let pos = |n: NodeId| order.iter().position(|x| *x == n).unwrap_or(usize::MAX);
    let lpos = pos(l);
    let inside = |a: &Access| a.expr == l || ast.is_ancestor(l, a.expr);
    let all: Vec<Access> = accesses_under(ast, func).into_iter().filter(|a| a.var == v).collect();
    let first_kills = |accs: &mut dyn Iterator<Item = &Access>| match accs.next() {
        None => true,
        Some(a) => a.role == Role::Write && a.op.as_deref() == Some("=") && a.subscripts.is_empty(),
    };
    if !first_kills(&mut all.iter().filter(|a| !inside(a) && pos(a.expr) > lpos)) {
        return false;
    }
    for outer in ast.ancestors(l).filter(|a| ast.kind(*a).is_loop()) {
        let mut within = all.iter().filter(|a| ast.is_ancestor(outer, a.expr));
        if !first_kills(&mut within) {
            // the first access of the enclosing iteration may be our own
            // loop's write
            let first = all.iter().find(|a| ast.is_ancestor(outer, a.expr));
            if !first.is_some_and(&inside) {
                return false;
            }
        }
    }
    true
}

fn analyze_loop(
    ast: &Ast,
    func: NodeId,
    l: NodeId,
    pure: &BTreeSet<String>,
) -> Result<(Vec<Reduction>, Vec<String>), Reject> {
    let header = canonical_header(ast, l)?;
    let iv = header.iv.clone();
    if !syntax::leading_pragmas(ast, l).is_empty() {
        return reject("existing-pragma", "the loop already carries a pragma");
    }
    let body = syntax::for_parts(ast, l).body;
    if let Some(why) = early_exit(ast, body) {
        return reject("early-exit", why);
    }
    let accs = accesses_under(ast, body);
    if accs.iter().any(|a| a.var == iv && a.is_write()) {
        return reject("induction-modified", format!("`{iv}` is assigned in the body"));
    }
    if let Some(a) = accs.iter().find(|a| a.is_write() && header.invariant.contains(&a.var)) {
        return reject("non-canonical-header", format!("bound variable `{}` changes in the body", a.var));
    }
    let mut calls: Vec<NodeId> = ast.descendants(body);
    calls.push(body);
    for c in calls.into_iter().filter(|c| ast.kind(*c) == NodeKind::Call) {
        let name = syntax::call_name(ast, c);
        if !pure.contains(&name) {
            return reject("impure-call", format!("call to `{name}`"));
        }
    }
    if let Some(a) = accs.iter().find(|a| a.is_write() && a.indirect) {
        return reject("indirect-write", format!("write through `{}`", a.var));
    }
    let local: BTreeSet<String> = declared_names(ast, body).into_iter().collect();
    let outer: Vec<&Access> = accs.iter().filter(|a| !local.contains(&a.var)).collect();

    // arrays
    let written_arrays: BTreeSet<&str> = outer
        .iter()
        .filter(|a| a.is_write() && !a.subscripts.is_empty())
        .map(|a| a.var.as_str())
        .collect();
    for a in &outer {
        if !written_arrays.contains(a.var.as_str()) {
            continue;
        }
        match a.subscripts.first() {
            Some(s) if *s == iv => {}
            Some(s) => {
                return reject(
                    "loop-carried-dependence",
                    format!("`{}[{s}]` is not indexed by `{iv}` and `{}` is written in the loop", a.var, a.var),
                )
            }
            None => {
                return reject(
                    "loop-carried-dependence",
                    format!("`{}` used whole while its elements are written", a.var),
                )
            }
        }
    }

    // scalars
    let scalars: BTreeSet<&str> = outer
        .iter()
        .filter(|a| a.is_write() && a.subscripts.is_empty() && !written_arrays.contains(a.var.as_str()))
        .map(|a| a.var.as_str())
        .collect();
    let mut reductions = Vec::new();
    let mut privates = Vec::new();
    for v in scalars {
        let mine: Vec<Access> = accs.iter().filter(|a| a.var == v).cloned().collect();
        // reduction?
        let mut ops = BTreeSet::new();
        let mut consumed = BTreeSet::new();
        let mut all_reduce = true;
        for w in mine.iter().filter(|a| a.is_write()) {
            match reduction_form(ast, w, &mine) {
                Some((op, reads)) => {
                    ops.insert(op);
                    consumed.extend(reads);
                }
                None => {
                    all_reduce = false;
                    break;
                }
            }
        }
        let stray_read = mine.iter().any(|a| !a.is_write() && !consumed.contains(&key(a)));
        if all_reduce && ops.len() == 1 && !stray_read {
            reductions.push(Reduction {
                op: ops.into_iter().next().expect("one op"),
                var: v.to_string(),
            });
            continue;
        }
        // private?
        let first = &mine[0];
        let top_expr = std::iter::once(first.expr)
            .chain(ast.ancestors(first.expr))
            .take_while(|n| ast.kind(*n) == NodeKind::Expr || ast.kind(*n) == NodeKind::Call)
            .last()
            .unwrap_or(first.expr);
        let same_stmt_refs = mine
            .iter()
            .filter(|a| a.expr == top_expr || ast.is_ancestor(top_expr, a.expr))
            .count();
        let plain_first = first.role == Role::Write && first.op.as_deref() == Some("=") && same_stmt_refs == 1;
        let scope = straight_line_scope(ast, first.expr, body);
        let contained = mine
            .iter()
            .all(|a| a.expr == scope || ast.is_ancestor(scope, a.expr));
        if plain_first && contained && dead_after(ast, func, l, v) {
            privates.push(v.to_string());
            continue;
        }
        return reject(
            "scalar-dependence",
            format!("`{v}` carries a value between iterations"),
        );
    }
    if !dead_after(ast, func, l, &iv) {
        return reject("scalar-dependence", format!("`{iv}` is used after the loop"));
    }
    Ok((reductions, privates))
}

/// Comments out every `parallel for` pragma whose loop sits inside another
/// loop that carries one, so only the outermost parallel loops remain.
/// Returns the number of pragmas disabled.
pub fn disable_nested_parallel_pragmas(s: &mut Session) -> usize {
    let ast = s.ast();
    let parallel_pragma = |l: NodeId| {
        syntax::leading_pragmas(ast, l)
            .into_iter()
            .find(|p| is_parallel_for(&syntax::pragma_text(ast, *p)))
    };
    let mut victims = Vec::new();
    for f in ast.functions().into_iter().filter(|f| ast.is_live(*f)) {
        for l in ast.descendants(f) {
            if !ast.is_live(l) || !ast.kind(l).is_loop() {
                continue;
            }
            let Some(p) = parallel_pragma(l) else { continue };
            let nested = ast
                .ancestors(l)
                .any(|a| ast.kind(a).is_loop() && parallel_pragma(a).is_some());
            if nested {
                victims.push(p);
            }
        }
    }
    for p in &victims {
        s.comment_out_pragma(*p);
    }
    victims.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn verdicts(body: &str) -> Vec<LoopVerdict> {
        let src = format!(
            "double g(double x) {{ return x * 2.0; }}\nvoid f(int n, int m, double *a, double *b, double *c, double **mat) {{\n    int i, j;\n    double s = 0, t, mx = 0;\n{body}\n}}\n"
        );
        analyze_loops(&parse(&src, "t.c").unwrap()).loops
    }

    fn reason(body: &str) -> Option<String> {
        verdicts(body)[0].reason.clone()
    }

    #[test]
    fn canonical_examples() {
        let v = verdicts("    for (i = 0; i < n; i++) a[i] = b[i] + c[i];");
        assert!(v[0].parallelizable);
        assert_eq!(v[0].pragma.as_deref(), Some("#pragma omp parallel for"));
        assert_eq!(v[0].loop_id, "f:L5");
        assert_eq!(reason("    for (i = 1; i < n; i++) a[i] = a[i - 1] + 1;").as_deref(), Some("loop-carried-dependence"));
        let v = verdicts("    for (i = 0; i < n; i++) s += a[i];");
        assert_eq!(v[0].pragma.as_deref(), Some("#pragma omp parallel for reduction(+:s)"));
    }

    #[test]
    fn reductions_of_every_kind() {
        let p = |b: &str| verdicts(b)[0].pragma.clone();
        assert_eq!(p("    for (i = 0; i < n; i++) s = s + a[i] * b[i];").unwrap(), "#pragma omp parallel for reduction(+:s)");
        assert_eq!(p("    for (i = 0; i < n; i++) s *= a[i];").unwrap(), "#pragma omp parallel for reduction(*:s)");
        assert_eq!(p("    for (i = 0; i < n; i++) mx = fmax(mx, a[i]);").unwrap(), "#pragma omp parallel for reduction(max:mx)");
        assert_eq!(p("    for (i = 0; i < n; i++) if (a[i] > mx) mx = a[i];").unwrap(), "#pragma omp parallel for reduction(max:mx)");
        assert_eq!(p("    for (i = 0; i < n; i++) { if (mx > a[i]) { mx = a[i]; } }").unwrap(), "#pragma omp parallel for reduction(min:mx)");
        // mixed use is not a reduction
        assert_eq!(reason("    for (i = 0; i < n; i++) { s += a[i]; b[i] = s; }").as_deref(), Some("scalar-dependence"));
        assert_eq!(reason("    for (i = 0; i < n; i++) s = s * a[i] + 1;").as_deref(), Some("scalar-dependence"));
    }

    #[test]
    fn privates_and_nesting() {
        let v = verdicts("    for (i = 0; i < n; i++) {\n        t = g(a[i]);\n        for (j = 0; j < m; j++) mat[i][j] = t * j;\n    }");
        assert_eq!(v[0].private_vars, ["j", "t"]);
        assert_eq!(v[0].pragma.as_deref(), Some("#pragma omp parallel for private(j, t)"));
        // inner loop writes mat[i][j], first subscript is not j
        assert_eq!(v[1].reason.as_deref(), Some("loop-carried-dependence"));
        let v = verdicts("    for (i = 0; i < n; i++) { t = a[i]; b[i] = t; }\n    s = t;");
        assert_eq!(v[0].reason.as_deref(), Some("scalar-dependence"));
    }

    #[test]
    fn rejections() {
        assert_eq!(reason("    for (i = 0; i < n; i++) { if (a[i] < 0) break; b[i] = 1; }").as_deref(), Some("early-exit"));
        assert_eq!(reason("    for (i = 0; i < n; i++) { for (j = 0; j < m; j++) if (j > i) break; a[i] = 1; }").as_deref(), None);
        assert_eq!(reason("    for (i = 0; i < n; i++) i += 2;").as_deref(), Some("induction-modified"));
        assert_eq!(reason("    for (i = 0; i < n; i++) printf(\"%d\", i);").as_deref(), Some("impure-call"));
        assert_eq!(reason("    for (i = 0; i < n; i++) *a = b[i];").as_deref(), Some("indirect-write"));
        assert_eq!(reason("    for (i = 0; i < n; i++) n--;").as_deref(), Some("non-canonical-header"));
        assert_eq!(reason("    for (i = 0; i != n; i++) a[i] = 0;").as_deref(), Some("non-canonical-header"));
        assert_eq!(reason("    for (i = 0; i < n; i++) a[0] = b[i];").as_deref(), Some("loop-carried-dependence"));
        assert_eq!(reason("    #pragma omp simd\n    for (i = 0; i < n; i++) a[i] = 0;").as_deref(), Some("existing-pragma"));
        assert_eq!(reason("    for (i = 0; i < n; i++) a[i] = 0;\n    b[0] = i;").as_deref(), Some("scalar-dependence"));
    }

    #[test]
    fn insert_and_disable_nested() {
        let src = "void f(int n, double **a) {\n    int i, j, k;\n    for (i = 0; i < n; i++)\n        for (j = 0; j < n; j++)\n            for (k = 0; k < n; k++)\n                a[i][j] = a[i][j] * 2;\n}\n";
        let mut s = Session::new(parse(src, "t.c").unwrap());
        let r = auto_parallelize(&mut s);
        assert_eq!(r.accepted(), 1, "{r:?}");
        let src2 = "void f(int n, double **a) {\n    int i, j;\n    for (i = 0; i < n; i++) {\n        #pragma omp parallel for\n        for (j = 0; j < n; j++) {\n            #pragma omp parallel for\n            for (int k = 0; k < n; k++) a[j][k] = 0;\n        }\n    }\n}\n";
        let mut s = Session::new(parse(src2, "t.c").unwrap());
        assert_eq!(disable_nested_parallel_pragmas(&mut s), 1);
        let out = s.ast().emit();
        assert!(out.contains("        #pragma omp parallel for\n        for (j"));
        assert!(out.contains("            // #pragma omp parallel for\n            for (int k"));
        let mut s = Session::new(parse(src, "t.c").unwrap());
        assert_eq!(disable_nested_parallel_pragmas(&mut s), 0);
        assert_eq!(s.ast().emit(), src);
    }

    #[test]
    fn inserted_pragma_layout() {
        let src = "void f(int n, double *a) {\n    int i;\n    for (i = 0; i < n; i++) a[i] = 0;\n}\n";
        let mut s = Session::new(parse(src, "t.c").unwrap());
        auto_parallelize(&mut s);
        assert_eq!(
            s.ast().emit(),
            "void f(int n, double *a) {\n    int i;\n    #pragma omp parallel for\n    for (i = 0; i < n; i++) a[i] = 0;\n}\n"
        );
        assert_eq!(s.report().inserts, 1);
    }
}
