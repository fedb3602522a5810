use crate::frontend::syntax;
use crate::frontend::{Ast, CType, NodeId, NodeKind};
use crate::weave::{enclosing_statement, JoinPoint, JpKind, Place, Session};

use super::access::{expr_items, Item};
use super::runtime::{require_runtime, RUNTIME_HEADER_NAME};
use super::StrategyError;

/// Adds `#include "<header>"` after the leading directives unless the unit
/// already includes it.
pub(crate) fn ensure_include(s: &mut Session, header: &str) -> Result<(), StrategyError> {
    let ast = s.ast();
    let quoted = format!("\"{header}\"");
    let present = ast.children(ast.root()).any(|c| {
        ast.is_live(c) && ast.kind(c) == NodeKind::Directive && ast.emit_node(c).contains(&quoted)
    });
    if !present {
        s.insert_after_directives(&format!("#include {quoted}"))?;
    }
    Ok(())
}

fn compatible(a: &CType, b: &CType) -> bool {
    if a == b {
        return true;
    }
    a.is_scalar() && b.is_scalar() && a.is_floating() && b.is_floating()
}

/// Checks that `version` can replace `original` at a call site: same
/// arity, and scalar parameter/return types that differ at most in
/// floating precision.
pub fn check_signature(ast: &Ast, original: &str, version: &str) -> Result<(), StrategyError> {
    let find = |n: &str| syntax::find_function(ast, n).ok_or_else(|| StrategyError::FunctionNotFound(n.to_string()));
    let (fo, fv) = (find(original)?, find(version)?);
    let (po, pv) = (syntax::function_params(ast, fo), syntax::function_params(ast, fv));
    let mismatch = |what: String| StrategyError::SignatureMismatch(format!("`{version}` vs `{original}`: {what}"));
    if po.len() != pv.len() {
        return Err(mismatch(format!("{} parameters instead of {}", pv.len(), po.len())));
    }
    let (ro, rv) = (syntax::return_type(ast, fo), syntax::return_type(ast, fv));
    if !compatible(&ro, &rv) {
        return Err(mismatch(format!("returns `{rv}` instead of `{ro}`")));
    }
    for (i, (a, b)) in po.iter().zip(&pv).enumerate() {
        let (ta, tb) = (syntax::param_type(ast, *a), syntax::param_type(ast, *b));
        if !compatible(&ta, &tb) {
            return Err(mismatch(format!("parameter {} is `{tb}` instead of `{ta}`", i + 1)));
        }
    }
    Ok(())
}

/// The statement a call forms on its own: `f(...);` or `lhs = f(...);`.
pub(crate) fn call_statement(ast: &Ast, call: NodeId) -> Result<NodeId, StrategyError> {
    let name = syntax::call_name(ast, call);
    let not_stmt = || StrategyError::NotAStatementCall(name.clone());
    let stmt = enclosing_statement(ast, call).ok_or_else(not_stmt)?;
    if ast.kind(stmt) != NodeKind::ExprStmt {
        return Err(not_stmt());
    }
    let expr = ast.children(stmt).find(|c| ast.kind(*c) == NodeKind::Expr).ok_or_else(not_stmt)?;
    if ast.parent(call) != Some(expr) {
        return Err(not_stmt());
    }
    let items = expr_items(ast, expr);
    let last_is_call = matches!(items.last(), Some(Item::Call(c, _)) if *c == call);
    let calls = items.iter().filter(|i| matches!(i, Item::Call(..))).count();
    let shape_ok = match items.len() {
        1 => true,
        n => n >= 3 && matches!(&items[n - 2], Item::Tok(t, _) if t == "="),
    };
    if last_is_call && calls == 1 && shape_ok {
        Ok(stmt)
    } else {
        Err(not_stmt())
    }
}

/// Replaces the statement holding `call` with a `switch` on the knob
/// `knob` that dispatches value `i` to `versions[i]`. The called function
/// is version 0 (it is prepended when missing). Each arm is timed and
/// reported to the metric feed; out-of-range knob values run version 0
/// and raise a `knob_oob` flag.
pub fn multiversion(s: &mut Session, call: NodeId, versions: &[String], knob: &str) -> Result<(), StrategyError> {
    let callee = syntax::call_name(s.ast(), call);
    let mut all: Vec<String> = versions.to_vec();
    if all.first() != Some(&callee) {
        all.insert(0, callee.clone());
    }
    if all.len() < 2 {
        return Err(StrategyError::InvalidConfig("multiversion needs at least two versions".into()));
    }
    for v in &all[1..] {
        check_signature(s.ast(), &callee, v)?;
    }
    let valid_name = knob.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && knob.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid_name {
        return Err(StrategyError::InvalidConfig(format!("knob name `{knob}` is not an identifier")));
    }
    if syntax::top_level_names(s.ast()).iter().any(|n| n == knob) {
        return Err(StrategyError::DuplicateName(knob.to_string()));
    }
    let stmt = call_statement(s.ast(), call)?;

    // one statement text per version
    let mut arms = Vec::new();
    for v in &all {
        s.rename_call(call, v);
        arms.push(s.ast().emit_node(stmt).trim().to_string());
    }
    s.rename_call(call, &callee);

    require_runtime(s);
    ensure_include(s, RUNTIME_HEADER_NAME)?;
    s.insert_after_directives(&format!("int {knob} = 0;"))?;
    let stmt_jp = JoinPoint {
        kind: JpKind::Stmt,
        node: stmt,
    };
    s.insert(stmt_jp, Place::Before, &format!("{knob} = aw_knob(\"{knob}\");"))?;
    let mut sw = format!("switch ({knob}) {{\n");
    for (i, arm) in arms.iter().enumerate() {
        sw.push_str(&format!("case {i}: {{\n{arm}\n}} break;\n"));
    }
    sw.push_str(&format!(
        "default: {{\naw_feed_flag(\"knob_oob\", \"{knob}\", {knob});\n{}\n}} break;\n}}",
        arms[0]
    ));
    let new = s.insert(stmt_jp, Place::Replace, &sw)?;
    // time every arm
    let switch = new[0];
    let arm_calls: Vec<(NodeId, String)> = s
        .ast()
        .descendants(switch)
        .into_iter()
        .filter(|c| s.ast().kind(*c) == NodeKind::Call)
        .map(|c| (c, syntax::call_name(s.ast(), c)))
        .filter(|(_, n)| all.contains(n))
        .collect();
    for (c, name) in arm_calls {
        let version = all.iter().position(|v| *v == name).expect("known version");
        let jp = JoinPoint {
            kind: JpKind::Call,
            node: c,
        };
        s.insert(jp, Place::Before, "double aw_t0 = aw_time_us();")?;
        s.insert(
            jp,
            Place::After,
            &format!("aw_feed_time(\"{name}\", {version}, aw_time_us() - aw_t0);"),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::weave::{FilterOp, SelectChain, Step, Value};

    const SRC: &str = "#include <stdio.h>\n\ndouble k(int n) { return n * 0.5; }\n\nfloat k_f(int n) { return n * 0.5f; }\n\nint main(void) {\n    double r;\n    r = k(3);\n    printf(\"%f\\n\", r + k(1));\n    return 0;\n}\n";

    fn calls_named(s: &mut Session, name: &str) -> Vec<NodeId> {
        let chain = SelectChain::new(vec![
            Step::with(JpKind::Function, "name", FilterOp::Eq, Value::Str("main".into())),
            Step::with(JpKind::Call, "name", FilterOp::Eq, Value::Str(name.into())),
        ]);
        s.select(&chain).unwrap().into_iter().map(|p| p[1].node).collect()
    }

    #[test]
    fn dispatch_switch() {
        let mut s = Session::new(parse(SRC, "t.c").unwrap());
        let c = calls_named(&mut s, "k")[0];
        multiversion(&mut s, c, &["k_f".into()], "Knob1").unwrap();
        let out = s.ast().emit();
        assert!(out.starts_with("#include <stdio.h>\n#include \"aw_runtime.h\"\nint Knob1 = 0;\n\ndouble k"));
        let expected = "    Knob1 = aw_knob(\"Knob1\");
    switch (Knob1) {
        case 0:
        {
            double aw_t0 = aw_time_us();
            r = k(3);
            aw_feed_time(\"k\", 0, aw_time_us() - aw_t0);
        }
        break;
        case 1:
        {
            double aw_t0 = aw_time_us();
            r = k_f(3);
            aw_feed_time(\"k_f\", 1, aw_time_us() - aw_t0);
        }
        break;
        default:
        {
            aw_feed_flag(\"knob_oob\", \"Knob1\", Knob1);
            double aw_t0 = aw_time_us();
            r = k(3);
            aw_feed_time(\"k\", 0, aw_time_us() - aw_t0);
        }
        break;
    }
    printf";
        assert!(out.contains(expected), "{out}");
        assert!(s.support_files().contains_key("aw_runtime.c"));
    }

    #[test]
    fn nested_call_is_rejected() {
        let mut s = Session::new(parse(SRC, "t.c").unwrap());
        let c = calls_named(&mut s, "k")[1];
        assert!(matches!(
            multiversion(&mut s, c, &["k_f".into()], "K"),
            Err(StrategyError::NotAStatementCall(_))
        ));
    }

    #[test]
    fn pointer_mismatch() {
        let src = "double a(double *p) { return *p; }\nfloat b(float *p) { return *p; }\nint main(void) { double x = 1; a(&x); return 0; }\n";
        let mut s = Session::new(parse(src, "t.c").unwrap());
        let c = calls_named(&mut s, "a")[0];
        assert!(matches!(
            multiversion(&mut s, c, &["b".into()], "K"),
            Err(StrategyError::SignatureMismatch(_))
        ));
    }
}
