use std::collections::BTreeSet;

use crate::frontend::syntax;
use crate::frontend::{Ast, NodeId, NodeKind};
use crate::weave::{JoinPoint, JpKind, Session, WeaveError};

use super::precision::{change_precision, PrecisionMap};
use super::StrategyError;

/// Functions reachable from `root` through calls to defined functions, in
/// depth-first discovery order (root first).
pub fn call_tree(ast: &Ast, root: &str) -> Result<Vec<String>, StrategyError> {
    let f = syntax::find_function(ast, root).ok_or_else(|| StrategyError::FunctionNotFound(root.to_string()))?;
    let mut order = Vec::new();
    let mut seen = BTreeSet::new();
    visit(ast, f, &mut order, &mut seen);
    Ok(order)
}

fn visit(ast: &Ast, f: NodeId, order: &mut Vec<String>, seen: &mut BTreeSet<String>) {
    let name = syntax::function_name(ast, f);
    if !seen.insert(name.clone()) {
        return;
    }
    order.push(name);
    let Some(body) = syntax::function_body(ast, f) else { return };
    for c in ast.descendants(body) {
        if ast.kind(c) != NodeKind::Call {
            continue;
        }
        if let Some(callee) = syntax::find_function(ast, &syntax::call_name(ast, c)) {
            visit(ast, callee, order, seen);
        }
    }
}

/// Clones `root` and every defined function it reaches under `name+suffix`.
/// Calls inside the clones are redirected to the clones, and prototypes are
/// cloned next to the originals. Returns `(original, clone)` pairs.
pub fn clone_call_tree(s: &mut Session, root: &str, suffix: &str) -> Result<Vec<(String, String)>, StrategyError> {
    let tree = call_tree(s.ast(), root)?;
    let existing = syntax::top_level_names(s.ast());
    for f in &tree {
        let target = format!("{f}{suffix}");
        if suffix.is_empty() || existing.contains(&target) {
            return Err(StrategyError::DuplicateName(target));
        }
    }
    let set: BTreeSet<&str> = tree.iter().map(String::as_str).collect();
    let mut pairs = Vec::new();
    for f in &tree {
        let node = syntax::find_function(s.ast(), f).expect("function in tree");
        let target = format!("{f}{suffix}");
        let copy = s.clone_function(
            JoinPoint {
                kind: JpKind::Function,
                node,
            },
            &target,
        )?;
        let body = syntax::function_body(s.ast(), copy.node).expect("clone has a body");
        let calls: Vec<NodeId> = s
            .ast()
            .descendants(body)
            .into_iter()
            .filter(|c| s.ast().kind(*c) == NodeKind::Call)
            .collect();
        for c in calls {
            let callee = syntax::call_name(s.ast(), c);
            if set.contains(callee.as_str()) {
                s.rename_call(c, &format!("{callee}{suffix}"));
            }
        }
        clone_prototypes(s, f, &target);
        pairs.push((f.clone(), target));
    }
    Ok(pairs)
}

fn clone_prototypes(s: &mut Session, name: &str, target: &str) {
    let protos: Vec<NodeId> = s
        .ast()
        .children(s.ast().root())
        .filter(|c| s.ast().is_live(*c) && syntax::is_prototype_of(s.ast(), *c, name))
        .filter(|c| syntax::declarators(s.ast(), *c).len() == 1)
        .collect();
    for p in protos {
        let copy = s.ast_mut().deep_clone(p);
        let d = syntax::declarators(s.ast(), copy)[0];
        s.rename_declarator(d, target);
        s.append_after(p, copy, "\n");
    }
}

/// Clones the call tree of `root` under `suffix` and changes the clones
/// from `old` to `new` precision. The original functions are untouched.
pub fn create_typed_version(
    s: &mut Session,
    root: &str,
    suffix: &str,
    old: &str,
    new: &str,
) -> Result<Vec<(String, String)>, StrategyError> {
    let map = PrecisionMap::new(old, new)?;
    let pairs = clone_call_tree(s, root, suffix)?;
    for (_, clone) in &pairs {
        change_precision(s, clone, &map)?;
    }
    Ok(pairs)
}

/// One mixed-precision version: which functions of the call tree run in
/// single precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedVersion {
    pub suffix: String,
    /// `(original, clone, is_float)` in call-tree order.
    pub functions: Vec<(String, String, bool)>,
}

/// Precision assignments for a call tree, in lexicographic order with
/// double before float. The all-double assignment is skipped (it is the
/// original), and so is any assignment where a double caller would call a
/// float callee.
pub fn mixed_assignments(ast: &Ast, root: &str, limit: usize) -> Result<Vec<Vec<bool>>, StrategyError> {
    let tree = call_tree(ast, root)?;
    let n = tree.len();
    if n > 20 {
        return Err(StrategyError::InvalidConfig(format!(
            "call tree of `{root}` has {n} functions; too many for mixed precision"
        )));
    }
    let mut edges = Vec::new();
    for (i, f) in tree.iter().enumerate() {
        let node = syntax::find_function(ast, f).expect("function");
        let body = syntax::function_body(ast, node).expect("body");
        for c in ast.descendants(body) {
            if ast.kind(c) == NodeKind::Call {
                if let Some(j) = tree.iter().position(|t| *t == syntax::call_name(ast, c)) {
                    if i != j {
                        edges.push((i, j));
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for bits in 1u32..(1 << n) {
        // most significant bit is the first function: lexicographic order
        let a: Vec<bool> = (0..n).map(|i| bits & (1 << (n - 1 - i)) != 0).collect();
        if edges.iter().any(|(c, e)| !a[*c] && a[*e]) {
            continue;
        }
        out.push(a);
        if out.len() == limit {
            break;
        }
    }
    Ok(out)
}

/// Generates up to `limit` mixed-precision clones of the call tree of
/// `root`, each under the suffix `_mix<k>` (k from 1).
pub fn mixed_precision_versions(s: &mut Session, root: &str, limit: usize) -> Result<Vec<MixedVersion>, StrategyError> {
    let map = PrecisionMap::new("double", "float")?;
    let assignments = mixed_assignments(s.ast(), root, limit)?;
    let mut out = Vec::new();
    for (k, a) in assignments.iter().enumerate() {
        let suffix = format!("_mix{}", k + 1);
        let pairs = clone_call_tree(s, root, &suffix)?;
        let mut functions = Vec::new();
        for ((orig, clone), is_float) in pairs.into_iter().zip(a) {
            if *is_float {
                change_precision(s, &clone, &map)?;
            }
            functions.push((orig, clone, *is_float));
        }
        out.push(MixedVersion { suffix, functions });
    }
    Ok(out)
}

impl From<StrategyError> for WeaveError {
    fn from(e: StrategyError) -> Self {
        match e {
            StrategyError::Weave(w) => w,
            other => WeaveError::Unsupported(other.to_string()),
        }
    }
}
