//! Structural accessors over [`Ast`] nodes: names, types and the parts of
//! declarations, functions, calls and control statements.

use super::ast::{join_tokens, Ast, Element, NodeId, NodeKind};
use super::ctype::{canonical_base, CType, PointerLevel};
use super::token::{Token, TokenKind, QUALIFIERS, STORAGE_CLASSES};

/// Significant tokens of a declaration, parameter or function before its
/// first declarator.
pub fn spec_tokens(ast: &Ast, id: NodeId) -> Vec<&Token> {
    let mut out = Vec::new();
    for e in &ast.node(id).elems {
        match e {
            Element::Token(t) if !t.is_trivia() => out.push(t),
            Element::Token(_) => {}
            Element::Node(n) if ast.kind(*n) == NodeKind::Pragma => {}
            Element::Node(_) => break,
        }
    }
    out
}

/// Storage-class keywords present in the specifiers (`static`, `extern`...).
pub fn storage_classes(ast: &Ast, id: NodeId) -> Vec<String> {
    spec_tokens(ast, id)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Keyword && STORAGE_CLASSES.contains(&t.text.as_str()))
        .map(|t| t.text.clone())
        .collect()
}

/// Base type and qualifiers named by the specifiers; struct bodies are
/// dropped so `struct p { int x; }` yields `struct p`.
pub fn base_of_specs(specs: &[&Token]) -> (Vec<String>, String) {
    let mut quals: Vec<String> = Vec::new();
    let mut words: Vec<&str> = Vec::new();
    let mut depth = 0usize;
    for t in specs {
        if t.is("{") {
            depth += 1;
            continue;
        }
        if t.is("}") {
            depth = depth.saturating_sub(1);
            continue;
        }
        if depth > 0 {
            continue;
        }
        let s = t.text.as_str();
        if t.kind == TokenKind::Keyword && QUALIFIERS.contains(&s) {
            if !quals.iter().any(|q| q == s) {
                quals.push(s.to_string());
            }
        } else if t.kind == TokenKind::Keyword && STORAGE_CLASSES.contains(&s) {
        } else {
            words.push(s);
        }
    }
    quals.sort_by_key(|q| QUALIFIERS.iter().position(|s| s == q));
    (quals, canonical_base(&words))
}

/// Parts of a declarator node.
#[derive(Debug, Clone, Default)]
pub struct DeclaratorInfo {
    pub name: Option<String>,
    pub pointers: Vec<PointerLevel>,
    pub arrays: Vec<String>,
    /// `Param` nodes when the declarator declares a function.
    pub params: Option<Vec<NodeId>>,
    pub init: Option<NodeId>,
}

pub fn declarator_info(ast: &Ast, d: NodeId) -> DeclaratorInfo {
    let mut info = DeclaratorInfo::default();
    let elems = &ast.node(d).elems;
    let mut i = 0;
    // indirection prefix
    while i < elems.len() {
        match &elems[i] {
            Element::Token(t) if t.is_trivia() => {}
            Element::Token(t) if t.is("*") => info.pointers.push(PointerLevel::default()),
            Element::Token(t) if t.kind == TokenKind::Keyword => {
                if let Some(level) = info.pointers.last_mut() {
                    match t.text.as_str() {
                        "const" => level.is_const = true,
                        "volatile" => level.is_volatile = true,
                        "restrict" => level.is_restrict = true,
                        _ => {}
                    }
                }
            }
            _ => break,
        }
        i += 1;
    }
    if let Some(Element::Token(t)) = elems.get(i) {
        if t.kind == TokenKind::Ident {
            info.name = Some(t.text.clone());
            i += 1;
        }
    }
    let mut after_eq = false;
    let mut in_params = false;
    let mut in_array = false;
    let mut array_has_expr = false;
    for e in &elems[i..] {
        match e {
            Element::Token(t) if t.is_trivia() => {}
            Element::Token(t) if t.is("=") => after_eq = true,
            Element::Token(t) if t.is("[") => {
                in_array = true;
                array_has_expr = false;
            }
            Element::Token(t) if t.is("]") => {
                if !array_has_expr {
                    info.arrays.push(String::new());
                }
                in_array = false;
            }
            Element::Token(t) if t.is("(") => {
                in_params = true;
                info.params.get_or_insert_with(Vec::new);
            }
            Element::Token(t) if t.is(")") => in_params = false,
            Element::Node(n) if after_eq => info.init = Some(*n),
            Element::Node(n) if in_array => {
                array_has_expr = true;
                info.arrays.push(ast.normalized_text(*n));
            }
            Element::Node(n) if in_params => {
                if let Some(ps) = info.params.as_mut() {
                    ps.push(*n);
                }
            }
            _ => {}
        }
    }
    info
}

/// Declarator children of a declaration (or the single one of a param or
/// function).
pub fn declarators(ast: &Ast, id: NodeId) -> Vec<NodeId> {
    ast.children(id)
        .filter(|c| ast.kind(*c) == NodeKind::Declarator)
        .collect()
}

/// Type declared by `declarator` within the specifier owner `owner`.
/// Function declarators yield their return type.
pub fn declared_type(ast: &Ast, owner: NodeId, declarator: Option<NodeId>) -> CType {
    let specs = spec_tokens(ast, owner);
    let (qualifiers, base) = base_of_specs(&specs);
    let (pointers, arrays) = match declarator {
        Some(d) => {
            let info = declarator_info(ast, d);
            let arrays = if info.params.is_some() {
                Vec::new()
            } else {
                info.arrays
            };
            (info.pointers, arrays)
        }
        None => (Vec::new(), Vec::new()),
    };
    CType {
        qualifiers,
        base,
        pointers,
        arrays,
    }
}

pub fn function_declarator(ast: &Ast, f: NodeId) -> Option<NodeId> {
    ast.children(f).find(|c| ast.kind(*c) == NodeKind::Declarator)
}

pub fn function_name(ast: &Ast, f: NodeId) -> String {
    function_declarator(ast, f)
        .and_then(|d| declarator_info(ast, d).name)
        .unwrap_or_default()
}

pub fn function_body(ast: &Ast, f: NodeId) -> Option<NodeId> {
    ast.children(f).find(|c| ast.kind(*c) == NodeKind::Compound)
}

pub fn return_type(ast: &Ast, f: NodeId) -> CType {
    declared_type(ast, f, function_declarator(ast, f))
}

/// Parameter nodes of a function definition or prototype declarator.
pub fn function_params(ast: &Ast, f: NodeId) -> Vec<NodeId> {
    function_declarator(ast, f)
        .and_then(|d| declarator_info(ast, d).params)
        .unwrap_or_default()
}

pub fn param_declarator(ast: &Ast, p: NodeId) -> Option<NodeId> {
    ast.children(p).find(|c| ast.kind(*c) == NodeKind::Declarator)
}

pub fn param_name(ast: &Ast, p: NodeId) -> Option<String> {
    param_declarator(ast, p).and_then(|d| declarator_info(ast, d).name)
}

pub fn param_type(ast: &Ast, p: NodeId) -> CType {
    declared_type(ast, p, param_declarator(ast, p))
}

/// Top-level function definition with the given name.
pub fn find_function(ast: &Ast, name: &str) -> Option<NodeId> {
    ast.functions()
        .into_iter()
        .find(|f| ast.is_live(*f) && function_name(ast, *f) == name)
}

/// True when a top-level declaration declares a function prototype named
/// `name`.
pub fn is_prototype_of(ast: &Ast, decl: NodeId, name: &str) -> bool {
    ast.kind(decl) == NodeKind::Declaration
        && declarators(ast, decl).iter().any(|d| {
            let info = declarator_info(ast, *d);
            info.params.is_some() && info.name.as_deref() == Some(name)
        })
}

/// Every name defined at file scope: functions, globals and prototypes.
pub fn top_level_names(ast: &Ast) -> Vec<String> {
    let mut out = Vec::new();
    for c in ast.children(ast.root()) {
        if !ast.is_live(c) {
            continue;
        }
        match ast.kind(c) {
            NodeKind::Function => out.push(function_name(ast, c)),
            NodeKind::Declaration => {
                for d in declarators(ast, c) {
                    if let Some(n) = declarator_info(ast, d).name {
                        out.push(n);
                    }
                }
            }
            _ => {}
        }
    }
    out
}

pub fn call_name(ast: &Ast, c: NodeId) -> String {
    ast.own_tokens(c)
        .find(|t| t.kind == TokenKind::Ident)
        .map(|t| t.text.clone())
        .unwrap_or_default()
}

/// Argument expressions of a call.
pub fn call_args(ast: &Ast, c: NodeId) -> Vec<NodeId> {
    ast.children(c).collect()
}

pub fn varref_name(ast: &Ast, v: NodeId) -> String {
    ast.own_tokens(v)
        .find(|t| !t.is_trivia())
        .map(|t| t.text.clone())
        .unwrap_or_default()
}

/// Pragma children bound in front of a structured statement.
pub fn leading_pragmas(ast: &Ast, stmt: NodeId) -> Vec<NodeId> {
    let mut out = Vec::new();
    for e in &ast.node(stmt).elems {
        match e {
            Element::Token(t) if t.is_trivia() => {}
            Element::Node(n) if ast.kind(*n) == NodeKind::Pragma => out.push(*n),
            _ => break,
        }
    }
    out
}

/// Text of a pragma line with leading whitespace removed and continuation
/// lines joined.
pub fn pragma_text(ast: &Ast, p: NodeId) -> String {
    let raw = ast.emit_node(p);
    raw.replace("\\\r\n", " ")
        .replace("\\\n", " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// The four parts of a `for` header and its body.
#[derive(Debug, Clone, Copy)]
pub struct ForParts {
    pub init: Option<NodeId>,
    pub cond: Option<NodeId>,
    pub step: Option<NodeId>,
    pub body: NodeId,
}

pub fn for_parts(ast: &Ast, f: NodeId) -> ForParts {
    let mut slot = 0;
    let mut parts = [None, None, None];
    let mut body = None;
    let mut seen_open = false;
    let mut closed = false;
    for e in &ast.node(f).elems {
        match e {
            Element::Token(t) if t.is("(") && !seen_open => seen_open = true,
            Element::Token(t) if t.is(";") => slot += 1,
            Element::Token(t) if t.is(")") && slot >= 2 => closed = true,
            Element::Node(n) if closed => body = Some(*n),
            Element::Node(n) if seen_open && slot < 3 => {
                parts[slot] = Some(*n);
                if ast.kind(*n) == NodeKind::Declaration {
                    slot += 1;
                }
            }
            _ => {}
        }
    }
    ForParts {
        init: parts[0],
        cond: parts[1],
        step: parts[2],
        body: body.expect("for statement has a body"),
    }
}

/// Body statement of a loop (`for`, `while`, `do`).
pub fn loop_body(ast: &Ast, l: NodeId) -> NodeId {
    match ast.kind(l) {
        NodeKind::For => for_parts(ast, l).body,
        NodeKind::DoWhile => ast
            .children(l)
            .find(|c| !matches!(ast.kind(*c), NodeKind::Pragma | NodeKind::Expr))
            .expect("do statement has a body"),
        _ => ast.children(l).last().expect("loop has a body"),
    }
}

/// Statements nested directly under a control statement or block: the body
/// of a loop, both branches of an `if`, block items of a compound.
pub fn sub_statements(ast: &Ast, id: NodeId) -> Vec<NodeId> {
    match ast.kind(id) {
        NodeKind::For | NodeKind::While | NodeKind::DoWhile => vec![loop_body(ast, id)],
        NodeKind::If => ast
            .children(id)
            .filter(|c| !matches!(ast.kind(*c), NodeKind::Pragma | NodeKind::Expr))
            .collect(),
        NodeKind::Switch => ast.children(id).last().into_iter().collect(),
        NodeKind::Compound => ast
            .children(id)
            .filter(|c| ast.kind(*c) != NodeKind::Pragma || !leading_pragmas(ast, id).contains(c))
            .collect(),
        _ => Vec::new(),
    }
}

/// Expression text with whitespace collapsed, comments dropped.
pub fn code(ast: &Ast, id: NodeId) -> String {
    let toks: Vec<&Token> = ast
        .tokens(id)
        .into_iter()
        .skip_while(|t| t.is_trivia())
        .collect();
    join_tokens(toks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    #[test]
    fn types_of_declarations_and_params() {
        let ast = parse(
            "static const double *f(int n, float a[], char **argv) { unsigned long k[4][N], *q = 0; return 0; }",
            "t.c",
        )
        .unwrap();
        let f = ast.functions()[0];
        assert_eq!(function_name(&ast, f), "f");
        assert_eq!(return_type(&ast, f).to_string(), "const double*");
        let pts: Vec<String> = function_params(&ast, f)
            .iter()
            .map(|p| param_type(&ast, *p).to_string())
            .collect();
        assert_eq!(pts, ["int", "float[]", "char**"]);
        let decl = ast
            .descendants(f)
            .into_iter()
            .find(|n| ast.kind(*n) == NodeKind::Declaration)
            .unwrap();
        let tys: Vec<String> = declarators(&ast, decl)
            .iter()
            .map(|d| declared_type(&ast, decl, Some(*d)).to_string())
            .collect();
        assert_eq!(tys, ["unsigned long[4][N]", "unsigned long*"]);
    }

    #[test]
    fn for_header_parts() {
        let ast = parse("void f(int n){ for (int i = 0; i < n; i++) g(i); for (;;) ; }", "t.c").unwrap();
        let loops: Vec<_> = ast
            .descendants(ast.root())
            .into_iter()
            .filter(|n| ast.kind(*n) == NodeKind::For)
            .collect();
        let p = for_parts(&ast, loops[0]);
        assert_eq!(ast.kind(p.init.unwrap()), NodeKind::Declaration);
        assert_eq!(code(&ast, p.cond.unwrap()), "i < n");
        assert_eq!(code(&ast, p.step.unwrap()), "i++");
        let q = for_parts(&ast, loops[1]);
        assert!(q.init.is_none() && q.cond.is_none() && q.step.is_none());
    }
}
