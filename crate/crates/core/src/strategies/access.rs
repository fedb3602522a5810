//! Name-based read/write classification of variable references.

use crate::frontend::syntax;
use crate::frontend::{Ast, Element, NodeId, NodeKind, TokenKind};

/// One flattened piece of an expression.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Item {
    Tok(String, TokenKind),
    Var(NodeId, String),
    Call(NodeId, String),
}

impl Item {
    fn is(&self, s: &str) -> bool {
        matches!(self, Item::Tok(t, k) if t == s && *k == TokenKind::Punct)
    }

    fn text(&self) -> &str {
        match self {
            Item::Tok(t, _) => t,
            Item::Var(_, n) | Item::Call(_, n) => n,
        }
    }

    /// Ends an operand (so a following `*` or `-` is binary).
    fn ends_operand(&self) -> bool {
        match self {
            Item::Var(..) | Item::Call(..) => true,
            Item::Tok(t, k) => {
                matches!(k, TokenKind::Ident | TokenKind::Number | TokenKind::CharLit | TokenKind::StringLit)
                    || t == ")"
                    || t == "]"
                    || t == "++"
                    || t == "--"
            }
        }
    }
}

/// Significant items of an expression node; calls stay opaque.
pub(crate) fn expr_items(ast: &Ast, expr: NodeId) -> Vec<Item> {
    let mut out = Vec::new();
    for e in &ast.node(expr).elems {
        match e {
            Element::Token(t) if t.is_trivia() => {}
            Element::Token(t) => out.push(Item::Tok(t.text.clone(), t.kind)),
            Element::Node(n) => match ast.kind(*n) {
                NodeKind::VarRef => out.push(Item::Var(*n, syntax::varref_name(ast, *n))),
                NodeKind::Call => out.push(Item::Call(*n, syntax::call_name(ast, *n))),
                _ => {}
            },
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Role {
    Read,
    Write,
    ReadWrite,
}

/// A reference to a variable and how it is used.
#[derive(Debug, Clone)]
pub(crate) struct Access {
    pub var: String,
    pub role: Role,
    /// Subscript texts (whitespace-free) when the access indexes the variable.
    pub subscripts: Vec<String>,
    /// Writes through `*` or `->`.
    pub indirect: bool,
    /// Assignment operator for writes (`=`, `+=`, `++` ...).
    pub op: Option<String>,
    /// Expression node holding the reference.
    pub expr: NodeId,
    /// Position of the reference among the expression items.
    pub pos: usize,
}

impl Access {
    pub fn is_write(&self) -> bool {
        self.role != Role::Read
    }
}

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];

/// Lvalue shape found by scanning.
struct Lvalue {
    base: usize,
    subscripts: Vec<String>,
    indirect: bool,
}

fn matching_open(items: &[Item], close: usize, open: &str, close_s: &str) -> Option<usize> {
    let mut depth = 0;
    let mut i = close;
    loop {
        if items[i].is(close_s) {
            depth += 1;
        } else if items[i].is(open) {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
        if i == 0 {
            return None;
        }
        i -= 1;
    }
}

fn matching_close(items: &[Item], open_at: usize, open: &str, close: &str) -> Option<usize> {
    let mut depth = 0;
    for (i, it) in items.iter().enumerate().skip(open_at) {
        if it.is(open) {
            depth += 1;
        } else if it.is(close) {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

fn squash(items: &[Item]) -> String {
    items.iter().map(Item::text).collect::<String>()
}

/// Lvalue ending at `end` (inclusive), scanning backwards.
fn lvalue_ending_at(items: &[Item], end: usize) -> Option<Lvalue> {
    let mut pos = end as isize;
    let mut subs_rev = Vec::new();
    let mut indirect = false;
    let base;
    loop {
        if pos < 0 {
            return None;
        }
        let p = pos as usize;
        let it = &items[p];
        if it.is("]") {
            let open = matching_open(items, p, "[", "]")?;
            subs_rev.push(squash(&items[open + 1..p]));
            pos = open as isize - 1;
        } else if matches!(it, Item::Tok(_, TokenKind::Ident)) && p >= 1 && (items[p - 1].is(".") || items[p - 1].is("->")) {
            if items[p - 1].is("->") {
                indirect = true;
            }
            // member access: element subscripts so far belong to the member
            subs_rev.clear();
            pos = p as isize - 2;
        } else if it.is(")") {
            let open = matching_open(items, p, "(", ")")?;
            let inner = lvalue_ending_at(&items[..p], p - 1)?;
            if inner.base <= open {
                return None;
            }
            indirect |= inner.indirect;
            base = inner.base;
            subs_rev.extend(inner.subscripts.into_iter().rev());
            pos = open as isize - 1;
            break;
        } else if let Item::Var(..) = it {
            base = p;
            pos = p as isize - 1;
            break;
        } else {
            return None;
        }
    }
    // prefix dereferences
    while pos >= 0 {
        let p = pos as usize;
        let unary = items[p].is("*") && (p == 0 || !items[p - 1].ends_operand());
        if unary {
            indirect = true;
            pos -= 1;
        } else {
            break;
        }
    }
    subs_rev.reverse();
    Some(Lvalue {
        base,
        subscripts: subs_rev,
        indirect,
    })
}

/// Lvalue starting at `start`, scanning forwards (operand of prefix `++`).
fn lvalue_starting_at(items: &[Item], start: usize) -> Option<Lvalue> {
    let mut p = start;
    let mut indirect = false;
    while p < items.len() && items[p].is("*") {
        indirect = true;
        p += 1;
    }
    let base;
    let mut end;
    if p < items.len() && items[p].is("(") {
        let close = matching_close(items, p, "(", ")")?;
        let inner = lvalue_starting_at(&items[..close], p + 1)?;
        indirect |= inner.indirect;
        base = inner.base;
        end = close + 1;
    } else if let Some(Item::Var(..)) = items.get(p) {
        base = p;
        end = p + 1;
    } else {
        return None;
    }
    let mut subs = Vec::new();
    while end < items.len() {
        if items[end].is("[") {
            let close = matching_close(items, end, "[", "]")?;
            subs.push(squash(&items[end + 1..close]));
            end = close + 1;
        } else if (items[end].is(".") || items[end].is("->")) && end + 1 < items.len() {
            indirect |= items[end].is("->");
            subs.clear();
            end += 2;
        } else {
            break;
        }
    }
    Some(Lvalue {
        base,
        subscripts: subs,
        indirect,
    })
}

/// Role, subscripts, write through a pointer, assignment operator.
type Classified = (Role, Vec<String>, bool, String);

/// Classifies every variable reference directly inside one expression.
pub(crate) fn expr_accesses(ast: &Ast, expr: NodeId) -> Vec<Access> {
    let items = expr_items(ast, expr);
    let mut roles: Vec<Option<Classified>> = vec![None; items.len()];
    for (k, it) in items.iter().enumerate() {
        let Item::Tok(t, TokenKind::Punct) = it else { continue };
        let t = t.as_str();
        let lv = if ASSIGN_OPS.contains(&t) && k > 0 {
            lvalue_ending_at(&items, k - 1)
        } else if t == "++" || t == "--" {
            if k > 0 && items[k - 1].ends_operand() && !items[k - 1].is("++") && !items[k - 1].is("--") {
                lvalue_ending_at(&items, k - 1)
            } else {
                lvalue_starting_at(&items, k + 1)
            }
        } else {
            None
        };
        if let Some(lv) = lv {
            let role = if t == "=" { Role::Write } else { Role::ReadWrite };
            roles[lv.base] = Some((role, lv.subscripts, lv.indirect, t.to_string()));
        }
    }
    let mut out = Vec::new();
    for (pos, it) in items.iter().enumerate() {
        let Item::Var(_, name) = it else { continue };
        let access = match roles[pos].take() {
            Some((role, subscripts, indirect, op)) => Access {
                var: name.clone(),
                role,
                subscripts,
                indirect,
                op: Some(op),
                expr,
                pos,
            },
            None => Access {
                var: name.clone(),
                role: Role::Read,
                subscripts: read_subscripts(&items, pos),
                indirect: false,
                op: None,
                expr,
                pos,
            },
        };
        out.push(access);
    }
    out
}

fn read_subscripts(items: &[Item], pos: usize) -> Vec<String> {
    let mut subs = Vec::new();
    let mut end = pos + 1;
    while end < items.len() && items[end].is("[") {
        let Some(close) = matching_close(items, end, "[", "]") else { break };
        subs.push(squash(&items[end + 1..close]));
        end = close + 1;
    }
    subs
}

/// Every access in the subtree, in source order.
pub(crate) fn accesses_under(ast: &Ast, scope: NodeId) -> Vec<Access> {
    let mut nodes = vec![scope];
    nodes.extend(ast.descendants(scope));
    nodes
        .into_iter()
        .filter(|n| ast.is_live(*n) && ast.kind(*n) == NodeKind::Expr)
        .flat_map(|e| expr_accesses(ast, e))
        .collect()
}

/// Names declared by declarations (and for-init declarations) in the subtree.
pub(crate) fn declared_names(ast: &Ast, scope: NodeId) -> Vec<String> {
    ast.descendants(scope)
        .into_iter()
        .filter(|n| ast.kind(*n) == NodeKind::Declaration)
        .flat_map(|d| syntax::declarators(ast, d))
        .filter_map(|d| syntax::declarator_info(ast, d).name)
        .collect()
}
