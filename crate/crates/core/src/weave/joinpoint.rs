use std::fmt;
use std::str::FromStr;

use crate::frontend::syntax::{self, for_parts, leading_pragmas};
use crate::frontend::{Ast, NodeId, NodeKind};

use super::WeaveError;

/// Kind of program entity a join point refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JpKind {
    File,
    Function,
    Decl,
    Stmt,
    Loop,
    Call,
    Pragma,
    VarRef,
}

impl JpKind {
    pub const ALL: [JpKind; 8] = [
        JpKind::File,
        JpKind::Function,
        JpKind::Decl,
        JpKind::Stmt,
        JpKind::Loop,
        JpKind::Call,
        JpKind::Pragma,
        JpKind::VarRef,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JpKind::File => "file",
            JpKind::Function => "function",
            JpKind::Decl => "decl",
            JpKind::Stmt => "stmt",
            JpKind::Loop => "loop",
            JpKind::Call => "call",
            JpKind::Pragma => "pragma",
            JpKind::VarRef => "varref",
        }
    }

    /// Attribute names readable on this kind.
    pub fn attributes(self) -> &'static [&'static str] {
        match self {
            JpKind::File => &["name"],
            JpKind::Function => &["name", "returnType", "paramTypes", "line"],
            JpKind::Decl => &["name", "type", "hasInit", "isParam", "line"],
            JpKind::Stmt => &["code", "kind", "line"],
            JpKind::Loop => &["kind", "indexVar", "isInnermost", "hasPragma", "line"],
            JpKind::Call => &["name", "argCount", "line"],
            JpKind::Pragma => &["text", "line"],
            JpKind::VarRef => &["name", "line"],
        }
    }

    /// Kinds that may follow this one in a select chain.
    pub fn legal_children(self) -> &'static [JpKind] {
        match self {
            JpKind::File => &[JpKind::Function],
            JpKind::Function => &[
                JpKind::Decl,
                JpKind::Stmt,
                JpKind::Loop,
                JpKind::Call,
                JpKind::Pragma,
            ],
            JpKind::Loop => &[JpKind::Stmt, JpKind::Call, JpKind::Loop, JpKind::Pragma],
            JpKind::Stmt => &[JpKind::Call, JpKind::VarRef],
            _ => &[],
        }
    }
}

impl fmt::Display for JpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JpKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JpKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown join point kind `{s}`"))
    }
}

/// A typed reference into an [`Ast`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JoinPoint {
    pub kind: JpKind,
    pub node: NodeId,
}

/// Attribute values.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Bool(bool),
    List(Vec<String>),
}

impl Value {
    /// Loose equality used by filters and conditions: numbers compare
    /// numerically, everything else by rendered text.
    pub fn loose_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            _ => self.to_string() == other.to_string(),
        }
    }

    /// Substring test for strings; membership for lists.
    pub fn contains(&self, needle: &Value) -> bool {
        let n = needle.to_string();
        match self {
            Value::List(items) => items.contains(&n),
            other => other.to_string().contains(&n),
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Int(i) => *i != 0,
            Value::Str(s) => !s.is_empty(),
            Value::List(l) => !l.is_empty(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => f.write_str(s),
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::List(items) => f.write_str(&items.join(",")),
        }
    }
}

/// Nodes of `kind` strictly below `scope`, depth-first in source order.
pub(crate) fn nodes_of_kind(ast: &Ast, scope: NodeId, kind: JpKind) -> Vec<NodeId> {
    if kind == JpKind::File {
        return vec![ast.root()];
    }
    ast.descendants(scope)
        .into_iter()
        .filter(|n| ast.is_live(*n) && classify(ast, *n) == Some(kind))
        .collect()
}

/// Join point kind of a node, if it is one.
pub fn classify(ast: &Ast, id: NodeId) -> Option<JpKind> {
    let parent = ast.parent(id);
    match ast.kind(id) {
        NodeKind::Unit => Some(JpKind::File),
        NodeKind::Function => Some(JpKind::Function),
        NodeKind::Declarator => {
            let p = parent?;
            match ast.kind(p) {
                NodeKind::Declaration => {
                    let in_function = ast.ancestors(p).any(|a| ast.kind(a) == NodeKind::Function);
                    in_function.then_some(JpKind::Decl)
                }
                NodeKind::Param => {
                    // parameters of a function definition only
                    let func = ast.ancestors(p).find(|a| ast.kind(*a) == NodeKind::Function)?;
                    let fdecl = syntax::function_declarator(ast, func)?;
                    (ast.parent(p) == Some(fdecl)).then_some(JpKind::Decl)
                }
                _ => None,
            }
        }
        NodeKind::For | NodeKind::While | NodeKind::DoWhile => Some(JpKind::Loop),
        NodeKind::Call => Some(JpKind::Call),
        NodeKind::Pragma => Some(JpKind::Pragma),
        NodeKind::VarRef => Some(JpKind::VarRef),
        k if k.is_statement() => is_statement_position(ast, id).then_some(JpKind::Stmt),
        _ => None,
    }
}

/// True for statements that occupy a block item or a control-statement body
/// (excluding e.g. a `for` header declaration).
pub(crate) fn is_statement_position(ast: &Ast, id: NodeId) -> bool {
    let Some(p) = ast.parent(id) else { return false };
    match ast.kind(p) {
        NodeKind::Compound => true,
        NodeKind::For | NodeKind::While | NodeKind::DoWhile | NodeKind::If | NodeKind::Switch => {
            syntax::sub_statements(ast, p).contains(&id)
        }
        _ => false,
    }
}

/// Nearest enclosing statement of a node (the node itself if it is one).
pub(crate) fn enclosing_statement(ast: &Ast, id: NodeId) -> Option<NodeId> {
    std::iter::once(id)
        .chain(ast.ancestors(id))
        .find(|n| {
            (ast.kind(*n).is_statement() || ast.kind(*n) == NodeKind::Compound)
                && is_statement_position(ast, *n)
        })
}

pub(crate) fn read_attribute(ast: &Ast, jp: JoinPoint, name: &str) -> Result<Value, WeaveError> {
    if !ast.is_live(jp.node) {
        return Err(WeaveError::StaleJoinPoint);
    }
    let id = jp.node;
    let unknown = || WeaveError::UnknownAttribute {
        kind: jp.kind.name().to_string(),
        name: name.to_string(),
    };
    if name == "line" && jp.kind != JpKind::File {
        return Ok(Value::Int(ast.line(id).map_or(0, i64::from)));
    }
    let v = match (jp.kind, name) {
        (JpKind::File, "name") => Value::Str(ast.file_name().to_string()),
        (JpKind::Function, "name") => Value::Str(syntax::function_name(ast, id)),
        (JpKind::Function, "returnType") => Value::Str(syntax::return_type(ast, id).to_string()),
        (JpKind::Function, "paramTypes") => Value::List(
            syntax::function_params(ast, id)
                .iter()
                .map(|p| syntax::param_type(ast, *p).to_string())
                .collect(),
        ),
        (JpKind::Decl, "name") => {
            Value::Str(syntax::declarator_info(ast, id).name.unwrap_or_default())
        }
        (JpKind::Decl, "type") => {
            let owner = ast.parent(id).expect("declarator has an owner");
            Value::Str(syntax::declared_type(ast, owner, Some(id)).to_string())
        }
        (JpKind::Decl, "hasInit") => Value::Bool(syntax::declarator_info(ast, id).init.is_some()),
        (JpKind::Decl, "isParam") => {
            Value::Bool(ast.parent(id).is_some_and(|p| ast.kind(p) == NodeKind::Param))
        }
        (JpKind::Stmt, "code") => Value::Str(syntax::code(ast, id)),
        (JpKind::Stmt, "kind") => Value::Str(
            match ast.kind(id) {
                NodeKind::For => "for",
                NodeKind::While => "while",
                NodeKind::DoWhile => "do",
                NodeKind::If => "if",
                NodeKind::Switch => "switch",
                NodeKind::Return => "return",
                NodeKind::Declaration => "decl",
                _ => "expr",
            }
            .to_string(),
        ),
        (JpKind::Loop, "kind") => Value::Str(
            match ast.kind(id) {
                NodeKind::For => "for",
                NodeKind::While => "while",
                _ => "do",
            }
            .to_string(),
        ),
        (JpKind::Loop, "indexVar") => Value::Str(loop_index_var(ast, id).unwrap_or_default()),
        (JpKind::Loop, "isInnermost") => Value::Bool(
            !ast.descendants(id)
                .iter()
                .any(|n| ast.is_live(*n) && ast.kind(*n).is_loop()),
        ),
        (JpKind::Loop, "hasPragma") => Value::Bool(!leading_pragmas(ast, id).is_empty()),
        (JpKind::Call, "name") => Value::Str(syntax::call_name(ast, id)),
        (JpKind::Call, "argCount") => Value::Int(syntax::call_args(ast, id).len() as i64),
        (JpKind::Pragma, "text") => Value::Str(syntax::pragma_text(ast, id)),
        (JpKind::VarRef, "name") => Value::Str(syntax::varref_name(ast, id)),
        _ => return Err(unknown()),
    };
    Ok(v)
}

/// Induction variable named by a `for` header: the variable assigned or
/// declared in the init clause.
pub fn loop_index_var(ast: &Ast, l: NodeId) -> Option<String> {
    if ast.kind(l) != NodeKind::For {
        return None;
    }
    let init = for_parts(ast, l).init?;
    if ast.kind(init) == NodeKind::Declaration {
        let d = *syntax::declarators(ast, init).first()?;
        return syntax::declarator_info(ast, d).name;
    }
    let first = ast.children(init).next()?;
    (ast.kind(first) == NodeKind::VarRef).then(|| syntax::varref_name(ast, first))
}
