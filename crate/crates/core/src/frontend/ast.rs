use std::collections::BTreeSet;

use super::token::{Pos, Token, TokenKind, WELL_KNOWN_TYPEDEFS};

/// Handle to a node in an [`Ast`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Unit,
    Directive,
    Pragma,
    Function,
    Declaration,
    Declarator,
    Param,
    Compound,
    For,
    While,
    DoWhile,
    If,
    Switch,
    Return,
    Label,
    /// Expression, jump or empty statement; structure below it is opaque.
    ExprStmt,
    Expr,
    Call,
    VarRef,
}

impl NodeKind {
    pub fn is_loop(self) -> bool {
        matches!(self, NodeKind::For | NodeKind::While | NodeKind::DoWhile)
    }

    /// Statement kinds that may appear in a block. Labels and blocks are
    /// excluded; declarations count only when they sit inside a function.
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::For
                | NodeKind::While
                | NodeKind::DoWhile
                | NodeKind::If
                | NodeKind::Switch
                | NodeKind::Return
                | NodeKind::ExprStmt
                | NodeKind::Declaration
        )
    }
}

#[derive(Debug, Clone)]
pub enum Element {
    Token(Token),
    Node(NodeId),
}

impl Element {
    pub fn as_token(&self) -> Option<&Token> {
        match self {
            Element::Token(t) => Some(t),
            Element::Node(_) => None,
        }
    }

    pub fn as_node(&self) -> Option<NodeId> {
        match self {
            Element::Node(id) => Some(*id),
            Element::Token(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodeData {
    pub kind: NodeKind,
    pub elems: Vec<Element>,
    pub parent: Option<NodeId>,
    /// Created by the weaver rather than read from the input file.
    pub generated: bool,
    pub removed: bool,
}

/// Lossless syntax tree of one translation unit.
///
/// Every byte of the input lives in exactly one token, and every token in
/// exactly one node, so [`Ast::emit`] reproduces the input verbatim until the
/// tree is edited.
#[derive(Debug, Clone)]
pub struct Ast {
    file_name: String,
    nodes: Vec<NodeData>,
    root: NodeId,
    pub(crate) typedefs: BTreeSet<String>,
}

impl Ast {
    pub(crate) fn empty(file_name: &str) -> Self {
        let mut ast = Ast {
            file_name: file_name.to_string(),
            nodes: Vec::new(),
            root: NodeId(0),
            typedefs: WELL_KNOWN_TYPEDEFS.iter().map(|s| s.to_string()).collect(),
        };
        ast.root = ast.alloc(NodeKind::Unit, Vec::new(), false);
        ast
    }

    pub fn file_name(&self) -> &str {
        &self.file_name
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &NodeData {
        &self.nodes[id.index()]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut NodeData {
        &mut self.nodes[id.index()]
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.node(id).kind
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    pub fn is_live(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len() && !self.node(id).removed
    }

    pub fn is_typedef_name(&self, name: &str) -> bool {
        self.typedefs.contains(name)
    }

    pub(crate) fn alloc(&mut self, kind: NodeKind, elems: Vec<Element>, generated: bool) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        for e in &elems {
            if let Element::Node(child) = e {
                self.nodes[child.index()].parent = Some(id);
            }
        }
        self.nodes.push(NodeData {
            kind,
            elems,
            parent: None,
            generated,
            removed: false,
        });
        id
    }

    pub(crate) fn adopt(&mut self, parent: NodeId, child: NodeId) {
        self.nodes[child.index()].parent = Some(parent);
    }

    /// Direct child nodes in source order.
    pub fn children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.node(id).elems.iter().filter_map(Element::as_node)
    }

    /// Direct child tokens, trivia included.
    pub fn own_tokens(&self, id: NodeId) -> impl Iterator<Item = &Token> + '_ {
        self.node(id).elems.iter().filter_map(Element::as_token)
    }

    /// All nodes strictly below `id`, pre-order.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.collect_descendants(id, &mut out);
        out
    }

    fn collect_descendants(&self, id: NodeId, out: &mut Vec<NodeId>) {
        for child in self.children(id) {
            out.push(child);
            self.collect_descendants(child, out);
        }
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |p| self.parent(*p))
    }

    pub fn is_ancestor(&self, anc: NodeId, id: NodeId) -> bool {
        self.ancestors(id).any(|a| a == anc)
    }

    /// Position of `child` in its parent's element list.
    pub fn index_in_parent(&self, child: NodeId) -> Option<(NodeId, usize)> {
        let parent = self.parent(child)?;
        let idx = self
            .node(parent)
            .elems
            .iter()
            .position(|e| matches!(e, Element::Node(n) if *n == child))?;
        Some((parent, idx))
    }

    /// Every token under `id` in order.
    pub fn tokens(&self, id: NodeId) -> Vec<&Token> {
        let mut out = Vec::new();
        self.collect_tokens(id, &mut out);
        out
    }

    fn collect_tokens<'a>(&'a self, id: NodeId, out: &mut Vec<&'a Token>) {
        for e in &self.node(id).elems {
            match e {
                Element::Token(t) => out.push(t),
                Element::Node(n) => self.collect_tokens(*n, out),
            }
        }
    }

    /// Tokens under `id` without whitespace and comments.
    pub fn significant_tokens(&self, id: NodeId) -> Vec<&Token> {
        self.tokens(id).into_iter().filter(|t| !t.is_trivia()).collect()
    }

    pub fn first_token(&self, id: NodeId) -> Option<&Token> {
        self.tokens(id).into_iter().next()
    }

    /// First/last original positions of the node, or `None` for nodes the
    /// weaver synthesized.
    pub fn span(&self, id: NodeId) -> Option<(Pos, Pos)> {
        if self.node(id).generated {
            return None;
        }
        let toks = self.tokens(id);
        let first = toks.first()?.pos?;
        let last = toks.last()?.pos?;
        Some((first, last))
    }

    /// Line of the first significant token, when it came from the input.
    pub fn line(&self, id: NodeId) -> Option<u32> {
        self.significant_tokens(id).first().and_then(|t| t.line())
    }

    pub fn emit(&self) -> String {
        self.emit_node(self.root)
    }

    pub fn emit_node(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.write_node(id, &mut out);
        out
    }

    fn write_node(&self, id: NodeId, out: &mut String) {
        for e in &self.node(id).elems {
            match e {
                Element::Token(t) => out.push_str(&t.text),
                Element::Node(n) => self.write_node(*n, out),
            }
        }
    }

    /// Source text of the node with whitespace runs collapsed and comments
    /// dropped.
    pub fn normalized_text(&self, id: NodeId) -> String {
        join_tokens(self.tokens(id))
    }

    /// Text emitted before the first token of `id`.
    pub(crate) fn text_before(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.write_until(self.root, id, &mut out);
        out
    }

    fn write_until(&self, cur: NodeId, stop: NodeId, out: &mut String) -> bool {
        if cur == stop {
            return true;
        }
        for e in &self.node(cur).elems {
            match e {
                Element::Token(t) => out.push_str(&t.text),
                Element::Node(n) => {
                    if self.write_until(*n, stop, out) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Leading whitespace of the line on which `id` starts.
    pub(crate) fn line_indent(&self, id: NodeId) -> String {
        let before = self.text_before(id);
        let line = before.rsplit('\n').next().unwrap_or("");
        line.chars().take_while(|c| *c == ' ' || *c == '\t').collect()
    }

    /// Copies the subtree rooted at `id`; the copy is detached, marked
    /// generated, and its tokens lose their source positions.
    pub(crate) fn deep_clone(&mut self, id: NodeId) -> NodeId {
        let data = self.node(id).clone();
        let mut elems = Vec::with_capacity(data.elems.len());
        for e in data.elems {
            elems.push(match e {
                Element::Token(mut t) => {
                    t.pos = None;
                    Element::Token(t)
                }
                Element::Node(n) => Element::Node(self.deep_clone(n)),
            });
        }
        self.alloc(data.kind, elems, true)
    }

    pub(crate) fn mark_removed(&mut self, id: NodeId) {
        self.node_mut(id).removed = true;
        let kids: Vec<NodeId> = self.children(id).collect();
        for k in kids {
            self.mark_removed(k);
        }
    }

    /// Top-level function definitions, in order.
    pub fn functions(&self) -> Vec<NodeId> {
        self.children(self.root)
            .filter(|n| self.kind(*n) == NodeKind::Function)
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Joins token texts, dropping comments and collapsing whitespace to single
/// spaces.
pub fn join_tokens<'a>(toks: impl IntoIterator<Item = &'a Token>) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for t in toks {
        match t.kind {
            TokenKind::Whitespace | TokenKind::Comment => pending_space = true,
            _ => {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push_str(&t.text);
            }
        }
    }
    out
}
