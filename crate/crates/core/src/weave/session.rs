use std::collections::{BTreeMap, HashMap};

use crate::frontend::syntax::{self, declarators, spec_tokens};
use crate::frontend::{
    count_sloc_nodes, format_fragment, parse_expression, parse_statements, parse_top_items, Ast,
    CType, Element, NodeId, NodeKind, PointerLevel, Token, TokenKind,
};

use super::joinpoint::{
    enclosing_statement, nodes_of_kind, read_attribute, JoinPoint, JpKind,
    Value,
};
use super::report::WeaveReport;
use super::select::SelectChain;
use super::WeaveError;

type WResult<T> = Result<T, WeaveError>;

/// Where an inserted fragment goes relative to its anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Before,
    After,
    Replace,
}

impl std::str::FromStr for Place {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "before" => Ok(Place::Before),
            "after" => Ok(Place::After),
            "replace" => Ok(Place::Replace),
            _ => Err(format!("expected before, after or replace, got `{s}`")),
        }
    }
}

/// A tree under transformation plus the counters of what was done to it.
#[derive(Debug, Clone)]
pub struct Session {
    ast: Ast,
    report: WeaveReport,
    /// Last node placed `after` a given anchor, so repeated inserts keep
    /// their issue order.
    after_tail: HashMap<NodeId, NodeId>,
    support: BTreeMap<String, String>,
}

impl Session {
    pub fn new(ast: Ast) -> Self {
        Session {
            ast,
            report: WeaveReport::default(),
            after_tail: HashMap::new(),
            support: BTreeMap::new(),
        }
    }

    pub fn ast(&self) -> &Ast {
        &self.ast
    }

    pub(crate) fn ast_mut(&mut self) -> &mut Ast {
        &mut self.ast
    }

    pub fn report(&self) -> &WeaveReport {
        &self.report
    }

    pub(crate) fn report_mut(&mut self) -> &mut WeaveReport {
        &mut self.report
    }

    /// Extra files (runtime support sources) the woven unit needs, by name.
    pub fn support_files(&self) -> &BTreeMap<String, String> {
        &self.support
    }

    pub(crate) fn add_support_file(&mut self, name: &str, content: String) {
        self.support.insert(name.to_string(), content);
    }

    pub fn into_parts(self) -> (Ast, WeaveReport, BTreeMap<String, String>) {
        (self.ast, self.report, self.support)
    }

    // ---- queries ------------------------------------------------------

    /// Evaluates a chain; each tuple binds one join point per step.
    pub fn select(&mut self, chain: &SelectChain) -> WResult<Vec<Vec<JoinPoint>>> {
        chain
            .check()
            .map_err(|(parent, child)| WeaveError::IllegalChain {
                parent: parent.name().to_string(),
                child: child.name().to_string(),
            })?;
        self.report.selects += 1;
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.select_from(chain, 0, self.ast.root(), &mut prefix, &mut out)?;
        Ok(out)
    }

    fn select_from(
        &mut self,
        chain: &SelectChain,
        depth: usize,
        scope: NodeId,
        prefix: &mut Vec<JoinPoint>,
        out: &mut Vec<Vec<JoinPoint>>,
    ) -> WResult<()> {
        let Some(step) = chain.steps.get(depth) else {
            out.push(prefix.clone());
            return Ok(());
        };
        for node in nodes_of_kind(&self.ast, scope, step.kind) {
            let jp = JoinPoint {
                kind: step.kind,
                node,
            };
            if let Some(f) = &step.filter {
                let v = self.attribute(jp, &f.attr)?;
                if !f.op.apply(&v, &f.value) {
                    continue;
                }
            }
            prefix.push(jp);
            self.select_from(chain, depth + 1, node, prefix, out)?;
            prefix.pop();
        }
        Ok(())
    }

    pub fn attribute(&mut self, jp: JoinPoint, name: &str) -> WResult<Value> {
        let v = read_attribute(&self.ast, jp, name)?;
        self.report.attributes += 1;
        Ok(v)
    }

    // ---- insert -------------------------------------------------------

    pub fn insert(&mut self, jp: JoinPoint, place: Place, fragment: &str) -> WResult<Vec<NodeId>> {
        if !self.ast.is_live(jp.node) {
            return Err(WeaveError::InvalidAnchor(
                "join point was replaced or removed earlier".into(),
            ));
        }
        let nodes = if jp.kind == JpKind::File {
            self.insert_file(place, fragment)?
        } else {
            let anchor = self.anchor(jp, place)?;
            self.insert_at(anchor, place, fragment)?
        };
        self.report.actions += 1;
        self.report.inserts += 1;
        self.report.native_sloc += count_sloc_nodes(&self.ast, &nodes) as u64;
        Ok(nodes)
    }

    fn anchor(&self, jp: JoinPoint, place: Place) -> WResult<NodeId> {
        let ast = &self.ast;
        let id = jp.node;
        let stmt_of = |n: NodeId, what: &str| {
            enclosing_statement(ast, n)
                .ok_or_else(|| WeaveError::InvalidAnchor(format!("{what} is not inside a statement")))
        };
        match jp.kind {
            JpKind::File => unreachable!("handled by insert_file"),
            JpKind::Function => Ok(id),
            JpKind::Stmt | JpKind::Loop => Ok(id),
            JpKind::Call => stmt_of(id, "call"),
            JpKind::VarRef => stmt_of(id, "variable reference"),
            JpKind::Decl => {
                let owner = ast.parent(id).expect("declarator owner");
                if ast.kind(owner) == NodeKind::Param {
                    return Err(WeaveError::InvalidAnchor(
                        "cannot insert code at a parameter".into(),
                    ));
                }
                stmt_of(owner, "declaration")
            }
            JpKind::Pragma => {
                let parent = ast.parent(id).expect("pragma parent");
                let attached = !matches!(ast.kind(parent), NodeKind::Unit | NodeKind::Compound)
                    || syntax::leading_pragmas(ast, parent).contains(&id);
                if place == Place::Replace || !attached {
                    Ok(id)
                } else {
                    Ok(parent)
                }
            }
        }
    }

    fn parse_fragment(&mut self, text: &str, top_level: bool) -> WResult<Vec<Element>> {
        let parsed = if top_level {
            parse_top_items(&mut self.ast, text)
        } else {
            parse_statements(&mut self.ast, text)
        };
        parsed.map_err(|e| WeaveError::ParseErrorInFragment(e.to_string()))
    }

    fn insert_at(&mut self, anchor: NodeId, place: Place, fragment: &str) -> WResult<Vec<NodeId>> {
        let parent = self.ast.parent(anchor).expect("anchor has a parent");
        let parent_kind = self.ast.kind(parent);
        let pragma_in_place = self.ast.kind(anchor) == NodeKind::Pragma
            && (!matches!(parent_kind, NodeKind::Unit | NodeKind::Compound)
                || syntax::leading_pragmas(&self.ast, parent).contains(&anchor));
        let needs_block = !pragma_in_place
            && !matches!(parent_kind, NodeKind::Unit | NodeKind::Compound)
            && !(place == Place::Replace && single_statement(fragment));
        if needs_block {
            self.wrap_in_block(anchor);
        }
        let parent = self.ast.parent(anchor).expect("anchor has a parent");
        let top = self.ast.kind(parent) == NodeKind::Unit;
        let indent = self.ast.line_indent(anchor);
        let text = format_fragment(fragment, &indent)
            .map_err(|e| WeaveError::ParseErrorInFragment(e.to_string()))?;
        let elems = self.parse_fragment(&text, top)?;
        let nodes: Vec<NodeId> = elems.iter().filter_map(Element::as_node).collect();
        let sep = if top
            && (self.ast.kind(anchor) == NodeKind::Function
                || nodes.iter().any(|n| self.ast.kind(*n) == NodeKind::Function))
        {
            "\n\n".to_string()
        } else {
            format!("\n{indent}")
        };
        let (_, idx) = self.ast.index_in_parent(anchor).expect("anchor in parent");
        match place {
            Place::Before => {
                let mut items = elems;
                items.push(ws(&sep));
                self.splice(parent, idx, 0, items);
            }
            Place::After => {
                let after = self
                    .after_tail
                    .get(&anchor)
                    .copied()
                    .filter(|t| self.ast.is_live(*t) && self.ast.parent(*t) == Some(parent))
                    .and_then(|t| self.ast.index_in_parent(t))
                    .map_or(idx, |(_, i)| i);
                let mut items = vec![ws(&sep)];
                items.extend(elems);
                self.splice(parent, after + 1, 0, items);
                if let Some(last) = nodes.last() {
                    self.after_tail.insert(anchor, *last);
                }
            }
            Place::Replace => {
                self.splice(parent, idx, 1, elems);
                self.ast.mark_removed(anchor);
            }
        }
        Ok(nodes)
    }

    fn insert_file(&mut self, place: Place, fragment: &str) -> WResult<Vec<NodeId>> {
        let root = self.ast.root();
        let text = format_fragment(fragment, "")
            .map_err(|e| WeaveError::ParseErrorInFragment(e.to_string()))?;
        let elems = self.parse_fragment(&text, true)?;
        let nodes: Vec<NodeId> = elems.iter().filter_map(Element::as_node).collect();
        match place {
            Place::Before => {
                let mut items = elems;
                items.push(ws("\n"));
                self.splice(root, 0, 0, items);
            }
            Place::After => {
                let len = self.ast.node(root).elems.len();
                let ends_with_newline = self.ast.emit().ends_with('\n');
                let mut items = Vec::new();
                if !ends_with_newline {
                    items.push(ws("\n"));
                }
                items.extend(elems);
                items.push(ws("\n"));
                self.splice(root, len, 0, items);
            }
            Place::Replace => {
                return Err(WeaveError::InvalidAnchor("cannot replace a whole file".into()))
            }
        }
        Ok(nodes)
    }

    /// Inserts top-level code after the leading run of preprocessor lines
    /// (typically the includes). Counted as an insert.
    pub(crate) fn insert_after_directives(&mut self, fragment: &str) -> WResult<Vec<NodeId>> {
        let root = self.ast.root();
        let mut last = None;
        for (i, e) in self.ast.node(root).elems.iter().enumerate() {
            match e {
                Element::Token(_) => {}
                Element::Node(n) if self.ast.kind(*n) == NodeKind::Directive => last = Some(i),
                Element::Node(_) => break,
            }
        }
        let elems = self.parse_fragment(&format_fragment(fragment, "")?, true)?;
        let nodes: Vec<NodeId> = elems.iter().filter_map(Element::as_node).collect();
        match last {
            Some(i) => {
                let mut items = vec![ws("\n")];
                items.extend(elems);
                self.splice(root, i + 1, 0, items);
            }
            None => {
                let mut items = elems;
                items.push(ws("\n"));
                self.splice(root, 0, 0, items);
            }
        }
        self.report.actions += 1;
        self.report.inserts += 1;
        self.report.native_sloc += count_sloc_nodes(&self.ast, &nodes) as u64;
        Ok(nodes)
    }

    /// Places `elems` into `parent` at `idx`, replacing `remove` elements.
    fn splice(&mut self, parent: NodeId, idx: usize, remove: usize, elems: Vec<Element>) {
        for e in &elems {
            if let Element::Node(n) = e {
                self.ast.adopt(parent, *n);
            }
        }
        self.ast
            .node_mut(parent)
            .elems
            .splice(idx..idx + remove, elems);
    }

    /// Puts a brace-less control-statement body inside `{ }`.
    fn wrap_in_block(&mut self, body: NodeId) {
        let (parent, idx) = self.ast.index_in_parent(body).expect("body in parent");
        let outer = self.ast.line_indent(parent);
        let inner = format!("{outer}    ");
        if idx > 0 {
            if let Element::Token(t) = &mut self.ast.node_mut(parent).elems[idx - 1] {
                if t.kind == TokenKind::Whitespace && t.text.contains('\n') {
                    t.text = " ".into();
                }
            }
        }
        let elems = vec![
            punct("{"),
            ws(&format!("\n{inner}")),
            Element::Node(body),
            ws(&format!("\n{outer}")),
            punct("}"),
        ];
        let block = self.ast.alloc(NodeKind::Compound, elems, true);
        self.ast.adopt(parent, block);
        self.ast.node_mut(parent).elems[idx] = Element::Node(block);
    }

    // ---- pragmas ------------------------------------------------------

    /// Binds a new pragma line in front of a statement. Counted as an insert.
    pub(crate) fn attach_pragma(&mut self, stmt: NodeId, text: &str) {
        let indent = self.ast.line_indent(stmt);
        let tok = Token::synthetic(TokenKind::Pragma, text.trim());
        let pragma = self.ast.alloc(NodeKind::Pragma, vec![Element::Token(tok)], true);
        self.splice(stmt, 0, 0, vec![Element::Node(pragma), ws(&format!("\n{indent}"))]);
        self.report.actions += 1;
        self.report.inserts += 1;
        self.report.native_sloc += 1;
    }

    /// Turns a pragma into a `//` comment line in place.
    pub(crate) fn comment_out_pragma(&mut self, pragma: NodeId) {
        let text = syntax::pragma_text(&self.ast, pragma);
        let (parent, idx) = self.ast.index_in_parent(pragma).expect("pragma in parent");
        self.ast.mark_removed(pragma);
        self.ast.node_mut(parent).elems[idx] =
            Element::Token(Token::synthetic(TokenKind::Comment, format!("// {text}")));
        self.report.actions += 1;
    }

    // ---- setType ------------------------------------------------------

    /// Rewrites the declared type of a decl (or the return type of a
    /// function) to `new`, touching only the type tokens.
    pub fn set_type(&mut self, jp: JoinPoint, new: &CType) -> WResult<()> {
        if !self.ast.is_live(jp.node) {
            return Err(WeaveError::StaleJoinPoint);
        }
        let (mut owner, decl) = match jp.kind {
            JpKind::Decl => (self.ast.parent(jp.node).expect("owner"), jp.node),
            JpKind::Function => (
                jp.node,
                syntax::function_declarator(&self.ast, jp.node).expect("function declarator"),
            ),
            other => return Err(WeaveError::NotADecl(other.name().to_string())),
        };
        self.report.actions += 1;
        let cur = syntax::declared_type(&self.ast, owner, Some(decl));
        if cur == *new {
            return Ok(());
        }
        let base_changed = cur.base != new.base || cur.qualifiers != new.qualifiers;
        if base_changed
            && self.ast.kind(owner) == NodeKind::Declaration
            && declarators(&self.ast, owner).len() > 1
        {
            self.split_declaration(owner)?;
            owner = self.ast.parent(decl).expect("owner");
        }
        if base_changed {
            self.rewrite_specs(owner, new)?;
        }
        if cur.pointers != new.pointers {
            self.rewrite_pointers(owner, decl, &new.pointers);
        }
        let is_function = syntax::declarator_info(&self.ast, decl).params.is_some();
        if cur.arrays != new.arrays && !is_function {
            self.rewrite_arrays(decl, &new.arrays)?;
        }
        Ok(())
    }

    /// Rewrites the type specifiers of a declaration or parameter, which
    /// changes every declarator it owns.
    pub(crate) fn retype_specs(&mut self, owner: NodeId, new: &CType) -> WResult<()> {
        self.report.actions += 1;
        self.rewrite_specs(owner, new)
    }

    /// `T a, b;` → `T a;` `T b;`, keeping every declarator node.
    fn split_declaration(&mut self, decl: NodeId) -> WResult<()> {
        let (parent, idx) = self.ast.index_in_parent(decl).expect("declaration in parent");
        if !matches!(self.ast.kind(parent), NodeKind::Compound | NodeKind::Unit) {
            return Err(WeaveError::Unsupported(
                "changing one variable of a multi-variable declaration in a for header".into(),
            ));
        }
        let elems = self.ast.node(decl).elems.clone();
        let positions: Vec<usize> = elems
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e, Element::Node(n) if self.ast.kind(*n) == NodeKind::Declarator))
            .map(|(i, _)| i)
            .collect();
        let first = positions[0];
        let spec_part: Vec<Element> = elems[..first]
            .iter()
            .map(|e| match e {
                Element::Token(t) => Element::Token(Token::synthetic(t.kind, t.text.clone())),
                Element::Node(_) => unreachable!("declaration specifiers are tokens"),
            })
            .collect();
        let semi = elems
            .iter()
            .rev()
            .find(|e| matches!(e, Element::Token(t) if t.is(";")))
            .cloned()
            .unwrap_or_else(|| punct(";"));
        let mut kept = elems[..=first].to_vec();
        kept.push(semi);
        self.ast.node_mut(decl).elems = kept;
        let indent = self.ast.line_indent(decl);
        let mut new_items = Vec::new();
        for p in &positions[1..] {
            let d = elems[*p].as_node().expect("declarator");
            let mut items = spec_part.clone();
            items.push(Element::Node(d));
            items.push(punct(";"));
            let nd = self.ast.alloc(NodeKind::Declaration, items, true);
            new_items.push(ws(&format!("\n{indent}")));
            new_items.push(Element::Node(nd));
        }
        self.splice(parent, idx + 1, 0, new_items);
        Ok(())
    }

    fn rewrite_specs(&mut self, owner: NodeId, new: &CType) -> WResult<()> {
        if spec_tokens(&self.ast, owner).iter().any(|t| t.is("{")) {
            return Err(WeaveError::Unsupported(
                "retyping a declaration that defines a struct body".into(),
            ));
        }
        let elems = &self.ast.node(owner).elems;
        let mut range: Option<(usize, usize)> = None;
        let mut storage = Vec::new();
        for (i, e) in elems.iter().enumerate() {
            match e {
                Element::Node(n) if self.ast.kind(*n) == NodeKind::Pragma => continue,
                Element::Node(_) => break,
                Element::Token(t) if t.is_trivia() => continue,
                Element::Token(t) => {
                    let is_storage = t.kind == TokenKind::Keyword
                        && crate::frontend::STORAGE_CLASSES.contains(&t.text.as_str());
                    if is_storage {
                        if range.is_some() {
                            storage.push(t.text.clone());
                        } else {
                            continue;
                        }
                    }
                    range = Some(match range {
                        None => (i, i),
                        Some((a, _)) => (a, i),
                    });
                }
            }
        }
        let Some((a, b)) = range else {
            return Err(WeaveError::Unsupported("declaration without a type".into()));
        };
        let mut words: Vec<String> = storage;
        words.extend(new.qualifiers.iter().cloned());
        words.extend(new.base.split(' ').map(str::to_string));
        let mut toks = Vec::new();
        for (i, w) in words.iter().enumerate() {
            if i > 0 {
                toks.push(ws(" "));
            }
            let kind = if crate::frontend::is_keyword(w) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            toks.push(Element::Token(Token::synthetic(kind, w.clone())));
        }
        self.ast.node_mut(owner).elems.splice(a..=b, toks);
        Ok(())
    }

    fn rewrite_pointers(&mut self, owner: NodeId, decl: NodeId, pointers: &[PointerLevel]) {
        let elems = &self.ast.node(decl).elems;
        let mut end = 0;
        for (i, e) in elems.iter().enumerate() {
            match e {
                Element::Token(t) if t.is("*") || (t.kind == TokenKind::Keyword) => end = i + 1,
                Element::Token(t) if t.is_trivia() => {}
                _ => break,
            }
        }
        let mut toks = Vec::new();
        for (i, p) in pointers.iter().enumerate() {
            toks.push(punct("*"));
            for (on, q) in [
                (p.is_const, "const"),
                (p.is_volatile, "volatile"),
                (p.is_restrict, "restrict"),
            ] {
                if on {
                    toks.push(ws(" "));
                    toks.push(Element::Token(Token::synthetic(TokenKind::Keyword, q)));
                }
            }
            let qualified = p.is_const || p.is_volatile || p.is_restrict;
            if qualified && i + 1 == pointers.len() {
                toks.push(ws(" "));
            }
        }
        self.ast.node_mut(decl).elems.splice(0..end, toks);
        // keep the declarator from gluing onto the specifiers
        let (_, idx) = self.ast.index_in_parent(decl).expect("declarator in owner");
        let glued = idx > 0
            && matches!(&self.ast.node(owner).elems[idx - 1], Element::Token(t) if !t.is_trivia())
            && !matches!(self.ast.node(decl).elems.first(), Some(Element::Token(t)) if t.is("*") || t.is_trivia());
        if glued {
            self.ast.node_mut(decl).elems.insert(0, ws(" "));
        }
    }

    fn rewrite_arrays(&mut self, decl: NodeId, arrays: &[String]) -> WResult<()> {
        let elems = self.ast.node(decl).elems.clone();
        let name_idx = elems
            .iter()
            .position(|e| matches!(e, Element::Token(t) if t.kind == TokenKind::Ident));
        let start = name_idx.map_or(0, |i| i + 1);
        let mut first = None;
        let mut last = None;
        for (i, e) in elems.iter().enumerate().skip(start) {
            match e {
                Element::Token(t) if t.is("[") => {
                    first.get_or_insert(i);
                }
                Element::Token(t) if t.is("]") => last = Some(i),
                Element::Token(t) if t.is("=") || t.is("(") => break,
                _ => {}
            }
        }
        let mut items = Vec::new();
        for a in arrays {
            items.push(punct("["));
            if !a.is_empty() {
                let e = parse_expression(&mut self.ast, a)
                    .map_err(|e| WeaveError::ParseErrorInFragment(e.to_string()))?;
                items.push(Element::Node(e));
            }
            items.push(punct("]"));
        }
        for it in &items {
            if let Element::Node(n) = it {
                self.ast.adopt(decl, *n);
            }
        }
        let range = match (first, last) {
            (Some(a), Some(b)) => a..b + 1,
            _ => start..start,
        };
        for e in &elems[range.clone()] {
            if let Element::Node(n) = e {
                self.ast.mark_removed(*n);
            }
        }
        self.ast.node_mut(decl).elems.splice(range, items);
        Ok(())
    }

    // ---- cloning ------------------------------------------------------

    /// Deep-copies a function under `new_name` and appends it after the
    /// original (after earlier clones of the same function).
    pub fn clone_function(&mut self, jp: JoinPoint, new_name: &str) -> WResult<JoinPoint> {
        if jp.kind != JpKind::Function {
            return Err(WeaveError::InvalidAnchor(format!(
                "clone needs a function join point, got {}",
                jp.kind
            )));
        }
        if !self.ast.is_live(jp.node) {
            return Err(WeaveError::StaleJoinPoint);
        }
        if new_name.is_empty() || syntax::top_level_names(&self.ast).iter().any(|n| n == new_name) {
            return Err(WeaveError::DuplicateName(new_name.to_string()));
        }
        let copy = self.ast.deep_clone(jp.node);
        let d = syntax::function_declarator(&self.ast, copy).expect("declarator");
        self.rename_declarator(d, new_name);
        self.append_after(jp.node, copy, "\n\n");
        self.report.actions += 1;
        Ok(JoinPoint {
            kind: JpKind::Function,
            node: copy,
        })
    }

    /// Places a detached node after `anchor` (or after what was last put
    /// there), separated by `sep`.
    pub(crate) fn append_after(&mut self, anchor: NodeId, node: NodeId, sep: &str) {
        let parent = self.ast.parent(anchor).expect("anchor parent");
        let after = self
            .after_tail
            .get(&anchor)
            .copied()
            .filter(|t| self.ast.is_live(*t) && self.ast.parent(*t) == Some(parent))
            .unwrap_or(anchor);
        let (_, idx) = self.ast.index_in_parent(after).expect("anchor in parent");
        self.splice(parent, idx + 1, 0, vec![ws(sep), Element::Node(node)]);
        self.after_tail.insert(anchor, node);
    }

    pub(crate) fn rename_declarator(&mut self, decl: NodeId, new_name: &str) {
        for e in self.ast.node_mut(decl).elems.iter_mut() {
            if let Element::Token(t) = e {
                if t.kind == TokenKind::Ident {
                    t.text = new_name.to_string();
                    return;
                }
            }
        }
    }

    /// Renames the callee of a call node.
    pub(crate) fn rename_call(&mut self, call: NodeId, new_name: &str) {
        for e in self.ast.node_mut(call).elems.iter_mut() {
            if let Element::Token(t) = e {
                if t.kind == TokenKind::Ident {
                    t.text = new_name.to_string();
                    return;
                }
            }
        }
    }
}

fn ws(text: &str) -> Element {
    Element::Token(Token::synthetic(TokenKind::Whitespace, text))
}

fn punct(text: &str) -> Element {
    Element::Token(Token::synthetic(TokenKind::Punct, text))
}

/// True when the fragment is exactly one statement (so a replaced
/// brace-less body needs no block).
fn single_statement(fragment: &str) -> bool {
    let mut scratch = Ast::empty("<fragment>");
    match parse_statements(&mut scratch, fragment) {
        Ok(items) => items.iter().filter(|e| e.as_node().is_some()).count() == 1,
        Err(_) => false,
    }
}
