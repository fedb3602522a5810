use super::ast::{Ast, Element, NodeId, NodeKind};
use super::lexer::lex;
use super::token::{Token, TokenKind, QUALIFIERS, STORAGE_CLASSES, TYPE_KEYWORDS};
use super::FrontendError;

type PResult<T> = Result<T, FrontendError>;

/// Parses a translation unit.
pub fn parse(source: &str, file_name: &str) -> PResult<Ast> {
    let mut ast = Ast::empty(file_name);
    let toks = lex(source)?;
    let root = ast.root();
    let mut p = Parser::new(&mut ast, toks, false);
    let elems = p.unit_items()?;
    for e in &elems {
        if let Element::Node(n) = e {
            p.ast.adopt(root, *n);
        }
    }
    ast.node_mut(root).elems = elems;
    Ok(ast)
}

/// Parses `text` as a sequence of block items. The resulting nodes are
/// allocated in `ast`, marked generated, and returned detached together with
/// the whitespace between them.
pub(crate) fn parse_statements(ast: &mut Ast, text: &str) -> PResult<Vec<Element>> {
    let toks = strip_positions(lex(text)?);
    let mut p = Parser::new(ast, toks, true);
    let mut out = Vec::new();
    loop {
        p.trivia(&mut out);
        if p.sig(0).is_none() {
            break;
        }
        let stmt = p.statement()?;
        out.push(Element::Node(stmt));
    }
    Ok(out)
}

/// Parses `text` as a single generated expression node.
pub(crate) fn parse_expression(ast: &mut Ast, text: &str) -> PResult<NodeId> {
    let toks: Vec<Token> = strip_positions(lex(text)?)
        .into_iter()
        .filter(|t| !t.is_trivia() || t.kind == TokenKind::Whitespace)
        .collect();
    let mut p = Parser::new(ast, toks, true);
    let mut skipped = Vec::new();
    p.trivia(&mut skipped);
    p.expr(&[])
}

/// Like [`parse_statements`] but for file-scope items.
pub(crate) fn parse_top_items(ast: &mut Ast, text: &str) -> PResult<Vec<Element>> {
    let toks = strip_positions(lex(text)?);
    let mut p = Parser::new(ast, toks, true);
    p.unit_items()
}

fn strip_positions(toks: Vec<Token>) -> Vec<Token> {
    toks.into_iter()
        .map(|mut t| {
            t.pos = None;
            t
        })
        .collect()
}

struct Parser<'a> {
    ast: &'a mut Ast,
    toks: Vec<Token>,
    at: usize,
    generated: bool,
}

#[derive(Default)]
struct Specifiers {
    has_type: bool,
    has_storage_or_qual: bool,
    is_typedef: bool,
}

impl<'a> Parser<'a> {
    fn new(ast: &'a mut Ast, toks: Vec<Token>, generated: bool) -> Self {
        Parser {
            ast,
            toks,
            at: 0,
            generated,
        }
    }

    // ---- token stream -------------------------------------------------

    fn sig_index(&self, n: usize) -> Option<usize> {
        let mut seen = 0;
        let mut i = self.at;
        while i < self.toks.len() {
            if !self.toks[i].is_trivia() {
                if seen == n {
                    return Some(i);
                }
                seen += 1;
            }
            i += 1;
        }
        None
    }

    fn sig(&self, n: usize) -> Option<&Token> {
        self.sig_index(n).map(|i| &self.toks[i])
    }

    fn at(&self, text: &str) -> bool {
        self.sig(0).is_some_and(|t| t.is(text))
    }

    fn at_n(&self, n: usize, text: &str) -> bool {
        self.sig(n).is_some_and(|t| t.is(text))
    }

    fn trivia(&mut self, out: &mut Vec<Element>) {
        while self.at < self.toks.len() && self.toks[self.at].is_trivia() {
            out.push(Element::Token(self.toks[self.at].clone()));
            self.at += 1;
        }
    }

    /// Moves pending trivia and the next significant token into `out`.
    fn bump(&mut self, out: &mut Vec<Element>) -> PResult<Token> {
        self.trivia(out);
        match self.toks.get(self.at) {
            Some(t) => {
                let t = t.clone();
                self.at += 1;
                out.push(Element::Token(t.clone()));
                Ok(t)
            }
            None => Err(self.error("token")),
        }
    }

    fn expect(&mut self, out: &mut Vec<Element>, text: &str) -> PResult<()> {
        if self.at(text) {
            self.bump(out)?;
            Ok(())
        } else {
            Err(self.error(&format!("`{text}`")))
        }
    }

    fn error(&self, expected: &str) -> FrontendError {
        let (line, col) = match self.sig(0).and_then(|t| t.pos) {
            Some(p) => (p.line, p.col),
            None => self
                .toks
                .iter()
                .rev()
                .find_map(|t| t.pos)
                .map(|p| (p.line, p.col))
                .unwrap_or((0, 0)),
        };
        FrontendError::Syntax {
            line,
            col,
            expected: expected.to_string(),
        }
    }

    fn unsupported(&self, construct: &str) -> FrontendError {
        FrontendError::UnsupportedConstruct {
            line: self.sig(0).and_then(|t| t.line()).unwrap_or(0),
            construct: construct.to_string(),
        }
    }

    fn node(&mut self, kind: NodeKind, elems: Vec<Element>) -> NodeId {
        self.ast.alloc(kind, elems, self.generated)
    }

    /// Parses a child node after moving pending trivia into `out`.
    fn child(
        &mut self,
        out: &mut Vec<Element>,
        f: impl FnOnce(&mut Self) -> PResult<NodeId>,
    ) -> PResult<NodeId> {
        self.trivia(out);
        let id = f(self)?;
        out.push(Element::Node(id));
        Ok(id)
    }

    fn single_token_node(&mut self, kind: NodeKind) -> PResult<NodeId> {
        let mut elems = Vec::new();
        self.bump(&mut elems)?;
        Ok(self.node(kind, elems))
    }

    // ---- file scope ---------------------------------------------------

    fn unit_items(&mut self) -> PResult<Vec<Element>> {
        let mut out = Vec::new();
        loop {
            self.trivia(&mut out);
            let Some(t) = self.sig(0) else { break };
            let id = match t.kind {
                TokenKind::Pragma => self.single_token_node(NodeKind::Pragma)?,
                TokenKind::Directive => self.single_token_node(NodeKind::Directive)?,
                _ if t.is(";") => self.single_token_node(NodeKind::ExprStmt)?,
                _ => self.external_declaration()?,
            };
            out.push(Element::Node(id));
        }
        Ok(out)
    }

    fn external_declaration(&mut self) -> PResult<NodeId> {
        let mut elems = Vec::new();
        let spec = self.specifiers(&mut elems)?;
        if !spec.has_type && !spec.has_storage_or_qual {
            if self.sig(0).is_some_and(|t| t.kind == TokenKind::Ident) && self.at_n(1, "(") {
                return Err(self.unsupported("implicit int"));
            }
            return Err(self.error("declaration"));
        }
        if self.at(";") {
            self.bump(&mut elems)?;
            return Ok(self.node(NodeKind::Declaration, elems));
        }
        let first = self.child(&mut elems, |p| p.declarator(false))?;
        let is_fn_declarator = self
            .ast
            .own_tokens(first)
            .any(|t| t.is("("));
        let has_init = self.ast.own_tokens(first).any(|t| t.is("="));
        if is_fn_declarator && !has_init {
            if self.at("{") {
                self.child(&mut elems, |p| p.compound())?;
                return Ok(self.node(NodeKind::Function, elems));
            }
            if self
                .sig(0)
                .is_some_and(|t| matches!(t.kind, TokenKind::Ident | TokenKind::Keyword))
            {
                return Err(self.unsupported("K&R function definition"));
            }
        }
        self.declaration_rest(elems, spec.is_typedef)
    }

    fn declaration_rest(&mut self, mut elems: Vec<Element>, is_typedef: bool) -> PResult<NodeId> {
        while self.at(",") {
            self.bump(&mut elems)?;
            self.child(&mut elems, |p| p.declarator(false))?;
        }
        self.expect(&mut elems, ";")?;
        let id = self.node(NodeKind::Declaration, elems);
        if is_typedef {
            let names: Vec<String> = self
                .ast
                .children(id)
                .filter_map(|d| declarator_name_of(self.ast, d))
                .collect();
            self.ast.typedefs.extend(names);
        }
        Ok(id)
    }

    fn specifiers(&mut self, out: &mut Vec<Element>) -> PResult<Specifiers> {
        let mut spec = Specifiers::default();
        while let Some(t) = self.sig(0) {
            let text = t.text.as_str();
            match t.kind {
                TokenKind::Keyword if STORAGE_CLASSES.contains(&text) || QUALIFIERS.contains(&text) => {
                    spec.has_storage_or_qual = true;
                    spec.is_typedef |= text == "typedef";
                    self.bump(out)?;
                }
                TokenKind::Keyword if TYPE_KEYWORDS.contains(&text) => {
                    spec.has_type = true;
                    self.bump(out)?;
                }
                TokenKind::Keyword if matches!(text, "struct" | "union" | "enum") => {
                    spec.has_type = true;
                    self.bump(out)?;
                    if self.sig(0).is_some_and(|t| t.kind == TokenKind::Ident) {
                        self.bump(out)?;
                    }
                    if self.at("{") {
                        self.balanced(out, "{", "}")?;
                    }
                }
                TokenKind::Ident if !spec.has_type => {
                    let known = self.ast.is_typedef_name(text);
                    let next_is_name = self
                        .sig(1)
                        .is_some_and(|n| n.kind == TokenKind::Ident);
                    if known || next_is_name {
                        spec.has_type = true;
                        self.bump(out)?;
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
        Ok(spec)
    }

    /// Copies a bracketed token run verbatim.
    fn balanced(&mut self, out: &mut Vec<Element>, open: &str, close: &str) -> PResult<()> {
        let mut depth = 0usize;
        loop {
            let Some(t) = self.sig(0) else {
                return Err(self.error(&format!("`{close}`")));
            };
            let is_open = t.is(open);
            let is_close = t.is(close);
            self.bump(out)?;
            if is_open {
                depth += 1;
            } else if is_close {
                depth -= 1;
                if depth == 0 {
                    return Ok(());
                }
            }
        }
    }

    fn declarator(&mut self, in_params: bool) -> PResult<NodeId> {
        let mut elems = Vec::new();
        while self
            .sig(0)
            .is_some_and(|t| t.is("*") || (t.kind == TokenKind::Keyword && QUALIFIERS.contains(&t.text.as_str())))
        {
            self.bump(&mut elems)?;
        }
        if self.at("(") {
            return Err(self.unsupported("parenthesized declarator"));
        }
        match self.sig(0) {
            Some(t) if t.kind == TokenKind::Ident => {
                self.bump(&mut elems)?;
            }
            _ if in_params => {}
            _ => return Err(self.error("identifier")),
        }
        loop {
            if self.at("[") {
                self.bump(&mut elems)?;
                if !self.at("]") {
                    self.child(&mut elems, |p| p.expr(&["]"]))?;
                }
                self.expect(&mut elems, "]")?;
            } else if self.at("(") {
                self.params(&mut elems)?;
            } else {
                break;
            }
        }
        if !in_params && self.at("=") {
            self.bump(&mut elems)?;
            self.child(&mut elems, |p| p.expr(&[",", ";"]))?;
        }
        Ok(self.node(NodeKind::Declarator, elems))
    }

    fn params(&mut self, out: &mut Vec<Element>) -> PResult<()> {
        self.expect(out, "(")?;
        if self.at(")") {
            self.bump(out)?;
            return Ok(());
        }
        if self.at("void") && self.at_n(1, ")") {
            self.bump(out)?;
            self.bump(out)?;
            return Ok(());
        }
        loop {
            if self.at("...") {
                self.bump(out)?;
            } else {
                self.child(out, |p| p.param())?;
            }
            if self.at(",") {
                self.bump(out)?;
            } else {
                return self.expect(out, ")");
            }
        }
    }

    fn param(&mut self) -> PResult<NodeId> {
        let mut elems = Vec::new();
        let spec = self.specifiers(&mut elems)?;
        if !spec.has_type {
            if self.sig(0).is_some_and(|t| t.kind == TokenKind::Ident)
                && (self.at_n(1, ",") || self.at_n(1, ")"))
            {
                return Err(self.unsupported("K&R parameter list"));
            }
            return Err(self.error("parameter type"));
        }
        if !(self.at(",") || self.at(")")) {
            self.child(&mut elems, |p| p.declarator(true))?;
        }
        Ok(self.node(NodeKind::Param, elems))
    }

    // ---- statements ---------------------------------------------------

    fn starts_structured(&self, n: usize) -> bool {
        self.sig(n).is_some_and(|t| {
            t.kind == TokenKind::Keyword
                && matches!(
                    t.text.as_str(),
                    "for" | "while" | "do" | "if" | "switch" | "return"
                )
                || t.is("{")
        })
    }

    fn starts_declaration(&self) -> bool {
        let Some(t) = self.sig(0) else { return false };
        match t.kind {
            TokenKind::Keyword => {
                let s = t.text.as_str();
                TYPE_KEYWORDS.contains(&s)
                    || QUALIFIERS.contains(&s)
                    || STORAGE_CLASSES.contains(&s)
                    || matches!(s, "struct" | "union" | "enum")
            }
            TokenKind::Ident => {
                if self.ast.is_typedef_name(&t.text) {
                    !self.at_n(1, "=") && !self.at_n(1, "(") && !self.at_n(1, ".") && !self.at_n(1, "->")
                } else {
                    self.sig(1).is_some_and(|n| n.kind == TokenKind::Ident)
                }
            }
            _ => false,
        }
    }

    fn statement(&mut self) -> PResult<NodeId> {
        let mut lead = Vec::new();
        if self.sig(0).is_some_and(|t| t.kind == TokenKind::Pragma) {
            let mut n = 0;
            while self.sig(n).is_some_and(|t| t.kind == TokenKind::Pragma) {
                n += 1;
            }
            if !self.starts_structured(n) {
                return self.single_token_node(NodeKind::Pragma);
            }
            for _ in 0..n {
                let prag = self.single_token_node(NodeKind::Pragma)?;
                lead.push(Element::Node(prag));
                self.trivia(&mut lead);
            }
        }
        let Some(t) = self.sig(0) else {
            return Err(self.error("statement"));
        };
        if t.kind == TokenKind::Directive {
            return self.single_token_node(NodeKind::Directive);
        }
        if t.is("{") {
            return self.compound_with(lead);
        }
        let mut elems = lead;
        if t.kind == TokenKind::Keyword {
            match t.text.as_str() {
                "for" => return self.for_stmt(elems),
                "while" => return self.while_stmt(elems),
                "do" => return self.do_stmt(elems),
                "if" => return self.if_stmt(elems),
                "switch" => return self.switch_stmt(elems),
                "return" => return self.return_stmt(elems),
                "case" => {
                    self.bump(&mut elems)?;
                    self.child(&mut elems, |p| p.expr(&[":"]))?;
                    self.expect(&mut elems, ":")?;
                    return Ok(self.node(NodeKind::Label, elems));
                }
                "default" => {
                    self.bump(&mut elems)?;
                    self.expect(&mut elems, ":")?;
                    return Ok(self.node(NodeKind::Label, elems));
                }
                "break" | "continue" => {
                    self.bump(&mut elems)?;
                    self.expect(&mut elems, ";")?;
                    return Ok(self.node(NodeKind::ExprStmt, elems));
                }
                "goto" => {
                    self.bump(&mut elems)?;
                    self.bump(&mut elems)?;
                    self.expect(&mut elems, ";")?;
                    return Ok(self.node(NodeKind::ExprStmt, elems));
                }
                _ => {}
            }
        }
        if t.kind == TokenKind::Ident && self.at_n(1, ":") {
            self.bump(&mut elems)?;
            self.bump(&mut elems)?;
            return Ok(self.node(NodeKind::Label, elems));
        }
        if self.starts_declaration() {
            return self.local_declaration();
        }
        if t.is(";") {
            self.bump(&mut elems)?;
            return Ok(self.node(NodeKind::ExprStmt, elems));
        }
        self.child(&mut elems, |p| p.expr(&[";"]))?;
        self.expect(&mut elems, ";")?;
        Ok(self.node(NodeKind::ExprStmt, elems))
    }

    fn local_declaration(&mut self) -> PResult<NodeId> {
        let mut elems = Vec::new();
        let spec = self.specifiers(&mut elems)?;
        if self.at(";") {
            self.bump(&mut elems)?;
            return Ok(self.node(NodeKind::Declaration, elems));
        }
        self.child(&mut elems, |p| p.declarator(false))?;
        self.declaration_rest(elems, spec.is_typedef)
    }

    fn compound(&mut self) -> PResult<NodeId> {
        self.compound_with(Vec::new())
    }

    fn compound_with(&mut self, mut elems: Vec<Element>) -> PResult<NodeId> {
        self.expect(&mut elems, "{")?;
        loop {
            self.trivia(&mut elems);
            match self.sig(0) {
                None => return Err(self.error("`}`")),
                Some(t) if t.is("}") => break,
                _ => {
                    let s = self.statement()?;
                    elems.push(Element::Node(s));
                }
            }
        }
        self.bump(&mut elems)?;
        Ok(self.node(NodeKind::Compound, elems))
    }

    fn paren_expr(&mut self, elems: &mut Vec<Element>) -> PResult<()> {
        self.expect(elems, "(")?;
        self.child(elems, |p| p.expr(&[")"]))?;
        self.expect(elems, ")")
    }

    fn for_stmt(&mut self, mut elems: Vec<Element>) -> PResult<NodeId> {
        self.bump(&mut elems)?;
        self.expect(&mut elems, "(")?;
        if self.starts_declaration() {
            self.child(&mut elems, |p| p.local_declaration())?;
        } else {
            if !self.at(";") {
                self.child(&mut elems, |p| p.expr(&[";"]))?;
            }
            self.expect(&mut elems, ";")?;
        }
        if !self.at(";") {
            self.child(&mut elems, |p| p.expr(&[";"]))?;
        }
        self.expect(&mut elems, ";")?;
        if !self.at(")") {
            self.child(&mut elems, |p| p.expr(&[")"]))?;
        }
        self.expect(&mut elems, ")")?;
        self.child(&mut elems, |p| p.statement())?;
        Ok(self.node(NodeKind::For, elems))
    }

    fn while_stmt(&mut self, mut elems: Vec<Element>) -> PResult<NodeId> {
        self.bump(&mut elems)?;
        self.paren_expr(&mut elems)?;
        self.child(&mut elems, |p| p.statement())?;
        Ok(self.node(NodeKind::While, elems))
    }

    fn do_stmt(&mut self, mut elems: Vec<Element>) -> PResult<NodeId> {
        self.bump(&mut elems)?;
        self.child(&mut elems, |p| p.statement())?;
        self.expect(&mut elems, "while")?;
        self.paren_expr(&mut elems)?;
        self.expect(&mut elems, ";")?;
        Ok(self.node(NodeKind::DoWhile, elems))
    }

    fn if_stmt(&mut self, mut elems: Vec<Element>) -> PResult<NodeId> {
        self.bump(&mut elems)?;
        self.paren_expr(&mut elems)?;
        self.child(&mut elems, |p| p.statement())?;
        if self.at("else") {
            self.bump(&mut elems)?;
            self.child(&mut elems, |p| p.statement())?;
        }
        Ok(self.node(NodeKind::If, elems))
    }

    fn switch_stmt(&mut self, mut elems: Vec<Element>) -> PResult<NodeId> {
        self.bump(&mut elems)?;
        self.paren_expr(&mut elems)?;
        self.child(&mut elems, |p| p.statement())?;
        Ok(self.node(NodeKind::Switch, elems))
    }

    fn return_stmt(&mut self, mut elems: Vec<Element>) -> PResult<NodeId> {
        self.bump(&mut elems)?;
        if !self.at(";") {
            self.child(&mut elems, |p| p.expr(&[";"]))?;
        }
        self.expect(&mut elems, ";")?;
        Ok(self.node(NodeKind::Return, elems))
    }

    // ---- expressions --------------------------------------------------

    /// Opaque expression up to one of `stops` at nesting depth zero.
    /// Calls and variable references become child nodes.
    fn expr(&mut self, stops: &[&str]) -> PResult<NodeId> {
        let mut elems = Vec::new();
        let mut depth = 0usize;
        let mut pending_ternary = 0usize;
        let mut prev_member_op = false;
        let mut consumed_any = false;
        loop {
            let Some(t) = self.sig(0) else {
                if stops.is_empty() && depth == 0 {
                    break;
                }
                return Err(self.error(&expected_list(stops)));
            };
            if depth == 0 && stops.iter().any(|s| t.is(s)) {
                if t.is(":") && pending_ternary > 0 {
                    pending_ternary -= 1;
                } else {
                    break;
                }
            } else if depth == 0 && t.is(":") && pending_ternary > 0 {
                pending_ternary -= 1;
            }
            let t = t.clone();
            if t.is(";") && depth > 0 {
                return Err(self.error(&expected_list(stops)));
            }
            if t.kind == TokenKind::Ident && !prev_member_op && !self.ast.is_typedef_name(&t.text) {
                if self.at_n(1, "(") {
                    self.child(&mut elems, |p| p.call())?;
                } else {
                    self.child(&mut elems, |p| p.single_token_node(NodeKind::VarRef))?;
                }
                prev_member_op = false;
                consumed_any = true;
                continue;
            }
            if matches!(t.text.as_str(), "(" | "[" | "{") && t.kind == TokenKind::Punct {
                depth += 1;
            } else if matches!(t.text.as_str(), ")" | "]" | "}") && t.kind == TokenKind::Punct {
                if depth == 0 {
                    return Err(self.error(&expected_list(stops)));
                }
                depth -= 1;
            } else if t.is("?") && depth == 0 {
                pending_ternary += 1;
            }
            prev_member_op = t.is(".") || t.is("->");
            self.bump(&mut elems)?;
            consumed_any = true;
        }
        if !consumed_any {
            return Err(self.error("expression"));
        }
        Ok(self.node(NodeKind::Expr, elems))
    }

    fn call(&mut self) -> PResult<NodeId> {
        let mut elems = Vec::new();
        self.bump(&mut elems)?;
        self.expect(&mut elems, "(")?;
        if !self.at(")") {
            loop {
                self.child(&mut elems, |p| p.expr(&[",", ")"]))?;
                if self.at(",") {
                    self.bump(&mut elems)?;
                } else {
                    break;
                }
            }
        }
        self.expect(&mut elems, ")")?;
        Ok(self.node(NodeKind::Call, elems))
    }
}

fn expected_list(stops: &[&str]) -> String {
    stops
        .iter()
        .map(|s| format!("`{s}`"))
        .collect::<Vec<_>>()
        .join(" or ")
}

/// Name introduced by a declarator node, if it has one.
pub(crate) fn declarator_name_of(ast: &Ast, id: NodeId) -> Option<String> {
    if ast.kind(id) != NodeKind::Declarator {
        return None;
    }
    for e in &ast.node(id).elems {
        match e {
            Element::Token(t) if t.kind == TokenKind::Ident => return Some(t.text.clone()),
            Element::Token(t) if t.is("[") || t.is("(") || t.is("=") => return None,
            Element::Node(_) => return None,
            _ => {}
        }
    }
    None
}
