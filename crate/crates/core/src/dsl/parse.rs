use std::str::FromStr;

use crate::weave::{FilterOp, JpKind, Place};

use super::ast::*;
use super::DslError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Dollar(String),
    Str(String),
    Num(i64),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Lexeme {
    tok: Tok,
    line: u32,
    col: u32,
}

const SYMBOLS: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "<", ">", "!", ":", ".", "{", "}", "(", ")", ",", "=",
];

fn lex(text: &str) -> Result<Vec<Lexeme>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let err = |line, col, msg: String| DslError::Syntax { line, col, message: msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for k in 0..n {
                if chars[*i + k] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            *i += n;
        };
        if c.is_whitespace() {
            advance(1, &mut i);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            let n = chars[i..].iter().take_while(|c| **c != '\n').count();
            advance(n, &mut i);
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            let rest: String = chars[i + 2..].iter().collect();
            let Some(end) = rest.find("*/") else {
                return Err(err(l0, c0, "unterminated comment".into()));
            };
            let n = rest[..end].chars().count() + 4;
            advance(n, &mut i);
        } else if c == '"' {
            let mut s = String::new();
            let mut j = i + 1;
            loop {
                match chars.get(j) {
                    None => return Err(err(l0, c0, "unterminated string".into())),
                    Some('"') => break,
                    Some('\\') => {
                        let e = chars.get(j + 1).copied();
                        s.push(match e {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('"') => '"',
                            Some('\\') => '\\',
                            _ => return Err(err(line, col, "bad escape in string".into())),
                        });
                        j += 2;
                    }
                    Some(ch) => {
                        s.push(*ch);
                        j += 1;
                    }
                }
            }
            advance(j + 1 - i, &mut i);
            out.push(Lexeme { tok: Tok::Str(s), line: l0, col: c0 });
        } else if c == '$' || c.is_ascii_alphabetic() || c == '_' {
            let start = if c == '$' { i + 1 } else { i };
            let n = chars[start..]
                .iter()
                .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
                .count();
            if n == 0 {
                return Err(err(l0, c0, "`$` must be followed by a name".into()));
            }
            let word: String = chars[start..start + n].iter().collect();
            advance(start + n - i, &mut i);
            out.push(Lexeme {
                tok: if c == '$' { Tok::Dollar(word) } else { Tok::Word(word) },
                line: l0,
                col: c0,
            });
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let n = 1 + chars[i + 1..].iter().take_while(|c| c.is_ascii_digit()).count();
            let s: String = chars[i..i + n].iter().collect();
            let v = s.parse().map_err(|_| err(l0, c0, format!("number `{s}` out of range")))?;
            advance(n, &mut i);
            out.push(Lexeme { tok: Tok::Num(v), line: l0, col: c0 });
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
                return Err(err(l0, c0, format!("unexpected character `{c}`")));
            };
            advance(sym.len(), &mut i);
            out.push(Lexeme { tok: Tok::Sym(sym), line: l0, col: c0 });
        }
    }
    Ok(out)
}

/// Splits `%{...}` holes out of a string literal.
fn interpolate(s: &str, line: u32, col: u32, inputs: &[String]) -> Result<Vec<Piece>, DslError> {
    let mut pieces = Vec::new();
    let mut rest = s;
    while let Some(start) = rest.find("%{") {
        if start > 0 {
            pieces.push(Piece::Lit(rest[..start].to_string()));
        }
        let after = &rest[start + 2..];
        let Some(end) = after.find('}') else {
            return Err(DslError::Syntax { line, col, message: "unterminated `%{` in string".into() });
        };
        let inner = after[..end].trim();
        let name = inner.strip_prefix('$').ok_or_else(|| DslError::Syntax {
            line,
            col,
            message: format!("`%{{{inner}}}` must name `$input` or `$binding.attr`"),
        })?;
        let op = match name.split_once('.') {
            Some((b, a)) => Operand::Attr(b.to_string(), a.to_string()),
            None if inputs.iter().any(|i| i == name) => Operand::Param(name.to_string()),
            None => {
                return Err(DslError::UnknownBinding { line, name: format!("${name}") });
            }
        };
        pieces.push(Piece::Hole(op));
        rest = &after[end + 1..];
    }
    if !rest.is_empty() || pieces.is_empty() {
        pieces.push(Piece::Lit(rest.to_string()));
    }
    Ok(pieces)
}

struct Parser {
    toks: Vec<Lexeme>,
    pos: usize,
    inputs: Vec<String>,
}

type PResult<T> = Result<T, DslError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|l| &l.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or((1, 1), |l| (l.line, l.col))
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        let found = match self.peek() {
            None => "end of file".to_string(),
            Some(Tok::Word(w)) => format!("`{w}`"),
            Some(Tok::Dollar(w)) => format!("`${w}`"),
            Some(Tok::Str(_)) => "a string".to_string(),
            Some(Tok::Num(n)) => format!("`{n}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
        };
        Err(DslError::Syntax { line, col, message: format!("{}, found {found}", message.into()) })
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let hit = self.is_word(w);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.error(format!("expected `{w}`"))
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Word(w)) if !is_reserved(w) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    fn program(&mut self) -> PResult<AspectProgram> {
        let mut aspects = Vec::new();
        while self.peek().is_some() {
            aspects.push(self.aspect()?);
        }
        if aspects.is_empty() {
            return self.error("expected `aspectdef`");
        }
        Ok(AspectProgram { aspects })
    }

    fn aspect(&mut self) -> PResult<Aspect> {
        let line = self.here().0;
        self.expect_word("aspectdef")?;
        let name = self.name("an aspect name")?;
        let mut inputs = Vec::new();
        self.inputs.clear();
        if self.eat_word("input") {
            loop {
                let Some(Tok::Dollar(n)) = self.peek().cloned() else {
                    return self.error("expected an input like `$name`");
                };
                self.pos += 1;
                if inputs.iter().any(|i: &Input| i.name == n) {
                    return self.error(format!("input `${n}` declared twice"));
                }
                self.inputs.push(n.clone());
                let default = if self.eat_sym("=") { Some(self.literal()?) } else { None };
                inputs.push(Input { name: n, default });
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_word("end")?;
        }
        let mut members = Vec::new();
        while !self.is_word("end") {
            members.push(self.member()?);
        }
        self.expect_word("end")?;
        Ok(Aspect { name, line, inputs, members })
    }

    fn literal(&mut self) -> PResult<Operand> {
        let (line, col) = self.here();
        match self.peek().cloned() {
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Operand::Str(interpolate(&s, line, col, &self.inputs)?))
            }
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Operand::Num(n))
            }
            Some(Tok::Word(w)) if w == "true" || w == "false" => {
                self.pos += 1;
                Ok(Operand::Bool(w == "true"))
            }
            _ => self.error("expected a string, number, true or false"),
        }
    }

    fn operand(&mut self) -> PResult<Operand> {
        let line = self.here().0;
        if let Some(Tok::Dollar(n)) = self.peek().cloned() {
            self.pos += 1;
            if self.eat_sym(".") {
                let attr = self.name("an attribute name")?;
                return Ok(Operand::Attr(n, attr));
            }
            if self.inputs.contains(&n) {
                return Ok(Operand::Param(n));
            }
            return Err(DslError::UnknownBinding { line, name: format!("${n}") });
        }
        self.literal()
    }

    fn member(&mut self) -> PResult<Member> {
        let line = self.here().0;
        if self.eat_word("select") {
            let name = self.name("a select name")?;
            self.expect_sym(":")?;
            let mut steps = vec![self.step()?];
            while self.eat_sym(".") {
                steps.push(self.step()?);
            }
            self.expect_word("end")?;
            return Ok(Member::Select(SelectDecl { name, line, steps }));
        }
        if self.eat_word("apply") {
            self.expect_word("to")?;
            let select = self.name("a select name")?;
            let cond = if self.eat_word("if") { Some(self.cond()?) } else { None };
            let mut actions = Vec::new();
            while !self.is_word("end") {
                actions.push(self.action()?);
            }
            if actions.is_empty() {
                return self.error("expected an action");
            }
            self.expect_word("end")?;
            return Ok(Member::Apply(Apply { select, line, cond, actions }));
        }
        if self.eat_word("call") {
            let aspect = self.name("an aspect name")?;
            self.expect_sym("(")?;
            let mut args = Vec::new();
            if !self.eat_sym(")") {
                loop {
                    let named = match (self.peek().cloned(), self.peek_at(1)) {
                        (Some(Tok::Word(w)), Some(Tok::Sym("="))) if !is_reserved(&w) => {
                            self.pos += 2;
                            Some(w)
                        }
                        _ => None,
                    };
                    args.push((named, self.operand()?));
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
            return Ok(Member::Call(CallAspect { aspect, line, args }));
        }
        self.error("expected `select`, `apply`, `call` or `end`")
    }

    fn step(&mut self) -> PResult<StepSpec> {
        let w = match self.peek() {
            Some(Tok::Word(w)) => w.clone(),
            _ => return self.error("expected a join point kind"),
        };
        self.pos += 1;
        let Ok(kind) = JpKind::from_str(&w) else {
            self.pos -= 1;
            return self.error(format!("`{w}` is not a join point kind"));
        };
        let filter = if self.eat_sym("{") {
            let attr = self.name("an attribute name")?;
            if !kind.attributes().contains(&attr.as_str()) {
                self.pos -= 1;
                return self.error(format!("`{kind}` has no attribute `{attr}`"));
            }
            let op = if self.eat_sym("==") {
                FilterOp::Eq
            } else if self.eat_sym("!=") {
                FilterOp::Ne
            } else if self.eat_word("contains") {
                FilterOp::Contains
            } else {
                return self.error("expected `==`, `!=` or `contains`");
            };
            let value = self.operand()?;
            if matches!(value, Operand::Attr(..)) {
                return self.error("filters compare with a literal or an input");
            }
            self.expect_sym("}")?;
            Some((attr, op, value))
        } else {
            None
        };
        Ok(StepSpec { kind, filter })
    }

    fn cond(&mut self) -> PResult<Cond> {
        let mut left = self.cond_and()?;
        while self.eat_sym("||") {
            left = Cond::Or(Box::new(left), Box::new(self.cond_and()?));
        }
        Ok(left)
    }

    fn cond_and(&mut self) -> PResult<Cond> {
        let mut left = self.cond_not()?;
        while self.eat_sym("&&") {
            left = Cond::And(Box::new(left), Box::new(self.cond_not()?));
        }
        Ok(left)
    }

    fn cond_not(&mut self) -> PResult<Cond> {
        if self.eat_sym("!") {
            return Ok(Cond::Not(Box::new(self.cond_not()?)));
        }
        if self.eat_sym("(") {
            let c = self.cond()?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        let a = self.operand()?;
        let op = match self.peek() {
            Some(Tok::Sym("==")) => CmpOp::Eq,
            Some(Tok::Sym("!=")) => CmpOp::Ne,
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            Some(Tok::Word(w)) if w == "contains" => CmpOp::Contains,
            _ => return Ok(Cond::Truthy(a)),
        };
        self.pos += 1;
        let b = self.operand()?;
        Ok(Cond::Cmp(a, op, b))
    }

    fn action(&mut self) -> PResult<Action> {
        let line = self.here().0;
        let target = |p: &mut Parser| -> Option<String> {
            if let Some(Tok::Dollar(n)) = p.peek().cloned() {
                if !p.inputs.contains(&n) {
                    p.pos += 1;
                    return Some(n);
                }
            }
            None
        };
        if self.eat_word("insert") {
            let place = if self.eat_word("before") {
                Place::Before
            } else if self.eat_word("after") {
                Place::After
            } else if self.eat_word("replace") {
                Place::Replace
            } else {
                return self.error("expected `before`, `after` or `replace`");
            };
            let t = target(self);
            let text = self.operand()?;
            return Ok(Action { line, target: t, kind: ActionKind::Insert(place, text) });
        }
        if self.eat_word("setType") {
            let t = target(self);
            let text = self.operand()?;
            return Ok(Action { line, target: t, kind: ActionKind::SetType(text) });
        }
        if self.eat_word("clone") {
            let t = target(self);
            let text = self.operand()?;
            return Ok(Action { line, target: t, kind: ActionKind::Clone(text) });
        }
        let name = self.name("an action")?;
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.eat_sym(")") {
            loop {
                args.push(self.operand()?);
                if self.eat_sym(")") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        let t = if self.eat_word("on") {
            match target(self) {
                Some(t) => Some(t),
                None => return self.error("expected a join point like `$function` after `on`"),
            }
        } else {
            None
        };
        Ok(Action { line, target: t, kind: ActionKind::Builtin(name, args) })
    }
}

fn is_reserved(w: &str) -> bool {
    matches!(
        w,
        "aspectdef" | "input" | "end" | "select" | "apply" | "to" | "if" | "call" | "insert" | "before"
            | "after" | "replace" | "setType" | "clone" | "contains" | "true" | "false" | "on"
    )
}

/// Parses an aspect file (syntax only; see [`super::validate`]).
pub(crate) fn parse_program(text: &str) -> Result<AspectProgram, DslError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, inputs: Vec::new() };
    p.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_aspect() {
        let p = parse_program(
            "aspectdef A\n  select s: function{name == \"f\"}.call end\n  apply to s insert before \"t();\" end\nend\n",
        )
        .unwrap();
        assert_eq!(p.aspects.len(), 1);
        let a = &p.aspects[0];
        assert_eq!(a.members.len(), 2);
        assert_eq!(a.sloc(), 3);
    }

    #[test]
    fn inputs_conditions_and_holes() {
        let src = r#"
aspectdef T
  input $func, $tag = "x" end
  select s: function{name == $func}.loop.loop end
  apply to s if $loop2.isInnermost && !($loop.kind == "while") || $tag contains "y"
    insert before $loop2 "// %{$tag} at %{$loop2.line}"
    changeType("double", "float") on $function
  end
  call Other(1, name = true)
end
"#;
        let p = parse_program(src).unwrap();
        let a = &p.aspects[0];
        assert_eq!(a.inputs.len(), 2);
        let Member::Select(s) = &a.members[0] else { panic!() };
        assert_eq!(s.bindings(), ["function", "loop", "loop2"]);
        let Member::Apply(ap) = &a.members[1] else { panic!() };
        assert!(matches!(ap.cond, Some(Cond::Or(..))));
        assert_eq!(ap.actions[0].target.as_deref(), Some("loop2"));
        assert_eq!(
            ap.actions[0].kind,
            ActionKind::Insert(
                Place::Before,
                Operand::Str(vec![
                    Piece::Lit("// ".into()),
                    Piece::Hole(Operand::Param("tag".into())),
                    Piece::Lit(" at ".into()),
                    Piece::Hole(Operand::Attr("loop2".into(), "line".into())),
                ])
            )
        );
        assert_eq!(ap.actions[1].target.as_deref(), Some("function"));
        assert_eq!(a.sloc(), 2 + 1 + 1 + 2 + 1 + 1);
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse_program("aspectdef A\n  select s: function{nme == \"f\"} end\nend").unwrap_err();
        assert!(matches!(e, DslError::Syntax { line: 2, .. }), "{e}");
        let e = parse_program("aspectdef A\n  apply to s\n  end\nend").unwrap_err();
        assert!(matches!(e, DslError::Syntax { line: 3, .. }), "{e}");
        let e = parse_program("aspectdef A select s: function end apply to s insert before $nope \"x\" end end");
        assert!(e.is_ok(), "binding names are checked later");
        let e = parse_program("aspectdef A input $a end call B($b) end").unwrap_err();
        assert!(matches!(e, DslError::UnknownBinding { .. }));
    }
}
