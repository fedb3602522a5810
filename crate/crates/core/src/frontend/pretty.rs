use super::lexer::lex;
use super::token::{Token, TokenKind};
use super::FrontendError;

/// Lays out generated code: one statement per line, four spaces per block
/// level on top of `indent`. The first line carries no indentation so the
/// caller can place it after existing text.
pub fn format_fragment(text: &str, indent: &str) -> Result<String, FrontendError> {
    let toks = lex(text)?;
    let mut f = Formatter {
        out: String::new(),
        indent: indent.to_string(),
        level: 0,
        line_open: false,
        pending_space: false,
        paren: 0,
        braces: Vec::new(),
        in_label: false,
        closed_block: false,
        prev: None,
    };
    for t in &toks {
        f.token(t);
    }
    Ok(f.out.trim_end().to_string())
}

struct Formatter {
    out: String,
    indent: String,
    level: usize,
    /// Something was written on the current line.
    line_open: bool,
    pending_space: bool,
    paren: usize,
    /// For each open brace: true when it opens a block, false for an
    /// initializer list.
    braces: Vec<bool>,
    in_label: bool,
    /// The last `}` closed a block rather than an initializer.
    closed_block: bool,
    prev: Option<Token>,
}

impl Formatter {
    fn newline(&mut self) {
        if self.line_open {
            self.out.push('\n');
            self.line_open = false;
        }
        self.pending_space = false;
    }

    fn write(&mut self, text: &str) {
        if !self.line_open {
            if !self.out.is_empty() {
                self.out.push_str(&self.indent);
                for _ in 0..self.level {
                    self.out.push_str("    ");
                }
            }
            self.line_open = true;
        } else if self.pending_space {
            self.out.push(' ');
        }
        self.pending_space = false;
        self.out.push_str(text);
    }

    fn token(&mut self, t: &Token) {
        match t.kind {
            TokenKind::Whitespace => {
                self.pending_space = true;
                return;
            }
            TokenKind::Pragma | TokenKind::Directive => {
                self.newline();
                self.write(t.text.trim());
                self.newline();
                self.prev = Some(t.clone());
                return;
            }
            TokenKind::Comment => {
                self.write(&t.text);
                if t.text.starts_with("//") {
                    self.newline();
                }
                return;
            }
            _ => {}
        }
        let in_block = self.braces.last().copied().unwrap_or(true);
        if t.is("{") {
            let block = self.paren == 0
                && in_block
                && !self
                    .prev
                    .as_ref()
                    .is_some_and(|p| p.is("=") || p.is(",") || p.is("{"));
            self.braces.push(block);
            if block {
                self.write("{");
                self.level += 1;
                self.newline();
            } else {
                self.write("{");
            }
        } else if t.is("}") {
            let block = self.braces.pop().unwrap_or(true);
            self.closed_block = block;
            if block {
                self.newline();
                self.level = self.level.saturating_sub(1);
                self.write("}");
                self.line_open = true;
                self.pending_space = false;
            } else {
                self.write("}");
            }
        } else {
            let after_block_close =
                self.prev.as_ref().is_some_and(|p| p.is("}")) && self.closed_block;
            if after_block_close && !(t.is("else") || t.is("while") || t.is(";") || t.is(",")) {
                self.newline();
            } else if after_block_close {
                self.pending_space = !(t.is(";") || t.is(","));
            }
            self.write(&t.text);
            if t.is("(") || t.is("[") {
                self.paren += 1;
            } else if (t.is(")") || t.is("]")) && self.paren > 0 {
                self.paren -= 1;
            } else if t.is("case") || t.is("default") {
                self.in_label = true;
            } else if t.is(":") && self.in_label && self.paren == 0 {
                self.in_label = false;
                self.newline();
            } else if t.is(";") && self.paren == 0 && in_block {
                self.newline();
            }
        }
        self.prev = Some(t.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_statement_per_line() {
        let s = format_fragment("double t0 = now(); f(x);", "    ").unwrap();
        assert_eq!(s, "double t0 = now();\n    f(x);");
    }

    #[test]
    fn blocks_indent() {
        let s = format_fragment("switch (K) { case 0: { f(x); } break; default: g(); }", "").unwrap();
        assert_eq!(
            s,
            "switch (K) {\n    case 0:\n    {\n        f(x);\n    }\n    break;\n    default:\n    g();\n}"
        );
    }

    #[test]
    fn else_stays_on_closing_line() {
        let s = format_fragment("if (a) { b(); } else { c(); }", "").unwrap();
        assert_eq!(s, "if (a) {\n    b();\n} else {\n    c();\n}");
    }

    #[test]
    fn initializers_inline() {
        let s = format_fragment("double v[2] = {1.0, 2.0}; int k;", "").unwrap();
        assert_eq!(s, "double v[2] = {1.0, 2.0};\nint k;");
    }

    #[test]
    fn for_header_semicolons_do_not_break() {
        let s = format_fragment("for (i = 0; i < n; i++) a[i] = 0;", "").unwrap();
        assert_eq!(s, "for (i = 0; i < n; i++) a[i] = 0;");
    }
}
