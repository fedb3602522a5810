use super::token::{is_keyword, Pos, Token, TokenKind};
use super::FrontendError;

const PUNCTUATORS: &[&str] = &[
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "*=",
    "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##", "[", "]", "(", ")", "{", "}", ".", "&", "*",
    "+", "-", "~", "!", "/", "%", "<", ">", "^", "|", "?", ":", ";", "=", ",", "#",
];

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
    /// True while only whitespace has been seen since the last newline.
    line_start: bool,
    out: Vec<Token>,
}

/// Splits `src` into tokens; concatenating their texts yields `src` again.
pub fn lex(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut lx = Lexer {
        src,
        bytes: src.as_bytes(),
        at: 0,
        line: 1,
        col: 1,
        line_start: true,
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

impl<'a> Lexer<'a> {
    fn peek(&self, off: usize) -> u8 {
        self.bytes.get(self.at + off).copied().unwrap_or(0)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn error(&self, expected: &str) -> FrontendError {
        FrontendError::Syntax {
            line: self.line,
            col: self.col,
            expected: expected.to_string(),
        }
    }

    fn emit(&mut self, kind: TokenKind, start: usize, pos: Pos) {
        let text = &self.src[start..self.at];
        for ch in text.chars() {
            if ch == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        self.out.push(Token::new(kind, text, Some(pos)));
    }

    fn run(&mut self) -> Result<(), FrontendError> {
        while self.at < self.bytes.len() {
            let start = self.at;
            let pos = self.pos();
            let c = self.peek(0);
            if c.is_ascii_whitespace() || (c == b'\\' && matches!(self.peek(1), b'\n' | b'\r')) {
                let mut saw_newline = false;
                loop {
                    let c = self.peek(0);
                    if c == b'\n' {
                        saw_newline = true;
                        self.at += 1;
                    } else if matches!(c, b' ' | b'\t' | b'\r' | 0x0b | 0x0c)
                        || (c == b'\\' && matches!(self.peek(1), b'\n' | b'\r'))
                    {
                        self.at += 1;
                    } else {
                        break;
                    }
                }
                self.emit(TokenKind::Whitespace, start, pos);
                if saw_newline {
                    self.line_start = true;
                }
                continue;
            }
            if c == b'/' && self.peek(1) == b'/' {
                while self.at < self.bytes.len() && self.peek(0) != b'\n' {
                    self.at += 1;
                }
                self.emit(TokenKind::Comment, start, pos);
                continue;
            }
            if c == b'/' && self.peek(1) == b'*' {
                self.skip_block_comment()?;
                self.emit(TokenKind::Comment, start, pos);
                continue;
            }
            if c == b'#' && self.line_start {
                self.scan_directive_line()?;
                let text = &self.src[start..self.at];
                let kind = if directive_name(text) == "pragma" {
                    TokenKind::Pragma
                } else {
                    TokenKind::Directive
                };
                self.emit(kind, start, pos);
                continue;
            }
            self.line_start = false;
            if c == b'_' || c.is_ascii_alphabetic() {
                // String/char prefixes: L"..", u8"..", u'..', U".."
                let prefix_len = match (c, self.peek(1), self.peek(2)) {
                    (b'u', b'8', b'"') => 2,
                    (b'L' | b'u' | b'U', b'"' | b'\'', _) => 1,
                    _ => 0,
                };
                if prefix_len > 0 {
                    self.at += prefix_len;
                    let quote = self.peek(0);
                    self.scan_quoted(quote)?;
                    let kind = if quote == b'"' {
                        TokenKind::StringLit
                    } else {
                        TokenKind::CharLit
                    };
                    self.emit(kind, start, pos);
                    continue;
                }
                while self.peek(0) == b'_' || self.peek(0).is_ascii_alphanumeric() {
                    self.at += 1;
                }
                let kind = if is_keyword(&self.src[start..self.at]) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Ident
                };
                self.emit(kind, start, pos);
                continue;
            }
            if c.is_ascii_digit() || (c == b'.' && self.peek(1).is_ascii_digit()) {
                self.scan_number();
                self.emit(TokenKind::Number, start, pos);
                continue;
            }
            if c == b'"' || c == b'\'' {
                self.scan_quoted(c)?;
                let kind = if c == b'"' {
                    TokenKind::StringLit
                } else {
                    TokenKind::CharLit
                };
                self.emit(kind, start, pos);
                continue;
            }
            let rest = &self.src[self.at..];
            match PUNCTUATORS.iter().find(|p| rest.starts_with(**p)) {
                Some(p) => {
                    self.at += p.len();
                    self.emit(TokenKind::Punct, start, pos);
                }
                None => return Err(self.error("token")),
            }
        }
        Ok(())
    }

    fn skip_block_comment(&mut self) -> Result<(), FrontendError> {
        let err = self.error("end of comment `*/`");
        self.at += 2;
        loop {
            if self.at >= self.bytes.len() {
                return Err(err);
            }
            if self.peek(0) == b'*' && self.peek(1) == b'/' {
                self.at += 2;
                return Ok(());
            }
            self.at += 1;
        }
    }

    /// Consumes a preprocessor line up to (not including) its newline,
    /// following backslash continuations and block comments.
    fn scan_directive_line(&mut self) -> Result<(), FrontendError> {
        while self.at < self.bytes.len() {
            match self.peek(0) {
                b'\n' => break,
                b'\\' if self.peek(1) == b'\n' => self.at += 2,
                b'\\' if self.peek(1) == b'\r' && self.peek(2) == b'\n' => self.at += 3,
                b'/' if self.peek(1) == b'*' => self.skip_block_comment()?,
                b'\r' if self.peek(1) == b'\n' => break,
                _ => self.at += 1,
            }
        }
        Ok(())
    }

    fn scan_quoted(&mut self, quote: u8) -> Result<(), FrontendError> {
        let err = self.error(if quote == b'"' {
            "closing `\"`"
        } else {
            "closing `'`"
        });
        self.at += 1;
        loop {
            match self.peek(0) {
                0 if self.at >= self.bytes.len() => return Err(err),
                b'\n' => return Err(err),
                b'\\' => self.at += 2,
                c if c == quote => {
                    self.at += 1;
                    return Ok(());
                }
                _ => self.at += 1,
            }
        }
    }

    fn scan_number(&mut self) {
        loop {
            let c = self.peek(0);
            if matches!(c, b'e' | b'E' | b'p' | b'P') && matches!(self.peek(1), b'+' | b'-') {
                self.at += 2;
            } else if c == b'.' || c == b'_' || c.is_ascii_alphanumeric() {
                self.at += 1;
            } else {
                break;
            }
        }
    }
}

/// Name of a preprocessor directive (`include`, `pragma`, ...).
pub fn directive_name(text: &str) -> &str {
    let rest = text.trim_start().trim_start_matches('#').trim_start();
    let end = rest
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(rest.len());
    &rest[..end]
}

/// True for floating constants such as `1.0`, `2e3`, `.5f`, `0x1p-3`.
pub fn is_floating_literal(text: &str) -> bool {
    let lower = text.to_ascii_lowercase();
    if lower.starts_with("0x") {
        return lower.contains('p');
    }
    lower.contains('.') || lower.contains('e')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        lex(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn concatenation_is_lossless() {
        let src = "#include <math.h>\n/* c */ int main(void) {\n  return a->b >>= 2; // x\n}\n";
        let text: String = lex(src).unwrap().iter().map(|t| t.text.as_str()).collect();
        assert_eq!(text, src);
    }

    #[test]
    fn pragma_and_directive_lines() {
        let toks = kinds("  #pragma omp parallel for \\\n  reduction(+:s)\n#define X 1\n");
        assert_eq!(toks[1].0, TokenKind::Pragma);
        assert!(toks[1].1.contains("reduction"));
        assert_eq!(toks[3].0, TokenKind::Directive);
    }

    #[test]
    fn hash_inside_line_is_punct() {
        let toks = kinds("a # b");
        assert_eq!(toks[2], (TokenKind::Punct, "#".into()));
    }

    #[test]
    fn numbers_and_literals() {
        let toks = kinds("1.5e-3f 0x1Fu 'a' L\"w\" .5");
        assert_eq!(toks[0], (TokenKind::Number, "1.5e-3f".into()));
        assert_eq!(toks[2], (TokenKind::Number, "0x1Fu".into()));
        assert_eq!(toks[4].0, TokenKind::CharLit);
        assert_eq!(toks[6], (TokenKind::StringLit, "L\"w\"".into()));
        assert_eq!(toks[8], (TokenKind::Number, ".5".into()));
    }

    #[test]
    fn positions_are_one_based() {
        let toks = lex("int\n  x;").unwrap();
        assert_eq!(toks[2].pos, Some(Pos { line: 2, col: 3 }));
    }

    #[test]
    fn unterminated_comment_is_an_error() {
        match lex("int x; /* oops") {
            Err(FrontendError::Syntax { line: 1, col: 8, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn floating_literal_detection() {
        assert!(is_floating_literal("1.0"));
        assert!(is_floating_literal("1e9"));
        assert!(is_floating_literal("0x1p3"));
        assert!(!is_floating_literal("0xE"));
        assert!(!is_floating_literal("42"));
    }
}
