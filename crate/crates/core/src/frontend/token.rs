use std::fmt;

/// Lexical category of a [`Token`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Keyword,
    /// Integer or floating constant (a C preprocessing number).
    Number,
    CharLit,
    StringLit,
    Punct,
    /// A whole `#pragma` line, continuation lines included.
    Pragma,
    /// Any other preprocessor line, passed through untouched.
    Directive,
    Comment,
    Whitespace,
}

impl TokenKind {
    /// Whitespace and comments.
    pub fn is_trivia(self) -> bool {
        matches!(self, TokenKind::Whitespace | TokenKind::Comment)
    }

    pub fn is_literal(self) -> bool {
        matches!(
            self,
            TokenKind::Number | TokenKind::CharLit | TokenKind::StringLit
        )
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// One lexeme with its exact source text.
///
/// Tokens produced by the weaver (clones, inserted fragments) carry no
/// position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub pos: Option<Pos>,
}

impl Token {
    pub fn new(kind: TokenKind, text: impl Into<String>, pos: Option<Pos>) -> Self {
        Token {
            kind,
            text: text.into(),
            pos,
        }
    }

    pub fn synthetic(kind: TokenKind, text: impl Into<String>) -> Self {
        Token::new(kind, text, None)
    }

    pub fn is(&self, punct: &str) -> bool {
        matches!(self.kind, TokenKind::Punct | TokenKind::Keyword) && self.text == punct
    }

    pub fn is_trivia(&self) -> bool {
        self.kind.is_trivia()
    }

    pub fn line(&self) -> Option<u32> {
        self.pos.map(|p| p.line)
    }
}

pub const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "_Bool", "_Complex", "_Imaginary",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Keywords that name (part of) a basic type.
pub const TYPE_KEYWORDS: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool",
    "_Complex",
];

pub const QUALIFIERS: &[&str] = &["const", "volatile", "restrict"];

pub const STORAGE_CLASSES: &[&str] = &["typedef", "extern", "static", "auto", "register", "inline"];

/// Type names from the standard headers that the parser treats as typedefs
/// without seeing their definitions.
pub const WELL_KNOWN_TYPEDEFS: &[&str] = &[
    "size_t", "ssize_t", "ptrdiff_t", "FILE", "int8_t", "int16_t", "int32_t", "int64_t",
    "uint8_t", "uint16_t", "uint32_t", "uint64_t", "intptr_t", "uintptr_t", "bool", "time_t",
    "clock_t", "va_list", "wchar_t", "off_t", "intmax_t", "uintmax_t",
];
