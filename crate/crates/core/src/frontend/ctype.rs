use std::fmt;

use super::lexer::lex;
use super::token::{TokenKind, QUALIFIERS};
use super::FrontendError;

/// Qualifiers on one level of indirection (`* const`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PointerLevel {
    pub is_const: bool,
    pub is_volatile: bool,
    pub is_restrict: bool,
}

/// A declared C type split into base type and declarator suffixes.
///
/// Rendering is canonical: qualifiers first, base specifiers in a fixed
/// order, `*` attached to the base (`double*`), array extents last
/// (`float[8]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CType {
    /// `const`/`volatile` on the base type, in that order.
    pub qualifiers: Vec<String>,
    /// Base type specifiers, e.g. `unsigned long`, `struct node`, `real`.
    pub base: String,
    pub pointers: Vec<PointerLevel>,
    /// Array extents outermost first; an empty string is `[]`.
    pub arrays: Vec<String>,
}

const SPEC_ORDER: &[&str] = &[
    "signed", "unsigned", "short", "long", "char", "int", "_Bool", "float", "double", "void",
    "_Complex",
];

/// Orders basic type specifiers canonically (`long unsigned` → `unsigned long`).
pub(crate) fn canonical_base(words: &[&str]) -> String {
    if words.iter().all(|w| SPEC_ORDER.contains(w)) {
        let mut sorted: Vec<&str> = words.to_vec();
        sorted.sort_by_key(|w| SPEC_ORDER.iter().position(|s| s == w));
        sorted.join(" ")
    } else {
        words.join(" ")
    }
}

impl CType {
    pub fn scalar(base: &str) -> Self {
        CType {
            qualifiers: Vec::new(),
            base: base.to_string(),
            pointers: Vec::new(),
            arrays: Vec::new(),
        }
    }

    /// Parses the canonical textual form (or any equivalent spelling).
    pub fn parse(text: &str) -> Result<Self, FrontendError> {
        let bad = || FrontendError::BadType(text.to_string());
        let all = lex(text).map_err(|_| bad())?;
        let sig: Vec<usize> = (0..all.len()).filter(|i| !all[*i].is_trivia()).collect();
        let toks: Vec<_> = sig.iter().map(|i| &all[*i]).collect();
        let mut i = 0;
        let mut quals = Vec::new();
        let mut words: Vec<&str> = Vec::new();
        while i < toks.len() {
            let t = &toks[i];
            match t.kind {
                TokenKind::Keyword if QUALIFIERS.contains(&t.text.as_str()) => {
                    if !quals.contains(&t.text) {
                        quals.push(t.text.clone());
                    }
                }
                TokenKind::Keyword if matches!(t.text.as_str(), "struct" | "union" | "enum") => {
                    words.push(&t.text);
                    i += 1;
                    match toks.get(i) {
                        Some(n) if n.kind == TokenKind::Ident => words.push(&n.text),
                        _ => return Err(bad()),
                    }
                }
                TokenKind::Keyword | TokenKind::Ident if !t.is("*") => {
                    if t.kind == TokenKind::Ident && !words.is_empty() {
                        return Err(bad());
                    }
                    words.push(&t.text)
                }
                _ => break,
            }
            i += 1;
        }
        if words.is_empty() {
            return Err(bad());
        }
        quals.sort_by_key(|q| QUALIFIERS.iter().position(|s| s == q));
        let mut pointers = Vec::new();
        while i < toks.len() && toks[i].is("*") {
            let mut level = PointerLevel::default();
            i += 1;
            while i < toks.len() && toks[i].kind == TokenKind::Keyword {
                match toks[i].text.as_str() {
                    "const" => level.is_const = true,
                    "volatile" => level.is_volatile = true,
                    "restrict" => level.is_restrict = true,
                    _ => return Err(bad()),
                }
                i += 1;
            }
            pointers.push(level);
        }
        let mut arrays = Vec::new();
        while i < toks.len() && toks[i].is("[") {
            let open = i;
            i += 1;
            let mut depth = 0;
            loop {
                let Some(t) = toks.get(i) else { return Err(bad()) };
                if t.is("]") && depth == 0 {
                    break;
                }
                if t.is("[") {
                    depth += 1;
                } else if t.is("]") {
                    depth -= 1;
                }
                i += 1;
            }
            let extent = &all[sig[open] + 1..sig[i]];
            arrays.push(super::ast::join_tokens(extent.iter()).trim().to_string());
            i += 1;
        }
        if i != toks.len() {
            return Err(bad());
        }
        Ok(CType {
            qualifiers: quals,
            base: canonical_base(&words),
            pointers,
            arrays,
        })
    }

    pub fn is_pointer(&self) -> bool {
        !self.pointers.is_empty()
    }

    pub fn is_array(&self) -> bool {
        !self.arrays.is_empty()
    }

    /// No indirection and no array extents.
    pub fn is_scalar(&self) -> bool {
        self.pointers.is_empty() && self.arrays.is_empty()
    }

    pub fn is_floating(&self) -> bool {
        self.is_scalar() && matches!(self.base.as_str(), "float" | "double" | "long double")
    }

    /// Scalar arithmetic type (integers, floating types, `_Bool`).
    pub fn is_arithmetic(&self) -> bool {
        self.is_scalar()
            && self
                .base
                .split(' ')
                .all(|w| SPEC_ORDER.contains(&w) && w != "void")
    }

    pub fn is_void(&self) -> bool {
        self.is_scalar() && self.base == "void"
    }
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.qualifiers {
            write!(f, "{q} ")?;
        }
        f.write_str(&self.base)?;
        for p in &self.pointers {
            f.write_str("*")?;
            for (on, name) in [
                (p.is_const, "const"),
                (p.is_volatile, "volatile"),
                (p.is_restrict, "restrict"),
            ] {
                if on {
                    write!(f, " {name}")?;
                }
            }
        }
        for a in &self.arrays {
            write!(f, "[{a}]")?;
        }
        Ok(())
    }
}

/// Replaces the base type when it equals `old`; declarator parts are kept.
pub fn change_base(declared: &CType, old: &str, new: &str) -> CType {
    if declared.base == old {
        CType {
            base: new.to_string(),
            ..declared.clone()
        }
    } else {
        declared.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_canonically() {
        for (input, want) in [
            ("double *", "double*"),
            ("const char * ", "const char*"),
            ("long unsigned", "unsigned long"),
            ("float [8]", "float[8]"),
            ("double * const *", "double* const*"),
            ("struct node*", "struct node*"),
            ("int*[N + 1]", "int*[N + 1]"),
        ] {
            assert_eq!(CType::parse(input).unwrap().to_string(), want, "{input}");
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(CType::parse("").is_err());
        assert!(CType::parse("double )").is_err());
        assert!(CType::parse("foo bar").is_err());
    }

    #[test]
    fn change_base_keeps_declarators() {
        let t = CType::parse("double*").unwrap();
        assert_eq!(change_base(&t, "double", "float").to_string(), "float*");
        let t = CType::parse("int").unwrap();
        assert_eq!(change_base(&t, "double", "float").to_string(), "int");
    }
}
