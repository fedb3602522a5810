use crate::frontend::syntax;
use crate::frontend::{is_floating_literal, Ast, CType, Element, NodeId, NodeKind, TokenKind};
use crate::weave::{JoinPoint, JpKind, Session};

use super::StrategyError;

/// libm functions and their single-precision counterparts.
const LIBM_FLOAT: &[(&str, &str)] = &[
    ("sqrt", "sqrtf"),
    ("fabs", "fabsf"),
    ("pow", "powf"),
    ("exp", "expf"),
    ("exp2", "exp2f"),
    ("log", "logf"),
    ("log2", "log2f"),
    ("log10", "log10f"),
    ("sin", "sinf"),
    ("cos", "cosf"),
    ("tan", "tanf"),
    ("asin", "asinf"),
    ("acos", "acosf"),
    ("atan", "atanf"),
    ("atan2", "atan2f"),
    ("sinh", "sinhf"),
    ("cosh", "coshf"),
    ("tanh", "tanhf"),
    ("floor", "floorf"),
    ("ceil", "ceilf"),
    ("round", "roundf"),
    ("trunc", "truncf"),
    ("fmod", "fmodf"),
    ("fmin", "fminf"),
    ("fmax", "fmaxf"),
    ("hypot", "hypotf"),
    ("cbrt", "cbrtf"),
    ("erf", "erff"),
];

/// How a precision change rewrites a function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecisionMap {
    pub old_base: String,
    pub new_base: String,
    /// Callee renames, e.g. `sqrt` → `sqrtf`.
    pub libm: Vec<(String, String)>,
    /// Suffix for floating literals (`f`, `` or `L`).
    pub literal_suffix: String,
}

impl PrecisionMap {
    /// Standard map between `double`, `float` and `long double`.
    pub fn new(old_base: &str, new_base: &str) -> Result<Self, StrategyError> {
        if old_base == new_base {
            return Err(StrategyError::InvalidConfig(format!(
                "precision change from `{old_base}` to itself"
            )));
        }
        let libm = match (old_base, new_base) {
            ("double", "float") => LIBM_FLOAT
                .iter()
                .map(|(d, f)| (d.to_string(), f.to_string()))
                .collect(),
            ("float", "double") => LIBM_FLOAT
                .iter()
                .map(|(d, f)| (f.to_string(), d.to_string()))
                .collect(),
            _ => Vec::new(),
        };
        let literal_suffix = match new_base {
            "float" => "f",
            "long double" => "L",
            _ => "",
        }
        .to_string();
        Ok(PrecisionMap {
            old_base: old_base.to_string(),
            new_base: new_base.to_string(),
            libm,
            literal_suffix,
        })
    }

    fn libm_target(&self, name: &str) -> Option<&str> {
        self.libm
            .iter()
            .find(|(from, _)| from == name)
            .map(|(_, to)| to.as_str())
    }
}

/// `declared` with its base replaced when it equals `old`.
pub fn change_type(declared: &CType, old: &str, new: &str) -> CType {
    crate::frontend::change_base(declared, old, new)
}

/// Rewrites a floating literal for the new precision (`1.5` → `1.5f`).
pub fn retarget_literal(text: &str, suffix: &str) -> String {
    let hex = text.starts_with("0x") || text.starts_with("0X");
    let stem = if hex {
        text.trim_end_matches(['l', 'L', 'f', 'F'])
    } else {
        text.trim_end_matches(['f', 'F', 'l', 'L'])
    };
    format!("{stem}{suffix}")
}

/// Changes the precision used inside one function: return type,
/// parameters, locals, casts, floating literals and libm calls. Prototypes
/// of the function elsewhere in the unit follow its new signature.
pub fn change_precision(s: &mut Session, function: &str, map: &PrecisionMap) -> Result<(), StrategyError> {
    let f = syntax::find_function(s.ast(), function)
        .ok_or_else(|| StrategyError::FunctionNotFound(function.to_string()))?;
    retype_signature(s, f, map)?;
    let body = syntax::function_body(s.ast(), f).expect("definition has a body");
    // local declarations, one rewrite per declaration
    let decls: Vec<NodeId> = s
        .ast()
        .descendants(body)
        .into_iter()
        .filter(|n| s.ast().kind(*n) == NodeKind::Declaration)
        .collect();
    for d in decls {
        retype_declaration(s, d, map)?;
    }
    rewrite_expressions(s, body, map);
    // prototypes
    let protos: Vec<NodeId> = s
        .ast()
        .children(s.ast().root())
        .filter(|c| s.ast().is_live(*c) && syntax::is_prototype_of(s.ast(), *c, function))
        .collect();
    for p in protos {
        let d = syntax::declarators(s.ast(), p)
            .into_iter()
            .find(|d| syntax::declarator_info(s.ast(), *d).name.as_deref() == Some(function))
            .expect("prototype declarator");
        let ret = syntax::declared_type(s.ast(), p, Some(d));
        if ret.base == map.old_base {
            let new = change_type(&ret, &map.old_base, &map.new_base);
            s.set_type(JoinPoint { kind: JpKind::Decl, node: d }, &new)?;
        }
        let params = syntax::declarator_info(s.ast(), d).params.unwrap_or_default();
        retype_params(s, &params, map)?;
    }
    Ok(())
}

fn retype_signature(s: &mut Session, f: NodeId, map: &PrecisionMap) -> Result<(), StrategyError> {
    let ret = syntax::return_type(s.ast(), f);
    if ret.base == map.old_base {
        let jp = JoinPoint {
            kind: JpKind::Function,
            node: f,
        };
        s.set_type(jp, &change_type(&ret, &map.old_base, &map.new_base))?;
    }
    let params = syntax::function_params(s.ast(), f);
    retype_params(s, &params, map)
}

fn retype_params(s: &mut Session, params: &[NodeId], map: &PrecisionMap) -> Result<(), StrategyError> {
    for p in params {
        let ty = syntax::param_type(s.ast(), *p);
        if ty.base != map.old_base {
            continue;
        }
        let new = change_type(&ty, &map.old_base, &map.new_base);
        match syntax::param_declarator(s.ast(), *p) {
            Some(d) => s.set_type(
                JoinPoint {
                    kind: JpKind::Decl,
                    node: d,
                },
                &new,
            )?,
            None => s.retype_specs(*p, &new)?,
        }
    }
    Ok(())
}

fn retype_declaration(s: &mut Session, decl: NodeId, map: &PrecisionMap) -> Result<(), StrategyError> {
    let ds = syntax::declarators(s.ast(), decl);
    let Some(first) = ds.first().copied() else { return Ok(()) };
    let ty = syntax::declared_type(s.ast(), decl, Some(first));
    if ty.base != map.old_base {
        return Ok(());
    }
    if ds.len() == 1 {
        s.set_type(
            JoinPoint {
                kind: JpKind::Decl,
                node: first,
            },
            &change_type(&ty, &map.old_base, &map.new_base),
        )?;
    } else {
        s.retype_specs(decl, &change_type(&ty, &map.old_base, &map.new_base))?;
    }
    Ok(())
}

/// Casts, `sizeof` type names, floating literals and libm calls.
fn rewrite_expressions(s: &mut Session, body: NodeId, map: &PrecisionMap) {
    let ast = s.ast();
    let exprs: Vec<NodeId> = ast
        .descendants(body)
        .into_iter()
        .filter(|n| ast.kind(*n) == NodeKind::Expr)
        .collect();
    let calls: Vec<(NodeId, String)> = ast
        .descendants(body)
        .into_iter()
        .filter(|n| ast.kind(*n) == NodeKind::Call)
        .filter_map(|c| {
            let name = syntax::call_name(ast, c);
            map.libm_target(&name).map(|t| (c, t.to_string()))
        })
        .collect();
    let old_words: Vec<&str> = map.old_base.split(' ').collect();
    let mut edits = 0u64;
    for e in exprs {
        let elems = s.ast().node(e).elems.clone();
        let sig: Vec<usize> = elems
            .iter()
            .enumerate()
            .filter(|(_, el)| !matches!(el, Element::Token(t) if t.is_trivia()))
            .map(|(i, _)| i)
            .collect();
        let tok = |i: usize| elems[i].as_token();
        let mut k = 0;
        while k < sig.len() {
            let i = sig[k];
            if let Some(t) = tok(i) {
                if t.kind == TokenKind::Number && is_floating_literal(&t.text) {
                    let new = retarget_literal(&t.text, &map.literal_suffix);
                    if new != t.text {
                        set_elem_text(s.ast_mut(), e, i, &new);
                        edits += 1;
                    }
                }
                // `( type-words *... )` naming the old base
                if t.is("(") {
                    let mut j = k + 1;
                    let mut words = Vec::new();
                    while j < sig.len() {
                        match tok(sig[j]) {
                            Some(w) if w.kind == TokenKind::Keyword && !w.is("sizeof") => words.push(sig[j]),
                            _ => break,
                        }
                        j += 1;
                    }
                    while j < sig.len() && tok(sig[j]).is_some_and(|w| w.is("*")) {
                        j += 1;
                    }
                    let closes = j < sig.len() && tok(sig[j]).is_some_and(|w| w.is(")"));
                    let texts: Vec<&str> = words
                        .iter()
                        .map(|w| tok(*w).expect("token").text.as_str())
                        .filter(|w| !matches!(*w, "const" | "volatile"))
                        .collect();
                    if closes && texts == old_words {
                        let base_idx: Vec<usize> = words
                            .iter()
                            .copied()
                            .filter(|w| !matches!(tok(*w).expect("token").text.as_str(), "const" | "volatile"))
                            .collect();
                        for (n, w) in base_idx.iter().enumerate() {
                            let text = if n == 0 { map.new_base.as_str() } else { "" };
                            set_elem_text(s.ast_mut(), e, *w, text);
                        }
                        edits += 1;
                    }
                }
            }
            k += 1;
        }
    }
    for (c, target) in calls {
        s.rename_call(c, &target);
        edits += 1;
    }
    s.report_mut().actions += edits;
}

fn set_elem_text(ast: &mut Ast, node: NodeId, idx: usize, text: &str) {
    if let Element::Token(t) = &mut ast.node_mut(node).elems[idx] {
        t.text = text.to_string();
    }
}
