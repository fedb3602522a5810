use std::collections::{BTreeMap, BTreeSet};

use crate::weave::{SelectChain, Step};

use super::ast::*;
use super::builtins::{builtin_arity, predefined};
use super::DslError;

/// Static checks run after parsing: references, bindings, attributes,
/// chain legality, builtin arity and call cycles.
pub(crate) fn validate(p: &AspectProgram) -> Result<(), DslError> {
    let mut seen = BTreeSet::new();
    for a in &p.aspects {
        if !seen.insert(a.name.as_str()) {
            return Err(DslError::Duplicate { line: a.line, what: "aspect", name: a.name.clone() });
        }
        check_aspect(p, a)?;
    }
    check_cycles(p)
}

fn check_aspect(p: &AspectProgram, a: &Aspect) -> Result<(), DslError> {
    let mut selects: BTreeMap<&str, &SelectDecl> = BTreeMap::new();
    for m in &a.members {
        if let Member::Select(s) = m {
            if selects.insert(s.name.as_str(), s).is_some() {
                return Err(DslError::Duplicate { line: s.line, what: "select", name: s.name.clone() });
            }
            let chain = SelectChain::new(s.steps.iter().map(|st| Step::new(st.kind)).collect());
            if let Err((parent, child)) = chain.check() {
                return Err(DslError::IllegalChain {
                    line: s.line,
                    parent: parent.name().to_string(),
                    child: child.name().to_string(),
                });
            }
        }
    }
    for m in &a.members {
        match m {
            Member::Select(_) => {}
            Member::Apply(ap) => {
                let Some(sel) = selects.get(ap.select.as_str()) else {
                    return Err(DslError::UnknownSelectRef {
                        aspect: a.name.clone(),
                        line: ap.line,
                        name: ap.select.clone(),
                    });
                };
                let names = sel.bindings();
                let scope: BTreeMap<&str, _> =
                    names.iter().map(String::as_str).zip(sel.steps.iter().map(|s| s.kind)).collect();
                let check = |line: u32, op: &Operand| check_operand(&scope, line, op);
                if let Some(c) = &ap.cond {
                    check_cond(&scope, ap.line, c)?;
                }
                for act in &ap.actions {
                    if let Some(t) = &act.target {
                        if !scope.contains_key(t.as_str()) {
                            return Err(DslError::UnknownBinding { line: act.line, name: format!("${t}") });
                        }
                    }
                    match &act.kind {
                        ActionKind::Insert(_, op) | ActionKind::SetType(op) | ActionKind::Clone(op) => {
                            check(act.line, op)?
                        }
                        ActionKind::Builtin(name, args) => {
                            let Some((lo, hi)) = builtin_arity(name) else {
                                return Err(DslError::Syntax {
                                    line: act.line,
                                    col: 1,
                                    message: format!("unknown action `{name}`"),
                                });
                            };
                            if args.len() < lo || args.len() > hi {
                                return Err(DslError::Syntax {
                                    line: act.line,
                                    col: 1,
                                    message: format!(
                                        "`{name}` takes {lo}..={hi} arguments, got {}",
                                        args.len()
                                    ),
                                });
                            }
                            for op in args {
                                check(act.line, op)?;
                            }
                        }
                    }
                }
            }
            Member::Call(c) => {
                let inputs: Vec<String> = match p.aspect(&c.aspect) {
                    Some(callee) => callee.inputs.iter().map(|i| i.name.clone()).collect(),
                    None => match predefined(&c.aspect) {
                        Some(pre) => pre.inputs.iter().map(|(n, _)| n.to_string()).collect(),
                        None => {
                            return Err(DslError::UnknownAspectRef {
                                aspect: a.name.clone(),
                                line: c.line,
                                name: c.aspect.clone(),
                            })
                        }
                    },
                };
                let positional = c.args.iter().filter(|(n, _)| n.is_none()).count();
                if positional > inputs.len() {
                    return Err(DslError::Syntax {
                        line: c.line,
                        col: 1,
                        message: format!("`{}` takes {} inputs, got {positional}", c.aspect, inputs.len()),
                    });
                }
                for (n, op) in &c.args {
                    if let Some(n) = n {
                        if !inputs.contains(n) {
                            return Err(DslError::UnknownInput { aspect: c.aspect.clone(), name: n.clone() });
                        }
                    }
                    check_operand(&BTreeMap::new(), c.line, op)?;
                }
            }
        }
    }
    Ok(())
}

fn check_operand(
    scope: &BTreeMap<&str, crate::weave::JpKind>,
    line: u32,
    op: &Operand,
) -> Result<(), DslError> {
    match op {
        Operand::Attr(b, attr) => {
            let Some(kind) = scope.get(b.as_str()) else {
                return Err(DslError::UnknownBinding { line, name: format!("${b}") });
            };
            if !kind.attributes().contains(&attr.as_str()) {
                return Err(DslError::UnknownAttribute { line, kind: kind.name().to_string(), name: attr.clone() });
            }
            Ok(())
        }
        Operand::Str(pieces) => pieces.iter().try_for_each(|p| match p {
            Piece::Hole(op) => check_operand(scope, line, op),
            Piece::Lit(_) => Ok(()),
        }),
        _ => Ok(()),
    }
}

fn check_cond(scope: &BTreeMap<&str, crate::weave::JpKind>, line: u32, c: &Cond) -> Result<(), DslError> {
    match c {
        Cond::Cmp(a, _, b) => {
            check_operand(scope, line, a)?;
            check_operand(scope, line, b)
        }
        Cond::Truthy(a) => check_operand(scope, line, a),
        Cond::Not(c) => check_cond(scope, line, c),
        Cond::And(a, b) | Cond::Or(a, b) => {
            check_cond(scope, line, a)?;
            check_cond(scope, line, b)
        }
    }
}

fn check_cycles(p: &AspectProgram) -> Result<(), DslError> {
    fn visit<'a>(p: &'a AspectProgram, a: &'a Aspect, stack: &mut Vec<&'a str>, done: &mut BTreeSet<&'a str>) -> Result<(), DslError> {
        if done.contains(a.name.as_str()) {
            return Ok(());
        }
        if let Some(i) = stack.iter().position(|n| *n == a.name) {
            let mut cycle: Vec<String> = stack[i..].iter().map(|s| s.to_string()).collect();
            cycle.push(a.name.clone());
            return Err(DslError::RecursionCycle(cycle));
        }
        stack.push(&a.name);
        for m in &a.members {
            if let Member::Call(c) = m {
                if let Some(callee) = p.aspect(&c.aspect) {
                    visit(p, callee, stack, done)?;
                }
            }
        }
        stack.pop();
        done.insert(&a.name);
        Ok(())
    }
    let mut done = BTreeSet::new();
    for a in &p.aspects {
        visit(p, a, &mut Vec::new(), &mut done)?;
    }
    Ok(())
}
