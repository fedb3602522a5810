use std::collections::BTreeMap;

use crate::frontend::CType;
use crate::weave::{Filter, JoinPoint, SelectChain, Session, Step, Value};

use super::ast::*;
use super::builtins::{predefined, run_builtin, run_predefined};
use super::DslError;

struct Env<'a> {
    aspect: &'a Aspect,
    params: BTreeMap<String, Value>,
}

type Binds = BTreeMap<String, JoinPoint>;

fn literal(v: &str) -> Value {
    match v {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => v.parse().map_or_else(|_| Value::Str(v.to_string()), Value::Int),
    }
}

/// Binds inputs: positional args, then named ones, then defaults.
fn bind_inputs(
    aspect: &str,
    inputs: &[(String, Option<Value>)],
    positional: Vec<Value>,
    named: BTreeMap<String, Value>,
) -> Result<BTreeMap<String, Value>, DslError> {
    let mut out = BTreeMap::new();
    for (i, v) in positional.into_iter().enumerate() {
        let (n, _) = inputs.get(i).ok_or_else(|| DslError::Action {
            aspect: aspect.to_string(),
            line: 0,
            message: format!("too many arguments ({} inputs)", inputs.len()),
        })?;
        out.insert(n.clone(), v);
    }
    for (n, v) in named {
        if !inputs.iter().any(|(i, _)| *i == n) {
            return Err(DslError::UnknownInput { aspect: aspect.to_string(), name: n });
        }
        out.insert(n, v);
    }
    for (n, d) in inputs {
        if !out.contains_key(n) {
            let d = d.clone().ok_or_else(|| DslError::MissingInput {
                aspect: aspect.to_string(),
                input: n.clone(),
            })?;
            out.insert(n.clone(), d);
        }
    }
    Ok(out)
}

fn eval(s: &mut Session, env: &Env, binds: &Binds, op: &Operand) -> Result<Value, String> {
    Ok(match op {
        Operand::Num(n) => Value::Int(*n),
        Operand::Bool(b) => Value::Bool(*b),
        Operand::Param(p) => env.params.get(p).cloned().ok_or_else(|| format!("input `${p}` is unbound"))?,
        Operand::Attr(b, a) => {
            let jp = *binds.get(b).ok_or_else(|| format!("`${b}` is not bound here"))?;
            s.attribute(jp, a).map_err(|e| e.to_string())?
        }
        Operand::Str(pieces) => {
            let mut out = String::new();
            for p in pieces {
                match p {
                    Piece::Lit(t) => out.push_str(t),
                    Piece::Hole(op) => out.push_str(&eval(s, env, binds, op)?.to_string()),
                }
            }
            Value::Str(out)
        }
    })
}

fn compare(a: &Value, op: CmpOp, b: &Value) -> bool {
    let num = |v: &Value| match v {
        Value::Int(n) => Some(*n),
        other => other.to_string().trim().parse::<i64>().ok(),
    };
    let ord = match (num(a), num(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => a.to_string().cmp(&b.to_string()),
    };
    match op {
        CmpOp::Eq => a.loose_eq(b),
        CmpOp::Ne => !a.loose_eq(b),
        CmpOp::Contains => a.contains(b),
        CmpOp::Lt => ord.is_lt(),
        CmpOp::Le => ord.is_le(),
        CmpOp::Gt => ord.is_gt(),
        CmpOp::Ge => ord.is_ge(),
    }
}

fn holds(s: &mut Session, env: &Env, binds: &Binds, c: &Cond) -> Result<bool, String> {
    Ok(match c {
        Cond::Cmp(a, op, b) => {
            let (x, y) = (eval(s, env, binds, a)?, eval(s, env, binds, b)?);
            compare(&x, *op, &y)
        }
        Cond::Truthy(a) => eval(s, env, binds, a)?.truthy(),
        Cond::Not(c) => !holds(s, env, binds, c)?,
        Cond::And(a, b) => holds(s, env, binds, a)? && holds(s, env, binds, b)?,
        Cond::Or(a, b) => holds(s, env, binds, a)? || holds(s, env, binds, b)?,
    })
}

fn run_action(s: &mut Session, env: &Env, binds: &Binds, last: &str, act: &Action) -> Result<(), String> {
    let target = act.target.as_deref().unwrap_or(last);
    let jp = *binds.get(target).ok_or_else(|| format!("`${target}` is not bound here"))?;
    let text = |s: &mut Session, op: &Operand| eval(s, env, binds, op).map(|v| v.to_string());
    match &act.kind {
        ActionKind::Insert(place, op) => {
            let t = text(s, op)?;
            s.insert(jp, *place, &t).map(drop).map_err(|e| e.to_string())
        }
        ActionKind::SetType(op) => {
            let t = text(s, op)?;
            let ty = CType::parse(&t).map_err(|e| e.to_string())?;
            s.set_type(jp, &ty).map_err(|e| e.to_string())
        }
        ActionKind::Clone(op) => {
            let t = text(s, op)?;
            s.clone_function(jp, &t).map(drop).map_err(|e| e.to_string())
        }
        ActionKind::Builtin(name, args) => {
            let vals = args.iter().map(|a| eval(s, env, binds, a)).collect::<Result<Vec<_>, _>>()?;
            run_builtin(s, name, &vals, Some(jp))
        }
    }
}

fn run_apply(s: &mut Session, env: &Env, ap: &Apply) -> Result<(), DslError> {
    let err = |line: u32, message: String| DslError::Action { aspect: env.aspect.name.clone(), line, message };
    let sel = env.aspect.select(&ap.select).expect("validated select reference");
    let no_binds = Binds::new();
    let mut steps = Vec::new();
    for st in &sel.steps {
        let filter = match &st.filter {
            Some((attr, op, value)) => Some(Filter {
                attr: attr.clone(),
                op: *op,
                value: eval(s, env, &no_binds, value).map_err(|m| err(sel.line, m))?,
            }),
            None => None,
        };
        steps.push(Step { kind: st.kind, filter });
    }
    let tuples = s.select(&SelectChain::new(steps)).map_err(|e| err(sel.line, e.to_string()))?;
    let names = sel.bindings();
    let last = names.last().expect("chains have a step").clone();
    for t in tuples {
        let binds: Binds = names.iter().cloned().zip(t).collect();
        if let Some(c) = &ap.cond {
            if !holds(s, env, &binds, c).map_err(|m| err(ap.line, m))? {
                continue;
            }
        }
        for act in &ap.actions {
            run_action(s, env, &binds, &last, act).map_err(|m| err(act.line, m))?;
        }
    }
    Ok(())
}

fn run_call(s: &mut Session, p: &AspectProgram, env: &Env, c: &CallAspect) -> Result<(), DslError> {
    let no_binds = Binds::new();
    let mut positional = Vec::new();
    let mut named = BTreeMap::new();
    for (n, op) in &c.args {
        let v = eval(s, env, &no_binds, op).map_err(|message| DslError::Action {
            aspect: env.aspect.name.clone(),
            line: c.line,
            message,
        })?;
        match n {
            Some(n) => {
                named.insert(n.clone(), v);
            }
            None => positional.push(v),
        }
    }
    invoke(s, p, &c.aspect, positional, named).map_err(|e| match e {
        DslError::Action { aspect, line: 0, message } => DslError::Action { aspect, line: c.line, message },
        other => other,
    })
}

fn invoke(
    s: &mut Session,
    p: &AspectProgram,
    name: &str,
    positional: Vec<Value>,
    named: BTreeMap<String, Value>,
) -> Result<(), DslError> {
    if let Some(a) = p.aspect(name) {
        let inputs: Vec<(String, Option<Value>)> = a
            .inputs
            .iter()
            .map(|i| {
                let d = i.default.as_ref().map(|d| {
                    let env = Env { aspect: a, params: BTreeMap::new() };
                    eval(s, &env, &Binds::new(), d).unwrap_or(Value::Str(String::new()))
                });
                (i.name.clone(), d)
            })
            .collect();
        let params = bind_inputs(name, &inputs, positional, named)?;
        let env = Env { aspect: a, params };
        for m in &a.members {
            match m {
                Member::Select(_) => {}
                Member::Apply(ap) => run_apply(s, &env, ap)?,
                Member::Call(c) => run_call(s, p, &env, c)?,
            }
        }
        return Ok(());
    }
    let pre = predefined(name).ok_or_else(|| DslError::UnknownAspect(name.to_string()))?;
    let inputs: Vec<(String, Option<Value>)> =
        pre.inputs.iter().map(|(n, d)| (n.to_string(), d.map(literal))).collect();
    let params = bind_inputs(name, &inputs, positional, named)?;
    run_predefined(s, pre, &params).map_err(|message| DslError::Action { aspect: name.to_string(), line: 0, message })
}

/// Runs `entry` (default: the first aspect of the program) with the
/// string arguments `args`, keyed by input name without `$`.
pub(crate) fn run(
    program: &AspectProgram,
    s: &mut Session,
    entry: Option<&str>,
    args: &BTreeMap<String, String>,
) -> Result<(), DslError> {
    let name = match entry {
        Some(e) => e,
        None => program
            .aspects
            .first()
            .map(|a| a.name.as_str())
            .ok_or_else(|| DslError::UnknownAspect(String::new()))?,
    };
    let named = args.iter().map(|(k, v)| (k.trim_start_matches('$').to_string(), literal(v))).collect();
    invoke(s, program, name, Vec::new(), named)
}
