use std::fmt;

use super::joinpoint::{JpKind, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOp {
    Eq,
    Ne,
    Contains,
}

impl FilterOp {
    pub fn apply(self, lhs: &Value, rhs: &Value) -> bool {
        match self {
            FilterOp::Eq => lhs.loose_eq(rhs),
            FilterOp::Ne => !lhs.loose_eq(rhs),
            FilterOp::Contains => lhs.contains(rhs),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            FilterOp::Eq => "==",
            FilterOp::Ne => "!=",
            FilterOp::Contains => "contains",
        }
    }
}

/// `attr OP literal` restriction on one chain step.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub attr: String,
    pub op: FilterOp,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub kind: JpKind,
    pub filter: Option<Filter>,
}

impl Step {
    pub fn new(kind: JpKind) -> Self {
        Step { kind, filter: None }
    }

    pub fn with(kind: JpKind, attr: &str, op: FilterOp, value: Value) -> Self {
        Step {
            kind,
            filter: Some(Filter {
                attr: attr.to_string(),
                op,
                value,
            }),
        }
    }
}

/// Ordered join-point steps, e.g. `function{name=="foo"}.loop.pragma`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectChain {
    pub steps: Vec<Step>,
}

impl SelectChain {
    pub fn new(steps: Vec<Step>) -> Self {
        SelectChain { steps }
    }

    /// First offending `(parent, child)` pair, if the chain is illegal.
    pub fn check(&self) -> Result<(), (JpKind, JpKind)> {
        let mut prev = None::<JpKind>;
        for s in &self.steps {
            match prev {
                None if matches!(s.kind, JpKind::File | JpKind::Function) => {}
                None => return Err((JpKind::File, s.kind)),
                Some(p) if p.legal_children().contains(&s.kind) => {}
                Some(p) => return Err((p, s.kind)),
            }
            prev = Some(s.kind);
        }
        Ok(())
    }
}

impl fmt::Display for SelectChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(s.kind.name())?;
            if let Some(flt) = &s.filter {
                let v = match &flt.value {
                    Value::Str(s) => format!("{s:?}"),
                    other => other.to_string(),
                };
                write!(f, "{{{} {} {}}}", flt.attr, flt.op.symbol(), v)?;
            }
        }
        Ok(())
    }
}
