use crate::weave::{FilterOp, JpKind, Place};

/// A parsed `.aw` file: one or more aspects, the first being the default
/// entry point.
#[derive(Debug, Clone, PartialEq)]
pub struct AspectProgram {
    pub aspects: Vec<Aspect>,
}

impl AspectProgram {
    pub fn aspect(&self, name: &str) -> Option<&Aspect> {
        self.aspects.iter().find(|a| a.name == name)
    }

    /// Logical lines of the whole program (see [`Aspect::sloc`]).
    pub fn sloc(&self) -> u64 {
        self.aspects.iter().map(Aspect::sloc).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aspect {
    pub name: String,
    pub line: u32,
    pub inputs: Vec<Input>,
    pub members: Vec<Member>,
}

impl Aspect {
    /// One logical line per input, select, apply, action, condition and
    /// aspect call.
    pub fn sloc(&self) -> u64 {
        let mut n = self.inputs.len() as u64;
        for m in &self.members {
            n += match m {
                Member::Select(_) | Member::Call(_) => 1,
                Member::Apply(a) => 1 + a.actions.len() as u64 + u64::from(a.cond.is_some()),
            };
        }
        n
    }

    pub fn select(&self, name: &str) -> Option<&SelectDecl> {
        self.members.iter().find_map(|m| match m {
            Member::Select(s) if s.name == name => Some(s),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub name: String,
    pub default: Option<Operand>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Member {
    Select(SelectDecl),
    Apply(Apply),
    Call(CallAspect),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectDecl {
    pub name: String,
    pub line: u32,
    pub steps: Vec<StepSpec>,
}

impl SelectDecl {
    /// Binding names of the steps: the kind name, numbered from the second
    /// occurrence on (`loop`, `loop2`, ...).
    pub fn bindings(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.steps {
            let base = s.kind.name();
            let seen = self.steps.iter().take(out.len()).filter(|p| p.kind == s.kind).count();
            out.push(if seen == 0 {
                base.to_string()
            } else {
                format!("{base}{}", seen + 1)
            });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSpec {
    pub kind: JpKind,
    pub filter: Option<(String, FilterOp, Operand)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Apply {
    pub select: String,
    pub line: u32,
    pub cond: Option<Cond>,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallAspect {
    pub aspect: String,
    pub line: u32,
    /// Positional (`None`) or named arguments.
    pub args: Vec<(Option<String>, Operand)>,
}

/// String with `%{...}` holes.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Lit(String),
    Hole(Operand),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Str(Vec<Piece>),
    Num(i64),
    Bool(bool),
    /// `$name` naming an aspect input.
    Param(String),
    /// `$binding.attr`.
    Attr(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Contains,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Cmp(Operand, CmpOp, Operand),
    Truthy(Operand),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub line: u32,
    /// Join point the action applies to (`$decl`); the last step when absent.
    pub target: Option<String>,
    pub kind: ActionKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionKind {
    Insert(Place, Operand),
    SetType(Operand),
    Clone(Operand),
    Builtin(String, Vec<Operand>),
}
