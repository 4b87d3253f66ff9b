//! Natural-language instructions: built from graphs, rendered to text,
//! parsed back, and evaluated against the objects of a trial.
//!
//! Grammar (EBNF; `" "` is a single space):
//!
//! ```text
//! instruction = segment , { " " , segment } ;
//! segment     = [ items , ", " ] , question , "?" | items ;
//! items       = item , { ", " , item } ;
//! item        = "observe object " , ordinal , [ " with " , qualifier ] | "delay" ;
//! qualifier   = attribute , ": " , value ;
//! question    = "if " , join , ", then " , question , ", else " , question | join ;
//! join        = term , { ( " and " | " or " ) , term } ;
//! term        = "(" , join , ")" | exists | comparison | get | boolean ;
//! comparison  = operand , ( " equals " | " not equals " ) , operand ;
//! operand     = get | literal ;
//! get         = attribute , " of object " , ordinal ;
//! exists      = "object " , ordinal , " with " , qualifier , { " with " , qualifier } , " exists" ;
//! literal     = "location: " , location | "view angle: " , digits | category | boolean ;
//! value       = location | digits | category ;
//! attribute   = "category" | "identity" | "location" | "view angle" ;
//! location    = "top left" | "top right" | "bottom left" | "bottom right" ;
//! boolean     = "true" | "false" ;
//! ```
//!
//! Comparisons bind tighter than `and`/`or`, which associate to the left.
//! The parser also accepts `observe <k>`, `not equal`, a bare location as a
//! literal, `? else` in place of `, else`, and a space before `?`.

mod eval;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Constraint, NodeId, Operator, Slot, TaskGraph};
use crate::trial::{FrameRole, FrameSchedule};
use crate::value::{Attribute, Value};

pub use eval::{evaluate_instruction, InstructionEvalError};
pub use parse::{parse_instruction, parse_instruction_in, ParseError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstructionError {
    #[error("node {0} has no value to render")]
    Unresolved(NodeId),
    #[error("Select {0} is not bound to an object")]
    Unbound(NodeId),
    #[error("node {0} cannot be phrased: {1}")]
    Unsupported(NodeId, String),
}

/// An attribute phrase attached to an object, as in `with location: top left`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Qualifier {
    pub attribute: Attribute,
    pub value: Value,
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.attribute.phrase(), self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinOp {
    And,
    Or,
}

impl JoinOp {
    fn word(self) -> &'static str {
        match self {
            JoinOp::And => "and",
            JoinOp::Or => "or",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Get {
        attribute: Attribute,
        ordinal: u32,
    },
    Literal(Value),
    Compare {
        negated: bool,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Join {
        op: JoinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Group(Box<Expr>),
    Exists {
        ordinal: u32,
        qualifiers: Vec<Qualifier>,
    },
    If {
        cond: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
}

impl Expr {
    fn fmt_literal(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match v {
            Value::Location(l) => write!(f, "location: {l}"),
            Value::ViewAngle(a) => write!(f, "view angle: {a}"),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Get { attribute, ordinal } => write!(f, "{} of object {ordinal}", attribute.phrase()),
            Expr::Literal(v) => Expr::fmt_literal(v, f),
            Expr::Compare { negated, lhs, rhs } => {
                let word = if *negated { "not equals" } else { "equals" };
                write!(f, "{lhs} {word} {rhs}")
            }
            Expr::Join { op, lhs, rhs } => write!(f, "{lhs} {} {rhs}", op.word()),
            Expr::Group(inner) => write!(f, "({inner})"),
            Expr::Exists { ordinal, qualifiers } => {
                write!(f, "object {ordinal}")?;
                for q in qualifiers {
                    write!(f, " with {q}")?;
                }
                f.write_str(" exists")
            }
            Expr::If { cond, then, otherwise } => write!(f, "if {cond}, then {then}, else {otherwise}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Item {
    Observe { ordinal: u32, qualifier: Option<Qualifier> },
    Delay,
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Observe { ordinal, qualifier } => {
                write!(f, "observe object {ordinal}")?;
                if let Some(q) = qualifier {
                    write!(f, " with {q}")?;
                }
                Ok(())
            }
            Item::Delay => f.write_str("delay"),
        }
    }
}

/// Frame items followed by the question answered after the last of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub items: Vec<Item>,
    pub question: Option<Expr>,
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.items.iter().map(ToString::to_string).collect();
        f.write_str(&items.join(", "))?;
        if let Some(q) = &self.question {
            if !self.items.is_empty() {
                f.write_str(", ")?;
            }
            write!(f, "{q}?")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstructionAst {
    pub segments: Vec<Segment>,
}

impl InstructionAst {
    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.segments.iter().flat_map(|s| s.items.iter())
    }

    pub fn questions(&self) -> impl Iterator<Item = &Expr> {
        self.segments.iter().filter_map(|s| s.question.as_ref())
    }
}

impl fmt::Display for InstructionAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.segments.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// The question a resolved graph asks.
pub fn question_expr(graph: &TaskGraph) -> Result<Expr, InstructionError> {
    expr(graph, graph.root())
}

fn ordinal_of(graph: &TaskGraph, id: NodeId) -> Result<(u32, Vec<Qualifier>), InstructionError> {
    let (select, spec) = graph
        .select_of(id)
        .ok_or_else(|| InstructionError::Unsupported(id, "input is not a Select".into()))?;
    let ordinal = spec.when.ok_or(InstructionError::Unbound(select))?;
    let mut qualifiers = Vec::new();
    for (attribute, c) in spec.constraints() {
        match c {
            Constraint::Const(value) => qualifiers.push(Qualifier {
                attribute,
                value: value.clone(),
            }),
            Constraint::Linked(_) => {
                return Err(InstructionError::Unsupported(
                    select,
                    "linked constraints have no phrasing".into(),
                ))
            }
        }
    }
    Ok((ordinal, qualifiers))
}

fn expr(graph: &TaskGraph, id: NodeId) -> Result<Expr, InstructionError> {
    let op = graph
        .op(id)
        .ok_or_else(|| InstructionError::Unsupported(id, "missing node".into()))?;
    let input = |slot: Slot| {
        graph
            .child(id, slot)
            .ok_or_else(|| InstructionError::Unsupported(id, format!("missing {slot} input")))
            .and_then(|c| expr(graph, c))
    };
    Ok(match op {
        Operator::Select(_) => {
            return Err(InstructionError::Unsupported(
                id,
                "a bare Select is not a question".into(),
            ))
        }
        Operator::Get(attribute) => Expr::Get {
            attribute: *attribute,
            ordinal: ordinal_of(graph, id)?.0,
        },
        Operator::Const(v) => Expr::Literal(v.clone().ok_or(InstructionError::Unresolved(id))?),
        Operator::IsSame | Operator::NotSame => Expr::Compare {
            negated: matches!(op, Operator::NotSame),
            lhs: Box::new(input(Slot::Lhs)?),
            rhs: Box::new(input(Slot::Rhs)?),
        },
        Operator::And | Operator::Or => {
            let op = if matches!(op, Operator::And) {
                JoinOp::And
            } else {
                JoinOp::Or
            };
            let mut operands = Vec::new();
            flatten_chain(input(Slot::Rhs)?, op, &mut operands);
            operands.into_iter().fold(input(Slot::Lhs)?, |acc, next| Expr::Join {
                op,
                lhs: Box::new(acc),
                rhs: Box::new(match next {
                    join @ Expr::Join { .. } => Expr::Group(Box::new(join)),
                    other => other,
                }),
            })
        }
        Operator::Switch => Expr::If {
            cond: Box::new(input(Slot::Cond)?),
            then: Box::new(input(Slot::Then)?),
            otherwise: Box::new(input(Slot::Else)?),
        },
        Operator::Exist(spec) => {
            let (ordinal, mut qualifiers) = ordinal_of(graph, id)?;
            for (attribute, v) in &spec.target {
                qualifiers.push(Qualifier {
                    attribute: *attribute,
                    value: v.clone().ok_or(InstructionError::Unresolved(id))?,
                });
            }
            Expr::Exists { ordinal, qualifiers }
        }
    })
}

/// Operands of a left-nested `op` chain, in reading order.
fn flatten_chain(expr: Expr, op: JoinOp, out: &mut Vec<Expr>) {
    match expr {
        Expr::Join { op: inner, lhs, rhs } if inner == op => {
            flatten_chain(*lhs, op, out);
            out.push(*rhs);
        }
        other => out.push(other),
    }
}

/// Builds the instruction for questions answered at the given frames.
/// Questions are placed after the item of their response frame.
pub fn build_instruction(
    questions: &[(usize, &TaskGraph)],
    schedule: &FrameSchedule,
    disambiguations: &BTreeMap<u32, Qualifier>,
) -> Result<InstructionAst, InstructionError> {
    let mut ordered: Vec<(usize, Expr)> = questions
        .iter()
        .map(|(frame, g)| question_expr(g).map(|e| (*frame, e)))
        .collect::<Result<_, _>>()?;
    ordered.sort_by_key(|(frame, _)| *frame);
    let mut segments = Vec::new();
    let mut items = Vec::new();
    let mut pending = ordered.into_iter().peekable();
    for (frame, role) in schedule.roles.iter().enumerate() {
        items.push(match role {
            FrameRole::Object(ordinal) => Item::Observe {
                ordinal: *ordinal,
                qualifier: disambiguations.get(ordinal).cloned(),
            },
            FrameRole::Delay => Item::Delay,
        });
        while let Some((_, q)) = pending.next_if(|(f, _)| *f == frame) {
            segments.push(Segment {
                items: std::mem::take(&mut items),
                question: Some(q),
            });
        }
    }
    if !items.is_empty() {
        segments.push(Segment { items, question: None });
    }
    Ok(InstructionAst { segments })
}

/// Full instruction for a single graph answered on the final frame.
pub fn render_instruction(
    graph: &TaskGraph,
    schedule: &FrameSchedule,
    disambiguations: &BTreeMap<u32, Qualifier>,
) -> Result<String, InstructionError> {
    let last = schedule.n_frames().saturating_sub(1);
    Ok(build_instruction(&[(last, graph)], schedule, disambiguations)?.to_string())
}

/// Just the question, with its trailing `?`.
pub fn render_question(graph: &TaskGraph) -> Result<String, InstructionError> {
    Ok(format!("{}?", question_expr(graph)?))
}
