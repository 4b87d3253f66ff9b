use std::collections::BTreeMap;

use thiserror::Error;

use super::{Expr, InstructionAst, Item, JoinOp};
use crate::graph::{AnswerToken, ObjectInstance, ObjectSet};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstructionEvalError {
    #[error("object {0} is not observed before it is used")]
    UnknownObject(u32),
    #[error("object {ordinal} matches {matches} objects in frame {frame}")]
    Unresolvable { ordinal: u32, frame: usize, matches: usize },
    #[error("type error: {0}")]
    TypeMismatch(String),
    #[error("{0} is not an answer")]
    NotAnswer(Value),
}

/// Answers every question of `ast` by reading the frames directly. Each
/// observed object is the single object of its frame that fits the item's
/// qualifier, distractors included.
pub fn evaluate_instruction(
    ast: &InstructionAst,
    objects: &ObjectSet,
) -> Result<Vec<AnswerToken>, InstructionEvalError> {
    let mut bound: BTreeMap<u32, &ObjectInstance> = BTreeMap::new();
    let mut frame = 0usize;
    let mut answers = Vec::new();
    for segment in &ast.segments {
        for item in &segment.items {
            if let Item::Observe { ordinal, qualifier } = item {
                let here: Vec<&ObjectInstance> = objects
                    .in_frame(frame)
                    .filter(|o| qualifier.as_ref().is_none_or(|q| o.value(q.attribute) == q.value))
                    .collect();
                if here.len() != 1 {
                    return Err(InstructionEvalError::Unresolvable {
                        ordinal: *ordinal,
                        frame,
                        matches: here.len(),
                    });
                }
                bound.insert(*ordinal, here[0]);
            }
            frame += 1;
        }
        if let Some(q) = &segment.question {
            let v = eval(q, &bound)?;
            answers.push(AnswerToken::from_value(&v).ok_or(InstructionEvalError::NotAnswer(v))?);
        }
    }
    Ok(answers)
}

fn eval(e: &Expr, bound: &BTreeMap<u32, &ObjectInstance>) -> Result<Value, InstructionEvalError> {
    let object = |k: &u32| bound.get(k).copied().ok_or(InstructionEvalError::UnknownObject(*k));
    let boolean = |e: &Expr| {
        let v = eval(e, bound)?;
        v.as_bool()
            .ok_or_else(|| InstructionEvalError::TypeMismatch(format!("{v} is not boolean")))
    };
    Ok(match e {
        Expr::Get { attribute, ordinal } => object(ordinal)?.value(*attribute),
        Expr::Literal(v) => v.clone(),
        Expr::Compare { negated, lhs, rhs } => {
            let (a, b) = (eval(lhs, bound)?, eval(rhs, bound)?);
            if a.attribute().is_none() || a.attribute() != b.attribute() {
                return Err(InstructionEvalError::TypeMismatch(format!(
                    "cannot compare {a} with {b}"
                )));
            }
            Value::Bool((a == b) != *negated)
        }
        Expr::Join { op, lhs, rhs } => {
            let (a, b) = (boolean(lhs)?, boolean(rhs)?);
            Value::Bool(match op {
                JoinOp::And => a && b,
                JoinOp::Or => a || b,
            })
        }
        Expr::Group(inner) => eval(inner, bound)?,
        Expr::Exists { ordinal, qualifiers } => {
            let o = object(ordinal)?;
            Value::Bool(qualifiers.iter().all(|q| o.value(q.attribute) == q.value))
        }
        Expr::If { cond, then, otherwise } => {
            if boolean(cond)? {
                eval(then, bound)?
            } else {
                eval(otherwise, bound)?
            }
        }
    })
}
