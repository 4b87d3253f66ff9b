use std::collections::BTreeMap;

use thiserror::Error;

use super::{AnswerToken, Constraint, NodeId, ObjectSet, Operator, SelectSpec, Slot, TaskGraph};
use crate::value::{Attribute, AttributeMap, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("Select {0} has no object slot")]
    Unbound(NodeId),
    #[error("Select {node} matches no object {ordinal}")]
    Unresolvable { node: NodeId, ordinal: u32 },
    #[error("Select {node} matches more than one object {ordinal}")]
    Ambiguous { node: NodeId, ordinal: u32 },
    #[error("node {0} has no assigned value")]
    Unassigned(NodeId),
    #[error("node {node} reads {attribute}, which the object does not carry")]
    MissingAttribute { node: NodeId, attribute: Attribute },
    #[error("type error at node {node}: {detail}")]
    TypeMismatch { node: NodeId, detail: String },
    #[error("node {0} lacks a required input")]
    Malformed(NodeId),
    #[error("root value {0} is not an answer token")]
    NotAnswerable(Value),
}

/// Objects a Select can bind, looked up by object slot.
pub trait ObjectSource {
    fn objects_at(&self, slot: u32) -> Vec<AttributeMap>;
}

impl ObjectSource for ObjectSet {
    fn objects_at(&self, slot: u32) -> Vec<AttributeMap> {
        self.objects
            .iter()
            .filter(|o| !o.is_distractor && o.ordinal == Some(slot))
            .map(|o| o.attributes())
            .collect()
    }
}

impl ObjectSource for BTreeMap<u32, AttributeMap> {
    fn objects_at(&self, slot: u32) -> Vec<AttributeMap> {
        self.get(&slot).cloned().into_iter().collect()
    }
}

/// Forward evaluation of the root as an answer token.
pub fn evaluate(graph: &TaskGraph, objects: &ObjectSet) -> Result<AnswerToken, EvalError> {
    let value = evaluate_value(graph, objects)?;
    AnswerToken::from_value(&value).ok_or(EvalError::NotAnswerable(value))
}

/// Forward evaluation of the root. Switch evaluates only the chosen branch.
pub fn evaluate_value(graph: &TaskGraph, source: &impl ObjectSource) -> Result<Value, EvalError> {
    let mut eval = Evaluator::new(graph, source, false);
    eval.value(graph.root())
}

/// Evaluates every non-Select node, both Switch branches included.
pub fn evaluate_all(graph: &TaskGraph, source: &impl ObjectSource) -> Result<BTreeMap<NodeId, Value>, EvalError> {
    let mut eval = Evaluator::new(graph, source, true);
    eval.value(graph.root())?;
    Ok(eval.memo)
}

struct Evaluator<'a, S> {
    graph: &'a TaskGraph,
    source: &'a S,
    eager: bool,
    memo: BTreeMap<NodeId, Value>,
}

impl<'a, S: ObjectSource> Evaluator<'a, S> {
    fn new(graph: &'a TaskGraph, source: &'a S, eager: bool) -> Self {
        Evaluator {
            graph,
            source,
            eager,
            memo: BTreeMap::new(),
        }
    }

    fn input(&self, id: NodeId, slot: Slot) -> Result<NodeId, EvalError> {
        self.graph.child(id, slot).ok_or(EvalError::Malformed(id))
    }

    fn boolean(&mut self, id: NodeId, slot: Slot) -> Result<bool, EvalError> {
        let child = self.input(id, slot)?;
        let v = self.value(child)?;
        v.as_bool().ok_or_else(|| EvalError::TypeMismatch {
            node: id,
            detail: format!("{slot} input {v} is not boolean"),
        })
    }

    /// Objects at the Select's slot that satisfy its constraints.
    fn matches(&mut self, id: NodeId, spec: &SelectSpec) -> Result<Vec<AttributeMap>, EvalError> {
        let slot = spec.when.ok_or(EvalError::Unbound(id))?;
        let mut required = Vec::new();
        for (_, c) in spec.constraints() {
            required.push(match c {
                Constraint::Const(v) => v.clone(),
                Constraint::Linked(target) => self.value(*target)?,
            });
        }
        Ok(self
            .source
            .objects_at(slot)
            .into_iter()
            .filter(|o| required.iter().all(|v| o.matches(v)))
            .collect())
    }

    fn single(&mut self, id: NodeId) -> Result<AttributeMap, EvalError> {
        let Some(Operator::Select(spec)) = self.graph.op(id) else {
            return Err(EvalError::Malformed(id));
        };
        let slot = spec.when.ok_or(EvalError::Unbound(id))?;
        let mut found = self.matches(id, spec)?;
        match found.len() {
            0 => Err(EvalError::Unresolvable {
                node: id,
                ordinal: slot,
            }),
            1 => Ok(found.pop().expect("one match")),
            _ => Err(EvalError::Ambiguous {
                node: id,
                ordinal: slot,
            }),
        }
    }

    fn value(&mut self, id: NodeId) -> Result<Value, EvalError> {
        if let Some(v) = self.memo.get(&id) {
            return Ok(v.clone());
        }
        let op = self.graph.op(id).ok_or(EvalError::Malformed(id))?;
        let v = match op {
            Operator::Select(_) => {
                return Err(EvalError::TypeMismatch {
                    node: id,
                    detail: "a Select yields an object, not a value".into(),
                })
            }
            Operator::Get(attribute) => {
                let object = self.single(self.input(id, Slot::Arg)?)?;
                object.get(*attribute).ok_or(EvalError::MissingAttribute {
                    node: id,
                    attribute: *attribute,
                })?
            }
            Operator::Exist(spec) => {
                let select = self.input(id, Slot::Arg)?;
                let Some(Operator::Select(sel)) = self.graph.op(select) else {
                    return Err(EvalError::Malformed(id));
                };
                let mut target = Vec::new();
                for (attribute, v) in &spec.target {
                    target.push((*attribute, v.clone().ok_or(EvalError::Unassigned(id))?));
                }
                let candidates = self.matches(select, sel)?;
                let mut any = false;
                for o in &candidates {
                    let mut all = true;
                    for (attribute, v) in &target {
                        match o.get(*attribute) {
                            None => {
                                return Err(EvalError::MissingAttribute {
                                    node: id,
                                    attribute: *attribute,
                                })
                            }
                            Some(x) => all &= x == *v,
                        }
                    }
                    any |= all;
                }
                Value::Bool(any)
            }
            Operator::IsSame | Operator::NotSame => {
                let lhs = self.input(id, Slot::Lhs)?;
                let rhs = self.input(id, Slot::Rhs)?;
                let (a, b) = (self.value(lhs)?, self.value(rhs)?);
                if a.attribute().is_none() || a.attribute() != b.attribute() {
                    return Err(EvalError::TypeMismatch {
                        node: id,
                        detail: format!("cannot compare {a} with {b}"),
                    });
                }
                Value::Bool((a == b) == matches!(op, Operator::IsSame))
            }
            Operator::And => {
                let (a, b) = (self.boolean(id, Slot::Lhs)?, self.boolean(id, Slot::Rhs)?);
                Value::Bool(a && b)
            }
            Operator::Or => {
                let (a, b) = (self.boolean(id, Slot::Lhs)?, self.boolean(id, Slot::Rhs)?);
                Value::Bool(a || b)
            }
            Operator::Switch => {
                let cond = self.boolean(id, Slot::Cond)?;
                let (taken, other) = if cond {
                    (Slot::Then, Slot::Else)
                } else {
                    (Slot::Else, Slot::Then)
                };
                if self.eager {
                    let other = self.input(id, other)?;
                    self.value(other)?;
                }
                let taken = self.input(id, taken)?;
                self.value(taken)?
            }
            Operator::Const(v) => v.clone().ok_or(EvalError::Unassigned(id))?,
        };
        self.memo.insert(id, v.clone());
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ObjectInstance, OpTree};
    use crate::stimulus::StimulusSpec;
    use crate::value::Location;

    fn object(ordinal: u32, category: &str, location: Location) -> ObjectInstance {
        ObjectInstance {
            frame_index: ordinal as usize - 1,
            location,
            stimulus: StimulusSpec {
                category: category.into(),
                identity: 0,
                view_angle: 0,
            },
            ordinal: Some(ordinal),
            is_distractor: false,
        }
    }

    #[test]
    fn matching_categories_compare_equal() {
        let g = OpTree::is_same(
            OpTree::get_at(Attribute::Category, 1),
            OpTree::get_at(Attribute::Category, 2),
        )
        .into_graph();
        let objects = ObjectSet {
            objects: vec![
                object(1, "lighting", Location::TopLeft),
                object(2, "lighting", Location::BottomRight),
            ],
        };
        assert_eq!(evaluate(&g, &objects), Ok(AnswerToken::Bool(true)));
    }

    #[test]
    fn location_not_equal_constant() {
        let g = OpTree::not_same(
            OpTree::get_at(Attribute::Location, 1),
            OpTree::location(Location::BottomLeft),
        )
        .into_graph();
        let objects = ObjectSet {
            objects: vec![object(1, "cars", Location::BottomLeft)],
        };
        assert_eq!(evaluate(&g, &objects), Ok(AnswerToken::Bool(false)));
    }

    #[test]
    fn switch_skips_the_untaken_branch() {
        let g = OpTree::switch(
            OpTree::constant(Value::Bool(true)),
            OpTree::get_at(Attribute::Category, 1),
            OpTree::get_at(Attribute::Category, 9),
        )
        .into_graph();
        let objects = ObjectSet {
            objects: vec![object(1, "boats", Location::TopRight)],
        };
        assert_eq!(evaluate(&g, &objects), Ok(AnswerToken::Category("boats".into())));
        assert!(matches!(
            evaluate_all(&g, &objects),
            Err(EvalError::Unresolvable { ordinal: 9, .. })
        ));
    }

    #[test]
    fn duplicate_task_objects_are_ambiguous() {
        let g = OpTree::get_at(Attribute::Category, 1).into_graph();
        let objects = ObjectSet {
            objects: vec![
                object(1, "boats", Location::TopRight),
                object(1, "cars", Location::TopLeft),
            ],
        };
        assert!(matches!(evaluate(&g, &objects), Err(EvalError::Ambiguous { .. })));
    }

    #[test]
    fn distractors_are_invisible_to_the_graph() {
        let g = OpTree::get_at(Attribute::Location, 1).into_graph();
        let mut distractor = object(1, "cars", Location::TopLeft);
        distractor.ordinal = None;
        distractor.is_distractor = true;
        let objects = ObjectSet {
            objects: vec![object(1, "boats", Location::TopRight), distractor],
        };
        assert_eq!(evaluate(&g, &objects), Ok(AnswerToken::Location(Location::TopRight)));
    }
}
