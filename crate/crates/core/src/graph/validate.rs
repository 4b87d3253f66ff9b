use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{ConnectivityRules, Constraint, NodeId, Operator, OperatorKind, Slot, TaskGraph};
use crate::stimulus::AttributeSpace;
use crate::value::{Attribute, Value};

/// One broken structural rule.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("root {0} has a parent")]
    RootHasParent(NodeId),
    #[error("cycle through {0:?}")]
    Cycle(Vec<NodeId>),
    #[error("node {0} is not reachable from the root")]
    Unreachable(NodeId),
    #[error("no connectivity rule covers {kind} (node {node})")]
    UncoveredKind { node: NodeId, kind: OperatorKind },
    #[error("edge {parent_kind}({parent}) -{slot}-> {child_kind}({child}) is not allowed")]
    ForbiddenEdge {
        parent: NodeId,
        parent_kind: OperatorKind,
        slot: Slot,
        child: NodeId,
        child_kind: OperatorKind,
    },
    #[error("{kind} node {parent} has no {slot} input")]
    UnexpectedSlot {
        parent: NodeId,
        kind: OperatorKind,
        slot: Slot,
    },
    #[error("{kind} node {parent} is missing its {slot} input")]
    MissingChild {
        parent: NodeId,
        kind: OperatorKind,
        slot: Slot,
    },
    #[error("type error at node {node}: {detail}")]
    TypeMismatch { node: NodeId, detail: String },
    #[error("Select {select} links {attribute} to {target}, which is not a matching Get node")]
    InvalidLink {
        select: NodeId,
        attribute: Attribute,
        target: NodeId,
    },
    #[error("value {value} at node {node} is outside the attribute space")]
    ValueOutsideSpace { node: NodeId, value: Value },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Output {
    Bool,
    Attr(Attribute),
    Object,
    Unknown,
}

/// Checks every structural rule of `graph` under `rules`.
pub fn validate_graph(graph: &TaskGraph, rules: &ConnectivityRules) -> ValidationReport {
    let mut out = Vec::new();
    let root = graph.root();
    if graph.parents(root).next().is_some() {
        out.push(Violation::RootHasParent(root));
    }
    let cyclic = find_cycle(graph).map(|c| out.push(Violation::Cycle(c))).is_some();
    let reachable: BTreeSet<_> = graph.reachable().into_iter().collect();
    for (id, _) in graph.nodes() {
        if !reachable.contains(&id) {
            out.push(Violation::Unreachable(id));
        }
    }
    for (id, op) in graph.nodes() {
        check_slots(graph, rules, id, op.kind(), &mut out);
        check_payload(graph, id, op, &mut out);
    }
    if !cyclic {
        check_types(graph, &mut out);
    }
    ValidationReport { violations: out }
}

/// [`validate_graph`] plus a check that every constant lies in `space`.
pub fn validate_graph_in(graph: &TaskGraph, rules: &ConnectivityRules, space: &AttributeSpace) -> ValidationReport {
    let mut report = validate_graph(graph, rules);
    for (id, op) in graph.nodes() {
        let mut values: Vec<&Value> = Vec::new();
        match op {
            Operator::Select(s) => values.extend(s.constraints().into_iter().filter_map(|(_, c)| match c {
                Constraint::Const(v) => Some(v),
                Constraint::Linked(_) => None,
            })),
            Operator::Exist(e) => values.extend(e.target.values().flatten()),
            Operator::Const(Some(v)) => values.push(v),
            _ => {}
        }
        for v in values {
            if !matches!(v, Value::Bool(_)) && !space.contains(v) {
                report.violations.push(Violation::ValueOutsideSpace {
                    node: id,
                    value: v.clone(),
                });
            }
        }
    }
    report
}

fn check_slots(graph: &TaskGraph, rules: &ConnectivityRules, id: NodeId, kind: OperatorKind, out: &mut Vec<Violation>) {
    let Some(rule) = rules.rule(kind) else {
        out.push(Violation::UncoveredKind { node: id, kind });
        return;
    };
    for (slot, child) in graph.children(id) {
        let child_kind = graph.kind(*child).expect("edges reference nodes");
        match rule.allowed(*slot) {
            None => out.push(Violation::UnexpectedSlot {
                parent: id,
                kind,
                slot: *slot,
            }),
            Some(allowed) if !allowed.contains(&child_kind) => out.push(Violation::ForbiddenEdge {
                parent: id,
                parent_kind: kind,
                slot: *slot,
                child: *child,
                child_kind,
            }),
            Some(_) => {}
        }
    }
    for s in &rule.slots {
        if graph.child(id, s.slot).is_none() {
            out.push(Violation::MissingChild {
                parent: id,
                kind,
                slot: s.slot,
            });
        }
    }
}

fn check_payload(graph: &TaskGraph, id: NodeId, op: &Operator, out: &mut Vec<Violation>) {
    let mismatch = |detail: String| Violation::TypeMismatch { node: id, detail };
    match op {
        Operator::Select(s) => {
            if s.what.contains_key(&Attribute::Location) {
                out.push(mismatch("location constraints belong in `where`".into()));
            }
            for (attribute, c) in s.constraints() {
                match c {
                    Constraint::Const(v) if v.attribute() != Some(attribute) => {
                        out.push(mismatch(format!("{attribute} constrained to {v}")))
                    }
                    Constraint::Linked(target) if graph.kind(*target) != Some(OperatorKind::get(attribute)) => out
                        .push(Violation::InvalidLink {
                            select: id,
                            attribute,
                            target: *target,
                        }),
                    _ => {}
                }
            }
        }
        Operator::Exist(e) => {
            if e.target.is_empty() {
                out.push(mismatch("Exist has no target attribute".into()));
            }
            for (attribute, v) in &e.target {
                if let Some(v) = v {
                    if v.attribute() != Some(*attribute) {
                        out.push(mismatch(format!("Exist target {attribute} set to {v}")));
                    }
                }
            }
        }
        _ => {}
    }
}

fn check_types(graph: &TaskGraph, out: &mut Vec<Violation>) {
    let mut memo = BTreeMap::new();
    for (id, op) in graph.nodes() {
        let mismatch = |detail: String| Violation::TypeMismatch { node: id, detail };
        let input = |slot, memo: &mut BTreeMap<NodeId, Output>| {
            graph
                .child(id, slot)
                .map_or(Output::Unknown, |c| output(graph, c, memo))
        };
        match op.kind() {
            OperatorKind::IsSame | OperatorKind::NotSame => {
                let lhs = input(Slot::Lhs, &mut memo);
                let rhs = input(Slot::Rhs, &mut memo);
                match (lhs, rhs) {
                    (Output::Bool | Output::Object, _) | (_, Output::Bool | Output::Object) => {
                        out.push(mismatch("comparison operands must be attributes".into()))
                    }
                    (Output::Attr(a), Output::Attr(b)) if a != b => {
                        out.push(mismatch(format!("comparing {a} with {b}")))
                    }
                    _ => {}
                }
                for (slot, other) in [(Slot::Rhs, lhs), (Slot::Lhs, rhs)] {
                    let is_const = graph
                        .child(id, slot)
                        .and_then(|c| graph.kind(c))
                        .is_some_and(|k| k == OperatorKind::Const);
                    if is_const && matches!(other, Output::Attr(Attribute::Identity | Attribute::ViewAngle)) {
                        out.push(mismatch("constants compare only against category or location".into()));
                    }
                }
            }
            OperatorKind::And | OperatorKind::Or => {
                for slot in [Slot::Lhs, Slot::Rhs] {
                    if !matches!(input(slot, &mut memo), Output::Bool | Output::Unknown) {
                        out.push(mismatch(format!("{slot} operand is not boolean")));
                    }
                }
            }
            OperatorKind::Switch => {
                if !matches!(input(Slot::Cond, &mut memo), Output::Bool | Output::Unknown) {
                    out.push(mismatch("condition is not boolean".into()));
                }
                for slot in [Slot::Then, Slot::Else] {
                    if input(slot, &mut memo) == Output::Object {
                        out.push(mismatch(format!("{slot} branch yields an object")));
                    }
                }
            }
            _ => {}
        }
    }
}

fn output(graph: &TaskGraph, id: NodeId, memo: &mut BTreeMap<NodeId, Output>) -> Output {
    if let Some(o) = memo.get(&id) {
        return *o;
    }
    let o = match graph.op(id) {
        None => Output::Unknown,
        Some(Operator::Select(_)) => Output::Object,
        Some(Operator::Get(a)) => Output::Attr(*a),
        Some(Operator::Const(None)) => Output::Unknown,
        Some(Operator::Const(Some(v))) => v.attribute().map_or(Output::Bool, Output::Attr),
        Some(Operator::Switch) => {
            let then = graph
                .child(id, Slot::Then)
                .map_or(Output::Unknown, |c| output(graph, c, memo));
            let other = graph
                .child(id, Slot::Else)
                .map_or(Output::Unknown, |c| output(graph, c, memo));
            if then == other {
                then
            } else {
                Output::Unknown
            }
        }
        Some(_) => Output::Bool,
    };
    memo.insert(id, o);
    o
}

/// Finds a cycle over graph edges plus Select->Get links.
fn find_cycle(graph: &TaskGraph) -> Option<Vec<NodeId>> {
    let mut next: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for (id, op) in graph.nodes() {
        let list = next.entry(id).or_default();
        list.extend(graph.children(id).iter().map(|(_, c)| *c));
        if let Operator::Select(s) = op {
            for (_, c) in s.constraints() {
                if let Constraint::Linked(t) = c {
                    if graph.op(*t).is_some() {
                        list.push(*t);
                    }
                }
            }
        }
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit(
        id: NodeId,
        next: &BTreeMap<NodeId, Vec<NodeId>>,
        marks: &mut BTreeMap<NodeId, Mark>,
        path: &mut Vec<NodeId>,
    ) -> Option<Vec<NodeId>> {
        match marks.get(&id) {
            Some(Mark::Done) => return None,
            Some(Mark::Open) => {
                let start = path.iter().position(|n| *n == id).unwrap_or(0);
                return Some(path[start..].to_vec());
            }
            None => {}
        }
        marks.insert(id, Mark::Open);
        path.push(id);
        for c in next.get(&id).into_iter().flatten() {
            if let Some(cycle) = visit(*c, next, marks, path) {
                return Some(cycle);
            }
        }
        path.pop();
        marks.insert(id, Mark::Done);
        None
    }
    let mut marks = BTreeMap::new();
    for id in next.keys() {
        if let Some(c) = visit(*id, &next, &mut marks, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, OpTree, SelectSpec};
    use crate::value::Location;

    fn dms() -> TaskGraph {
        OpTree::is_same(
            OpTree::get_at(Attribute::Category, 1),
            OpTree::get_at(Attribute::Category, 2),
        )
        .into_graph()
    }

    #[test]
    fn dms_is_valid() {
        let report = validate_graph(&dms(), &ConnectivityRules::default());
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn and_over_get_is_reported() {
        let g = OpTree::and(
            OpTree::get_at(Attribute::Category, 1),
            OpTree::is_same(
                OpTree::get_at(Attribute::Category, 1),
                OpTree::get_at(Attribute::Category, 2),
            ),
        )
        .into_graph();
        let report = validate_graph(&g, &ConnectivityRules::default());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::ForbiddenEdge {
                parent_kind: OperatorKind::And,
                child_kind: OperatorKind::GetCategory,
                ..
            }
        )));
    }

    #[test]
    fn cycles_are_reported() {
        let g = dms();
        let mut nodes: BTreeMap<_, _> = g.nodes().map(|(id, op)| (id, op.clone())).collect();
        nodes.insert(NodeId(2), Operator::Get(Attribute::Category));
        let mut edges = g.edges().to_vec();
        edges.push(Edge {
            parent: NodeId(2),
            slot: Slot::Arg,
            child: NodeId(1),
        });
        edges.retain(|e| !(e.parent == NodeId(1) && e.slot == Slot::Arg));
        edges.push(Edge {
            parent: NodeId(1),
            slot: Slot::Arg,
            child: NodeId(2),
        });
        let g = TaskGraph::new(nodes, edges, NodeId(0)).unwrap();
        let report = validate_graph(&g, &ConnectivityRules::default());
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Cycle(_))));
    }

    #[test]
    fn mixed_attribute_comparison_is_a_type_error() {
        let g = OpTree::is_same(
            OpTree::get_at(Attribute::Category, 1),
            OpTree::location(Location::TopLeft),
        )
        .into_graph();
        let report = validate_graph(&g, &ConnectivityRules::default());
        assert!(matches!(report.violations[..], [Violation::TypeMismatch { .. }]));
    }

    #[test]
    fn links_must_target_matching_gets() {
        let mut spec = SelectSpec::at(2);
        spec.what.insert(Attribute::Category, Constraint::Linked(NodeId(1)));
        let g = OpTree::is_same(
            OpTree::get_at(Attribute::Location, 1),
            OpTree::get(Attribute::Location, OpTree::select_with(spec)),
        )
        .into_graph();
        let report = validate_graph(&g, &ConnectivityRules::default());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::InvalidLink { .. })));
    }

    #[test]
    fn unknown_categories_fall_outside_the_space() {
        let g = OpTree::is_same(OpTree::get_at(Attribute::Category, 1), OpTree::category("desks")).into_graph();
        let report = validate_graph_in(&g, &ConnectivityRules::default(), &AttributeSpace::default());
        assert!(matches!(report.violations[..], [Violation::ValueOutsideSpace { .. }]));
    }
}
