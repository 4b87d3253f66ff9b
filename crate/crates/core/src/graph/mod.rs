//! Task graphs: a directed acyclic single-root graph of operators where each
//! child supplies an input to its parent.

mod document;
mod oracle;
mod rules;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stimulus::StimulusSpec;
use crate::value::{Attribute, AttributeMap, Location, Value};

pub use document::{deserialize_graph, serialize_graph, EdgeDocument, GraphDocument, NodeDocument};
pub use oracle::{evaluate, evaluate_all, evaluate_value, EvalError, ObjectSource};
pub use rules::{min_subtree_depth, ConnectivityRules, KindRule, SlotRule};
pub use validate::{validate_graph, validate_graph_in, ValidationReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    Select,
    GetCategory,
    GetLocation,
    GetIdentity,
    GetViewAngle,
    Exist,
    IsSame,
    NotSame,
    And,
    Or,
    Switch,
    Const,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 12] = [
        OperatorKind::Select,
        OperatorKind::GetCategory,
        OperatorKind::GetLocation,
        OperatorKind::GetIdentity,
        OperatorKind::GetViewAngle,
        OperatorKind::Exist,
        OperatorKind::IsSame,
        OperatorKind::NotSame,
        OperatorKind::And,
        OperatorKind::Or,
        OperatorKind::Switch,
        OperatorKind::Const,
    ];

    pub const GETS: [OperatorKind; 4] = [
        OperatorKind::GetCategory,
        OperatorKind::GetLocation,
        OperatorKind::GetIdentity,
        OperatorKind::GetViewAngle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Select => "Select",
            OperatorKind::GetCategory => "GetCategory",
            OperatorKind::GetLocation => "GetLocation",
            OperatorKind::GetIdentity => "GetIdentity",
            OperatorKind::GetViewAngle => "GetViewAngle",
            OperatorKind::Exist => "Exist",
            OperatorKind::IsSame => "IsSame",
            OperatorKind::NotSame => "NotSame",
            OperatorKind::And => "And",
            OperatorKind::Or => "Or",
            OperatorKind::Switch => "Switch",
            OperatorKind::Const => "Const",
        }
    }

    pub fn from_name(name: &str) -> Option<OperatorKind> {
        OperatorKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn get(attribute: Attribute) -> OperatorKind {
        match attribute {
            Attribute::Category => OperatorKind::GetCategory,
            Attribute::Location => OperatorKind::GetLocation,
            Attribute::Identity => OperatorKind::GetIdentity,
            Attribute::ViewAngle => OperatorKind::GetViewAngle,
        }
    }

    /// The attribute fetched by a `Get*` kind.
    pub fn get_attribute(self) -> Option<Attribute> {
        match self {
            OperatorKind::GetCategory => Some(Attribute::Category),
            OperatorKind::GetLocation => Some(Attribute::Location),
            OperatorKind::GetIdentity => Some(Attribute::Identity),
            OperatorKind::GetViewAngle => Some(Attribute::ViewAngle),
            _ => None,
        }
    }

    pub fn is_get(self) -> bool {
        self.get_attribute().is_some()
    }

    pub fn is_and_or(self) -> bool {
        matches!(self, OperatorKind::And | OperatorKind::Or)
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, OperatorKind::IsSame | OperatorKind::NotSame)
    }

    /// Kinds whose output is always boolean.
    pub fn is_boolean(self) -> bool {
        matches!(
            self,
            OperatorKind::Exist | OperatorKind::IsSame | OperatorKind::NotSame | OperatorKind::And | OperatorKind::Or
        )
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Input position of a child under its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Cond,
    Then,
    Else,
    Lhs,
    Rhs,
    Arg,
}

impl Slot {
    pub fn name(self) -> &'static str {
        match self {
            Slot::Cond => "cond",
            Slot::Then => "then",
            Slot::Else => "else",
            Slot::Lhs => "lhs",
            Slot::Rhs => "rhs",
            Slot::Arg => "arg",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A Select constraint: either a fixed value or the output of a `Get*` node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Const(Value),
    Linked(NodeId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectSpec {
    /// Object slot; after instantiation this is the object's ordinal.
    pub when: Option<u32>,
    #[serde(rename = "where")]
    pub location: Option<Constraint>,
    pub what: BTreeMap<Attribute, Constraint>,
}

impl SelectSpec {
    pub fn at(when: u32) -> SelectSpec {
        SelectSpec {
            when: Some(when),
            ..Default::default()
        }
    }

    /// All constraints with the attribute they restrict; `where` is reported
    /// as [`Attribute::Location`].
    pub fn constraints(&self) -> Vec<(Attribute, &Constraint)> {
        let mut out: Vec<_> = self.what.iter().map(|(a, c)| (*a, c)).collect();
        if let Some(c) = &self.location {
            out.push((Attribute::Location, c));
        }
        out
    }

    pub fn has_constraints(&self) -> bool {
        self.location.is_some() || !self.what.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExistSpec {
    pub target: BTreeMap<Attribute, Option<Value>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operator {
    Select(SelectSpec),
    Get(Attribute),
    Exist(ExistSpec),
    IsSame,
    NotSame,
    And,
    Or,
    Switch,
    Const(Option<Value>),
}

impl Operator {
    pub fn kind(&self) -> OperatorKind {
        match self {
            Operator::Select(_) => OperatorKind::Select,
            Operator::Get(a) => OperatorKind::get(*a),
            Operator::Exist(_) => OperatorKind::Exist,
            Operator::IsSame => OperatorKind::IsSame,
            Operator::NotSame => OperatorKind::NotSame,
            Operator::And => OperatorKind::And,
            Operator::Or => OperatorKind::Or,
            Operator::Switch => OperatorKind::Switch,
            Operator::Const(_) => OperatorKind::Const,
        }
    }

    /// A payload-free operator of `kind`.
    pub fn blank(kind: OperatorKind) -> Operator {
        match kind {
            OperatorKind::Select => Operator::Select(SelectSpec::default()),
            OperatorKind::Exist => Operator::Exist(ExistSpec::default()),
            OperatorKind::IsSame => Operator::IsSame,
            OperatorKind::NotSame => Operator::NotSame,
            OperatorKind::And => Operator::And,
            OperatorKind::Or => Operator::Or,
            OperatorKind::Switch => Operator::Switch,
            OperatorKind::Const => Operator::Const(None),
            get => Operator::Get(get.get_attribute().expect("get kind")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub parent: NodeId,
    pub slot: Slot,
    pub child: NodeId,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown operator kind {0:?}")]
    UnknownKind(String),
    #[error("root {0} is not a node of the graph")]
    MissingRoot(NodeId),
    #[error("edge {parent} -> {child} references a missing node")]
    DanglingEdge { parent: NodeId, child: NodeId },
    #[error("node id {0} is used twice")]
    DuplicateNode(NodeId),
    #[error("node {parent} has two children in slot {slot}")]
    DuplicateSlot { parent: NodeId, slot: Slot },
    #[error("malformed graph document: {0}")]
    Malformed(String),
    #[error("invalid graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

/// A task graph. Nodes are keyed by id; edges run parent -> child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskGraph {
    nodes: BTreeMap<NodeId, Operator>,
    edges: Vec<Edge>,
    root: NodeId,
    children: BTreeMap<NodeId, Vec<(Slot, NodeId)>>,
}

impl TaskGraph {
    /// Assembles a graph. Only referential integrity is checked here; use
    /// [`validate_graph`] for the structural rules.
    pub fn new(nodes: BTreeMap<NodeId, Operator>, mut edges: Vec<Edge>, root: NodeId) -> Result<TaskGraph, GraphError> {
        if !nodes.contains_key(&root) {
            return Err(GraphError::MissingRoot(root));
        }
        edges.sort();
        edges.dedup();
        let mut children: BTreeMap<NodeId, Vec<(Slot, NodeId)>> = BTreeMap::new();
        for e in &edges {
            if !nodes.contains_key(&e.parent) || !nodes.contains_key(&e.child) {
                return Err(GraphError::DanglingEdge {
                    parent: e.parent,
                    child: e.child,
                });
            }
            let list = children.entry(e.parent).or_default();
            if list.iter().any(|(s, _)| *s == e.slot) {
                return Err(GraphError::DuplicateSlot {
                    parent: e.parent,
                    slot: e.slot,
                });
            }
            list.push((e.slot, e.child));
        }
        Ok(TaskGraph {
            nodes,
            edges,
            root,
            children,
        })
    }

    pub fn from_tree(tree: &OpTree) -> TaskGraph {
        let mut nodes = BTreeMap::new();
        let mut edges = Vec::new();
        fn walk(tree: &OpTree, nodes: &mut BTreeMap<NodeId, Operator>, edges: &mut Vec<Edge>) -> NodeId {
            let id = NodeId(nodes.len() as u32);
            nodes.insert(id, tree.op.clone());
            for (slot, child) in &tree.children {
                let c = walk(child, nodes, edges);
                edges.push(Edge {
                    parent: id,
                    slot: *slot,
                    child: c,
                });
            }
            id
        }
        let root = walk(tree, &mut nodes, &mut edges);
        TaskGraph::new(nodes, edges, root).expect("trees are referentially sound")
    }

    /// Unfolds the graph into a tree; shared nodes are duplicated.
    pub fn to_tree(&self) -> OpTree {
        self.subtree(self.root)
    }

    pub fn subtree(&self, id: NodeId) -> OpTree {
        OpTree {
            op: self.nodes[&id].clone(),
            children: self
                .children(id)
                .iter()
                .map(|(slot, c)| (*slot, self.subtree(*c)))
                .collect(),
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn op(&self, id: NodeId) -> Option<&Operator> {
        self.nodes.get(&id)
    }

    pub fn kind(&self, id: NodeId) -> Option<OperatorKind> {
        self.nodes.get(&id).map(Operator::kind)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Operator)> {
        self.nodes.iter().map(|(id, op)| (*id, op))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Children of `id` ordered by slot.
    pub fn children(&self, id: NodeId) -> &[(Slot, NodeId)] {
        self.children.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn child(&self, id: NodeId, slot: Slot) -> Option<NodeId> {
        self.children(id).iter().find(|(s, _)| *s == slot).map(|(_, c)| *c)
    }

    pub fn parents(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.edges.iter().filter(move |e| e.child == id).map(|e| e.parent)
    }

    pub fn count_kind(&self, kind: OperatorKind) -> usize {
        self.nodes.values().filter(|op| op.kind() == kind).count()
    }

    pub fn count_where(&self, f: impl Fn(OperatorKind) -> bool) -> usize {
        self.nodes.values().filter(|op| f(op.kind())).count()
    }

    /// Distinct `when` slots bound by Select nodes.
    pub fn select_slots(&self) -> BTreeSet<u32> {
        self.nodes
            .values()
            .filter_map(|op| match op {
                Operator::Select(s) => s.when,
                _ => None,
            })
            .collect()
    }

    /// Ids of nodes reachable from the root, in pre-order.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            order.push(id);
            for (_, c) in self.children(id).iter().rev() {
                stack.push(*c);
            }
        }
        order
    }

    /// The Select under a `Get*` or `Exist` node.
    pub fn select_of(&self, id: NodeId) -> Option<(NodeId, &SelectSpec)> {
        let child = self.child(id, Slot::Arg)?;
        match self.op(child)? {
            Operator::Select(s) => Some((child, s)),
            _ => None,
        }
    }

    /// A copy of this graph with every operator passed through `f`.
    pub fn map_ops(&self, mut f: impl FnMut(NodeId, &Operator) -> Operator) -> TaskGraph {
        TaskGraph {
            nodes: self.nodes.iter().map(|(id, op)| (*id, f(*id, op))).collect(),
            edges: self.edges.clone(),
            root: self.root,
            children: self.children.clone(),
        }
    }

    /// Renumbers Select `when` slots through `map`; unknown slots are kept.
    pub fn remap_slots(&self, map: &BTreeMap<u32, u32>) -> TaskGraph {
        self.map_ops(|_, op| match op {
            Operator::Select(s) => {
                let mut s = s.clone();
                s.when = s.when.map(|w| *map.get(&w).unwrap_or(&w));
                Operator::Select(s)
            }
            other => other.clone(),
        })
    }

    /// Kind-labelled canonical form; equal shapes are isomorphic trees.
    pub fn shape(&self) -> String {
        self.to_tree().shape()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serialize_graph(self)).expect("graph documents serialize")
    }

    pub fn from_json(text: &str) -> Result<TaskGraph, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        deserialize_graph(&doc)
    }
}

/// Longest root-to-node path, counted in edges.
pub fn graph_depth(graph: &TaskGraph) -> usize {
    fn depth(g: &TaskGraph, id: NodeId, memo: &mut BTreeMap<NodeId, usize>, open: &mut BTreeSet<NodeId>) -> usize {
        if let Some(d) = memo.get(&id) {
            return *d;
        }
        if !open.insert(id) {
            return 0;
        }
        let d = g
            .children(id)
            .iter()
            .map(|(_, c)| 1 + depth(g, *c, memo, open))
            .max()
            .unwrap_or(0);
        open.remove(&id);
        memo.insert(id, d);
        d
    }
    depth(graph, graph.root, &mut BTreeMap::new(), &mut BTreeSet::new())
}

/// A tree form of a task graph, convenient for building graphs by hand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpTree {
    pub op: Operator,
    pub children: Vec<(Slot, OpTree)>,
}

impl OpTree {
    pub fn leaf(op: Operator) -> OpTree {
        OpTree {
            op,
            children: Vec::new(),
        }
    }

    pub fn select(when: u32) -> OpTree {
        OpTree::leaf(Operator::Select(SelectSpec::at(when)))
    }

    pub fn select_unbound() -> OpTree {
        OpTree::leaf(Operator::Select(SelectSpec::default()))
    }

    pub fn select_with(spec: SelectSpec) -> OpTree {
        OpTree::leaf(Operator::Select(spec))
    }

    pub fn get(attribute: Attribute, select: OpTree) -> OpTree {
        OpTree {
            op: Operator::Get(attribute),
            children: vec![(Slot::Arg, select)],
        }
    }

    /// `Get*` over a Select bound to `when`.
    pub fn get_at(attribute: Attribute, when: u32) -> OpTree {
        OpTree::get(attribute, OpTree::select(when))
    }

    pub fn constant(value: Value) -> OpTree {
        OpTree::leaf(Operator::Const(Some(value)))
    }

    pub fn location(location: Location) -> OpTree {
        OpTree::constant(Value::Location(location))
    }

    pub fn category(name: &str) -> OpTree {
        OpTree::constant(Value::Category(name.to_string()))
    }

    fn binary(op: Operator, lhs: OpTree, rhs: OpTree) -> OpTree {
        OpTree {
            op,
            children: vec![(Slot::Lhs, lhs), (Slot::Rhs, rhs)],
        }
    }

    pub fn is_same(lhs: OpTree, rhs: OpTree) -> OpTree {
        OpTree::binary(Operator::IsSame, lhs, rhs)
    }

    pub fn not_same(lhs: OpTree, rhs: OpTree) -> OpTree {
        OpTree::binary(Operator::NotSame, lhs, rhs)
    }

    pub fn and(lhs: OpTree, rhs: OpTree) -> OpTree {
        OpTree::binary(Operator::And, lhs, rhs)
    }

    pub fn or(lhs: OpTree, rhs: OpTree) -> OpTree {
        OpTree::binary(Operator::Or, lhs, rhs)
    }

    pub fn switch(cond: OpTree, then: OpTree, otherwise: OpTree) -> OpTree {
        OpTree {
            op: Operator::Switch,
            children: vec![(Slot::Cond, cond), (Slot::Then, then), (Slot::Else, otherwise)],
        }
    }

    pub fn exist(target: BTreeMap<Attribute, Value>, select: OpTree) -> OpTree {
        OpTree {
            op: Operator::Exist(ExistSpec {
                target: target.into_iter().map(|(a, v)| (a, Some(v))).collect(),
            }),
            children: vec![(Slot::Arg, select)],
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.op.kind()
    }

    pub fn shape(&self) -> String {
        let mut out = self.kind().name().to_string();
        if !self.children.is_empty() {
            out.push('(');
            let parts: Vec<_> = self.children.iter().map(|(_, c)| c.shape()).collect();
            out.push_str(&parts.join(","));
            out.push(')');
        }
        out
    }

    pub fn into_graph(self) -> TaskGraph {
        TaskGraph::from_tree(&self)
    }
}

/// Answer vocabulary: booleans, locations and categories.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnswerToken {
    Bool(bool),
    Location(Location),
    Category(String),
}

impl AnswerToken {
    pub fn from_value(value: &Value) -> Option<AnswerToken> {
        match value {
            Value::Bool(b) => Some(AnswerToken::Bool(*b)),
            Value::Location(l) => Some(AnswerToken::Location(*l)),
            Value::Category(c) => Some(AnswerToken::Category(c.clone())),
            Value::Identity(_) | Value::ViewAngle(_) => None,
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            AnswerToken::Bool(b) => Value::Bool(*b),
            AnswerToken::Location(l) => Value::Location(*l),
            AnswerToken::Category(c) => Value::Category(c.clone()),
        }
    }

    /// Parses a token word. Anything that is not a boolean or location is
    /// read as a category name.
    pub fn parse(text: &str) -> AnswerToken {
        match text {
            "true" => AnswerToken::Bool(true),
            "false" => AnswerToken::Bool(false),
            other => match Location::from_name(other) {
                Some(l) => AnswerToken::Location(l),
                None => AnswerToken::Category(other.to_string()),
            },
        }
    }

    pub fn class(&self) -> ResponseClass {
        match self {
            AnswerToken::Bool(_) => ResponseClass::Boolean,
            AnswerToken::Location(_) => ResponseClass::Location,
            AnswerToken::Category(_) => ResponseClass::Category,
        }
    }
}

impl fmt::Display for AnswerToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnswerToken::Bool(b) => write!(f, "{b}"),
            AnswerToken::Location(l) => f.write_str(l.name()),
            AnswerToken::Category(c) => f.write_str(c),
        }
    }
}

impl Serialize for AnswerToken {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AnswerToken {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(AnswerToken::parse(&s))
    }
}

/// The class an answer token belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseClass {
    Boolean,
    Location,
    Category,
}

impl ResponseClass {
    pub fn name(self) -> &'static str {
        match self {
            ResponseClass::Boolean => "boolean",
            ResponseClass::Location => "location",
            ResponseClass::Category => "category",
        }
    }
}

/// A stimulus placed in a frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub frame_index: usize,
    pub location: Location,
    pub stimulus: StimulusSpec,
    /// 1-based position among task objects; `None` for distractors.
    pub ordinal: Option<u32>,
    pub is_distractor: bool,
}

impl ObjectInstance {
    pub fn attributes(&self) -> AttributeMap {
        AttributeMap {
            category: Some(self.stimulus.category.clone()),
            identity: Some(self.stimulus.identity),
            view_angle: Some(self.stimulus.view_angle),
            location: Some(self.location),
        }
    }

    pub fn value(&self, attribute: Attribute) -> Value {
        match attribute {
            Attribute::Location => Value::Location(self.location),
            a => self.stimulus.value(a).expect("stimulus attribute"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSet {
    pub objects: Vec<ObjectInstance>,
}

impl ObjectSet {
    pub fn in_frame(&self, frame: usize) -> impl Iterator<Item = &ObjectInstance> {
        self.objects.iter().filter(move |o| o.frame_index == frame)
    }

    pub fn task_object(&self, ordinal: u32) -> Option<&ObjectInstance> {
        self.objects
            .iter()
            .find(|o| !o.is_distractor && o.ordinal == Some(ordinal))
    }

    pub fn task_objects(&self) -> impl Iterator<Item = &ObjectInstance> {
        self.objects.iter().filter(|o| !o.is_distractor)
    }

    pub fn distractors(&self) -> impl Iterator<Item = &ObjectInstance> {
        self.objects.iter().filter(|o| o.is_distractor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dms() -> TaskGraph {
        OpTree::is_same(
            OpTree::get_at(Attribute::Category, 1),
            OpTree::get_at(Attribute::Category, 2),
        )
        .into_graph()
    }

    fn ctxdm() -> TaskGraph {
        let cmp = |a, b| {
            OpTree::is_same(
                OpTree::get_at(Attribute::Category, a),
                OpTree::get_at(Attribute::Category, b),
            )
        };
        OpTree::switch(cmp(1, 3), cmp(2, 3), cmp(2, 4)).into_graph()
    }

    #[test]
    fn single_select_has_depth_zero() {
        assert_eq!(graph_depth(&OpTree::select(1).into_graph()), 0);
    }

    #[test]
    fn dms_depth_is_two() {
        assert_eq!(graph_depth(&dms()), 2);
    }

    #[test]
    fn ctxdm_depth_is_three() {
        // Switch -> IsSame -> GetCategory -> Select is the longest chain.
        assert_eq!(graph_depth(&ctxdm()), 3);
    }

    #[test]
    fn tree_round_trip_preserves_shape() {
        let g = ctxdm();
        assert_eq!(TaskGraph::from_tree(&g.to_tree()), g);
        assert_eq!(
            g.shape(),
            "Switch(IsSame(GetCategory(Select),GetCategory(Select)),\
             IsSame(GetCategory(Select),GetCategory(Select)),\
             IsSame(GetCategory(Select),GetCategory(Select)))"
        );
    }

    #[test]
    fn dangling_edges_are_rejected() {
        let mut nodes = BTreeMap::new();
        nodes.insert(NodeId(0), Operator::Get(Attribute::Category));
        let edges = vec![Edge {
            parent: NodeId(0),
            slot: Slot::Arg,
            child: NodeId(9),
        }];
        assert!(matches!(
            TaskGraph::new(nodes, edges, NodeId(0)),
            Err(GraphError::DanglingEdge { .. })
        ));
    }

    #[test]
    fn answer_tokens_parse_by_class() {
        assert_eq!(AnswerToken::parse("true"), AnswerToken::Bool(true));
        assert_eq!(
            AnswerToken::parse("bottom left"),
            AnswerToken::Location(Location::BottomLeft)
        );
        assert_eq!(AnswerToken::parse("planes"), AnswerToken::Category("planes".into()));
        assert_eq!(
            AnswerToken::from_value(&Value::Identity(crate::value::IdentityValue {
                category: "cars".into(),
                index: 1
            })),
            None
        );
    }
}
