//! Sampling task graphs from a task space.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    graph_depth, validate_graph, ConnectivityRules, Constraint, Edge, ExistSpec, NodeId, OpTree, Operator,
    OperatorKind, SelectSpec, Slot, TaskGraph,
};
use crate::value::{Attribute, Value};

/// Probability that a comparison's right operand is a constant.
pub const CONST_OPERAND_PROBABILITY: f64 = 0.25;

const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Error)]
pub enum AutoTaskError {
    #[error("task space admits no graph: {0}")]
    Unsatisfiable(String),
    #[error("no graph within the operator budget after {0} attempts")]
    Exhausted(usize),
    #[error("enumeration exceeded the cap of {0} graphs")]
    CapExceeded(usize),
    #[error("invalid task space: {0}")]
    InvalidConfig(String),
    #[error("condition root must be boolean-valued, found {0}")]
    NonBooleanCondition(OperatorKind),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse task space: {0}")]
    Parse(String),
}

/// Inclusive count range, written `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange(pub u32, pub u32);

impl CountRange {
    pub fn exactly(n: u32) -> CountRange {
        CountRange(n, n)
    }

    pub fn contains(&self, n: u32) -> bool {
        (self.0..=self.1).contains(&n)
    }

    pub fn values(&self) -> std::ops::RangeInclusive<u32> {
        self.0..=self.1
    }
}

/// Hyperparameters of a task space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpaceConfig {
    pub max_switches: u32,
    #[serde(default)]
    pub min_switches: u32,
    pub max_depth: u32,
    pub max_ops: u32,
    #[serde(default)]
    pub max_selects: Option<u32>,
    pub allowed_root_kinds: BTreeSet<OperatorKind>,
    pub allowed_boolean_kinds: BTreeSet<OperatorKind>,
    pub n_and_or: CountRange,
    #[serde(default)]
    pub rules: ConnectivityRules,
}

impl TaskSpaceConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<TaskSpaceConfig, AutoTaskError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| AutoTaskError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: TaskSpaceConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| AutoTaskError::Parse(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| AutoTaskError::Parse(e.to_string()))?
        };
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), AutoTaskError> {
        if self.max_depth < 1 || self.max_ops < 1 {
            return Err(AutoTaskError::InvalidConfig(
                "max_depth and max_ops must be at least 1".into(),
            ));
        }
        if self.n_and_or.0 > self.n_and_or.1 {
            return Err(AutoTaskError::InvalidConfig("n_and_or range is empty".into()));
        }
        if self.min_switches > self.max_switches {
            return Err(AutoTaskError::InvalidConfig("min_switches exceeds max_switches".into()));
        }
        if self.allowed_root_kinds.is_empty() {
            return Err(AutoTaskError::InvalidConfig("no root kinds".into()));
        }
        Ok(())
    }

    /// Every way `graph` falls outside this task space.
    pub fn conformance(&self, graph: &TaskGraph) -> Vec<String> {
        let mut out = Vec::new();
        let report = validate_graph(graph, &self.rules);
        out.extend(report.violations.iter().map(|v| v.to_string()));
        let root = graph.kind(graph.root()).expect("root exists");
        if !(self.allowed_root_kinds.contains(&root) || root == OperatorKind::Switch) {
            out.push(format!("root kind {root} is not allowed"));
        }
        let switches = graph.count_kind(OperatorKind::Switch) as u32;
        if switches < self.min_switches || switches > self.max_switches {
            out.push(format!("{switches} Switch nodes"));
        }
        let and_or = graph.count_where(OperatorKind::is_and_or) as u32;
        if !self.n_and_or.contains(and_or) {
            out.push(format!("{and_or} And/Or nodes"));
        }
        let depth = graph_depth(graph) as u32;
        if depth > self.max_depth {
            out.push(format!("depth {depth} exceeds {}", self.max_depth));
        }
        if graph.node_count() as u32 > self.max_ops {
            out.push(format!("{} operators exceed {}", graph.node_count(), self.max_ops));
        }
        let selects = graph.count_kind(OperatorKind::Select) as u32;
        if self.max_selects.is_some_and(|m| selects > m) {
            out.push(format!("{selects} Select nodes"));
        }
        for (id, op) in graph.nodes() {
            for (slot, child) in graph.children(id) {
                let kind = graph.kind(*child).expect("child exists");
                let allowed = match (op.kind(), slot) {
                    (OperatorKind::Switch, Slot::Cond) => self.allowed_boolean_kinds.contains(&kind),
                    (OperatorKind::Switch, _) => {
                        kind == OperatorKind::Switch || self.allowed_root_kinds.contains(&kind)
                    }
                    (k, _) if k.is_and_or() => self.allowed_boolean_kinds.contains(&kind),
                    _ => true,
                };
                if !allowed {
                    out.push(format!("{kind} is not allowed under {} {slot}", op.kind()));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Position {
    Root,
    Branch(Slot),
    Cond,
    Operand(OperatorKind, Slot),
}

/// Lower bound on subtree size: operators and Selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cost {
    nodes: u32,
    selects: u32,
}

impl Cost {
    fn add(self, other: Cost) -> Cost {
        Cost {
            nodes: self.nodes + other.nodes,
            selects: self.selects + other.selects,
        }
    }

    fn meet(a: Option<Cost>, b: Option<Cost>) -> Option<Cost> {
        match (a, b) {
            (Some(a), Some(b)) => Some(Cost {
                nodes: a.nodes.min(b.nodes),
                selects: a.selects.min(b.selects),
            }),
            (a, None) => a,
            (None, b) => b,
        }
    }
}

const NODE: Cost = Cost { nodes: 1, selects: 0 };
const SELECT: Cost = Cost { nodes: 1, selects: 1 };

/// Kind, And/Or count, Switch count and depth budget of a subtree.
type Budget = (OperatorKind, u32, u32, u32);

struct Planner<'a> {
    config: &'a TaskSpaceConfig,
    memo: RefCell<HashMap<Budget, Option<Cost>>>,
}

impl<'a> Planner<'a> {
    fn new(config: &'a TaskSpaceConfig) -> Self {
        Planner {
            config,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn allowed(&self, kind: OperatorKind, slot: Slot) -> BTreeSet<OperatorKind> {
        self.config.rules.allowed(kind, slot).cloned().unwrap_or_default()
    }

    fn candidates(&self, pos: Position) -> Vec<OperatorKind> {
        let c = self.config;
        let mut roots = c.allowed_root_kinds.clone();
        roots.insert(OperatorKind::Switch);
        let set: BTreeSet<_> = match pos {
            Position::Root => roots,
            Position::Branch(slot) => roots
                .intersection(&self.allowed(OperatorKind::Switch, slot))
                .copied()
                .collect(),
            Position::Cond => c
                .allowed_boolean_kinds
                .intersection(&self.allowed(OperatorKind::Switch, Slot::Cond))
                .copied()
                .collect(),
            Position::Operand(kind, slot) => c
                .allowed_boolean_kinds
                .intersection(&self.allowed(kind, slot))
                .copied()
                .collect(),
        };
        set.into_iter().filter(|k| c.rules.rule(*k).is_some()).collect()
    }

    /// Get kinds usable as a comparison's left operand, each with whether a
    /// Get and a Const may sit opposite it.
    fn comparison_options(&self, kind: OperatorKind) -> Vec<(OperatorKind, bool, bool)> {
        let lhs = self.allowed(kind, Slot::Lhs);
        let rhs = self.allowed(kind, Slot::Rhs);
        let arg_ok = |g: OperatorKind| self.allowed(g, Slot::Arg).contains(&OperatorKind::Select);
        lhs.into_iter()
            .filter(|g| g.is_get() && arg_ok(*g))
            .filter_map(|g| {
                let get = rhs.contains(&g);
                let constant = rhs.contains(&OperatorKind::Const)
                    && matches!(g.get_attribute(), Some(Attribute::Category | Attribute::Location));
                (get || constant).then_some((g, get, constant))
            })
            .collect()
    }

    fn any(&self, pos: Position, a: u32, s: u32, d: u32) -> Option<Cost> {
        self.candidates(pos)
            .into_iter()
            .map(|k| self.cost(k, a, s, d))
            .fold(None, Cost::meet)
    }

    fn cost(&self, kind: OperatorKind, a: u32, s: u32, d: u32) -> Option<Cost> {
        let key = (kind, a, s, d);
        if let Some(c) = self.memo.borrow().get(&key) {
            return *c;
        }
        let c = self.compute(kind, a, s, d);
        self.memo.borrow_mut().insert(key, c);
        c
    }

    fn compute(&self, kind: OperatorKind, a: u32, s: u32, d: u32) -> Option<Cost> {
        use OperatorKind::*;
        let plain = a == 0 && s == 0;
        match kind {
            Select => plain.then_some(SELECT),
            Const => None,
            Exist | GetCategory | GetLocation | GetIdentity | GetViewAngle => {
                (plain && d >= 1 && self.allowed(kind, Slot::Arg).contains(&Select)).then_some(NODE.add(SELECT))
            }
            IsSame | NotSame => {
                if !plain || d < 2 {
                    return None;
                }
                self.comparison_options(kind)
                    .into_iter()
                    .map(|(_, _, constant)| {
                        let rhs = if constant { NODE } else { NODE.add(SELECT) };
                        Some(NODE.add(NODE.add(SELECT)).add(rhs))
                    })
                    .fold(None, Cost::meet)
            }
            And | Or => {
                if s != 0 || a == 0 || d == 0 {
                    return None;
                }
                (0..a)
                    .map(|left| {
                        let l = self.any(Position::Operand(kind, Slot::Lhs), left, 0, d - 1)?;
                        let r = self.any(Position::Operand(kind, Slot::Rhs), a - 1 - left, 0, d - 1)?;
                        Some(NODE.add(l).add(r))
                    })
                    .fold(None, Cost::meet)
            }
            Switch => {
                if s == 0 || d == 0 {
                    return None;
                }
                self.switch_splits(a, s)
                    .into_iter()
                    .map(|(ca, ta, ts)| self.switch_cost(ca, ta, ts, a, s, d))
                    .fold(None, Cost::meet)
            }
        }
    }

    fn switch_splits(&self, a: u32, s: u32) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for ca in 0..=a {
            for ta in 0..=a - ca {
                for ts in 0..s {
                    out.push((ca, ta, ts));
                }
            }
        }
        out
    }

    fn switch_cost(&self, ca: u32, ta: u32, ts: u32, a: u32, s: u32, d: u32) -> Option<Cost> {
        let c = self.any(Position::Cond, ca, 0, d - 1)?;
        let t = self.any(Position::Branch(Slot::Then), ta, ts, d - 1)?;
        let e = self.any(Position::Branch(Slot::Else), a - ca - ta, s - 1 - ts, d - 1)?;
        Some(NODE.add(c).add(t).add(e))
    }

    fn sample<R: Rng + ?Sized>(&self, pos: Position, a: u32, s: u32, d: u32, rng: &mut R) -> OpTree {
        let kinds: Vec<_> = self
            .candidates(pos)
            .into_iter()
            .filter(|k| self.cost(*k, a, s, d).is_some())
            .collect();
        let kind = *kinds.choose(rng).expect("caller checked feasibility");
        self.sample_kind(kind, a, s, d, rng)
    }

    fn sample_kind<R: Rng + ?Sized>(&self, kind: OperatorKind, a: u32, s: u32, d: u32, rng: &mut R) -> OpTree {
        use OperatorKind::*;
        match kind {
            Select => OpTree::select_unbound(),
            Exist => {
                let attribute = *[Attribute::Category, Attribute::Location]
                    .choose(rng)
                    .expect("non-empty");
                OpTree {
                    op: Operator::Exist(ExistSpec {
                        target: BTreeMap::from([(attribute, None)]),
                    }),
                    children: vec![(Slot::Arg, OpTree::select_unbound())],
                }
            }
            IsSame | NotSame => {
                let options = self.comparison_options(kind);
                let (get, get_ok, const_ok) = *options.choose(rng).expect("feasible comparison");
                let attribute = get.get_attribute().expect("get kind");
                let lhs = OpTree::get(attribute, OpTree::select_unbound());
                let use_const = match (get_ok, const_ok) {
                    (true, true) => rng.random_bool(CONST_OPERAND_PROBABILITY),
                    (_, c) => c,
                };
                let rhs = if use_const {
                    OpTree::leaf(Operator::Const(None))
                } else {
                    OpTree::get(attribute, OpTree::select_unbound())
                };
                OpTree {
                    op: Operator::blank(kind),
                    children: vec![(Slot::Lhs, lhs), (Slot::Rhs, rhs)],
                }
            }
            And | Or => {
                let lhs_pos = Position::Operand(kind, Slot::Lhs);
                let rhs_pos = Position::Operand(kind, Slot::Rhs);
                let splits: Vec<u32> = (0..a)
                    .filter(|left| {
                        self.any(lhs_pos, *left, 0, d - 1).is_some()
                            && self.any(rhs_pos, a - 1 - left, 0, d - 1).is_some()
                    })
                    .collect();
                let left = *splits.choose(rng).expect("feasible split");
                OpTree {
                    op: Operator::blank(kind),
                    children: vec![
                        (Slot::Lhs, self.sample(lhs_pos, left, 0, d - 1, rng)),
                        (Slot::Rhs, self.sample(rhs_pos, a - 1 - left, 0, d - 1, rng)),
                    ],
                }
            }
            Switch => {
                let splits: Vec<_> = self
                    .switch_splits(a, s)
                    .into_iter()
                    .filter(|(ca, ta, ts)| self.switch_cost(*ca, *ta, *ts, a, s, d).is_some())
                    .collect();
                let (ca, ta, ts) = *splits.choose(rng).expect("feasible split");
                OpTree {
                    op: Operator::Switch,
                    children: vec![
                        (Slot::Cond, self.sample(Position::Cond, ca, 0, d - 1, rng)),
                        (
                            Slot::Then,
                            self.sample(Position::Branch(Slot::Then), ta, ts, d - 1, rng),
                        ),
                        (
                            Slot::Else,
                            self.sample(Position::Branch(Slot::Else), a - ca - ta, s - 1 - ts, d - 1, rng),
                        ),
                    ],
                }
            }
            Const => OpTree::leaf(Operator::Const(None)),
            get => OpTree::get(get.get_attribute().expect("get kind"), OpTree::select_unbound()),
        }
    }

    /// Feasible (switches, and/or) counts, given the budgets.
    fn totals(&self) -> Vec<(u32, u32)> {
        let c = self.config;
        let mut out = Vec::new();
        for s in c.min_switches..=c.max_switches {
            for a in c.n_and_or.values() {
                if let Some(cost) = self.any(Position::Root, a, s, c.max_depth) {
                    let fits = cost.nodes <= c.max_ops && c.max_selects.is_none_or(|m| cost.selects <= m);
                    if fits {
                        out.push((s, a));
                    }
                }
            }
        }
        out
    }
}

/// Samples a graph from the task space. Select slots are left unbound.
pub fn sample_task_graph<R: Rng + ?Sized>(config: &TaskSpaceConfig, rng: &mut R) -> Result<TaskGraph, AutoTaskError> {
    config.check()?;
    let planner = Planner::new(config);
    let totals = planner.totals();
    if totals.is_empty() {
        return Err(AutoTaskError::Unsatisfiable(format!(
            "no root in {:?} fits depth {} with {:?} And/Or and {}..={} Switch nodes",
            config.allowed_root_kinds, config.max_depth, config.n_and_or, config.min_switches, config.max_switches
        )));
    }
    let switch_counts: BTreeSet<u32> = totals.iter().map(|(s, _)| *s).collect();
    let switch_counts: Vec<u32> = switch_counts.into_iter().collect();
    for _ in 0..MAX_ATTEMPTS {
        let s = *switch_counts.choose(rng).expect("non-empty");
        let and_or: Vec<u32> = totals.iter().filter(|(x, _)| *x == s).map(|(_, a)| *a).collect();
        let a = *and_or.choose(rng).expect("non-empty");
        let tree = planner.sample(Position::Root, a, s, config.max_depth, rng);
        let graph = tree.into_graph();
        let selects = graph.count_kind(OperatorKind::Select) as u32;
        if graph.node_count() as u32 <= config.max_ops && config.max_selects.is_none_or(|m| selects <= m) {
            return Ok(graph);
        }
    }
    Err(AutoTaskError::Exhausted(MAX_ATTEMPTS))
}

/// Roots a Switch over three graphs, renumbering their nodes.
pub fn compose_with_switch(
    condition: &TaskGraph,
    then_branch: &TaskGraph,
    else_branch: &TaskGraph,
) -> Result<TaskGraph, AutoTaskError> {
    let root = condition.op(condition.root()).expect("root exists");
    let boolean =
        root.kind().is_boolean() || matches!(root, Operator::Const(None) | Operator::Const(Some(Value::Bool(_))));
    if !boolean {
        return Err(AutoTaskError::NonBooleanCondition(root.kind()));
    }
    Ok(join(
        Operator::Switch,
        &[
            (Slot::Cond, condition),
            (Slot::Then, then_branch),
            (Slot::Else, else_branch),
        ],
    ))
}

/// A new root `op` over `parts`, with node ids rewritten to stay unique.
pub fn join(op: Operator, parts: &[(Slot, &TaskGraph)]) -> TaskGraph {
    let mut nodes = BTreeMap::new();
    let mut edges = Vec::new();
    let root = NodeId(0);
    nodes.insert(root, op);
    let mut next = 1u32;
    for (slot, part) in parts {
        let map: BTreeMap<NodeId, NodeId> = part
            .nodes()
            .enumerate()
            .map(|(i, (id, _))| (id, NodeId(next + i as u32)))
            .collect();
        next += part.node_count() as u32;
        for (id, op) in part.nodes() {
            nodes.insert(map[&id], relink(op, &map));
        }
        edges.extend(part.edges().iter().map(|e| Edge {
            parent: map[&e.parent],
            slot: e.slot,
            child: map[&e.child],
        }));
        edges.push(Edge {
            parent: root,
            slot: *slot,
            child: map[&part.root()],
        });
    }
    TaskGraph::new(nodes, edges, root).expect("parts are sound")
}

fn relink(op: &Operator, map: &BTreeMap<NodeId, NodeId>) -> Operator {
    match op {
        Operator::Select(s) => {
            let fix = |c: &Constraint| match c {
                Constraint::Linked(t) => Constraint::Linked(*map.get(t).unwrap_or(t)),
                other => other.clone(),
            };
            Operator::Select(SelectSpec {
                when: s.when,
                location: s.location.as_ref().map(fix),
                what: s.what.iter().map(|(a, c)| (*a, fix(c))).collect(),
            })
        }
        other => other.clone(),
    }
}

/// Every distinct graph shape in the task space, found by brute force over
/// the connectivity rules.
pub fn enumerate_task_space(config: &TaskSpaceConfig, cap: usize) -> Result<Vec<String>, AutoTaskError> {
    config.check()?;
    let mut enumerator = Enumerator {
        config,
        cap,
        memo: HashMap::new(),
    };
    let mut roots = config.allowed_root_kinds.clone();
    if config.max_switches > 0 {
        roots.insert(OperatorKind::Switch);
    }
    let mut shapes = BTreeSet::new();
    for kind in roots {
        for tree in enumerator.trees(kind, config.max_depth)? {
            let graph = tree.into_graph();
            if config.conformance(&graph).is_empty() {
                shapes.insert(graph.shape());
            }
        }
    }
    Ok(shapes.into_iter().collect())
}

struct Enumerator<'a> {
    config: &'a TaskSpaceConfig,
    cap: usize,
    memo: HashMap<(OperatorKind, u32), Vec<OpTree>>,
}

impl Enumerator<'_> {
    fn trees(&mut self, kind: OperatorKind, depth: u32) -> Result<Vec<OpTree>, AutoTaskError> {
        if let Some(found) = self.memo.get(&(kind, depth)) {
            return Ok(found.clone());
        }
        let Some(rule) = self.config.rules.rule(kind).cloned() else {
            return Ok(Vec::new());
        };
        let mut op = Operator::blank(kind);
        if let Operator::Exist(spec) = &mut op {
            spec.target.insert(Attribute::Category, None);
        }
        let mut partial = vec![OpTree::leaf(op)];
        if !rule.slots.is_empty() && depth == 0 {
            partial.clear();
        }
        for slot in &rule.slots {
            if partial.is_empty() {
                break;
            }
            let mut options = Vec::new();
            for child in &slot.allowed {
                options.extend(self.trees(*child, depth - 1)?);
            }
            let mut grown = Vec::new();
            for p in &partial {
                for o in &options {
                    let mut t = p.clone();
                    t.children.push((slot.slot, o.clone()));
                    if within_budget(&t, self.config) {
                        grown.push(t);
                    }
                }
                if grown.len() > self.cap {
                    return Err(AutoTaskError::CapExceeded(self.cap));
                }
            }
            partial = grown;
        }
        self.memo.insert((kind, depth), partial.clone());
        Ok(partial)
    }
}

fn within_budget(tree: &OpTree, config: &TaskSpaceConfig) -> bool {
    fn count(t: &OpTree, f: &dyn Fn(OperatorKind) -> bool) -> u32 {
        f(t.kind()) as u32 + t.children.iter().map(|(_, c)| count(c, f)).sum::<u32>()
    }
    count(tree, &|_| true) <= config.max_ops
        && count(tree, &|k| k.is_and_or()) <= config.n_and_or.1
        && count(tree, &|k| k == OperatorKind::Switch) <= config.max_switches
        && config
            .max_selects
            .is_none_or(|m| count(tree, &|k| k == OperatorKind::Select) <= m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kinds(list: &[OperatorKind]) -> BTreeSet<OperatorKind> {
        list.iter().copied().collect()
    }

    fn single_shape_config() -> TaskSpaceConfig {
        use OperatorKind::*;
        TaskSpaceConfig {
            max_switches: 0,
            min_switches: 0,
            max_depth: 4,
            max_ops: 20,
            max_selects: None,
            allowed_root_kinds: kinds(&[IsSame]),
            allowed_boolean_kinds: kinds(&[IsSame]),
            n_and_or: CountRange(0, 0),
            rules: ConnectivityRules::default().restricted_to(&kinds(&[IsSame, GetCategory, Select])),
        }
    }

    #[test]
    fn restricted_space_has_one_shape() {
        let config = single_shape_config();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = sample_task_graph(&config, &mut rng).unwrap();
            assert_eq!(g.shape(), "IsSame(GetCategory(Select),GetCategory(Select))");
        }
        assert_eq!(enumerate_task_space(&config, 1000).unwrap().len(), 1);
    }

    #[test]
    fn shallow_depth_is_unsatisfiable() {
        let mut config = single_shape_config();
        config.max_depth = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            sample_task_graph(&config, &mut rng),
            Err(AutoTaskError::Unsatisfiable(_))
        ));
    }

    #[test]
    fn tiny_op_budget_fails_fast() {
        let mut config = single_shape_config();
        config.max_ops = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            sample_task_graph(&config, &mut rng),
            Err(AutoTaskError::Unsatisfiable(_))
        ));
    }

    #[test]
    fn switch_composition_requires_boolean_condition() {
        let get = OpTree::get_at(Attribute::Category, 1).into_graph();
        assert!(matches!(
            compose_with_switch(&get, &get, &get),
            Err(AutoTaskError::NonBooleanCondition(OperatorKind::GetCategory))
        ));
        let c = OpTree::constant(Value::Bool(true)).into_graph();
        let g = compose_with_switch(&c, &get, &get).unwrap();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.kind(g.root()), Some(OperatorKind::Switch));
    }

    #[test]
    fn config_parses_from_toml() {
        let text = r#"
            max_switches = 1
            max_depth = 4
            max_ops = 22
            allowed_root_kinds = ["IsSame", "And"]
            allowed_boolean_kinds = ["IsSame"]
            n_and_or = [1, 1]
        "#;
        let config: TaskSpaceConfig = toml::from_str(text).unwrap();
        assert_eq!(config.n_and_or, CountRange(1, 1));
        assert_eq!(config.rules, ConnectivityRules::default());
    }
}
