//! Backward initialization: expected outputs flow from the root to the
//! Select leaves, fixing the attributes every object must carry.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TrialError;
use crate::graph::{evaluate_all, Constraint, NodeId, Operator, OperatorKind, Slot, TaskGraph};
use crate::stimulus::AttributeSpace;
use crate::value::{Attribute, AttributeMap, Value};

/// Attempts per initialization before giving up.
pub const RETRY_BUDGET: usize = 100;

/// Expected node outputs and the object attributes that realize them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintAssignment {
    pub values: BTreeMap<NodeId, Value>,
    pub when: BTreeMap<NodeId, u32>,
    pub objects: BTreeMap<u32, AttributeMap>,
    pub exist_targets: BTreeMap<NodeId, BTreeMap<Attribute, Value>>,
}

impl ConstraintAssignment {
    pub fn root_value(&self, graph: &TaskGraph) -> Option<&Value> {
        self.values.get(&graph.root())
    }

    pub fn slots(&self) -> BTreeSet<u32> {
        self.when.values().copied().collect()
    }

    /// `graph` with Select slots bound and constants and Exist targets filled.
    pub fn apply(&self, graph: &TaskGraph) -> TaskGraph {
        graph.map_ops(|id, op| match op {
            Operator::Select(s) => {
                let mut s = s.clone();
                if let Some(w) = self.when.get(&id) {
                    s.when = Some(*w);
                }
                Operator::Select(s)
            }
            Operator::Const(None) => Operator::Const(self.values.get(&id).cloned()),
            Operator::Exist(e) => {
                let mut e = e.clone();
                if let Some(t) = self.exist_targets.get(&id) {
                    for (a, v) in t {
                        e.target.insert(*a, Some(v.clone()));
                    }
                }
                Operator::Exist(e)
            }
            other => other.clone(),
        })
    }

    /// Renames object slots through `map`.
    pub fn remap_slots(&self, map: &BTreeMap<u32, u32>) -> ConstraintAssignment {
        let m = |s: &u32| *map.get(s).unwrap_or(s);
        ConstraintAssignment {
            values: self.values.clone(),
            when: self.when.iter().map(|(n, s)| (*n, m(s))).collect(),
            objects: self.objects.iter().map(|(s, o)| (m(s), o.clone())).collect(),
            exist_targets: self.exist_targets.clone(),
        }
    }
}

/// Values `node` can output, in canonical order.
pub fn output_pool(graph: &TaskGraph, node: NodeId, space: &AttributeSpace) -> Result<Vec<Value>, TrialError> {
    let op = graph
        .op(node)
        .ok_or(TrialError::InvalidGraph(format!("missing node {node}")))?;
    Ok(match op {
        Operator::Get(a) => space.pool(*a),
        Operator::Const(Some(v)) => vec![v.clone()],
        Operator::Const(None) => vec![Value::Bool(true), Value::Bool(false)],
        Operator::Switch => {
            let mut pool = Vec::new();
            for slot in [Slot::Then, Slot::Else] {
                let branch = graph
                    .child(node, slot)
                    .ok_or_else(|| TrialError::InvalidGraph(format!("Switch {node} lacks {slot}")))?;
                for v in output_pool(graph, branch, space)? {
                    if !pool.contains(&v) {
                        pool.push(v);
                    }
                }
            }
            pool
        }
        Operator::Select(_) => return Err(TrialError::InvalidGraph(format!("Select {node} has no value output"))),
        _ => vec![Value::Bool(true), Value::Bool(false)],
    })
}

/// Initializes `graph` with a root value drawn uniformly from its pool.
pub fn backward_initialize<R: Rng + ?Sized>(
    graph: &TaskGraph,
    space: &AttributeSpace,
    rng: &mut R,
) -> Result<ConstraintAssignment, TrialError> {
    let pool = output_pool(graph, graph.root(), space)?;
    let root = pool.choose(rng).cloned().ok_or(TrialError::NoObjects)?;
    initialize_with(graph, space, &root, &BTreeMap::new(), rng)
}

/// Initializes `graph` so its root outputs `root`. `preset` fixes attributes
/// of bound object slots up front.
pub fn initialize_with<R: Rng + ?Sized>(
    graph: &TaskGraph,
    space: &AttributeSpace,
    root: &Value,
    preset: &BTreeMap<u32, AttributeMap>,
    rng: &mut R,
) -> Result<ConstraintAssignment, TrialError> {
    for _ in 0..RETRY_BUDGET {
        let mut pass = Pass::new(graph, space, preset)?;
        if pass.run(root, rng).is_ok() {
            if let Some(done) = pass.finish(rng) {
                return Ok(done);
            }
        }
    }
    Err(TrialError::Contradiction { attempts: RETRY_BUDGET })
}

/// Marker for a failed attempt; the caller retries.
struct Conflict;

type Step = Result<(), Conflict>;

/// Slot numbers at or above this are placeholders for unbound Selects.
const FRESH_BASE: u32 = 1 << 30;

struct Pass<'a> {
    graph: &'a TaskGraph,
    space: &'a AttributeSpace,
    values: BTreeMap<NodeId, Value>,
    slot: BTreeMap<NodeId, u32>,
    objects: BTreeMap<u32, AttributeMap>,
    exist_targets: BTreeMap<NodeId, BTreeMap<Attribute, Value>>,
}

impl<'a> Pass<'a> {
    fn new(
        graph: &'a TaskGraph,
        space: &'a AttributeSpace,
        preset: &BTreeMap<u32, AttributeMap>,
    ) -> Result<Self, TrialError> {
        let mut slot = BTreeMap::new();
        let mut objects: BTreeMap<u32, AttributeMap> = preset.clone();
        for (id, op) in graph.nodes() {
            if let Operator::Select(s) = op {
                let k = s.when.unwrap_or(FRESH_BASE + id.0);
                slot.insert(id, k);
                let object = objects.entry(k).or_default();
                for (_, c) in s.constraints() {
                    if let Constraint::Const(v) = c {
                        object.set(v).map_err(|_| {
                            TrialError::InvalidGraph(format!(
                                "Select {id} contradicts another constraint on object {k}"
                            ))
                        })?;
                    }
                }
            }
        }
        Ok(Pass {
            graph,
            space,
            values: BTreeMap::new(),
            slot,
            objects,
            exist_targets: BTreeMap::new(),
        })
    }

    fn child(&self, id: NodeId, slot: Slot) -> Result<NodeId, Conflict> {
        self.graph.child(id, slot).ok_or(Conflict)
    }

    /// Object slot of the Select under a Get or Exist node.
    fn object_slot(&self, id: NodeId) -> Result<u32, Conflict> {
        let select = self.child(id, Slot::Arg)?;
        self.slot.get(&select).copied().ok_or(Conflict)
    }

    fn run<R: Rng + ?Sized>(&mut self, root: &Value, rng: &mut R) -> Step {
        self.assign(self.graph.root(), root.clone(), rng)
    }

    /// Values a comparison operand may take.
    fn operand_values(&self, id: NodeId, attribute: Attribute) -> Result<Vec<Value>, Conflict> {
        if let Some(v) = self.values.get(&id) {
            return Ok(vec![v.clone()]);
        }
        match self.graph.op(id).ok_or(Conflict)? {
            Operator::Get(_) => {
                let object = &self.objects[&self.object_slot(id)?];
                Ok(self
                    .space
                    .pool(attribute)
                    .into_iter()
                    .filter(|v| object.admits(v))
                    .collect())
            }
            Operator::Const(Some(v)) => Ok(vec![v.clone()]),
            Operator::Const(None) => Ok(self.space.pool(attribute)),
            _ => Err(Conflict),
        }
    }

    fn operand_attribute(&self, id: NodeId) -> Option<Attribute> {
        match self.graph.op(id)? {
            Operator::Get(a) => Some(*a),
            Operator::Const(Some(v)) => v.attribute(),
            _ => None,
        }
    }

    fn assign<R: Rng + ?Sized>(&mut self, id: NodeId, value: Value, rng: &mut R) -> Step {
        if let Some(existing) = self.values.get(&id) {
            return if *existing == value { Ok(()) } else { Err(Conflict) };
        }
        self.values.insert(id, value.clone());
        let op = self.graph.op(id).ok_or(Conflict)?.clone();
        match op {
            Operator::Select(_) => Err(Conflict),
            Operator::Get(_) => {
                let k = self.object_slot(id)?;
                self.objects
                    .get_mut(&k)
                    .ok_or(Conflict)?
                    .set(&value)
                    .map_err(|_| Conflict)
            }
            Operator::Const(Some(c)) => {
                if c == value {
                    Ok(())
                } else {
                    Err(Conflict)
                }
            }
            Operator::Const(None) => Ok(()),
            Operator::IsSame | Operator::NotSame => {
                let want = value.as_bool().ok_or(Conflict)?;
                let equal = want == (op == Operator::IsSame);
                let lhs = self.child(id, Slot::Lhs)?;
                let rhs = self.child(id, Slot::Rhs)?;
                let attribute = self
                    .operand_attribute(lhs)
                    .or_else(|| self.operand_attribute(rhs))
                    .ok_or(Conflict)?;
                let left = self.operand_values(lhs, attribute)?;
                let right = self.operand_values(rhs, attribute)?;
                let (a, b) = if equal {
                    let common: Vec<_> = left.iter().filter(|v| right.contains(v)).cloned().collect();
                    let v = common.choose(rng).cloned().ok_or(Conflict)?;
                    (v.clone(), v)
                } else {
                    let pairs: Vec<(&Value, &Value)> = left
                        .iter()
                        .flat_map(|x| right.iter().filter(move |y| *y != x).map(move |y| (x, y)))
                        .collect();
                    let (x, y) = *pairs.choose(rng).ok_or(Conflict)?;
                    (x.clone(), y.clone())
                };
                self.assign(lhs, a, rng)?;
                self.assign(rhs, b, rng)
            }
            Operator::And | Operator::Or => {
                let want = value.as_bool().ok_or(Conflict)?;
                let forced = want == (op == Operator::And);
                let (l, r) = if forced {
                    (want, want)
                } else {
                    *[(!want, !want), (!want, want), (want, !want)]
                        .choose(rng)
                        .expect("non-empty")
                };
                let lhs = self.child(id, Slot::Lhs)?;
                let rhs = self.child(id, Slot::Rhs)?;
                self.assign(lhs, Value::Bool(l), rng)?;
                self.assign(rhs, Value::Bool(r), rng)
            }
            Operator::Switch => {
                let cond = self.child(id, Slot::Cond)?;
                let then = self.child(id, Slot::Then)?;
                let other = self.child(id, Slot::Else)?;
                let mut able = Vec::new();
                for (flag, branch) in [(true, then), (false, other)] {
                    let pool = output_pool(self.graph, branch, self.space).map_err(|_| Conflict)?;
                    if pool.contains(&value) {
                        able.push(flag);
                    }
                }
                let taken = *able.choose(rng).ok_or(Conflict)?;
                let (chosen, untaken) = if taken { (then, other) } else { (other, then) };
                self.assign(cond, Value::Bool(taken), rng)?;
                self.assign(chosen, value, rng)?;
                if !self.values.contains_key(&untaken) {
                    let pool = output_pool(self.graph, untaken, self.space).map_err(|_| Conflict)?;
                    let v = pool.choose(rng).cloned().ok_or(Conflict)?;
                    self.assign(untaken, v, rng)?;
                }
                Ok(())
            }
            Operator::Exist(spec) => {
                let want = value.as_bool().ok_or(Conflict)?;
                let k = self.object_slot(id)?;
                let mut object = self.objects[&k].clone();
                let attributes: Vec<Attribute> = spec.target.keys().copied().collect();
                let flip = if want {
                    None
                } else {
                    Some(*attributes.choose(rng).ok_or(Conflict)?)
                };
                let mut targets = BTreeMap::new();
                for attribute in attributes {
                    let fixed = spec.target[&attribute].clone();
                    let pool = self.space.pool(attribute);
                    let target = match &fixed {
                        Some(v) => v.clone(),
                        None if Some(attribute) == flip => pool.choose(rng).cloned().ok_or(Conflict)?,
                        None => {
                            let admitted: Vec<_> = pool.iter().filter(|v| object.admits(v)).cloned().collect();
                            admitted.choose(rng).cloned().ok_or(Conflict)?
                        }
                    };
                    let actual = if Some(attribute) == flip {
                        let differing: Vec<_> = pool
                            .iter()
                            .filter(|v| **v != target && object.admits(v))
                            .cloned()
                            .collect();
                        differing.choose(rng).cloned().ok_or(Conflict)?
                    } else if want {
                        target.clone()
                    } else {
                        let admitted: Vec<_> = pool.iter().filter(|v| object.admits(v)).cloned().collect();
                        admitted.choose(rng).cloned().ok_or(Conflict)?
                    };
                    object.set(&actual).map_err(|_| Conflict)?;
                    targets.insert(attribute, target);
                }
                self.objects.insert(k, object);
                self.exist_targets.insert(id, targets);
                Ok(())
            }
        }
    }

    /// Applies linked constraints, numbers fresh slots and verifies the
    /// result by forward evaluation.
    fn finish<R: Rng + ?Sized>(mut self, rng: &mut R) -> Option<ConstraintAssignment> {
        for (id, op) in self.graph.nodes() {
            let Operator::Select(s) = op else { continue };
            for (_, c) in s.constraints() {
                if let Constraint::Linked(target) = c {
                    let v = self.values.get(target)?.clone();
                    self.objects.get_mut(&self.slot[&id])?.set(&v).ok()?;
                }
            }
        }
        let bound: BTreeSet<u32> = self.slot.values().copied().filter(|k| *k < FRESH_BASE).collect();
        let fresh: Vec<u32> = self
            .slot
            .values()
            .copied()
            .filter(|k| *k >= FRESH_BASE)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut targets: Vec<u32> = (1..).filter(|k| !bound.contains(k)).take(fresh.len()).collect();
        targets.shuffle(rng);
        let map: BTreeMap<u32, u32> = fresh.into_iter().zip(targets).collect();
        let assignment = ConstraintAssignment {
            values: self.values,
            when: self.slot,
            objects: self.objects,
            exist_targets: self.exist_targets,
        }
        .remap_slots(&map);
        let resolved = assignment.apply(self.graph);
        let derived = evaluate_all(&resolved, &assignment.objects).ok()?;
        let consistent = assignment
            .values
            .iter()
            .all(|(id, v)| resolved.kind(*id) == Some(OperatorKind::Const) || derived.get(id) == Some(v));
        consistent.then_some(assignment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::OpTree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space() -> AttributeSpace {
        AttributeSpace::default()
    }

    fn dms(attribute: Attribute) -> TaskGraph {
        OpTree::is_same(
            OpTree::get(attribute, OpTree::select_unbound()),
            OpTree::get(attribute, OpTree::select_unbound()),
        )
        .into_graph()
    }

    #[test]
    fn equal_comparison_shares_one_category() {
        let g = dms(Attribute::Category);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = initialize_with(&g, &space(), &Value::Bool(true), &BTreeMap::new(), &mut rng).unwrap();
        let cats: Vec<_> = a.objects.values().map(|o| o.category.clone().unwrap()).collect();
        assert_eq!(cats.len(), 2);
        assert_eq!(cats[0], cats[1]);
        assert_eq!(a.slots(), BTreeSet::from([1, 2]));
    }

    #[test]
    fn false_not_same_forces_equal_values() {
        let g = OpTree::not_same(
            OpTree::get(Attribute::Location, OpTree::select_unbound()),
            OpTree::get(Attribute::Location, OpTree::select_unbound()),
        )
        .into_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = initialize_with(&g, &space(), &Value::Bool(false), &BTreeMap::new(), &mut rng).unwrap();
        let locs: BTreeSet<_> = a.objects.values().map(|o| o.location.unwrap()).collect();
        assert_eq!(locs.len(), 1);
    }

    #[test]
    fn presets_constrain_the_choice() {
        let g = OpTree::is_same(
            OpTree::get_at(Attribute::Category, 1),
            OpTree::get_at(Attribute::Category, 2),
        )
        .into_graph();
        let preset = BTreeMap::from([(
            1,
            AttributeMap {
                category: Some("planes".into()),
                ..Default::default()
            },
        )]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = initialize_with(&g, &space(), &Value::Bool(true), &preset, &mut rng).unwrap();
        assert_eq!(a.objects[&2].category.as_deref(), Some("planes"));
    }

    #[test]
    fn exist_false_breaks_the_target() {
        let g = OpTree {
            op: Operator::Exist(crate::graph::ExistSpec {
                target: BTreeMap::from([(Attribute::Category, None)]),
            }),
            children: vec![(Slot::Arg, OpTree::select_unbound())],
        }
        .into_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for want in [true, false] {
            let a = initialize_with(&g, &space(), &Value::Bool(want), &BTreeMap::new(), &mut rng).unwrap();
            let target = &a.exist_targets[&g.root()][&Attribute::Category];
            let object = &a.objects[&1];
            assert_eq!(object.matches(target), want);
        }
    }

    #[test]
    fn contradictory_presets_exhaust_the_budget() {
        let g = OpTree::is_same(
            OpTree::get_at(Attribute::Category, 1),
            OpTree::get_at(Attribute::Category, 1),
        )
        .into_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            initialize_with(&g, &space(), &Value::Bool(false), &BTreeMap::new(), &mut rng),
            Err(TrialError::Contradiction { .. })
        ));
    }
}
