//! Temporal composition of independently initialized task graphs.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::init::{initialize_with, ConstraintAssignment, RETRY_BUDGET};
use super::TrialError;
use crate::graph::{evaluate_all, TaskGraph};
use crate::stimulus::AttributeSpace;
use crate::value::{AttributeMap, Value};

/// How subtasks are arranged in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalRelation {
    Queue,
    Overlap,
    Interleave,
    Condition,
}

impl TemporalRelation {
    pub fn name(self) -> &'static str {
        match self {
            TemporalRelation::Queue => "queue",
            TemporalRelation::Overlap => "overlap",
            TemporalRelation::Interleave => "interleave",
            TemporalRelation::Condition => "condition",
        }
    }
}

/// Where each subtask's objects go in the combined sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Placement {
    Relation(TemporalRelation),
    /// Per part, local object slot to combined slot.
    Explicit(Vec<BTreeMap<u32, u32>>),
}

/// Result of merging subtasks onto one object sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedParts {
    /// Resolved graphs, Selects bound to combined slots `1..=n`.
    pub graphs: Vec<TaskGraph>,
    pub assignments: Vec<ConstraintAssignment>,
    pub objects: BTreeMap<u32, AttributeMap>,
    /// Combined slots used by more than one part.
    pub shared: BTreeMap<u32, Vec<usize>>,
}

impl MergedParts {
    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }
}

fn slot_maps<R: Rng + ?Sized>(
    slots: &[BTreeSet<u32>],
    relation: TemporalRelation,
    rng: &mut R,
) -> Result<Vec<BTreeMap<u32, u32>>, TrialError> {
    let mut maps = Vec::with_capacity(slots.len());
    match relation {
        TemporalRelation::Condition => {
            return Err(TrialError::Relation(
                "condition composes through a Switch, not frame merging".into(),
            ))
        }
        TemporalRelation::Queue => {
            let mut next = 1;
            for s in slots {
                maps.push(s.iter().map(|l| (*l, next + rank(s, *l))).collect());
                next += s.len() as u32;
            }
        }
        TemporalRelation::Overlap => {
            let mut end = 0u32;
            let mut prev = 0usize;
            for (i, s) in slots.iter().enumerate() {
                let start = if i == 0 {
                    1
                } else {
                    let most = prev.min(s.len()).saturating_sub(1).max(1) as u32;
                    let shared = rng.random_range(1..=most);
                    end + 1 - shared
                };
                maps.push(s.iter().map(|l| (*l, start + rank(s, *l))).collect());
                end = end.max(start + s.len() as u32 - 1);
                prev = s.len();
            }
        }
        TemporalRelation::Interleave => {
            let lists: Vec<Vec<u32>> = slots.iter().map(|s| s.iter().copied().collect()).collect();
            let mut next = 1;
            maps = vec![BTreeMap::new(); slots.len()];
            let longest = lists.iter().map(Vec::len).max().unwrap_or(0);
            for j in 0..longest {
                for (i, list) in lists.iter().enumerate() {
                    if let Some(l) = list.get(j) {
                        maps[i].insert(*l, next);
                        next += 1;
                    }
                }
            }
        }
    }
    Ok(maps)
}

fn rank(set: &BTreeSet<u32>, value: u32) -> u32 {
    set.range(..value).count() as u32
}

/// Copies every attribute `earlier` sets onto `later`.
fn overwrite(later: &AttributeMap, earlier: &AttributeMap) -> AttributeMap {
    AttributeMap {
        category: earlier.category.clone().or_else(|| later.category.clone()),
        identity: earlier.identity.or(later.identity),
        view_angle: earlier.view_angle.or(later.view_angle),
        location: earlier.location.or(later.location),
    }
}

fn conflicts(a: &AttributeMap, b: &AttributeMap) -> bool {
    fn clash<T: PartialEq>(x: &Option<T>, y: &Option<T>) -> bool {
        matches!((x, y), (Some(x), Some(y)) if x != y)
    }
    clash(&a.category, &b.category)
        || clash(&a.identity, &b.identity)
        || clash(&a.view_angle, &b.view_angle)
        || clash(&a.location, &b.location)
}

/// Re-initializations of one part around fixed shared objects before the
/// whole merge is drawn again.
const PART_RETRIES: usize = 5;

/// Merges initialized parts. On a shared slot the earlier part wins and the
/// later part's object is rewritten; the later part is then re-derived, and
/// re-initialized around the shared objects if its answer would change. When
/// that fails the merge is drawn again from fresh initializations that keep
/// every part's assigned answer.
pub fn merge_temporal<R: Rng + ?Sized>(
    parts: Vec<(TaskGraph, ConstraintAssignment)>,
    placement: &Placement,
    space: &AttributeSpace,
    rng: &mut R,
) -> Result<MergedParts, TrialError> {
    if parts.len() < 2 {
        return Err(TrialError::Relation("merging needs at least two parts".into()));
    }
    let roots = parts
        .iter()
        .map(|(g, a)| {
            a.root_value(g)
                .cloned()
                .ok_or_else(|| TrialError::InvalidGraph("part has no root value".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut parts = parts;
    let mut detail = String::new();
    for _ in 0..RETRY_BUDGET {
        let slots: Vec<BTreeSet<u32>> = parts.iter().map(|(_, a)| a.slots()).collect();
        let maps = placement_maps(&slots, placement, rng)?;
        match merge_once(&parts, &roots, &maps, space, rng) {
            Ok(merged) => return Ok(merged),
            Err(e) => detail = e,
        }
        let mut fresh = Vec::with_capacity(parts.len());
        for ((graph, _), root) in parts.iter().zip(&roots) {
            fresh.push((
                graph.clone(),
                initialize_with(graph, space, root, &BTreeMap::new(), rng)?,
            ));
        }
        parts = fresh;
    }
    Err(TrialError::MergeFailed {
        attempts: RETRY_BUDGET,
        detail,
    })
}

fn placement_maps<R: Rng + ?Sized>(
    slots: &[BTreeSet<u32>],
    placement: &Placement,
    rng: &mut R,
) -> Result<Vec<BTreeMap<u32, u32>>, TrialError> {
    let maps = match placement {
        Placement::Relation(r) => slot_maps(slots, *r, rng)?,
        Placement::Explicit(maps) => {
            if maps.len() != slots.len() {
                return Err(TrialError::Relation("one slot map per part is required".into()));
            }
            for (map, s) in maps.iter().zip(slots) {
                if let Some(missing) = s.iter().find(|l| !map.contains_key(l)) {
                    return Err(TrialError::Relation(format!("object slot {missing} is not placed")));
                }
            }
            maps.clone()
        }
    };
    let used: BTreeSet<u32> = maps.iter().flat_map(|m| m.values().copied()).collect();
    let compress: BTreeMap<u32, u32> = used.iter().enumerate().map(|(i, g)| (*g, i as u32 + 1)).collect();
    Ok(maps
        .into_iter()
        .map(|m| m.into_iter().map(|(l, g)| (l, compress[&g])).collect())
        .collect())
}

fn merge_once<R: Rng + ?Sized>(
    parts: &[(TaskGraph, ConstraintAssignment)],
    roots: &[Value],
    maps: &[BTreeMap<u32, u32>],
    space: &AttributeSpace,
    rng: &mut R,
) -> Result<MergedParts, String> {
    let mut combined: BTreeMap<u32, AttributeMap> = BTreeMap::new();
    let mut users: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut graphs = Vec::new();
    let mut assignments = Vec::new();

    for (i, (graph, assignment)) in parts.iter().enumerate() {
        let local = assignment.apply(graph);
        let root = &roots[i];
        let map = &maps[i];
        let fixed: BTreeMap<u32, AttributeMap> = map
            .iter()
            .filter_map(|(l, g)| combined.get(g).map(|e| (*l, e.clone())))
            .collect();
        let mut current = assignment.clone();
        let mut retries = 0;
        loop {
            let clash = fixed
                .iter()
                .any(|(l, e)| current.objects.get(l).is_some_and(|o| conflicts(o, e)));
            if !clash {
                break;
            }
            let mut modified = current.clone();
            for (l, e) in &fixed {
                let o = modified.objects.entry(*l).or_default();
                *o = overwrite(o, e);
            }
            if let Ok(values) = evaluate_all(&local, &modified.objects) {
                if values.get(&local.root()) == Some(root) {
                    modified.values.extend(values);
                    current = modified;
                    continue;
                }
            }
            retries += 1;
            if retries > PART_RETRIES {
                return Err(format!("part {i} keeps changing its answer on shared objects"));
            }
            if let Ok(fresh) = initialize_with(&local, space, root, &fixed, rng) {
                current = fresh;
            }
        }
        for (l, g) in map {
            let o = current.objects.get(l).cloned().unwrap_or_default();
            let e = combined.entry(*g).or_default();
            *e = overwrite(&o, e);
            users.entry(*g).or_default().push(i);
        }
        let global = current.remap_slots(map);
        graphs.push(global.apply(graph));
        assignments.push(global);
    }
    let shared = users.into_iter().filter(|(_, u)| u.len() > 1).collect();
    Ok(MergedParts {
        graphs,
        assignments,
        objects: combined,
        shared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{evaluate_value, OpTree};
    use crate::value::{Attribute, Value};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn category(name: &str) -> AttributeMap {
        AttributeMap {
            category: Some(name.into()),
            ..Default::default()
        }
    }

    fn part(slots: (u32, u32), first: &str, second: &str) -> (TaskGraph, ConstraintAssignment) {
        let g = OpTree::is_same(
            OpTree::get_at(Attribute::Category, slots.0),
            OpTree::get_at(Attribute::Category, slots.1),
        )
        .into_graph();
        let objects = BTreeMap::from([(slots.0, category(first)), (slots.1, category(second))]);
        let values = evaluate_all(&g, &objects).unwrap();
        let when = g
            .nodes()
            .filter_map(|(id, op)| match op {
                crate::graph::Operator::Select(s) => Some((id, s.when.unwrap())),
                _ => None,
            })
            .collect();
        (
            g,
            ConstraintAssignment {
                values,
                when,
                objects,
                exist_targets: BTreeMap::new(),
            },
        )
    }

    #[test]
    fn later_select_takes_the_earlier_category() {
        // Part 1 puts a table in the shared frame, part 2 a plane.
        let first = part((1, 2), "chairs", "tables");
        let second = part((1, 2), "planes", "boats");
        let placement = Placement::Explicit(vec![BTreeMap::from([(1, 1), (2, 2)]), BTreeMap::from([(1, 2), (2, 3)])]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let merged = merge_temporal(vec![first, second], &placement, &AttributeSpace::default(), &mut rng).unwrap();
        assert_eq!(merged.objects[&2].category.as_deref(), Some("tables"));
        assert_eq!(merged.shared.keys().copied().collect::<Vec<_>>(), vec![2]);
        for (g, a) in merged.graphs.iter().zip(&merged.assignments) {
            let root = a.root_value(g).unwrap();
            assert_eq!(&evaluate_value(g, &merged.objects).unwrap(), root);
        }
    }

    #[test]
    fn answer_flip_triggers_reinitialization() {
        // Part 2 must stay true, but forcing its first object to chairs would
        // make it false.
        let first = part((1, 2), "chairs", "tables");
        let second = part((1, 2), "boats", "boats");
        let placement = Placement::Explicit(vec![BTreeMap::from([(1, 1), (2, 2)]), BTreeMap::from([(1, 1), (2, 3)])]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let merged = merge_temporal(vec![first, second], &placement, &AttributeSpace::default(), &mut rng).unwrap();
        assert_eq!(merged.objects[&3].category.as_deref(), Some("chairs"));
        let g = &merged.graphs[1];
        assert_eq!(evaluate_value(g, &merged.objects).unwrap(), Value::Bool(true));
    }

    #[test]
    fn queue_keeps_parts_disjoint() {
        let first = part((1, 2), "chairs", "tables");
        let second = part((1, 2), "planes", "boats");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let merged = merge_temporal(
            vec![first.clone(), second.clone()],
            &Placement::Relation(TemporalRelation::Queue),
            &AttributeSpace::default(),
            &mut rng,
        )
        .unwrap();
        assert!(merged.shared.is_empty());
        assert_eq!(merged.objects.len(), 4);
        assert_eq!(merged.assignments[0].objects, first.1.objects);
        assert_eq!(merged.objects[&3], second.1.objects[&1]);
    }

    #[test]
    fn overlap_shares_frames() {
        let mk = || part((1, 2), "chairs", "chairs");
        let three = {
            let g = OpTree::and(
                OpTree::is_same(
                    OpTree::get_at(Attribute::Category, 1),
                    OpTree::get_at(Attribute::Category, 2),
                ),
                OpTree::is_same(
                    OpTree::get_at(Attribute::Category, 3),
                    OpTree::get_at(Attribute::Category, 3),
                ),
            )
            .into_graph();
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let a = crate::trial::init::backward_initialize(&g, &AttributeSpace::default(), &mut rng).unwrap();
            (g, a)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let merged = merge_temporal(
            vec![mk(), three],
            &Placement::Relation(TemporalRelation::Overlap),
            &AttributeSpace::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(merged.shared.len(), 1);
        assert_eq!(merged.objects.len(), 4);
    }

    #[test]
    fn condition_is_not_a_frame_merge() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = merge_temporal(
            vec![part((1, 2), "a", "b"), part((1, 2), "a", "b")],
            &Placement::Relation(TemporalRelation::Condition),
            &AttributeSpace::default(),
            &mut rng,
        );
        assert!(matches!(r, Err(TrialError::Relation(_))));
    }
}
