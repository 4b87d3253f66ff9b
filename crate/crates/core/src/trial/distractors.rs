use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{TrialError, TrialInstance};
use crate::graph::{ObjectInstance, Operator, TaskGraph};
use crate::instruction::Qualifier;
use crate::stimulus::Catalog;
use crate::value::{Attribute, AttributeMap, Location, Value};

/// A frame has four locations, so at most three distractors fit beside the
/// task object.
pub const MAX_DISTRACTORS_PER_FRAME: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistractorOutcome {
    pub trial: TrialInstance,
    /// Object frames left without distractors because no attribute could
    /// tell them apart.
    pub skipped: Vec<usize>,
}

fn used_attributes(graph: &TaskGraph) -> BTreeSet<Attribute> {
    let mut used = BTreeSet::new();
    for (_, op) in graph.nodes() {
        match op {
            Operator::Get(a) => {
                used.insert(*a);
            }
            Operator::Exist(e) => used.extend(e.target.keys().copied()),
            Operator::Select(s) => {
                used.extend(s.what.keys().copied());
                if s.location.is_some() {
                    used.insert(Attribute::Location);
                }
            }
            _ => {}
        }
    }
    if used.contains(&Attribute::Identity) {
        used.insert(Attribute::Category);
    }
    used
}

/// First of location, category and view angle that no part of the task reads.
pub fn disambiguation_attribute(trial: &TrialInstance) -> Option<Attribute> {
    let used: BTreeSet<Attribute> = trial.parts.iter().flat_map(|p| used_attributes(&p.graph)).collect();
    [Attribute::Location, Attribute::Category, Attribute::ViewAngle]
        .into_iter()
        .find(|a| !used.contains(a))
}

/// Adds up to `per_frame_max` distractors to each object frame. Every
/// distractor differs from the frame's task object in an attribute the task
/// never reads, and the instruction names that attribute for the object.
pub fn add_distractors<R: Rng + ?Sized>(
    trial: &TrialInstance,
    per_frame_max: usize,
    catalog: &Catalog,
    rng: &mut R,
) -> Result<DistractorOutcome, TrialError> {
    let mut out = trial.clone();
    let mut skipped = Vec::new();
    if per_frame_max == 0 {
        return Ok(DistractorOutcome { trial: out, skipped });
    }
    let space = catalog.space();
    let attribute = disambiguation_attribute(trial);
    let cap = per_frame_max.min(MAX_DISTRACTORS_PER_FRAME);
    let task_objects: Vec<ObjectInstance> = trial.objects.task_objects().cloned().collect();
    for object in &task_objects {
        let frame = object.frame_index;
        let Some(attribute) = attribute else {
            skipped.push(frame);
            continue;
        };
        let alternatives: Vec<Value> = space
            .pool(attribute)
            .into_iter()
            .filter(|v| *v != object.value(attribute))
            .collect();
        if alternatives.is_empty() {
            skipped.push(frame);
            continue;
        }
        let count = rng.random_range(0..=cap);
        if count == 0 {
            continue;
        }
        let mut free: Vec<Location> = space
            .locations
            .iter()
            .copied()
            .filter(|l| out.objects.in_frame(frame).all(|o| o.location != *l))
            .collect();
        let mut placed = 0;
        while placed < count && !free.is_empty() {
            let value = alternatives.choose(rng).expect("alternatives are non-empty").clone();
            let mut constraints = AttributeMap::default();
            let location = if attribute == Attribute::Location {
                let Value::Location(l) = value else { unreachable!() };
                if !free.contains(&l) {
                    continue;
                }
                l
            } else {
                constraints.force(&value);
                *free.choose(rng).expect("free is non-empty")
            };
            free.retain(|l| *l != location);
            let stimulus = catalog.sample_stimulus(&constraints, rng)?;
            out.objects.objects.push(ObjectInstance {
                frame_index: frame,
                location,
                stimulus,
                ordinal: None,
                is_distractor: true,
            });
            placed += 1;
        }
        if placed > 0 {
            let ordinal = object.ordinal.expect("task objects carry an ordinal");
            out.disambiguations.insert(
                ordinal,
                Qualifier {
                    attribute,
                    value: object.value(attribute),
                },
            );
        }
    }
    out.objects
        .objects
        .sort_by_key(|o| (o.frame_index, o.is_distractor, o.location));
    out.rebuild_instruction()?;
    Ok(DistractorOutcome { trial: out, skipped })
}
