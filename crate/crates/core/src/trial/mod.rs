//! Trial instantiation: initialization, composition, frame layout, stimulus
//! sampling, actions and distractors.

mod distractors;
mod document;
mod init;
mod layout;
mod merge;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::autotask::compose_with_switch;
use crate::graph::{evaluate, AnswerToken, EvalError, ObjectInstance, ObjectSet, ResponseClass, TaskGraph};
use crate::instruction::{build_instruction, InstructionAst, InstructionError, Qualifier};
use crate::stimulus::{AttributeSpace, Catalog, CatalogError};
use crate::value::{AttributeMap, Location};

pub use distractors::{add_distractors, disambiguation_attribute, DistractorOutcome, MAX_DISTRACTORS_PER_FRAME};
pub use document::{FrameDocument, ObjectDocument, SubtaskDocument, TrialDocument};
pub use init::{backward_initialize, initialize_with, output_pool, ConstraintAssignment, RETRY_BUDGET};
pub use layout::{layout_frames, FrameRole, FrameSchedule};
pub use merge::{merge_temporal, MergedParts, Placement, TemporalRelation};

#[derive(Debug, Error)]
pub enum TrialError {
    #[error("constraints stayed contradictory after {attempts} attempts")]
    Contradiction { attempts: usize },
    #[error("merge failed after {attempts} attempts: {detail}")]
    MergeFailed { attempts: usize, detail: String },
    #[error("{objects} objects do not fit in {n_frames} frames")]
    TooManyObjects { objects: usize, n_frames: usize },
    #[error("the task references no objects")]
    NoObjects,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("temporal composition: {0}")]
    Relation(String),
    #[error("root value is not an answer token")]
    NotAnswerable,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Instruction(#[from] InstructionError),
    #[error("oracle gives {actual} where {expected} was assigned")]
    OracleMismatch { expected: AnswerToken, actual: AnswerToken },
    #[error("trial document: {0}")]
    Document(String),
}

/// One question of a trial, over combined object ordinals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialPart {
    /// Fully resolved graph.
    pub graph: TaskGraph,
    /// Frame at which the answer is due; `None` when the part only shapes
    /// the objects.
    pub response_frame: Option<usize>,
    pub answer: AnswerToken,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialInstance {
    pub trial_id: String,
    pub seed: u64,
    /// Questions in composition order; the last one is answered on the final frame.
    pub parts: Vec<TrialPart>,
    pub relation: Option<TemporalRelation>,
    pub objects: ObjectSet,
    pub schedule: FrameSchedule,
    pub instruction: String,
    pub instruction_ast: InstructionAst,
    pub actions: Vec<Option<AnswerToken>>,
    pub answer_pool: Vec<AnswerToken>,
    pub disambiguations: BTreeMap<u32, Qualifier>,
    pub complexity: Option<String>,
}

impl TrialInstance {
    /// Graph of the final question.
    pub fn graph(&self) -> &TaskGraph {
        &self.final_part().graph
    }

    pub fn final_part(&self) -> &TrialPart {
        self.parts.last().expect("a trial has at least one part")
    }

    pub fn answer(&self) -> &AnswerToken {
        &self.final_part().answer
    }

    pub fn n_frames(&self) -> usize {
        self.schedule.n_frames()
    }

    /// Last non-null action.
    pub fn final_action(&self) -> Option<&AnswerToken> {
        self.actions.iter().rev().find_map(Option::as_ref)
    }

    /// Parts that carry a response, in frame order.
    pub fn answered_parts(&self) -> Vec<&TrialPart> {
        let mut parts: Vec<&TrialPart> = self.parts.iter().filter(|p| p.response_frame.is_some()).collect();
        parts.sort_by_key(|p| p.response_frame);
        parts
    }

    /// Rebuilds the instruction from the parts, schedule and disambiguations.
    pub fn rebuild_instruction(&mut self) -> Result<(), TrialError> {
        let questions: Vec<(usize, &TaskGraph)> = self
            .parts
            .iter()
            .filter_map(|p| p.response_frame.map(|f| (f, &p.graph)))
            .collect();
        self.instruction_ast = build_instruction(&questions, &self.schedule, &self.disambiguations)?;
        self.instruction = self.instruction_ast.to_string();
        Ok(())
    }
}

/// Per-frame ground truth: null except on response frames.
pub fn action_sequence(trial: &TrialInstance) -> Vec<Option<AnswerToken>> {
    trial.actions.clone()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOptions {
    pub n_frames: usize,
    /// Answer every subtask at its last object frame, not just the final one.
    pub queue_responses: bool,
    /// Overrides the pool derived from the answer classes.
    pub answer_pool: Option<Vec<AnswerToken>>,
}

impl TrialOptions {
    pub fn frames(n_frames: usize) -> TrialOptions {
        TrialOptions {
            n_frames,
            queue_responses: false,
            answer_pool: None,
        }
    }
}

/// Tokens of `class` in presentation order.
pub fn class_pool(class: ResponseClass, space: &AttributeSpace) -> Vec<AnswerToken> {
    match class {
        ResponseClass::Boolean => vec![AnswerToken::Bool(true), AnswerToken::Bool(false)],
        ResponseClass::Location => [
            Location::BottomRight,
            Location::BottomLeft,
            Location::TopLeft,
            Location::TopRight,
        ]
        .into_iter()
        .filter(|l| space.locations.contains(l))
        .map(AnswerToken::Location)
        .collect(),
        ResponseClass::Category => space.categories.iter().cloned().map(AnswerToken::Category).collect(),
    }
}

/// Concatenated class pools for the given classes.
pub fn answer_pool_for(classes: &BTreeSet<ResponseClass>, space: &AttributeSpace) -> Vec<AnswerToken> {
    classes.iter().flat_map(|c| class_pool(*c, space)).collect()
}

/// Instantiates a single graph into a trial of `n_frames` frames.
pub fn instantiate_trial<R: Rng + ?Sized>(
    graph: &TaskGraph,
    catalog: &Catalog,
    n_frames: usize,
    rng: &mut R,
) -> Result<TrialInstance, TrialError> {
    instantiate_composed(
        std::slice::from_ref(graph),
        &Placement::Relation(TemporalRelation::Queue),
        catalog,
        &TrialOptions::frames(n_frames),
        rng,
    )
}

/// [`instantiate_trial`] driven by a fresh generator seeded with `seed`.
pub fn instantiate_trial_seeded(
    graph: &TaskGraph,
    catalog: &Catalog,
    n_frames: usize,
    seed: u64,
) -> Result<TrialInstance, TrialError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trial = instantiate_trial(graph, catalog, n_frames, &mut rng)?;
    trial.seed = seed;
    trial.trial_id = format!("trial_{seed}");
    Ok(trial)
}

/// Instantiates subtasks composed in time. One part is a plain trial; a
/// `Condition` relation takes exactly three parts (condition, then, else)
/// and joins them under a Switch.
pub fn instantiate_composed<R: Rng + ?Sized>(
    parts: &[TaskGraph],
    placement: &Placement,
    catalog: &Catalog,
    options: &TrialOptions,
    rng: &mut R,
) -> Result<TrialInstance, TrialError> {
    let space = catalog.space();
    if let Placement::Relation(TemporalRelation::Condition) = placement {
        let [cond, then, otherwise] = parts else {
            return Err(TrialError::Relation(
                "condition takes a condition and two branches".into(),
            ));
        };
        let joined = compose_with_switch(cond, then, otherwise).map_err(|e| TrialError::Relation(e.to_string()))?;
        let mut trial = instantiate_composed(
            std::slice::from_ref(&joined),
            &Placement::Relation(TemporalRelation::Queue),
            catalog,
            options,
            rng,
        )?;
        trial.relation = Some(TemporalRelation::Condition);
        return Ok(trial);
    }
    let (graphs, objects, relation) = match parts {
        [] => return Err(TrialError::Relation("no subtasks given".into())),
        [graph] => {
            let assignment = backward_initialize(graph, space, rng)?;
            let used = assignment.slots();
            let compress: BTreeMap<u32, u32> = used.iter().enumerate().map(|(i, s)| (*s, i as u32 + 1)).collect();
            let global = assignment.remap_slots(&compress);
            let resolved = global.apply(graph);
            (vec![resolved], global.objects, None)
        }
        _ => {
            let inits = parts
                .iter()
                .map(|g| backward_initialize(g, space, rng).map(|a| (g.clone(), a)))
                .collect::<Result<Vec<_>, _>>()?;
            let merged = merge_temporal(inits, placement, space, rng)?;
            let relation = match placement {
                Placement::Relation(r) => Some(*r),
                Placement::Explicit(_) => None,
            };
            (merged.graphs, merged.objects, relation)
        }
    };
    assemble(graphs, objects, relation, catalog, options, rng)
}

fn assemble<R: Rng + ?Sized>(
    graphs: Vec<TaskGraph>,
    constraints: BTreeMap<u32, AttributeMap>,
    relation: Option<TemporalRelation>,
    catalog: &Catalog,
    options: &TrialOptions,
    rng: &mut R,
) -> Result<TrialInstance, TrialError> {
    let space = catalog.space();
    let n_objects = constraints.len();
    if constraints.keys().copied().ne(1..=n_objects as u32) {
        return Err(TrialError::InvalidGraph("object slots are not numbered 1..n".into()));
    }
    let schedule = layout_frames(n_objects, options.n_frames, rng)?;
    let mut objects = ObjectSet::default();
    for (ordinal, attrs) in &constraints {
        let stimulus = catalog.sample_stimulus(attrs, rng)?;
        let location = match attrs.location {
            Some(l) => l,
            None => *space
                .locations
                .choose(rng)
                .ok_or_else(|| CatalogError::Unsatisfiable("empty location list".into()))?,
        };
        objects.objects.push(ObjectInstance {
            frame_index: schedule.frame_of(*ordinal).expect("every ordinal is scheduled"),
            location,
            stimulus,
            ordinal: Some(*ordinal),
            is_distractor: false,
        });
    }

    let last = options.n_frames - 1;
    let n_parts = graphs.len();
    let mut parts = Vec::with_capacity(n_parts);
    for (i, graph) in graphs.into_iter().enumerate() {
        let answer = evaluate(&graph, &objects)?;
        let response_frame = if i + 1 == n_parts {
            Some(last)
        } else if options.queue_responses {
            let frame = schedule.last_frame(graph.select_slots()).ok_or(TrialError::NoObjects)?;
            Some(frame)
        } else {
            None
        };
        parts.push(TrialPart {
            graph,
            response_frame,
            answer,
        });
    }
    let mut actions = vec![None; options.n_frames];
    for part in &parts {
        if let Some(f) = part.response_frame {
            if actions[f].is_some() {
                return Err(TrialError::Relation(format!("two subtasks answer at frame {f}")));
            }
            actions[f] = Some(part.answer.clone());
        }
    }
    let answer_pool = match &options.answer_pool {
        Some(pool) => pool.clone(),
        None => {
            let classes = parts.iter().map(|p| p.answer.class()).collect();
            answer_pool_for(&classes, space)
        }
    };
    for part in &parts {
        if part.response_frame.is_some() && !answer_pool.contains(&part.answer) {
            return Err(TrialError::NotAnswerable);
        }
    }
    let mut trial = TrialInstance {
        trial_id: String::new(),
        seed: 0,
        parts,
        relation,
        objects,
        schedule,
        instruction: String::new(),
        instruction_ast: InstructionAst::default(),
        actions,
        answer_pool,
        disambiguations: BTreeMap::new(),
        complexity: None,
    };
    trial.rebuild_instruction()?;
    Ok(trial)
}

/// Re-evaluates every part against the trial's objects and checks it against
/// the stored answer.
pub fn check_oracle(trial: &TrialInstance) -> Result<(), TrialError> {
    for part in &trial.parts {
        let actual = evaluate(&part.graph, &trial.objects)?;
        if actual != part.answer {
            return Err(TrialError::OracleMismatch {
                expected: part.answer.clone(),
                actual,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::OpTree;
    use crate::instruction::evaluate_instruction;
    use crate::stimulus::builtin_catalog;
    use crate::value::Attribute;

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
    fn ctxdm_trial_matches_its_oracle() {
        let catalog = builtin_catalog();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trial = instantiate_trial(&ctxdm(), &catalog, 4, &mut rng).unwrap();
        assert!(trial.instruction.ends_with(
            "if category of object 1 equals category of object 3, then category of object 2 equals \
             category of object 3, else category of object 2 equals category of object 4?"
        ));
        assert_eq!(trial.actions.len(), 4);
        assert_eq!(trial.final_action(), Some(trial.answer()));
        check_oracle(&trial).unwrap();
        let by_text = evaluate_instruction(&trial.instruction_ast, &trial.objects).unwrap();
        assert_eq!(by_text, vec![trial.answer().clone()]);
    }

    #[test]
    fn category_root_offers_the_categories() {
        let catalog = builtin_catalog();
        let graph = OpTree::get(Attribute::Category, OpTree::select_unbound()).into_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trial = instantiate_trial(&graph, &catalog, 1, &mut rng).unwrap();
        assert_eq!(trial.answer_pool.len(), 8);
        assert_eq!(trial.instruction, "observe object 1, category of object 1?");
        let AnswerToken::Category(c) = trial.answer() else {
            panic!("not a category")
        };
        assert_eq!(&trial.objects.objects[0].stimulus.category, c);
    }

    #[test]
    fn low_trial_answers_only_at_the_end() {
        let catalog = builtin_catalog();
        let cmp = |a, b| {
            OpTree::is_same(
                OpTree::get_at(Attribute::Location, a),
                OpTree::get_at(Attribute::Location, b),
            )
        };
        let graph = OpTree::or(cmp(3, 2), cmp(1, 4)).into_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let trial = instantiate_trial(&graph, &catalog, 6, &mut rng).unwrap();
        assert!(trial.actions[..5].iter().all(Option::is_none));
        assert!(matches!(trial.actions[5], Some(AnswerToken::Bool(_))));
    }

    #[test]
    fn queued_dms_answers_twice() {
        let catalog = builtin_catalog();
        let dms = OpTree::is_same(
            OpTree::get(Attribute::Category, OpTree::select_unbound()),
            OpTree::get(Attribute::Category, OpTree::select_unbound()),
        )
        .into_graph();
        let options = TrialOptions {
            queue_responses: true,
            ..TrialOptions::frames(4)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trial = instantiate_composed(
            &[dms.clone(), dms],
            &Placement::Relation(TemporalRelation::Queue),
            &catalog,
            &options,
            &mut rng,
        )
        .unwrap();
        assert_eq!(trial.actions.iter().flatten().count(), 2);
        assert!(trial.actions[1].is_some() && trial.actions[3].is_some());
        assert_eq!(trial.instruction_ast.questions().count(), 2);
        check_oracle(&trial).unwrap();
    }

    #[test]
    fn same_seed_same_trial() {
        let catalog = builtin_catalog();
        let a = instantiate_trial_seeded(&ctxdm(), &catalog, 6, 77).unwrap();
        let b = instantiate_trial_seeded(&ctxdm(), &catalog, 6, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn condition_relation_joins_under_a_switch() {
        let catalog = builtin_catalog();
        let cmp = || {
            OpTree::is_same(
                OpTree::get(Attribute::Category, OpTree::select_unbound()),
                OpTree::get(Attribute::Category, OpTree::select_unbound()),
            )
            .into_graph()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trial = instantiate_composed(
            &[cmp(), cmp(), cmp()],
            &Placement::Relation(TemporalRelation::Condition),
            &catalog,
            &TrialOptions::frames(6),
            &mut rng,
        )
        .unwrap();
        assert!(trial.instruction.contains("if "));
        assert_eq!(trial.relation, Some(TemporalRelation::Condition));
    }
}
