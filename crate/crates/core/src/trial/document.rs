//! The `trial.json` form of a trial.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FrameRole, FrameSchedule, TemporalRelation, TrialError, TrialInstance, TrialPart};
use crate::graph::{deserialize_graph, serialize_graph, AnswerToken, GraphDocument, ObjectInstance, ObjectSet};
use crate::instruction::{parse_instruction_in, Item};
use crate::stimulus::{AttributeSpace, StimulusSpec};
use crate::value::Location;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal: Option<u32>,
    pub category: String,
    pub identity: u32,
    pub view_angle: u32,
    pub location: Location,
    pub is_distractor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDocument {
    pub index: usize,
    #[serde(flatten)]
    pub role: FrameRole,
    pub objects: Vec<ObjectDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtaskDocument {
    pub graph: GraphDocument,
    pub response_frame: Option<usize>,
    pub answer: AnswerToken,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDocument {
    pub trial_id: String,
    pub seed: u64,
    pub n_frames: usize,
    pub instruction: String,
    pub answer_pool: Vec<AnswerToken>,
    pub actions: Vec<Option<AnswerToken>>,
    pub frames: Vec<FrameDocument>,
    /// Graph of the final question.
    pub graph: GraphDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtasks: Option<Vec<SubtaskDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<TemporalRelation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<String>,
}

impl TrialDocument {
    pub fn from_trial(trial: &TrialInstance) -> TrialDocument {
        let frames = trial
            .schedule
            .roles
            .iter()
            .enumerate()
            .map(|(index, role)| FrameDocument {
                index,
                role: *role,
                objects: trial
                    .objects
                    .in_frame(index)
                    .map(|o| ObjectDocument {
                        ordinal: o.ordinal,
                        category: o.stimulus.category.clone(),
                        identity: o.stimulus.identity,
                        view_angle: o.stimulus.view_angle,
                        location: o.location,
                        is_distractor: o.is_distractor,
                    })
                    .collect(),
            })
            .collect();
        let subtasks = (trial.parts.len() > 1).then(|| {
            trial
                .parts
                .iter()
                .map(|p| SubtaskDocument {
                    graph: serialize_graph(&p.graph),
                    response_frame: p.response_frame,
                    answer: p.answer.clone(),
                })
                .collect()
        });
        TrialDocument {
            trial_id: trial.trial_id.clone(),
            seed: trial.seed,
            n_frames: trial.n_frames(),
            instruction: trial.instruction.clone(),
            answer_pool: trial.answer_pool.clone(),
            actions: trial.actions.clone(),
            frames,
            graph: serialize_graph(trial.graph()),
            subtasks,
            relation: trial.relation,
            complexity: trial.complexity.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trial documents serialize")
    }

    pub fn from_json(text: &str) -> Result<TrialDocument, TrialError> {
        serde_json::from_str(text).map_err(|e| TrialError::Document(e.to_string()))
    }

    /// Rebuilds the trial. The instruction is parsed with the vocabulary of
    /// `space` to recover its structure and disambiguations.
    pub fn into_trial(self, space: &AttributeSpace) -> Result<TrialInstance, TrialError> {
        let doc_err = |m: String| TrialError::Document(m);
        if self.frames.len() != self.n_frames || self.actions.len() != self.n_frames {
            return Err(doc_err(format!(
                "{} frames and {} actions for n_frames = {}",
                self.frames.len(),
                self.actions.len(),
                self.n_frames
            )));
        }
        let mut objects = ObjectSet::default();
        let mut roles = Vec::with_capacity(self.n_frames);
        for (i, frame) in self.frames.iter().enumerate() {
            if frame.index != i {
                return Err(doc_err(format!("frame {i} is listed as {}", frame.index)));
            }
            roles.push(frame.role);
            for o in &frame.objects {
                objects.objects.push(ObjectInstance {
                    frame_index: i,
                    location: o.location,
                    stimulus: StimulusSpec {
                        category: o.category.clone(),
                        identity: o.identity,
                        view_angle: o.view_angle,
                    },
                    ordinal: o.ordinal,
                    is_distractor: o.is_distractor,
                });
            }
        }
        let graph_err = |e: crate::graph::GraphError| doc_err(e.to_string());
        let parts = match self.subtasks {
            Some(subtasks) => subtasks
                .into_iter()
                .map(|s| {
                    Ok(TrialPart {
                        graph: deserialize_graph(&s.graph).map_err(graph_err)?,
                        response_frame: s.response_frame,
                        answer: s.answer,
                    })
                })
                .collect::<Result<Vec<_>, TrialError>>()?,
            None => {
                let last = self
                    .n_frames
                    .checked_sub(1)
                    .ok_or_else(|| doc_err("no frames".into()))?;
                let answer = self.actions[last]
                    .clone()
                    .ok_or_else(|| doc_err("the final frame has no action".into()))?;
                vec![TrialPart {
                    graph: deserialize_graph(&self.graph).map_err(graph_err)?,
                    response_frame: Some(last),
                    answer,
                }]
            }
        };
        let instruction_ast = parse_instruction_in(&self.instruction, space).map_err(|e| doc_err(e.to_string()))?;
        let disambiguations: BTreeMap<_, _> = instruction_ast
            .items()
            .filter_map(|item| match item {
                Item::Observe {
                    ordinal,
                    qualifier: Some(q),
                } => Some((*ordinal, q.clone())),
                _ => None,
            })
            .collect();
        Ok(TrialInstance {
            trial_id: self.trial_id,
            seed: self.seed,
            parts,
            relation: self.relation,
            objects,
            schedule: FrameSchedule { roles },
            instruction: self.instruction,
            instruction_ast,
            actions: self.actions,
            answer_pool: self.answer_pool,
            disambiguations,
            complexity: self.complexity,
        })
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::graph::OpTree;
    use crate::stimulus::builtin_catalog;
    use crate::trial::{add_distractors, instantiate_trial};
    use crate::value::Attribute;

    #[test]
    fn round_trip_keeps_the_trial() {
        let catalog = builtin_catalog();
        let graph = OpTree::not_same(
            OpTree::get(Attribute::Category, OpTree::select_unbound()),
            OpTree::get(Attribute::Category, OpTree::select_unbound()),
        )
        .into_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let trial = instantiate_trial(&graph, &catalog, 5, &mut rng).unwrap();
        let trial = add_distractors(&trial, 2, &catalog, &mut rng).unwrap().trial;
        let json = TrialDocument::from_trial(&trial).to_json();
        let back = TrialDocument::from_json(&json)
            .unwrap()
            .into_trial(catalog.space())
            .unwrap();
        assert_eq!(back, trial);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["frames"][0]["role"], "object");
        assert_eq!(value["frames"][0]["ordinal"], 1);
    }
}
