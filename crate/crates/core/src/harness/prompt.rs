//! Prompt text for evaluating models on trials.

use serde::{Deserialize, Serialize};

use crate::graph::{AnswerToken, ObjectInstance, ObjectSet, ResponseClass};
use crate::stimulus::{AttributeSpace, StimulusSpec};
use crate::trial::{FrameRole, FrameSchedule, TrialInstance};
use crate::value::{Attribute, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Properties {
    All,
    Single(Attribute),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptVariant {
    pub properties: Properties,
    pub examples: bool,
}

impl Default for PromptVariant {
    fn default() -> Self {
        PromptVariant {
            properties: Properties::All,
            examples: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum PromptSegment {
    Text {
        text: String,
    },
    /// Frames of the trial, or of worked example `example` when set.
    Frames {
        example: Option<usize>,
        frames: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub segments: Vec<PromptSegment>,
    pub answer_options: Vec<AnswerToken>,
    pub variant: PromptVariant,
}

impl PromptBundle {
    /// Text with `[frames]` where images go.
    pub fn text(&self) -> String {
        let parts: Vec<String> = self
            .segments
            .iter()
            .map(|s| match s {
                PromptSegment::Text { text } => text.clone(),
                PromptSegment::Frames {
                    example: Some(i),
                    frames,
                } => format!("[example {i} frames {frames:?}]"),
                PromptSegment::Frames { example: None, frames } => format!("[frames {frames:?}]"),
            })
            .collect();
        parts.join("\n\n")
    }

    /// The final text block.
    pub fn closing(&self) -> Option<&str> {
        self.segments.iter().rev().find_map(|s| match s {
            PromptSegment::Text { text } => Some(text.as_str()),
            PromptSegment::Frames { .. } => None,
        })
    }
}

/// A worked example shown before the real task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptExample {
    pub instruction: String,
    pub answer: AnswerToken,
    pub explanation: String,
    pub schedule: FrameSchedule,
    pub objects: ObjectSet,
}

fn object(frame: usize, ordinal: u32, location: Location, category: &str, identity: u32) -> ObjectInstance {
    ObjectInstance {
        frame_index: frame,
        location,
        stimulus: StimulusSpec {
            category: category.into(),
            identity,
            view_angle: frame as u32 % 4,
        },
        ordinal: Some(ordinal),
        is_distractor: false,
    }
}

fn schedule(roles: &[Option<u32>]) -> FrameSchedule {
    FrameSchedule {
        roles: roles
            .iter()
            .map(|r| r.map_or(FrameRole::Delay, FrameRole::Object))
            .collect(),
    }
}

/// The three worked examples. With `mixed_answers` the first two ask for a
/// location and a category instead of a boolean.
pub fn prompt_examples(mixed_answers: bool) -> Vec<PromptExample> {
    let two = schedule(&[Some(1), Some(2)]);
    let gapped = schedule(&[Some(1), None, Some(2)]);
    let location_example = if mixed_answers {
        PromptExample {
            instruction: "observe object 1, observe object 2, location of object 2?".into(),
            answer: AnswerToken::Location(Location::BottomRight),
            explanation: "This is because object 2 is located in the bottom right.".into(),
            schedule: two.clone(),
            objects: ObjectSet {
                objects: vec![
                    object(0, 1, Location::TopLeft, "boats", 1),
                    object(1, 2, Location::BottomRight, "chairs", 4),
                ],
            },
        }
    } else {
        PromptExample {
            instruction: "observe object 1, observe object 2, location of object 1 not equal location: bottom left ?"
                .into(),
            answer: AnswerToken::Bool(false),
            explanation: "This is because the location of object 1 IS in the bottom left location.".into(),
            schedule: two.clone(),
            objects: ObjectSet {
                objects: vec![
                    object(0, 1, Location::BottomLeft, "boats", 1),
                    object(1, 2, Location::TopRight, "chairs", 4),
                ],
            },
        }
    };
    let lamps = ObjectSet {
        objects: vec![
            object(0, 1, Location::TopRight, "lighting", 2),
            object(2, 2, Location::BottomLeft, "lighting", 5),
        ],
    };
    let category_example = if mixed_answers {
        PromptExample {
            instruction: "observe object 1, delay, observe object 2, category of object 1?".into(),
            answer: AnswerToken::Category("lighting".into()),
            explanation: "This is because object 1 (a lamp) belongs to the category of lighting.".into(),
            schedule: gapped,
            objects: lamps,
        }
    } else {
        PromptExample {
            instruction:
                "observe object 1, delay, observe object 2, category of object 1 equals category of object 2 ?".into(),
            answer: AnswerToken::Bool(true),
            explanation:
                "This is because the category of object 1 (lighting) IS equal to the category of object 2 (lighting)."
                    .into(),
            schedule: gapped,
            objects: lamps,
        }
    };
    let identity_example = PromptExample {
        instruction: "observe object 1, observe object 2, identity of object 1 equals identity of object 2 ?".into(),
        answer: AnswerToken::Bool(true),
        explanation: "This is because object 1 (a white table) IS identical to object 2 (the same white table).".into(),
        schedule: two,
        objects: ObjectSet {
            objects: vec![
                object(0, 1, Location::TopLeft, "tables", 7),
                object(1, 2, Location::BottomRight, "tables", 7),
            ],
        },
    };
    vec![location_example, category_example, identity_example]
}

fn list_words(words: &[String]) -> String {
    match words {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

fn token_list(tokens: &[AnswerToken]) -> String {
    tokens.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// The closing request that ends every prompt.
pub fn closing_text(options: &[AnswerToken]) -> String {
    format!(
        "What is the correct answer to this task? (respond EXACTLY and ONLY with one of the following answers: {}). Provide your answer here:",
        token_list(options)
    )
}

fn opening(single_frame: bool, space: &AttributeSpace) -> String {
    let n = space.categories.len();
    let locations = list_words(&space.locations.iter().map(|l| l.name().to_string()).collect::<Vec<_>>());
    let (shown, each) = if single_frame {
        ("an image. Each image will contain a 3D object.", "The object")
    } else {
        (
            "a series of frame images. Each frame will either be blank (delay frame) or contain a 3D object.",
            "The objects",
        )
    };
    format!(
        "In this task we will show you {shown} The objects within the task will ALWAYS be from one of {n} categories: {}. \
         For each of these {n} categories, there are {} unique objects that could be used in the task. \
         Any object which is sampled will be displayed as an image taken from a random viewing angle. \
         {each} will be placed in one of four locations: {locations}.",
        list_words(&space.categories),
        space.identities_per_category,
    )
}

/// Assembles the prompt for `trial`. Examples appear only for multi-frame
/// trials.
pub fn build_prompt(trial: &TrialInstance, variant: PromptVariant, space: &AttributeSpace) -> PromptBundle {
    let single_frame = trial.n_frames() == 1;
    let options = trial.answer_pool.clone();
    let text = |t: String| PromptSegment::Text { text: t };
    let mut segments = vec![
        text(opening(single_frame, space)),
        text(format!(
            "A written instruction will be provided. Your goal is to follow the instructions and answer the question \
             contained in the instruction. Answers will ALWAYS be one of the following: {}.",
            token_list(&options)
        )),
    ];
    if variant.examples && !single_frame {
        let mixed = options.iter().any(|t| t.class() != ResponseClass::Boolean);
        for (i, ex) in prompt_examples(mixed).into_iter().enumerate() {
            segments.push(text("Here is a simple example of the task...".into()));
            segments.push(text(format!("Task instruction: \"{}\"", ex.instruction)));
            segments.push(text("Here are the corresponding frames ...".into()));
            segments.push(PromptSegment::Frames {
                example: Some(i),
                frames: (0..ex.schedule.n_frames()).collect(),
            });
            segments.push(text(format!("Answer: {}.\n{}", ex.answer, ex.explanation)));
        }
    }
    segments.push(text("Now please solve the following new task...".into()));
    segments.push(text(format!("Task instruction: \"{}\"", trial.instruction)));
    segments.push(text("Here are the corresponding frames ...".into()));
    segments.push(PromptSegment::Frames {
        example: None,
        frames: (0..trial.n_frames()).collect(),
    });
    segments.push(text(closing_text(&options)));
    PromptBundle {
        segments,
        answer_options: options,
        variant,
    }
}
