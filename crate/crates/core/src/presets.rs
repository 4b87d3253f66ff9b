//! Classic cognitive tasks, the three complexity benchmarks and single-frame
//! sanity sets.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autotask::{sample_task_graph, AutoTaskError, CountRange, TaskSpaceConfig};
use crate::dataset::{Dataset, DatasetManifest};
use crate::graph::{AnswerToken, ConnectivityRules, OpTree, OperatorKind, ResponseClass, TaskGraph};
use crate::seed::derive_seed;
use crate::stimulus::Catalog;
use crate::trial::{
    add_distractors, answer_pool_for, instantiate_composed, instantiate_trial, Placement, TemporalRelation, TrialError,
    TrialInstance, TrialOptions,
};
use crate::value::Attribute;

/// Fresh graphs tried per benchmark trial when one cannot be instantiated.
const GRAPH_RETRIES: usize = 10;

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("unknown preset {0:?} (expected dms, nback:K or ctxdm)")]
    UnknownPreset(String),
    #[error("unknown complexity level {0:?} (expected low, medium or high)")]
    UnknownLevel(String),
    #[error("unknown single-frame kind {0:?} (expected location or category)")]
    UnknownKind(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("trial {index}: {source}")]
    Trial {
        index: usize,
        #[source]
        source: TrialError,
    },
    #[error("trial {index}: {source}")]
    Sampling {
        index: usize,
        #[source]
        source: AutoTaskError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    Dms,
    NBack(u32),
    CtxDm,
}

impl FromStr for PresetName {
    type Err = PresetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dms" => Ok(PresetName::Dms),
            "ctxdm" => Ok(PresetName::CtxDm),
            _ => {
                let k = s
                    .strip_prefix("nback:")
                    .or_else(|| s.strip_prefix("nback"))
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| PresetError::UnknownPreset(s.into()))?;
                if k == 0 {
                    return Err(PresetError::BadParameter("n-back needs k >= 1".into()));
                }
                Ok(PresetName::NBack(k))
            }
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresetName::Dms => f.write_str("dms"),
            PresetName::NBack(k) => write!(f, "nback:{k}"),
            PresetName::CtxDm => f.write_str("ctxdm"),
        }
    }
}

fn compare(attribute: Attribute, a: u32, b: u32) -> OpTree {
    OpTree::is_same(OpTree::get_at(attribute, a), OpTree::get_at(attribute, b))
}

/// Delayed match-to-sample: is `attribute` the same for objects 1 and 2?
pub fn dms(attribute: Attribute) -> TaskGraph {
    compare(attribute, 1, 2).into_graph()
}

/// Contextual decision: objects 1 and 3 decide whether object 2 is compared
/// with object 3 or with object 4.
pub fn ctxdm(attribute: Attribute) -> TaskGraph {
    OpTree::switch(
        compare(attribute, 1, 3),
        compare(attribute, 2, 3),
        compare(attribute, 2, 4),
    )
    .into_graph()
}

/// One n-back comparison: local object 2 (the current one) against local
/// object 1 (the one k steps back).
pub fn nback_step(attribute: Attribute) -> TaskGraph {
    compare(attribute, 2, 1).into_graph()
}

/// A preset ready to instantiate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresetTask {
    pub name: PresetName,
    pub attribute: Attribute,
    pub parts: Vec<TaskGraph>,
    pub placement: Placement,
    pub options: TrialOptions,
}

/// The graph of a single-question preset; for n-back, its repeated step.
pub fn preset_graph(name: PresetName, attribute: Attribute) -> TaskGraph {
    match name {
        PresetName::Dms => dms(attribute),
        PresetName::CtxDm => ctxdm(attribute),
        PresetName::NBack(_) => nback_step(attribute),
    }
}

/// Builds a preset. `n_frames` defaults to 3 for dms, 4 for ctxdm and k + 3
/// for n-back, where every frame shows an object.
pub fn preset_task(name: PresetName, attribute: Attribute, n_frames: Option<usize>) -> Result<PresetTask, PresetError> {
    let single = |graph: TaskGraph, frames: usize| PresetTask {
        name,
        attribute,
        parts: vec![graph],
        placement: Placement::Relation(TemporalRelation::Queue),
        options: TrialOptions::frames(frames),
    };
    Ok(match name {
        PresetName::Dms => single(dms(attribute), n_frames.unwrap_or(3)),
        PresetName::CtxDm => single(ctxdm(attribute), n_frames.unwrap_or(4)),
        PresetName::NBack(k) => {
            let n = n_frames.unwrap_or(k as usize + 3);
            if n <= k as usize {
                return Err(PresetError::BadParameter(format!(
                    "{n} frames leave no comparison for {k}-back"
                )));
            }
            let maps = (k + 1..=n as u32)
                .map(|t| [(1, t - k), (2, t)].into_iter().collect())
                .collect::<Vec<_>>();
            PresetTask {
                name,
                attribute,
                parts: vec![nback_step(attribute); maps.len()],
                placement: Placement::Explicit(maps),
                options: TrialOptions {
                    n_frames: n,
                    queue_responses: true,
                    answer_pool: None,
                },
            }
        }
    })
}

pub fn instantiate_preset<R: Rng + ?Sized>(
    task: &PresetTask,
    catalog: &Catalog,
    rng: &mut R,
) -> Result<TrialInstance, TrialError> {
    let mut trial = instantiate_composed(&task.parts, &task.placement, catalog, &task.options, rng)?;
    trial.complexity = Some(format!("preset_{}", task.name).replace(':', ""));
    Ok(trial)
}

/// `n` seeded trials of a preset.
pub fn generate_preset(
    task: &PresetTask,
    n: usize,
    master_seed: u64,
    catalog: &Catalog,
) -> Result<Dataset, PresetError> {
    let label = format!("preset_{}", task.name).replace(':', "");
    let trials = (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut trial = instantiate_preset(task, catalog, &mut rng)
                .map_err(|source| PresetError::Trial { index: i, source })?;
            trial.seed = seed;
            trial.trial_id = format!("{label}_{i:05}");
            Ok(trial)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset::new(DatasetManifest::new(&label, n, master_seed, None), trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityLevel {
    Low,
    Medium,
    High,
}

impl ComplexityLevel {
    pub const ALL: [ComplexityLevel; 3] = [ComplexityLevel::Low, ComplexityLevel::Medium, ComplexityLevel::High];

    pub fn name(self) -> &'static str {
        match self {
            ComplexityLevel::Low => "low",
            ComplexityLevel::Medium => "medium",
            ComplexityLevel::High => "high",
        }
    }
}

impl FromStr for ComplexityLevel {
    type Err = PresetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ComplexityLevel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| PresetError::UnknownLevel(s.into()))
    }
}

impl fmt::Display for ComplexityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A benchmark level: its task space, frame count and answer pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityConfig {
    pub level: ComplexityLevel,
    pub space: TaskSpaceConfig,
    pub n_frames: usize,
    pub answer_pool: Vec<AnswerToken>,
}

pub fn complexity_config(level: ComplexityLevel) -> ComplexityConfig {
    use OperatorKind::*;
    let booleans: BTreeSet<OperatorKind> = [IsSame, NotSame, And, Or].into_iter().collect();
    let mut roots = booleans.clone();
    let (n_and_or, switches, n_frames, max_depth, max_ops, max_selects) = match level {
        ComplexityLevel::Low => (CountRange(1, 1), 0, 6, 3, 11, 6),
        ComplexityLevel::Medium => (CountRange(1, 1), 1, 8, 4, 22, 8),
        ComplexityLevel::High => {
            roots.extend([GetLocation, GetCategory]);
            (CountRange(1, 2), 1, 9, 5, 28, 9)
        }
    };
    let keep: BTreeSet<OperatorKind> = OperatorKind::ALL.into_iter().filter(|k| *k != GetViewAngle).collect();
    let space = TaskSpaceConfig {
        max_switches: switches,
        min_switches: switches,
        max_depth,
        max_ops,
        max_selects: Some(max_selects),
        allowed_root_kinds: roots,
        allowed_boolean_kinds: booleans,
        n_and_or,
        rules: ConnectivityRules::default().restricted_to(&keep),
    };
    let catalog_space = crate::stimulus::AttributeSpace::default();
    let classes: BTreeSet<ResponseClass> = match level {
        ComplexityLevel::High => [ResponseClass::Boolean, ResponseClass::Location, ResponseClass::Category].into(),
        _ => [ResponseClass::Boolean].into(),
    };
    ComplexityConfig {
        level,
        space,
        n_frames,
        answer_pool: answer_pool_for(&classes, &catalog_space),
    }
}

/// Everything a benchmark trial of `config` must satisfy.
pub fn conformance_issues(trial: &TrialInstance, config: &ComplexityConfig) -> Vec<String> {
    let mut issues = config.space.conformance(trial.graph());
    if trial.n_frames() != config.n_frames {
        issues.push(format!("{} frames instead of {}", trial.n_frames(), config.n_frames));
    }
    if trial.actions.len() != trial.n_frames() {
        issues.push("action count differs from frame count".into());
    }
    let answered: Vec<usize> = trial
        .actions
        .iter()
        .enumerate()
        .filter(|(_, a)| a.is_some())
        .map(|(i, _)| i)
        .collect();
    if answered != [config.n_frames - 1] {
        issues.push(format!("responses at frames {answered:?}"));
    }
    if trial.answer_pool != config.answer_pool {
        issues.push("answer pool differs from the level's pool".into());
    }
    if !trial.answer_pool.contains(trial.answer()) {
        issues.push(format!("answer {} is outside the pool", trial.answer()));
    }
    let joins = trial.instruction.matches(" and ").count() + trial.instruction.matches(" or ").count();
    if !config.space.n_and_or.contains(joins as u32) {
        issues.push(format!("instruction has {joins} joining words"));
    }
    issues
}

fn benchmark_trial(
    config: &ComplexityConfig,
    catalog: &Catalog,
    index: usize,
    seed: u64,
) -> Result<TrialInstance, PresetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let options = TrialOptions {
        answer_pool: Some(config.answer_pool.clone()),
        ..TrialOptions::frames(config.n_frames)
    };
    let mut last = None;
    for _ in 0..GRAPH_RETRIES {
        let graph =
            sample_task_graph(&config.space, &mut rng).map_err(|source| PresetError::Sampling { index, source })?;
        let placement = Placement::Relation(TemporalRelation::Queue);
        match instantiate_composed(std::slice::from_ref(&graph), &placement, catalog, &options, &mut rng) {
            Ok(mut trial) => {
                trial.seed = seed;
                trial.trial_id = format!("{}_{index:05}", config.level);
                trial.complexity = Some(config.level.name().into());
                return Ok(trial);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(PresetError::Trial {
        index,
        source: last.expect("at least one attempt"),
    })
}

/// `n_trials` trials of `level`; trial `i` uses `derive_seed(master_seed, i)`.
/// `distractors` is the per-frame maximum, 0 for none.
pub fn generate_benchmark(
    level: ComplexityLevel,
    n_trials: usize,
    master_seed: u64,
    catalog: &Catalog,
    distractors: usize,
) -> Result<Dataset, PresetError> {
    if n_trials == 0 {
        return Err(PresetError::BadParameter("a benchmark needs at least one trial".into()));
    }
    let config = complexity_config(level);
    let trials = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, i as u64);
            let trial = benchmark_trial(&config, catalog, i, seed)?;
            with_distractors(trial, distractors, catalog, i)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut manifest = DatasetManifest::new(level.name(), n_trials, master_seed, Some(config.space));
    manifest.distractors = distractors;
    Ok(Dataset::new(manifest, trials))
}

fn with_distractors(
    trial: TrialInstance,
    per_frame_max: usize,
    catalog: &Catalog,
    index: usize,
) -> Result<TrialInstance, PresetError> {
    if per_frame_max == 0 {
        return Ok(trial);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(trial.seed, u64::MAX));
    add_distractors(&trial, per_frame_max, catalog, &mut rng)
        .map(|o| o.trial)
        .map_err(|source| PresetError::Trial { index, source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleFrameKind {
    Location,
    Category,
}

impl SingleFrameKind {
    pub fn attribute(self) -> Attribute {
        match self {
            SingleFrameKind::Location => Attribute::Location,
            SingleFrameKind::Category => Attribute::Category,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SingleFrameKind::Location => "location",
            SingleFrameKind::Category => "category",
        }
    }
}

impl FromStr for SingleFrameKind {
    type Err = PresetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "location" => Ok(SingleFrameKind::Location),
            "category" => Ok(SingleFrameKind::Category),
            _ => Err(PresetError::UnknownKind(s.into())),
        }
    }
}

/// One-frame question comparing an object's attribute with a constant.
pub fn single_frame_graph(kind: SingleFrameKind, negated: bool) -> TaskGraph {
    let lhs = OpTree::get(kind.attribute(), OpTree::select_unbound());
    let rhs = OpTree::leaf(crate::graph::Operator::Const(None));
    if negated {
        OpTree::not_same(lhs, rhs).into_graph()
    } else {
        OpTree::is_same(lhs, rhs).into_graph()
    }
}

/// One-frame sanity trials; equality and inequality are equally likely.
pub fn single_frame_set(
    kind: SingleFrameKind,
    n_trials: usize,
    master_seed: u64,
    catalog: &Catalog,
) -> Result<Dataset, PresetError> {
    if n_trials == 0 {
        return Err(PresetError::BadParameter("a set needs at least one trial".into()));
    }
    let label = format!("singleframe_{}", kind.name());
    let trials = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let graph = single_frame_graph(kind, rng.random_bool(0.5));
            let mut trial = instantiate_trial(&graph, catalog, 1, &mut rng)
                .map_err(|source| PresetError::Trial { index: i, source })?;
            trial.seed = seed;
            trial.trial_id = format!("{label}_{i:05}");
            trial.complexity = Some(label.clone());
            Ok(trial)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset::new(
        DatasetManifest::new(&label, n_trials, master_seed, None),
        trials,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruction::render_question;
    use crate::stimulus::builtin_catalog;
    use crate::trial::check_oracle;

    #[test]
    fn dms_question() {
        assert_eq!(
            render_question(&dms(Attribute::Category)).unwrap(),
            "category of object 1 equals category of object 2?"
        );
    }

    #[test]
    fn nback_responds_from_frame_k_plus_one() {
        let catalog = builtin_catalog();
        let task = preset_task(PresetName::NBack(2), Attribute::Category, Some(5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let trial = instantiate_preset(&task, &catalog, &mut rng).unwrap();
        let frames: Vec<usize> = trial
            .actions
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_some())
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(frames, vec![3, 4, 5]);
        check_oracle(&trial).unwrap();
    }

    #[test]
    fn preset_names_parse() {
        assert_eq!("nback:3".parse::<PresetName>().unwrap(), PresetName::NBack(3));
        assert!("stroop".parse::<PresetName>().is_err());
        assert!("nback:0".parse::<PresetName>().is_err());
    }

    #[test]
    fn level_parameters() {
        let low = complexity_config(ComplexityLevel::Low);
        assert_eq!((low.n_frames, low.space.max_switches), (6, 0));
        let medium = complexity_config(ComplexityLevel::Medium);
        assert_eq!((medium.n_frames, medium.space.min_switches), (8, 1));
        let high = complexity_config(ComplexityLevel::High);
        assert_eq!(high.n_frames, 9);
        assert!(high.space.allowed_root_kinds.contains(&OperatorKind::GetLocation));
        assert_eq!(high.answer_pool.len(), 14);
    }

    #[test]
    fn benchmark_trials_conform() {
        let catalog = builtin_catalog();
        for level in ComplexityLevel::ALL {
            let config = complexity_config(level);
            let data = generate_benchmark(level, 40, 11, &catalog, 0).unwrap();
            for trial in &data.trials {
                assert_eq!(
                    conformance_issues(trial, &config),
                    Vec::<String>::new(),
                    "{}",
                    trial.instruction
                );
                check_oracle(trial).unwrap();
            }
        }
    }

    #[test]
    fn single_frame_category_question() {
        let catalog = builtin_catalog();
        let data = single_frame_set(SingleFrameKind::Category, 20, 3, &catalog).unwrap();
        for t in &data.trials {
            assert_eq!(t.actions.len(), 1);
            assert!(
                t.instruction.starts_with("observe object 1, category of object 1 "),
                "{}",
                t.instruction
            );
        }
    }
}
