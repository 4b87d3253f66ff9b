//! Prompts, response normalization and scoring.

mod prompt;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::graph::{AnswerToken, Operator, OperatorKind};
use crate::trial::TrialInstance;
use crate::value::Attribute;

pub use prompt::{
    build_prompt, closing_text, prompt_examples, PromptBundle, PromptExample, PromptSegment, PromptVariant, Properties,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("responses name unknown trials: {}", .0.join(", "))]
    UnknownTrials(Vec<String>),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {detail}")]
    Schema { path: PathBuf, line: usize, detail: String },
    #[error("the dataset is empty")]
    EmptyDataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    #[default]
    Strict,
    /// Also accept a response naming exactly one pool token as a whole word.
    Lenient,
}

fn canonical(raw: &str) -> String {
    let lower = raw.to_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    let joined = words.join(" ");
    joined
        .trim_matches(|c: char| c.is_whitespace() || matches!(c, '.' | ',' | '!' | '?' | ';' | ':' | '"' | '\''))
        .to_string()
}

fn contains_word(haystack: &str, needle: &str) -> bool {
    let bytes = haystack.as_bytes();
    haystack.match_indices(needle).any(|(i, _)| {
        let before = i == 0 || !bytes[i - 1].is_ascii_alphanumeric();
        let end = i + needle.len();
        let after = end == bytes.len() || !bytes[end].is_ascii_alphanumeric();
        before && after
    })
}

/// Maps a raw response onto a pool token, or `None` when invalid.
pub fn normalize_response(raw: &str, pool: &[AnswerToken], mode: MatchMode) -> Option<AnswerToken> {
    let text = canonical(raw);
    if let Some(t) = pool.iter().find(|t| t.to_string() == text) {
        return Some(t.clone());
    }
    if mode == MatchMode::Lenient {
        let found: Vec<&AnswerToken> = pool.iter().filter(|t| contains_word(&text, &t.to_string())).collect();
        if let [one] = found.as_slice() {
            return Some((*one).clone());
        }
    }
    None
}

/// A response as collected, before scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResponse {
    pub trial_id: String,
    #[serde(default)]
    pub subject_id: String,
    pub raw: String,
    #[serde(default)]
    pub response_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub trial_id: String,
    pub subject_id: String,
    pub raw: String,
    pub normalized: Option<AnswerToken>,
    pub correct: bool,
    pub response_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub key: String,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub invalid: usize,
    pub invalid_rate: f64,
    pub chance_level: f64,
    /// Dimension name to rows; each dimension partitions the responses.
    pub breakdowns: BTreeMap<String, Vec<BreakdownRow>>,
    pub records: Vec<ResponseRecord>,
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Plain-text summary with one block per dimension.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "accuracy {:.4} ({}/{})  invalid {:.4}  chance {:.4}",
            self.accuracy, self.correct, self.total, self.invalid_rate, self.chance_level
        );
        for (dimension, rows) in &self.breakdowns {
            let _ = writeln!(out, "\n{dimension}");
            for r in rows {
                let _ = writeln!(
                    out,
                    "  {:<16} {:>7.4}  {:>6}/{:<6}",
                    r.key, r.accuracy, r.correct, r.total
                );
            }
        }
        out
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Attributes a trial's graphs read, named as a feature type.
pub fn feature_type(trial: &TrialInstance) -> String {
    let mut used = BTreeSet::new();
    for part in &trial.parts {
        for (_, op) in part.graph.nodes() {
            match op {
                Operator::Get(a) => {
                    used.insert(*a);
                }
                Operator::Exist(e) => used.extend(e.target.keys().copied()),
                _ => {}
            }
        }
    }
    match used.iter().collect::<Vec<_>>().as_slice() {
        [] => "none".into(),
        [one] => match one {
            Attribute::ViewAngle => "view_angle".into(),
            a => a.key().into(),
        },
        _ => "mixed".into(),
    }
}

/// Metadata keys a trial is grouped under, per dimension.
pub fn trial_dimensions(trial: &TrialInstance) -> Vec<(&'static str, String)> {
    let count = |f: fn(OperatorKind) -> bool| trial.parts.iter().map(|p| p.graph.count_where(f)).sum::<usize>();
    vec![
        ("feature_type", feature_type(trial)),
        ("boolean_operators", count(OperatorKind::is_and_or).to_string()),
        ("stimulus_count", trial.schedule.object_count().to_string()),
        ("delay_frames", trial.schedule.delay_count().to_string()),
        ("response_type", trial.answer().class().name().to_string()),
        (
            "complexity",
            trial.complexity.clone().unwrap_or_else(|| "unspecified".into()),
        ),
    ]
}

/// Size of the part of the pool that shares the answer's class.
pub fn effective_pool_size(trial: &TrialInstance) -> usize {
    let class = trial.answer().class();
    trial.answer_pool.iter().filter(|t| t.class() == class).count().max(1)
}

/// Mean chance of guessing right within each answer's class.
pub fn chance_level(dataset: &Dataset) -> Result<f64, HarnessError> {
    if dataset.trials.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    let sum: f64 = dataset.trials.iter().map(|t| 1.0 / effective_pool_size(t) as f64).sum();
    Ok(sum / dataset.trials.len() as f64)
}

/// Scores responses against the final answer of each trial. Invalid
/// responses count as incorrect.
pub fn score(dataset: &Dataset, responses: &[RawResponse], mode: MatchMode) -> Result<ScoreReport, HarnessError> {
    let by_id: HashMap<&str, &TrialInstance> = dataset.trials.iter().map(|t| (t.trial_id.as_str(), t)).collect();
    let unknown: BTreeSet<String> = responses
        .iter()
        .filter(|r| !by_id.contains_key(r.trial_id.as_str()))
        .map(|r| r.trial_id.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(HarnessError::UnknownTrials(unknown.into_iter().collect()));
    }
    let mut records = Vec::with_capacity(responses.len());
    let mut tallies: BTreeMap<&'static str, BTreeMap<String, (usize, usize)>> = BTreeMap::new();
    let mut chance = 0.0;
    for r in responses {
        let trial = by_id[r.trial_id.as_str()];
        let normalized = normalize_response(&r.raw, &trial.answer_pool, mode);
        let correct = normalized.as_ref() == Some(trial.answer());
        chance += 1.0 / effective_pool_size(trial) as f64;
        for (dimension, key) in trial_dimensions(trial) {
            let t = tallies.entry(dimension).or_default().entry(key).or_default();
            t.0 += 1;
            t.1 += usize::from(correct);
        }
        records.push(ResponseRecord {
            trial_id: r.trial_id.clone(),
            subject_id: r.subject_id.clone(),
            raw: r.raw.clone(),
            normalized,
            correct,
            response_time_ms: r.response_time_ms,
        });
    }
    let total = records.len();
    let correct = records.iter().filter(|r| r.correct).count();
    let invalid = records.iter().filter(|r| r.normalized.is_none()).count();
    let breakdowns = tallies
        .into_iter()
        .map(|(d, rows)| {
            let rows = rows
                .into_iter()
                .map(|(key, (total, correct))| BreakdownRow {
                    key,
                    total,
                    correct,
                    accuracy: ratio(correct, total),
                })
                .collect();
            (d.to_string(), rows)
        })
        .collect();
    Ok(ScoreReport {
        total,
        correct,
        accuracy: ratio(correct, total),
        invalid,
        invalid_rate: ratio(invalid, total),
        chance_level: if total == 0 { 0.0 } else { chance / total as f64 },
        breakdowns,
        records,
    })
}

/// One uniformly random guess per trial from the tokens of its answer's class.
pub fn simulate_random(dataset: &Dataset, seed: u64) -> Vec<RawResponse> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    dataset
        .trials
        .iter()
        .map(|t| {
            let class = t.answer().class();
            let options: Vec<&AnswerToken> = t.answer_pool.iter().filter(|a| a.class() == class).collect();
            let guess = options.choose(&mut rng).map_or_else(String::new, |a| a.to_string());
            RawResponse {
                trial_id: t.trial_id.clone(),
                subject_id: "random".into(),
                raw: guess,
                response_time_ms: None,
            }
        })
        .collect()
}

/// Reads responses from JSON lines, or from CSV when the file ends in `.csv`.
pub fn read_responses(path: &Path) -> Result<Vec<RawResponse>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let schema = |line: usize, detail: String| HarnessError::Schema {
        path: path.to_path_buf(),
        line,
        detail,
    };
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        reader
            .deserialize::<RawResponse>()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| schema(i + 2, e.to_string())))
            .collect()
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| schema(i + 1, e.to_string())))
            .collect()
    }
}

pub fn write_responses_jsonl(responses: &[RawResponse]) -> String {
    responses
        .iter()
        .map(|r| serde_json::to_string(r).expect("responses serialize") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{generate_benchmark, ComplexityLevel};
    use crate::stimulus::builtin_catalog;

    fn boolean_pool() -> Vec<AnswerToken> {
        vec![AnswerToken::Bool(true), AnswerToken::Bool(false)]
    }

    #[test]
    fn strict_normalization() {
        let pool = boolean_pool();
        assert_eq!(
            normalize_response("True.", &pool, MatchMode::Strict),
            Some(AnswerToken::Bool(true))
        );
        let locs = vec![AnswerToken::parse("bottom left"), AnswerToken::parse("top left")];
        assert_eq!(
            normalize_response(" bottom  left ", &locs, MatchMode::Strict),
            Some(locs[0].clone())
        );
        assert_eq!(normalize_response("maybe", &pool, MatchMode::Strict), None);
    }

    #[test]
    fn lenient_needs_a_single_token() {
        let pool = boolean_pool();
        assert_eq!(
            normalize_response("it is either true or false", &pool, MatchMode::Lenient),
            None
        );
        assert_eq!(
            normalize_response("The answer is false, clearly", &pool, MatchMode::Lenient),
            Some(AnswerToken::Bool(false))
        );
        assert_eq!(normalize_response("untrue", &pool, MatchMode::Lenient), None);
    }

    #[test]
    fn perfect_and_unknown_responses() {
        let catalog = builtin_catalog();
        let data = generate_benchmark(ComplexityLevel::High, 30, 2, &catalog, 0).unwrap();
        let perfect: Vec<RawResponse> = data
            .trials
            .iter()
            .map(|t| RawResponse {
                trial_id: t.trial_id.clone(),
                subject_id: "s".into(),
                raw: t.answer().to_string(),
                response_time_ms: Some(1.0),
            })
            .collect();
        let report = score(&data, &perfect, MatchMode::Strict).unwrap();
        assert_eq!(report.accuracy, 1.0);
        for rows in report.breakdowns.values() {
            assert_eq!(rows.iter().map(|r| r.total).sum::<usize>(), 30);
        }
        let stray = RawResponse {
            trial_id: "nope".into(),
            subject_id: "s".into(),
            raw: "true".into(),
            response_time_ms: None,
        };
        assert!(
            matches!(score(&data, &[stray], MatchMode::Strict), Err(HarnessError::UnknownTrials(ids)) if ids == ["nope"])
        );
    }

    #[test]
    fn csv_and_jsonl_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("r.csv");
        fs::write(
            &csv_path,
            "trial_id,subject_id,raw,response_time_ms,extra\nlow_00000,a,true,12.5,x\nlow_00001,a,false,,y\n",
        )
        .unwrap();
        let rows = read_responses(&csv_path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].response_time_ms, None);
        let json_path = dir.path().join("r.jsonl");
        fs::write(&json_path, write_responses_jsonl(&rows)).unwrap();
        assert_eq!(read_responses(&json_path).unwrap(), rows);
    }
}
