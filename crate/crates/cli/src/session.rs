//! One subject's pass through a dataset.

use iwisdm::dataset::Dataset;
use iwisdm::harness::{normalize_response, MatchMode};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("the session is complete")]
    Done,
    #[error("trial {0} has not been served; fetch it first")]
    NotServed(String),
    #[error("trial {expected} is awaiting an answer, not {got}")]
    WrongTrial { expected: String, got: String },
    #[error("trial {0} is not in the dataset")]
    MissingTrial(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub trial_id: String,
    pub subject_id: String,
    pub raw: String,
    pub normalized: Option<String>,
    pub correct: bool,
    /// From serving the trial to receiving the answer, on the server clock.
    pub response_time_ms: f64,
    pub complexity: String,
    pub client_elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub subject_id: String,
    pub dataset: String,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Trial ids in presentation order.
    pub order: Vec<String>,
    pub cursor: usize,
    /// Unix milliseconds at which each trial was first served.
    pub started_at_ms: Vec<u64>,
    pub records: Vec<SessionRecord>,
}

impl Session {
    /// Trials follow the dataset order, shuffled when `seed` is given and
    /// cut to the first `limit`.
    pub fn new(
        session_id: String,
        subject_id: String,
        dataset_name: &str,
        dataset: &Dataset,
        seed: Option<u64>,
        limit: Option<usize>,
    ) -> Session {
        let mut order: Vec<String> = dataset.trials.iter().map(|t| t.trial_id.clone()).collect();
        if let Some(seed) = seed {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        if let Some(limit) = limit {
            order.truncate(limit);
        }
        Session {
            session_id,
            subject_id,
            dataset: dataset_name.into(),
            seed,
            order,
            cursor: 0,
            started_at_ms: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn total(&self) -> usize {
        self.order.len()
    }

    pub fn is_done(&self) -> bool {
        self.cursor >= self.order.len()
    }

    /// The trial awaiting an answer, starting its clock on first call.
    pub fn serve(&mut self, now_ms: u64) -> Option<&str> {
        let id = self.order.get(self.cursor)?;
        if self.started_at_ms.len() == self.cursor {
            self.started_at_ms.push(now_ms);
        }
        Some(id)
    }

    /// Records the answer to the served trial and advances the cursor.
    pub fn answer(
        &mut self,
        dataset: &Dataset,
        raw: &str,
        trial_id: Option<&str>,
        client_elapsed_ms: Option<f64>,
        now_ms: u64,
    ) -> Result<&SessionRecord, SessionError> {
        let Some(expected) = self.order.get(self.cursor) else {
            return Err(SessionError::Done);
        };
        if let Some(got) = trial_id.filter(|got| *got != expected) {
            return Err(SessionError::WrongTrial {
                expected: expected.clone(),
                got: got.into(),
            });
        }
        let Some(started) = self.started_at_ms.get(self.cursor).copied() else {
            return Err(SessionError::NotServed(expected.clone()));
        };
        let trial = dataset
            .trial(expected)
            .ok_or_else(|| SessionError::MissingTrial(expected.clone()))?;
        let normalized = normalize_response(raw, &trial.answer_pool, MatchMode::Strict);
        self.records.push(SessionRecord {
            trial_id: expected.clone(),
            subject_id: self.subject_id.clone(),
            raw: raw.into(),
            correct: normalized.as_ref() == Some(trial.answer()),
            normalized: normalized.map(|t| t.to_string()),
            response_time_ms: now_ms.saturating_sub(started) as f64,
            complexity: trial
                .complexity
                .clone()
                .unwrap_or_else(|| dataset.manifest.level.clone()),
            client_elapsed_ms,
        });
        self.cursor += 1;
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn export_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            writer.serialize(r).expect("records serialize");
        }
        if self.records.is_empty() {
            writer
                .write_record([
                    "trial_id",
                    "subject_id",
                    "raw",
                    "normalized",
                    "correct",
                    "response_time_ms",
                    "complexity",
                    "client_elapsed_ms",
                ])
                .expect("in-memory writes succeed");
        }
        String::from_utf8(writer.into_inner().expect("in-memory writes succeed")).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use iwisdm::presets::{generate_benchmark, ComplexityLevel};
    use iwisdm::stimulus::builtin_catalog;

    fn dataset() -> Dataset {
        generate_benchmark(ComplexityLevel::Low, 4, 2, &builtin_catalog(), 0).unwrap()
    }

    #[test]
    fn answers_need_a_served_trial() {
        let data = dataset();
        let mut s = Session::new("s".into(), "p1".into(), "low", &data, None, None);
        assert!(matches!(
            s.answer(&data, "true", None, None, 5),
            Err(SessionError::NotServed(_))
        ));
        let first = s.serve(100).unwrap().to_string();
        assert_eq!(s.serve(150).unwrap(), first);
        let r = s.answer(&data, "true", Some(&first), Some(30.0), 400).unwrap();
        assert_eq!(r.response_time_ms, 300.0);
        assert!(matches!(
            s.answer(&data, "true", Some(&first), None, 500),
            Err(SessionError::WrongTrial { .. })
        ));
        assert!(matches!(
            s.answer(&data, "true", None, None, 500),
            Err(SessionError::NotServed(_))
        ));
        assert_eq!(s.records.len(), s.cursor);
    }

    #[test]
    fn seeded_order_is_a_permutation() {
        let data = dataset();
        let s = Session::new("s".into(), "p1".into(), "low", &data, Some(9), Some(3));
        assert_eq!(s.total(), 3);
        assert!(s.order.iter().all(|id| data.trial(id).is_some()));
        assert_eq!(
            s.order,
            Session::new("t".into(), "p2".into(), "low", &data, Some(9), Some(3)).order
        );
    }

    #[test]
    fn empty_export_has_a_header() {
        let data = dataset();
        let s = Session::new("s".into(), "p1".into(), "low", &data, None, None);
        assert_eq!(
            s.export_csv().trim(),
            "trial_id,subject_id,raw,normalized,correct,response_time_ms,complexity,client_elapsed_ms"
        );
    }
}
