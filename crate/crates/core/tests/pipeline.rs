use std::fs;

use iwisdm::dataset::{load_dataset, write_dataset};
use iwisdm::harness::{
    chance_level, effective_pool_size, read_responses, score, simulate_random, write_responses_jsonl, HarnessError,
    MatchMode, RawResponse,
};
use iwisdm::presets::{
    dms, generate_benchmark, generate_preset, preset_task, single_frame_set, ComplexityLevel, PresetName,
    SingleFrameKind,
};
use iwisdm::render::CanvasConfig;
use iwisdm::stimulus::builtin_catalog;
use iwisdm::trial::backward_initialize;
use iwisdm::value::{Attribute, Value};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn perfect(dataset: &iwisdm::dataset::Dataset) -> Vec<RawResponse> {
    dataset
        .trials
        .iter()
        .map(|t| RawResponse {
            trial_id: t.trial_id.clone(),
            subject_id: "oracle".into(),
            raw: t.answer().to_string(),
            response_time_ms: Some(1.0),
        })
        .collect()
}

#[test]
fn generated_datasets_score_from_disk() {
    let catalog = builtin_catalog();
    let data = generate_benchmark(ComplexityLevel::Medium, 12, 3, &catalog, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&data, dir.path(), &catalog, Some(&CanvasConfig::default())).unwrap();
    let back = load_dataset(dir.path(), catalog.space()).unwrap();
    assert_eq!(back, data);

    let path = dir.path().join("responses.jsonl");
    fs::write(&path, write_responses_jsonl(&perfect(&back))).unwrap();
    let report = score(&back, &read_responses(&path).unwrap(), MatchMode::Strict).unwrap();
    assert_eq!(report.accuracy, 1.0);
    assert_eq!(report.invalid, 0);
    assert!(report.breakdowns["complexity"].iter().all(|r| r.key == "medium"));
}

#[test]
fn absent_trials_are_listed() {
    let catalog = builtin_catalog();
    let data = generate_benchmark(ComplexityLevel::Low, 2, 3, &catalog, 0).unwrap();
    let mut responses = perfect(&data);
    responses[0].trial_id = "missing_1".into();
    responses.push(RawResponse {
        trial_id: "missing_2".into(),
        subject_id: String::new(),
        raw: "true".into(),
        response_time_ms: None,
    });
    match score(&data, &responses, MatchMode::Strict) {
        Err(HarnessError::UnknownTrials(ids)) => assert_eq!(ids, ["missing_1", "missing_2"]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn two_pool_tokens_are_invalid_even_leniently() {
    let catalog = builtin_catalog();
    let data = generate_benchmark(ComplexityLevel::Low, 1, 9, &catalog, 0).unwrap();
    let mut responses = perfect(&data);
    responses[0].raw = "it is either true or false".into();
    let report = score(&data, &responses, MatchMode::Lenient).unwrap();
    assert_eq!(report.invalid, 1);
    assert_eq!(report.correct, 0);
}

#[test]
fn high_chance_is_the_mean_reciprocal_pool() {
    let catalog = builtin_catalog();
    let data = generate_benchmark(ComplexityLevel::High, 300, 21, &catalog, 0).unwrap();
    let by_hand: f64 = data
        .trials
        .iter()
        .map(|t| {
            let class = t.answer().class();
            1.0 / t.answer_pool.iter().filter(|a| a.class() == class).count() as f64
        })
        .sum::<f64>()
        / data.trials.len() as f64;
    assert!((chance_level(&data).unwrap() - by_hand).abs() < 1e-12);
    assert!(
        data.trials.iter().any(|t| effective_pool_size(t) > 2),
        "some high trials ask for a category or location"
    );
}

#[test]
fn random_guessing_on_boolean_trials_scores_half() {
    let catalog = builtin_catalog();
    let data = single_frame_set(SingleFrameKind::Category, 10_000, 4, &catalog).unwrap();
    let report = score(&data, &simulate_random(&data, 8), MatchMode::Strict).unwrap();
    assert!((report.accuracy - 0.5).abs() <= 0.02, "{}", report.accuracy);
    assert_eq!(report.chance_level, 0.5);
}

#[test]
fn two_back_over_five_frames_answers_at_frames_three_to_five() {
    let catalog = builtin_catalog();
    let task = preset_task(PresetName::NBack(2), Attribute::Category, Some(5)).unwrap();
    let data = generate_preset(&task, 20, 1, &catalog).unwrap();
    for t in &data.trials {
        let frames: Vec<usize> = t.parts.iter().filter_map(|p| p.response_frame).collect();
        assert_eq!(frames, [2, 3, 4]);
        assert_eq!(t.actions.iter().filter(|a| a.is_some()).count(), 3);
    }
}

#[test]
fn same_request_same_dataset() {
    let catalog = builtin_catalog();
    let run = || {
        let data = generate_benchmark(ComplexityLevel::High, 40, 77, &catalog, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut files: Vec<(String, Vec<u8>)> =
            write_dataset(&data, dir.path(), &catalog, Some(&CanvasConfig::default()))
                .unwrap()
                .into_iter()
                .map(|p| {
                    (
                        p.strip_prefix(dir.path()).unwrap().display().to_string(),
                        fs::read(&p).unwrap(),
                    )
                })
                .collect();
        files.sort();
        files
    };
    assert_eq!(run(), run());
}

#[test]
fn initialization_balances_boolean_answers() {
    let catalog = builtin_catalog();
    let graph = dms(Attribute::Location);
    let trues = (0..10_000u64)
        .filter(|seed| {
            let a = backward_initialize(&graph, catalog.space(), &mut ChaCha8Rng::seed_from_u64(*seed)).unwrap();
            a.root_value(&graph) == Some(&Value::Bool(true))
        })
        .count();
    let rate = trues as f64 / 10_000.0;
    assert!((0.47..=0.53).contains(&rate), "{rate}");
}
