//! Builds a model prompt for a trial, then scores random and perfect
//! responders against a benchmark.
//!
//! cargo run --example scoring -- high 500

use std::env;

use iwisdm::harness::{build_prompt, score, simulate_random, MatchMode, PromptVariant, RawResponse};
use iwisdm::presets::{generate_benchmark, ComplexityLevel};
use iwisdm::stimulus::builtin_catalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let level: ComplexityLevel = args.first().map_or("high", String::as_str).parse()?;
    let n: usize = args.get(1).map_or(Ok(500), |s| s.parse())?;

    let catalog = builtin_catalog();
    let data = generate_benchmark(level, n, 3, &catalog, 0)?;
    let prompt = build_prompt(&data.trials[0], PromptVariant::default(), catalog.space());
    println!("{}\n", prompt.text());

    let random = score(&data, &simulate_random(&data, 1), MatchMode::Strict)?;
    println!("random responder\n{}", random.table());
    let perfect: Vec<RawResponse> = data
        .trials
        .iter()
        .map(|t| RawResponse {
            trial_id: t.trial_id.clone(),
            subject_id: "oracle".into(),
            raw: format!("The answer is {}.", t.answer()),
            response_time_ms: None,
        })
        .collect();
    let lenient = score(&data, &perfect, MatchMode::Lenient)?;
    println!(
        "wordy perfect responder, lenient matching: accuracy {:.3}",
        lenient.accuracy
    );
    Ok(())
}
