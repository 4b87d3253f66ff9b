//! Generates a complexity benchmark and writes it to disk.
//!
//! cargo run --example benchmark -- high 50 7 out/high

use std::env;
use std::path::PathBuf;
use std::time::Instant;

use iwisdm::dataset::write_dataset;
use iwisdm::presets::{complexity_config, conformance_issues, generate_benchmark, ComplexityLevel};
use iwisdm::render::CanvasConfig;
use iwisdm::stimulus::builtin_catalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let level: ComplexityLevel = args.first().map_or("low", String::as_str).parse()?;
    let n: usize = args.get(1).map_or(Ok(10), |s| s.parse())?;
    let seed: u64 = args.get(2).map_or(Ok(0), |s| s.parse())?;
    let out = args.get(3).map(PathBuf::from);

    let catalog = builtin_catalog();
    let start = Instant::now();
    let dataset = generate_benchmark(level, n, seed, &catalog, 0)?;
    println!("generated {n} {level} trials in {:.2?}", start.elapsed());

    let config = complexity_config(level);
    let failing = dataset
        .trials
        .iter()
        .filter(|t| !conformance_issues(t, &config).is_empty())
        .count();
    println!("{failing} trials outside the level's constraints");
    for trial in dataset.trials.iter().take(3) {
        println!("{}: {} -> {}", trial.trial_id, trial.instruction, trial.answer());
    }
    if let Some(out) = out {
        let paths = write_dataset(&dataset, &out, &catalog, Some(&CanvasConfig::default()))?;
        println!("wrote {} files under {}", paths.len(), out.display());
    }
    Ok(())
}
