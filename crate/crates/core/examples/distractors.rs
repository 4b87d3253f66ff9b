//! Adds distractor objects to a trial and shows how the instruction names
//! the task objects apart from them.
//!
//! cargo run --example distractors -- 3 11

use std::env;

use iwisdm::presets::{generate_benchmark, ComplexityLevel};
use iwisdm::stimulus::builtin_catalog;
use iwisdm::trial::{add_distractors, check_oracle, disambiguation_attribute};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let per_frame: usize = args.first().map_or(Ok(2), |s| s.parse())?;
    let seed: u64 = args.get(1).map_or(Ok(11), |s| s.parse())?;

    let catalog = builtin_catalog();
    let trial = generate_benchmark(ComplexityLevel::Low, 1, seed, &catalog, 0)?
        .trials
        .remove(0);
    println!("before: {}", trial.instruction);
    println!("told apart by: {:?}", disambiguation_attribute(&trial));

    let out = add_distractors(&trial, per_frame, &catalog, &mut ChaCha8Rng::seed_from_u64(seed))?;
    println!("after:  {}", out.trial.instruction);
    for f in 0..out.trial.n_frames() {
        let here: Vec<String> = out
            .trial
            .objects
            .in_frame(f)
            .map(|o| {
                format!(
                    "{}{} at {}",
                    if o.is_distractor { "*" } else { "" },
                    o.stimulus.category,
                    o.location
                )
            })
            .collect();
        println!("  frame {f}: {}", here.join(", "));
    }
    check_oracle(&out.trial)?;
    println!(
        "answer unchanged: {} ({} frames skipped)",
        out.trial.answer(),
        out.skipped.len()
    );
    Ok(())
}
