//! Instantiates one trial of a sampled graph and renders its frames.
//!
//! cargo run --example render_trial -- out/trial 42

use std::env;
use std::path::PathBuf;

use iwisdm::autotask::sample_task_graph;
use iwisdm::presets::{complexity_config, ComplexityLevel};
use iwisdm::render::{render_and_write, CanvasConfig};
use iwisdm::stimulus::builtin_catalog;
use iwisdm::trial::instantiate_trial_seeded;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let out = PathBuf::from(args.first().map_or("trial_out", String::as_str));
    let seed: u64 = args.get(1).map_or(Ok(42), |s| s.parse())?;

    let catalog = builtin_catalog();
    let config = complexity_config(ComplexityLevel::Low);
    let graph = sample_task_graph(&config.space, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let trial = instantiate_trial_seeded(&graph, &catalog, config.n_frames, seed)?;
    println!("{}", trial.instruction);
    for o in &trial.objects.objects {
        println!(
            "  frame {} object {:?}: {} #{} angle {} at {}",
            o.frame_index, o.ordinal, o.stimulus.category, o.stimulus.identity, o.stimulus.view_angle, o.location
        );
    }
    println!("answer: {}", trial.answer());
    let paths = render_and_write(&trial, &catalog, &CanvasConfig::default(), &out)?;
    println!("wrote {} files under {}", paths.len(), out.display());
    Ok(())
}
