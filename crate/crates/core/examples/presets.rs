//! Builds the named presets and prints one trial of each.
//!
//! cargo run --example presets -- category 4

use std::env;

use iwisdm::presets::{instantiate_preset, preset_task, PresetName};
use iwisdm::stimulus::builtin_catalog;
use iwisdm::value::Attribute;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let attribute = match args.first().map_or("category", String::as_str) {
        "location" => Attribute::Location,
        "identity" => Attribute::Identity,
        _ => Attribute::Category,
    };
    let seed: u64 = args.get(1).map_or(Ok(0), |s| s.parse())?;
    let catalog = builtin_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for name in [
        PresetName::Dms,
        PresetName::CtxDm,
        PresetName::NBack(1),
        PresetName::NBack(2),
    ] {
        let task = preset_task(name, attribute, None)?;
        let trial = instantiate_preset(&task, &catalog, &mut rng)?;
        println!("[{name}] {} frames", trial.n_frames());
        println!("  {}", trial.instruction);
        let actions: Vec<String> = trial
            .actions
            .iter()
            .map(|a| a.as_ref().map_or_else(|| "-".to_string(), ToString::to_string))
            .collect();
        println!("  actions: {}", actions.join(" "));
        println!("  graph: {}", trial.graph().shape());
    }
    Ok(())
}
