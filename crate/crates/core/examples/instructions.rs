//! Parses instruction text and answers it directly from a trial's frames.
//!
//! cargo run --example instructions -- "observe object 1, observe object 2, category of object 1 equals category of object 2?"

use std::env;

use iwisdm::instruction::{evaluate_instruction, parse_instruction};
use iwisdm::presets::{generate_benchmark, ComplexityLevel};
use iwisdm::stimulus::builtin_catalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(text) = env::args().nth(1) {
        match parse_instruction(&text) {
            Ok(ast) => println!("{ast:#?}"),
            Err(e) => println!("rejected {e}"),
        }
        return Ok(());
    }
    let catalog = builtin_catalog();
    for level in ComplexityLevel::ALL {
        let data = generate_benchmark(level, 200, 5, &catalog, 2)?;
        let mut agree = 0;
        for trial in &data.trials {
            let ast = parse_instruction(&trial.instruction)?;
            let answers = evaluate_instruction(&ast, &trial.objects)?;
            agree += usize::from(answers.last() == Some(trial.answer()));
        }
        println!(
            "{level}: {agree}/{} instructions answered like the graph",
            data.trials.len()
        );
        println!("  e.g. {}", data.trials[0].instruction);
    }
    Ok(())
}
