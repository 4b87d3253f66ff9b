//! Samples task graphs from a task space and compares the sampler's
//! support with brute-force enumeration.
//!
//! cargo run --example autotask -- medium 2000

use std::collections::BTreeMap;
use std::env;

use iwisdm::autotask::{enumerate_task_space, sample_task_graph, CountRange, TaskSpaceConfig};
use iwisdm::graph::{graph_depth, ConnectivityRules, OperatorKind};
use iwisdm::presets::{complexity_config, ComplexityLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let level: ComplexityLevel = args.first().map_or("low", String::as_str).parse()?;
    let draws: usize = args.get(1).map_or(Ok(1000), |s| s.parse())?;

    let space = complexity_config(level).space;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut roots: BTreeMap<OperatorKind, usize> = BTreeMap::new();
    let mut depths: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..draws {
        let g = sample_task_graph(&space, &mut rng)?;
        *roots.entry(g.kind(g.root()).expect("root exists")).or_default() += 1;
        *depths.entry(graph_depth(&g)).or_default() += 1;
    }
    println!("{level}: roots {roots:?}");
    println!("{level}: depths {depths:?}");
    let example = sample_task_graph(&space, &mut rng)?;
    println!("example: {}", example.shape());

    use OperatorKind::*;
    let toy = TaskSpaceConfig {
        max_switches: 0,
        min_switches: 0,
        max_depth: 3,
        max_ops: 20,
        max_selects: None,
        allowed_root_kinds: [And, Or].into(),
        allowed_boolean_kinds: [IsSame, NotSame, And, Or].into(),
        n_and_or: CountRange::exactly(1),
        rules: ConnectivityRules::default()
            .restricted_to(&[And, Or, IsSame, NotSame, GetCategory, GetLocation, Select].into()),
    };
    let shapes = enumerate_task_space(&toy, 10_000)?;
    let seen: std::collections::BTreeSet<String> = (0..20_000)
        .map(|_| sample_task_graph(&toy, &mut rng).map(|g| g.shape()))
        .collect::<Result<_, _>>()?;
    println!(
        "toy space: {} enumerated shapes, {} seen in 20000 draws",
        shapes.len(),
        seen.len()
    );
    Ok(())
}
