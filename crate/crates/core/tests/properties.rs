use iwisdm::autotask::{compose_with_switch, sample_task_graph};
use iwisdm::graph::{deserialize_graph, graph_depth, serialize_graph};
use iwisdm::harness::{normalize_response, MatchMode};
use iwisdm::instruction::{evaluate_instruction, parse_instruction};
use iwisdm::presets::{complexity_config, generate_benchmark, ComplexityLevel};
use iwisdm::seed::derive_seed;
use iwisdm::stimulus::builtin_catalog;
use iwisdm::trial::{add_distractors, check_oracle, layout_frames, FrameRole, TrialDocument, TrialInstance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn level() -> impl Strategy<Value = ComplexityLevel> {
    prop::sample::select(ComplexityLevel::ALL.to_vec())
}

fn trial(level: ComplexityLevel, seed: u64) -> TrialInstance {
    let catalog = builtin_catalog();
    generate_benchmark(level, 1, seed, &catalog, 0)
        .unwrap()
        .trials
        .remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn graph_documents_round_trip(level in level(), seed in any::<u64>()) {
        let config = complexity_config(level);
        let g = sample_task_graph(&config.space, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(deserialize_graph(&serialize_graph(&g)).unwrap(), g);
    }

    #[test]
    fn stored_answers_match_the_oracle(level in level(), seed in any::<u64>()) {
        let t = trial(level, seed);
        prop_assert!(check_oracle(&t).is_ok());
        let ast = parse_instruction(&t.instruction).unwrap();
        let answers = evaluate_instruction(&ast, &t.objects).unwrap();
        prop_assert_eq!(answers.last(), Some(t.answer()));
    }

    #[test]
    fn trial_documents_round_trip(level in level(), seed in any::<u64>()) {
        let catalog = builtin_catalog();
        let t = trial(level, seed);
        let text = TrialDocument::from_trial(&t).to_json();
        let back = TrialDocument::from_json(&text).unwrap().into_trial(catalog.space()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn distractors_keep_every_answer(level in level(), seed in any::<u64>(), per_frame in 1usize..=3) {
        let catalog = builtin_catalog();
        let t = trial(level, seed);
        let out = add_distractors(&t, per_frame, &catalog, &mut ChaCha8Rng::seed_from_u64(seed ^ 1)).unwrap();
        prop_assert!(check_oracle(&out.trial).is_ok());
        prop_assert_eq!(out.trial.answer(), t.answer());
        let ast = parse_instruction(&out.trial.instruction).unwrap();
        let answers = evaluate_instruction(&ast, &out.trial.objects).unwrap();
        prop_assert_eq!(answers.last(), Some(t.answer()));
    }

    #[test]
    fn switch_composition_deepens(seed in any::<u64>()) {
        let config = complexity_config(ComplexityLevel::Low).space;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parts: Vec<_> = (0..3).map(|_| sample_task_graph(&config, &mut rng).unwrap()).collect();
        let joined = compose_with_switch(&parts[0], &parts[1], &parts[2]).unwrap();
        let deepest = parts.iter().map(graph_depth).max().unwrap();
        prop_assert_eq!(graph_depth(&joined), deepest + 1);
        prop_assert_eq!(joined.node_count(), 1 + parts.iter().map(|p| p.node_count()).sum::<usize>());
    }

    #[test]
    fn layouts_keep_objects_in_order(n_frames in 1usize..12, objects in 1usize..12, seed in any::<u64>()) {
        prop_assume!(objects <= n_frames);
        let s = layout_frames(objects, n_frames, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(s.n_frames(), n_frames);
        prop_assert_eq!(s.object_count(), objects);
        prop_assert_eq!(s.roles[0], FrameRole::Object(1));
        let frames: Vec<usize> = (1..=objects as u32).map(|o| s.frame_of(o).unwrap()).collect();
        prop_assert!(frames.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn derived_seeds_are_distinct(master in any::<u64>(), i in 0u64..1_000_000, j in 0u64..1_000_000) {
        prop_assume!(i != j);
        prop_assert_ne!(derive_seed(master, i), derive_seed(master, j));
        prop_assert_eq!(derive_seed(master, i), derive_seed(master, i));
    }

    #[test]
    fn wrapped_tokens_normalize_leniently(level in level(), seed in any::<u64>(), prefix in "(Answer: |I think |)", suffix in "(\\.|!|)") {
        let t = trial(level, seed);
        for token in &t.answer_pool {
            let raw = format!("{prefix}{token}{suffix}");
            let lenient = normalize_response(&raw, &t.answer_pool, MatchMode::Lenient);
            prop_assert_eq!(lenient.as_ref(), Some(token));
            let strict = normalize_response(&token.to_string().to_uppercase(), &t.answer_pool, MatchMode::Strict);
            prop_assert_eq!(strict.as_ref(), Some(token));
        }
    }
}
