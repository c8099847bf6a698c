//! Property tests over random instances, checked against the brute-force
//! oracles in `common`.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subgraph_rag::agent::parse_react;
use subgraph_rag::catalog::AttributeCatalog;
use subgraph_rag::grounding::{extract, QueryTermSet};
use subgraph_rag::harness::{mean_std, SolutionStep};
use subgraph_rag::index::RetrievalParams;
use subgraph_rag::self_query::{merge_feedback, StructuredQuery, FEEDBACK_CAP};

use common::*;

fn ids(
    graph: &subgraph_rag::scene_graph::SceneGraph,
    index: &subgraph_rag::index::VectorIndex,
    abstraction: &subgraph_rag::abstraction::Abstraction,
    fb: &QueryTermSet,
    params: &RetrievalParams,
) -> BTreeSet<String> {
    extract(graph, index, abstraction, fb, params, &AttributeCatalog::household())
        .unwrap()
        .entity_ids()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extraction_with_feedback_matches_oracle(seed in any::<u64>(), n in 0usize..40, fb_terms in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = random_graph(&mut rng, n);
        let index = mirrored_index(&graph);
        let abstraction = random_abstraction(&mut rng, 5);
        let feedback = random_feedback(&mut rng, fb_terms);
        let params = RetrievalParams::new(rng.random_range(1..=6), rng.random_range(0.0..0.9));
        let sub = extract(&graph, &index, &abstraction, &feedback, &params, &AttributeCatalog::household()).unwrap();
        let (nodes, edges) = oracle_extract(&graph, &index, &abstraction, &feedback, &params);
        prop_assert_eq!(sub.graph.entity_ids(), nodes);
        prop_assert_eq!(sub.graph.edge_ids(), edges);
        prop_assert_eq!(sub.token_count, sub.serialized.len().div_ceil(4));
        // every shown entity has a non-empty attribute view
        for id in sub.graph.entity_ids() {
            prop_assert!(sub.attribute_view.get(&id).is_some_and(|v| !v.is_empty()));
        }
    }

    #[test]
    fn merging_below_the_cap_never_shrinks(seed in any::<u64>(), acc_len in 0usize..FEEDBACK_CAP, new_terms in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = random_graph(&mut rng, 30);
        let index = mirrored_index(&graph);
        let abstraction = random_abstraction(&mut rng, 3);
        let params = RetrievalParams::new(rng.random_range(1..=5), rng.random_range(0.1..0.8));
        let acc = random_feedback(&mut rng, acc_len);
        let q = StructuredQuery {
            search_terms: (0..new_terms).map(|_| random_label(&mut rng)).collect(),
            attribute_filters: (0..rng.random_range(0..=2)).map(|_| random_filter(&mut rng)).collect(),
            attribute_unlocks: BTreeSet::new(),
        };
        let merged = merge_feedback(&acc, &q);
        prop_assert!(merged.feedback_terms.len() <= FEEDBACK_CAP);
        let base = ids(&graph, &index, &abstraction, &QueryTermSet::default(), &params);
        let after = ids(&graph, &index, &abstraction, &merged, &params);
        prop_assert!(after.is_superset(&base));
        if acc.feedback_terms.len() + q.search_terms.len() <= FEEDBACK_CAP {
            let before = ids(&graph, &index, &abstraction, &acc, &params);
            prop_assert!(after.is_superset(&before));
        }
    }

    #[test]
    fn query_matches_exhaustive_scan(seed in any::<u64>(), n in 0usize..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = random_graph(&mut rng, n);
        let index = mirrored_index(&graph);
        let mut params = RetrievalParams::new(rng.random_range(1..=10), rng.random_range(-0.2..1.0));
        if rng.random_bool(0.5) {
            params.metadata_filter.push(random_filter(&mut rng));
        }
        let text = random_label(&mut rng);
        let got: Vec<(String, f64)> = index
            .query(&text, &params)
            .unwrap()
            .into_iter()
            .map(|h| (h.doc_id, h.similarity))
            .collect();
        let q = index.embedder().embed(&text).unwrap();
        prop_assert_eq!(got, oracle_scan(&index, &q, &params));
    }

    #[test]
    fn solution_replies_parse_back(action in "[a-z]{3,12}", input in "[a-z]{1,8}_[0-9]{1,2}", thought in "[A-Za-z ,]{0,40}") {
        let step = SolutionStep { thought: thought.clone(), action: action.clone(), input: input.clone() };
        let parsed = parse_react(&step.reply()).unwrap();
        prop_assert_eq!(parsed.action, action);
        prop_assert_eq!(parsed.input, input);
        prop_assert_eq!(parsed.thought, thought.trim());
    }

    #[test]
    fn mean_std_matches_two_pass(xs in prop::collection::vec(-1e3f64..1e3, 1..30)) {
        let s = mean_std(&xs).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() < 2 { 0.0 } else { xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) };
        prop_assert!((s.mean - mean).abs() < 1e-9);
        prop_assert!((s.std - var.sqrt()).abs() < 1e-9);
        prop_assert_eq!(s.n, xs.len());
    }
}
