use hardcore::graph::{cycle, from_spec, heawood, petersen, random_regular, random_regular_with_girth, Graph, RegularGraph};
use hardcore::rewire::{lemma_budget, rewire, rewire_chain, rewire_with_pairing, ChainMode, Pairing};
use hardcore::Error;
use proptest::prelude::*;

#[test]
fn named_graph_girths() {
    assert_eq!(petersen().girth(), Some(5));
    assert_eq!(heawood().girth(), Some(6));
    assert_eq!(cycle(30).unwrap().girth(), Some(30));
    assert_eq!(from_spec("tree:2:3").unwrap().girth(), None);
}

#[test]
fn edge_list_format() {
    let text = "# a comment\n4 3\n0 1\n1 2\n\n2 3\n";
    let g = Graph::parse_edge_list(text).unwrap();
    assert_eq!(g.to_edge_list(), "4 3\n0 1\n1 2\n2 3\n");
    assert!(Graph::parse_edge_list("3 2\n0 1\n").is_err());
    assert!(Graph::parse_edge_list("3 1\n1 1\n").is_err());
    assert!(Graph::parse_edge_list("3 1\n0 7\n").is_err());
}

#[test]
fn cycle_chain_shrinks_by_two() {
    let chain = rewire_chain(&cycle(40).unwrap(), 4, ChainMode::Exhaustive).unwrap();
    let sizes: Vec<usize> = chain.snapshots.iter().map(|g| g.n()).collect();
    assert_eq!(sizes, (3..=20).rev().map(|k| 2 * k).collect::<Vec<_>>());
    for g in &chain.snapshots {
        assert_eq!(g.cycle_canonical_form(), Some(vec![g.n()]));
    }
}

#[test]
fn lemma_mode_on_large_input() {
    // 2(2g+1)Δ^(2g) = 2 * 9 * 2^8 = 4608 < 4616
    let g = cycle(4616).unwrap();
    assert_eq!(lemma_budget(4616, 2, 4), 4);
    let chain = rewire_chain(&g, 4, ChainMode::Lemma).unwrap();
    assert_eq!(chain.log.len(), 4);
    assert!(chain.stop_reason.contains("budget"));
    assert!(chain.log.iter().all(|s| s.pair_distance >= 9 && s.girth == Some(s.n)));
}

#[test]
fn pairings_differ_on_c8() {
    let g = cycle(8).unwrap();
    let sorted = rewire_with_pairing(&g, 0, 4, &Pairing::Sorted).unwrap();
    assert_eq!(sorted.cycle_canonical_form(), Some(vec![3, 3]));
    let explicit = rewire_with_pairing(&g, 0, 4, &Pairing::Explicit(vec![1, 0])).unwrap();
    assert_eq!(explicit.cycle_canonical_form(), Some(vec![6]));
    assert!(rewire_with_pairing(&g, 0, 4, &Pairing::Explicit(vec![0, 0])).is_err());
}

#[test]
fn near_pairs_rejected() {
    let g = random_regular(50, 3, 1).unwrap();
    let u = 0;
    let v = g.neighbors(u)[0];
    assert!(matches!(rewire(&g, u, v), Err(Error::RewireDistance { distance: 1, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_regular_is_regular(half in 5usize..150, delta in 1usize..5, seed in 0u64..1000) {
        let n = 2 * half;
        let g = random_regular(n, delta, seed).unwrap();
        prop_assert_eq!(g.regular_degree(), Some(delta));
        prop_assert_eq!(g.edge_count(), n * delta / 2);
        let again = random_regular(n, delta, seed).unwrap();
        prop_assert_eq!(g.to_edge_list(), again.to_edge_list());
    }

    #[test]
    fn edge_list_roundtrip(half in 5usize..100, seed in 0u64..1000) {
        let g = random_regular(2 * half, 3, seed).unwrap();
        let h = Graph::parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(h.edges(), g.edges());
    }

    /// Rewiring at distance `2g+1` keeps the degree and the girth bound and
    /// removes exactly two nodes and `Δ` edges.
    #[test]
    fn rewire_keeps_girth(half in 100usize..400, seed in 0u64..10_000, g in 4usize..6) {
        let graph = random_regular_with_girth(2 * half, 3, g, seed).unwrap();
        prop_assume!(graph.girth().map_or(true, |x| x >= g));
        let dist = graph.bfs(0);
        let far = (0..graph.n()).max_by_key(|&v| dist[v]).unwrap();
        prop_assume!(dist[far] >= 2 * g + 1);
        let h = rewire(&graph, 0, far).unwrap();
        prop_assert_eq!(h.regular_degree(), Some(3));
        prop_assert!(h.girth().map_or(true, |x| x >= g));
        prop_assert_eq!(h.n(), graph.n() - 2);
        prop_assert_eq!(h.edge_count(), graph.edge_count() - 3);
        prop_assert!(h.is_connected());
        prop_assert!(RegularGraph::new(h.into_graph()).is_ok());
    }
}
