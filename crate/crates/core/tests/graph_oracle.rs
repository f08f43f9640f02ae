mod oracles;

use oracles::{betweenness, local_efficiency, random_network, rng};
use wena_core::connectivity::SparseNetwork;
use wena_core::graph::{
    assemble_graph_features, betweenness_centrality, degree_centrality, local_efficiency as le,
    node_strength,
};

#[test]
fn indices_match_exhaustive_oracle() {
    let mut r = rng(3);
    for case in 0..60 {
        let net = random_network(&mut r, 12, case % 2 == 0);
        let bc = betweenness_centrality(&net);
        let local = le(&net);
        for (v, (a, b)) in bc.iter().zip(betweenness(&net)).enumerate() {
            assert!(
                (a - b).abs() < 1e-9,
                "case {case} node {v}: betweenness {a} vs {b}"
            );
        }
        for (v, (a, b)) in local.iter().zip(local_efficiency(&net)).enumerate() {
            assert!(
                (a - b).abs() < 1e-9,
                "case {case} node {v}: efficiency {a} vs {b}"
            );
        }
        let mut deg = vec![0.0; net.n];
        let mut strength = vec![0.0; net.n];
        for &(i, j, w) in &net.edges {
            deg[i] += 1.0;
            deg[j] += 1.0;
            strength[i] += w;
            strength[j] += w;
        }
        assert_eq!(degree_centrality(&net), deg);
        assert_eq!(node_strength(&net).unwrap(), strength);
    }
}

#[test]
fn star_and_triangle() {
    // star: the hub lies on all three leaf pairs
    let star = SparseNetwork::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]);
    assert_eq!(betweenness_centrality(&star), vec![3.0, 0.0, 0.0, 0.0]);
    assert_eq!(le(&star), vec![0.0; 4]);
    let tri = SparseNetwork::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
    assert_eq!(le(&tri), vec![1.0; 3]);
}

#[test]
fn zero_weight_edge_counts_for_degree_only() {
    let net = SparseNetwork::from_edges(3, [(0, 1, 0.0), (1, 2, 1.0)]);
    let g = assemble_graph_features(&net).unwrap();
    assert_eq!(g.degree, vec![1.0, 2.0, 1.0]);
    assert_eq!(g.strength, vec![0.0, 1.0, 1.0]);
    assert_eq!(g.betweenness, vec![0.0; 3]);
}

#[test]
fn negative_weight_is_rejected() {
    let net = SparseNetwork::from_edges(2, [(0, 1, -0.5)]);
    assert!(node_strength(&net).is_err());
}
