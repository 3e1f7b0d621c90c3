mod common;

use proptest::prelude::*;
use topocube_core::dataset::{Column, SampleTable};
use topocube_core::graph::ExplicitGraph;
use topocube_core::neighbors::{
    build_index, knn_density, saturation_curve, EdgeStreamConfig, StreamingGraph, WitnessMode,
};
use topocube_core::reference;

fn streamed(table: &SampleTable<f64>, config: EdgeStreamConfig<f64>) -> ExplicitGraph {
    let index = build_index(table);
    ExplicitGraph::collect(&StreamingGraph::new(&index, config).unwrap())
}

#[test]
fn full_candidate_sets_give_the_gabriel_graph() {
    for (seed, (n, d)) in [(60, 2), (80, 5), (120, 2), (100, 5), (45, 3)].into_iter().enumerate() {
        let t = common::uniform(n, d, seed as u64);
        let g = streamed(&t, EdgeStreamConfig::new(n - 1));
        assert_eq!(g.edges(), reference::gabriel_edges(&reference::points(&t)), "n={n} d={d}");
    }
}

#[test]
fn gabriel_with_ties_and_duplicates() {
    for seed in 0..4 {
        let t = common::lattice(70, 2, seed);
        let g = streamed(&t, EdgeStreamConfig::new(69));
        assert_eq!(g.edges(), reference::gabriel_edges(&reference::points(&t)), "seed {seed}");
    }
}

#[test]
fn square_corners_keep_the_sides() {
    let t = SampleTable::from_columns(
        vec![Column::new("x", vec![0.0, 1.0, 0.0, 1.0]), Column::new("y", vec![0.0, 0.0, 1.0, 1.0])],
        vec![Column::new("f", vec![0.0; 4])],
    )
    .unwrap();
    let g = streamed(&t, EdgeStreamConfig::new(3));
    assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
    let curve = saturation_curve(&build_index(&t), &[3], 1.0, WitnessMode::Strict).unwrap();
    assert_eq!(curve[0].edges, 4);
}

#[test]
fn two_points_keep_each_other() {
    let t = common::uniform(2, 3, 9);
    let g = streamed(&t, EdgeStreamConfig::new(1));
    assert_eq!(g.edges(), vec![(0, 1)]);
}

#[test]
fn knn_matches_brute_force() {
    let t = common::uniform(2000, 5, 4);
    let index = build_index(&t);
    let pts = reference::points(&t);
    for q in (0..2000).step_by(37) {
        let got: Vec<usize> = index.knn(q, 20).unwrap().iter().map(|n| n.id).collect();
        assert_eq!(got, reference::knn(&pts, q, 20));
    }
}

#[test]
fn density_matches_brute_force_and_permutation() {
    let t = common::uniform(1500, 5, 11);
    let pts = reference::points(&t);
    let dens = knn_density(&build_index(&t), 20).unwrap();
    for q in (0..1500).step_by(50) {
        let mean: f64 = reference::knn(&pts, q, 20)
            .iter()
            .map(|&w| pts[q].iter().zip(&pts[w]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .sum::<f64>()
            / 20.0;
        assert!((dens.values[q] - 1.0 / mean).abs() < 1e-12);
    }
    let perm: Vec<usize> = (0..1500).map(|i| (i * 7919) % 1500).collect();
    let shuffled = t.permuted(&perm);
    let dens2 = knn_density(&build_index(&shuffled), 20).unwrap();
    for (new, &old) in perm.iter().enumerate() {
        assert_eq!(dens2.values[new], dens.values[old]);
    }
}

fn configs() -> Vec<EdgeStreamConfig<f64>> {
    let mut out = Vec::new();
    for k in [3, 8, 15] {
        for beta in [1.0, 1.4, 2.0, 2.6] {
            for mode in [WitnessMode::Strict, WitnessMode::Relaxed] {
                for sym in [true, false] {
                    out.push(
                        EdgeStreamConfig::new(k)
                            .with_beta(beta)
                            .with_witness_mode(mode)
                            .with_symmetrize(sym),
                    );
                }
            }
        }
    }
    out
}

#[test]
fn streaming_matches_materialized_reference() {
    for (seed, t) in [common::uniform(90, 3, 1), common::lattice(90, 2, 2), common::uniform(70, 5, 3)]
        .into_iter()
        .enumerate()
    {
        let pts = reference::points(&t);
        for c in configs() {
            let got = streamed(&t, c);
            let want = reference::pruned_graph(&pts, c.k, c.beta, c.witness_mode, c.symmetrize);
            assert_eq!(got, want, "fixture {seed} config {c:?}");
        }
    }
}

#[test]
fn strict_edges_grow_with_k() {
    let t = common::uniform(400, 5, 21);
    let index = build_index(&t);
    let ks = [2, 4, 8, 16, 32, 64, 128];
    let curve = saturation_curve(&index, &ks, 1.0, WitnessMode::Strict).unwrap();
    assert!(curve.windows(2).all(|w| w[0].edges <= w[1].edges), "{curve:?}");
    let mut prev: Option<Vec<(usize, usize)>> = None;
    for k in ks {
        let e = ExplicitGraph::collect(&StreamingGraph::new(&index, EdgeStreamConfig::new(k)).unwrap()).edges();
        if let Some(p) = &prev {
            assert!(p.iter().all(|x| e.binary_search(x).is_ok()), "k={k}");
        }
        prev = Some(e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetrized_graph_is_symmetric(
        n in 3usize..60,
        d in 1usize..5,
        seed in any::<u64>(),
        k_frac in 0.0f64..1.0,
        beta in 1.0f64..3.0,
        relaxed in any::<bool>(),
    ) {
        let t = common::uniform(n, d, seed);
        let k = 1 + ((n - 2) as f64 * k_frac) as usize;
        let mode = if relaxed { WitnessMode::Relaxed } else { WitnessMode::Strict };
        let g = streamed(&t, EdgeStreamConfig::new(k).with_beta(beta).with_witness_mode(mode));
        prop_assert!(g.is_symmetric());
    }

    #[test]
    fn knn_is_sorted_and_exact(n in 2usize..120, d in 1usize..6, seed in any::<u64>(), q_frac in 0.0f64..1.0) {
        let t = common::lattice(n, d, seed);
        let index = build_index(&t);
        let q = ((n - 1) as f64 * q_frac) as usize;
        let k = (n - 1).min(10);
        let got: Vec<usize> = index.knn(q, k).unwrap().iter().map(|x| x.id).collect();
        prop_assert_eq!(got, reference::knn(&reference::points(&t), q, k));
    }
}
