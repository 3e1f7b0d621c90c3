use super::*;
use crate::cubes::{aggregate_at, build_cubes, selection_scan, CubeConfig, SelectionPredicate};
use crate::dataset::Column;
use crate::graph::ExplicitGraph;
use crate::topology::{compute_topology, GradientMode};

fn chain() -> (SampleTable<f64>, Vec<f64>, TopologyArtifact<f64>) {
    let t = SampleTable::from_columns(
        vec![Column::new("x", (0..5).map(f64::from).collect())],
        vec![Column::new("f", vec![0.0, 2.0, 1.0, 3.0, 0.0])],
    )
    .unwrap();
    let f = t.measure("f").unwrap().to_vec();
    let topo = compute_topology(&ExplicitGraph::path(5), &t, &f, GradientMode::Slope).unwrap();
    (t, f, topo)
}

#[test]
fn radius_formula() {
    assert_eq!(relative_radius(16, 2), 16.0);
    assert_eq!(relative_radius(16, 4), 4.0);
    assert_eq!(contour_levels(0.0, 3.0, 5), vec![0.5, 1.0, 1.5, 2.0, 2.5]);
}

#[test]
fn chain_contour_counts() {
    let (t, f, topo) = chain();
    let set = build_cubes(&t, &f, "f", &topo.segmentation, &CubeConfig::default(), 0.0).unwrap();
    let cubes = aggregate_at(&set, &topo.hierarchy, 0.0, Some(&[3])).unwrap();
    let f_max = BTreeMap::from([(3, 3.0)]);
    // Without a saddle floor the levels start at the segment minimum 0.
    let contours = build_contours(&set.layout, &cubes, &f_max, &BTreeMap::new(), 1, 5);
    let at_half = contours.iter().find(|c| c.level == 0.5).unwrap();
    assert_eq!(at_half.count, 2);
    assert_eq!(at_half.radius, 4.0);
}

#[test]
fn spine_nodes_arcs_and_thresholds() {
    let (t, f, topo) = chain();
    let set = build_cubes(&t, &f, "f", &topo.segmentation, &CubeConfig::default(), 0.0).unwrap();
    let cubes = aggregate_at(&set, &topo.hierarchy, 0.0, None).unwrap();
    let g = build_spine(&t, &f, &topo, &set.layout, &cubes, 0.0, &SpineConfig::default());
    let kinds: Vec<(NodeKind, usize)> = g.nodes.iter().map(|n| (n.kind, n.vertex)).collect();
    assert_eq!(
        kinds,
        vec![(NodeKind::Extremum, 1), (NodeKind::Extremum, 3), (NodeKind::Saddle, 2)]
    );
    assert_eq!(
        g.arcs,
        vec![SpineArc { saddle: 2, extremum: 0 }, SpineArc { saddle: 2, extremum: 1 }]
    );
    for c in &g.contours {
        let owner_f = if c.owner == 1 { 2.0 } else { 3.0 };
        assert!(c.level > 1.0 && c.level < owner_f);
    }
    let cubes = aggregate_at(&set, &topo.hierarchy, 0.5, None).unwrap();
    let g = build_spine(&t, &f, &topo, &set.layout, &cubes, 0.5, &SpineConfig::default());
    assert_eq!(g.nodes.len(), 1);
    assert!(g.arcs.is_empty());
    assert_eq!(g.nodes[0].xy, [0.0, 0.0]);
}

fn grid_fixture() -> (SampleTable<f64>, Vec<f64>, TopologyArtifact<f64>) {
    // Two bumps on a 2D grid with 4-neighbor connectivity.
    let side = 21;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut f = Vec::new();
    for i in 0..side {
        for j in 0..side {
            let (x, y) = (i as f64 / 20.0, j as f64 / 20.0);
            xs.push(x);
            ys.push(y);
            let b = |cx: f64, cy: f64, a: f64| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / 0.04).exp();
            f.push(b(0.25, 0.3, 1.0) + b(0.75, 0.7, 0.7));
        }
    }
    let mut edges = Vec::new();
    for i in 0..side {
        for j in 0..side {
            let v = i * side + j;
            if i + 1 < side {
                edges.push((v, v + side));
            }
            if j + 1 < side {
                edges.push((v, v + 1));
            }
        }
    }
    let t = SampleTable::from_columns(
        vec![Column::new("x", xs), Column::new("y", ys)],
        vec![Column::new("f", f.clone())],
    )
    .unwrap();
    let g = ExplicitGraph::from_edges(side * side, edges);
    let topo = compute_topology(&g, &t, &f, GradientMode::Slope).unwrap();
    (t, f, topo)
}

#[test]
fn radii_strictly_decrease_and_shading() {
    let (t, f, topo) = grid_fixture();
    assert_eq!(topo.segmentation.maxima.len(), 2);
    let set = build_cubes(&t, &f, "f", &topo.segmentation, &CubeConfig::default(), 0.0).unwrap();
    let cubes = aggregate_at(&set, &topo.hierarchy, 0.0, None).unwrap();
    let mut g = build_spine(&t, &f, &topo, &set.layout, &cubes, 0.0, &SpineConfig::default());
    assert!(!g.contours.is_empty());
    for owner in g.contours.iter().map(|c| c.owner).collect::<std::collections::BTreeSet<_>>() {
        let radii: Vec<f64> = g.contours.iter().filter(|c| c.owner == owner).map(|c| c.radius).collect();
        assert!(radii.windows(2).all(|w| w[0] > w[1]), "{radii:?}");
    }

    let seg = crate::topology::segmentation_at(&topo.hierarchy, &topo.segmentation, 0.0);
    let query = g.selection_query::<f64>();
    let full = selection_scan(&t, &f, &seg, 0.0, &set.layout, &SelectionPredicate::all(), &query).unwrap();
    shade_contours(&mut g, &full).unwrap();
    assert!(g.contours.iter().all(|c| c.fraction == 1.0));

    let none = SelectionPredicate::all().with_range(0, 5.0, 5.0);
    let empty = selection_scan(&t, &f, &seg, 0.0, &set.layout, &none, &query).unwrap();
    shade_contours(&mut g, &empty).unwrap();
    assert!(g.contours.iter().all(|c| c.fraction == 0.0));

    let half = SelectionPredicate::all().with_range(0, 0.0, 0.5);
    let part = selection_scan(&t, &f, &seg, 0.0, &set.layout, &half, &query).unwrap();
    shade_contours(&mut g, &part).unwrap();
    let fa = set.layout.f_axis();
    for c in &g.contours {
        let b0 = crate::cubes::first_bin_at_or_above(&set.layout, c.level);
        let above: Vec<usize> = (0..t.n_points())
            .filter(|&r| seg.labels[r] == c.owner && set.layout.bin(fa, f[r]) >= b0)
            .collect();
        let sel = above.iter().filter(|&&r| t.domain(0)[r] <= 0.5).count();
        assert_eq!(above.len() as u64, c.count);
        assert_eq!(c.fraction, sel as f64 / above.len() as f64);
    }

    let other = selection_scan(&t, &f, &seg, 0.3, &set.layout, &half, &query).unwrap();
    assert!(matches!(shade_contours(&mut g, &other), Err(Error::ThresholdMismatch { .. })));
}

#[test]
fn node_count_never_grows_with_t() {
    let (t, f, topo) = grid_fixture();
    let set = build_cubes(&t, &f, "f", &topo.segmentation, &CubeConfig::default(), 0.0).unwrap();
    let mut prev: Option<Vec<usize>> = None;
    for t_k in [0.0, 0.1, 0.3, 0.6, 0.9, 1.0] {
        let cubes = aggregate_at(&set, &topo.hierarchy, t_k, None).unwrap();
        let g = build_spine(&t, &f, &topo, &set.layout, &cubes, t_k, &SpineConfig::default());
        let vs: Vec<usize> = g.nodes.iter().map(|n| n.vertex).collect();
        if let Some(p) = &prev {
            assert!(vs.len() <= p.len());
            assert!(vs.iter().all(|v| p.contains(v)));
        }
        prev = Some(vs);
    }
}

#[test]
fn repulsion_separates_overlapping_extrema() {
    let (t, f, topo) = grid_fixture();
    let set = build_cubes(&t, &f, "f", &topo.segmentation, &CubeConfig::default(), 0.0).unwrap();
    let cubes = aggregate_at(&set, &topo.hierarchy, 0.0, None).unwrap();
    let config = SpineConfig {
        max_radius: Some(10.0),
        ..SpineConfig::default()
    };
    let g = build_spine(&t, &f, &topo, &set.layout, &cubes, 0.0, &config);
    let (a, b) = (g.nodes[0].xy, g.nodes[1].xy);
    let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    assert!(dist >= 10.0 * (1.0 - 1e-6), "{dist}");
    let json = serde_json::to_value(&g).unwrap();
    assert_eq!(json["nodes"][0]["kind"], "extremum");
}
