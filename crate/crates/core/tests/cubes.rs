mod common;

use topocube_core::cubes::{
    aggregate_at, build_cubes, contour_counts, hist1d, hist2d, merge_cubes, pcp_pairs, selection_scan, CubeConfig,
    CubeLayout, SelectionPredicate, SelectionQuery,
};
use topocube_core::dataset::SampleTable;
use topocube_core::neighbors::{build_index, EdgeStreamConfig, StreamingGraph};
use topocube_core::topology::{compute_topology, segmentation_at, GradientMode, Segmentation, TopologyArtifact};

struct Fixture {
    table: SampleTable<f64>,
    f: Vec<f64>,
    topo: TopologyArtifact<f64>,
}

fn fixture() -> Fixture {
    let table = common::mixture(10_000, 4, 5, 77);
    let f = table.measure("f").unwrap().to_vec();
    let index = build_index(&table);
    let graph = StreamingGraph::new(&index, EdgeStreamConfig::new(12)).unwrap();
    let topo = compute_topology(&graph, &table, &f, GradientMode::Slope).unwrap();
    Fixture { table, f, topo }
}

/// Direct per-segment scan of the (i, j) joint histogram.
fn scan2d(
    layout: &CubeLayout<f64>,
    fx: &Fixture,
    seg: &Segmentation,
    owner: usize,
    i: usize,
    j: usize,
) -> Vec<u64> {
    let r = layout.resolution;
    let mut g = vec![0; r * r];
    for row in 0..fx.table.n_points() {
        if seg.labels[row] == owner {
            let a = layout.bin(i, layout.value(&fx.table, &fx.f, i, row));
            let b = layout.bin(j, layout.value(&fx.table, &fx.f, j, row));
            g[a * r + b] += 1;
        }
    }
    g
}

#[test]
fn queries_equal_direct_scans() {
    let fx = fixture();
    let config = CubeConfig {
        include_f_triples: true,
        ..CubeConfig::default().with_resolution(16)
    };
    let set = build_cubes(&fx.table, &fx.f, "f", &fx.topo.segmentation, &config, 0.0).unwrap();
    assert_eq!(set.total_count(), 10_000);
    let layout = &set.layout;
    let h = &fx.topo.hierarchy;
    let mut thresholds = vec![0.0, 1.0];
    thresholds.extend((0..h.events.len()).map(|i| h.normalized_persistence(i)));
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    for &t in thresholds.iter().step_by(3.max(thresholds.len() / 6)) {
        let seg = segmentation_at(h, &fx.topo.segmentation, t);
        let cubes = aggregate_at(&set, h, t, None).unwrap();
        assert_eq!(cubes.keys().copied().collect::<Vec<_>>(), seg.maxima);
        assert_eq!(cubes.values().map(|c| c.hist.count).sum::<u64>(), 10_000);
        for (&owner, cube) in &cubes {
            for i in 0..layout.n_axes() {
                for j in 0..layout.n_axes() {
                    if i != j {
                        assert_eq!(hist2d(layout, cube, i, j).unwrap().counts, scan2d(layout, &fx, &seg, owner, i, j));
                    }
                }
                let direct: Vec<u64> = {
                    let mut v = vec![0; layout.resolution];
                    for row in 0..fx.table.n_points() {
                        if seg.labels[row] == owner {
                            v[layout.bin(i, layout.value(&fx.table, &fx.f, i, row))] += 1;
                        }
                    }
                    v
                };
                assert_eq!(hist1d(layout, cube, i).unwrap(), direct);
            }
            let order = [2, 0, 4, 1, 3];
            for (g, w) in pcp_pairs(layout, cube, &order).unwrap().iter().zip(order.windows(2)) {
                assert_eq!(g.counts, scan2d(layout, &fx, &seg, owner, w[0], w[1]));
            }

            // Contours: exact under the bin convention, and within one bin's
            // samples of the raw "f > level" count.
            let rows: Vec<usize> = (0..fx.table.n_points()).filter(|&r| seg.labels[r] == owner).collect();
            let (lo, hi) = (layout.bounds[layout.f_axis()].min, fx.f[owner]);
            let levels: Vec<f64> = (1..8).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect();
            let counts = contour_counts(layout, cube, &levels);
            let fa = layout.f_axis();
            for (level, c) in levels.iter().zip(&counts) {
                let b0 = topocube_core::cubes::first_bin_at_or_above(layout, *level);
                let by_bins = rows.iter().filter(|&&r| layout.bin(fa, fx.f[r]) >= b0).count() as u64;
                assert_eq!(*c, by_bins);
                let raw = rows.iter().filter(|&&r| fx.f[r] > *level).count() as u64;
                let bin_of_level = layout.bin(fa, *level);
                let slack = cube.hist.axis(fa)[bin_of_level.min(layout.resolution - 1)];
                assert!(raw.abs_diff(*c) <= slack, "level {level}: {c} vs {raw}");
            }
        }
        // Merging every segment reproduces the whole-table histograms.
        let shape = layout.shape();
        let leaves: Vec<_> = set.leaves.iter().collect();
        let all = merge_cubes(shape, &leaves).unwrap();
        let whole = build_cubes(
            &fx.table,
            &fx.f,
            "f",
            &segmentation_at(h, &fx.topo.segmentation, 2.0),
            &config,
            0.0,
        );
        let whole = whole.unwrap();
        let whole_sum: Vec<_> = whole.leaves.iter().collect();
        assert_eq!(all.hist, merge_cubes(shape, &whole_sum).unwrap().hist);
    }
}

#[test]
fn selection_matches_filtered_scan() {
    let fx = fixture();
    let layout = CubeLayout::resolve(&fx.table, &fx.f, "f", &CubeConfig::default()).unwrap();
    let t = fx.topo.hierarchy.normalized_persistence(fx.topo.hierarchy.events.len() / 2);
    let seg = segmentation_at(&fx.topo.hierarchy, &fx.topo.segmentation, t);
    let pred = SelectionPredicate::all().with_range(0, 0.0, 0.5);
    let mut query = SelectionQuery::default();
    for &m in &seg.maxima {
        query.levels.insert(m, vec![0.1, 0.3, 0.6]);
    }
    query.scatter = Some((1, 4));
    let res = selection_scan(&fx.table, &fx.f, &seg, t, &layout, &pred, &query).unwrap();
    let x0 = fx.table.domain(0);
    let fa = layout.f_axis();
    let r = layout.resolution;
    let mut grid = vec![0u64; r * r];
    for (&m, sel) in &res.segments {
        let rows: Vec<usize> = (0..fx.table.n_points()).filter(|&i| seg.labels[i] == m).collect();
        let chosen: Vec<usize> = rows.iter().copied().filter(|&i| (0.0..=0.5).contains(&x0[i])).collect();
        assert_eq!(sel.total, rows.len() as u64);
        assert_eq!(sel.selected, chosen.len() as u64);
        for (k, level) in [0.1, 0.3, 0.6].iter().enumerate() {
            let b0 = topocube_core::cubes::first_bin_at_or_above(&layout, *level);
            let above = chosen.iter().filter(|&&i| layout.bin(fa, fx.f[i]) >= b0).count();
            assert_eq!(sel.selected_above[k], above as u64);
        }
        for &i in &chosen {
            grid[layout.bin(1, fx.table.domain(1)[i]) * r + layout.bin(4, fx.f[i])] += 1;
        }
    }
    assert_eq!(res.scatter.unwrap().counts, grid);
}
