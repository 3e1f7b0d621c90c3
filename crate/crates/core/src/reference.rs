//! Brute-force reference computations.
//!
//! Quadratic or cubic in the number of points and deliberately free of the
//! index, the streaming passes and the compressed union-find; used to cross
//! check those on small inputs (tests and the `oracle` command).

use std::collections::HashMap;

use crate::dataset::SampleTable;
use crate::graph::ExplicitGraph;
use crate::neighbors::{empty_region_keep_with, WitnessMode};
use crate::scalar::{cmp, Scalar};
use crate::topology::SaddleRecord;

/// Row-major points of a table.
pub fn points<T: Scalar>(table: &SampleTable<T>) -> Vec<Vec<T>> {
    (0..table.n_points()).map(|i| table.point(i)).collect()
}

fn d2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + (*x - *y) * (*x - *y))
}

/// The k nearest other points of `q` by full scan, ties by id.
pub fn knn<T: Scalar>(points: &[Vec<T>], q: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<(T, usize)> = (0..points.len())
        .filter(|&i| i != q)
        .map(|i| (d2(&points[q], &points[i]), i))
        .collect();
    all.sort_by(|a, b| cmp(a.0, b.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Exact Gabriel graph: `uv` is an edge iff no other point `w` (distinct in
/// position from both endpoints) satisfies `(w−u)·(w−v) ≤ 0`, i.e. lies in
/// the closed ball with diameter `uv`.
pub fn gabriel_edges<T: Scalar>(points: &[Vec<T>]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let (pu, pv) = (&points[u], &points[v]);
            let blocked = points.iter().any(|w| {
                if w == pu || w == pv {
                    return false;
                }
                let dot = w
                    .iter()
                    .zip(pu.iter().zip(pv))
                    .fold(T::zero(), |acc, (x, (a, b))| acc + (*x - *a) * (*x - *b));
                dot <= T::zero()
            });
            if !blocked {
                out.push((u, v));
            }
        }
    }
    out
}

/// Fully materialized empty-region graph with literal witness lists
/// `knn(u) ∪ knn(v)` from brute-force k-NN.
pub fn pruned_graph<T: Scalar>(
    points: &[Vec<T>],
    k: usize,
    beta: T,
    mode: WitnessMode,
    symmetrize: bool,
) -> ExplicitGraph {
    let n = points.len();
    let lists: Vec<Vec<usize>> = (0..n).map(|u| knn(points, u, k)).collect();
    let mut adjacency = vec![Vec::new(); n];
    for u in 0..n {
        let mut candidates = lists[u].clone();
        if symmetrize {
            candidates.extend((0..n).filter(|&v| lists[v].contains(&u)));
        }
        candidates.sort_unstable();
        candidates.dedup();
        for v in candidates {
            let witnesses: Vec<&[T]> = lists[u]
                .iter()
                .chain(&lists[v])
                .map(|&w| points[w].as_slice())
                .collect();
            if empty_region_keep_with(&points[u], &points[v], &witnesses, beta, mode) {
                adjacency[u].push(v);
            }
        }
    }
    ExplicitGraph::from_adjacency(adjacency)
}

/// Root of every link chain, following one link at a time.
pub fn chain_labels(links: &[usize]) -> Vec<usize> {
    (0..links.len())
        .map(|mut u| {
            let mut steps = 0;
            while links[u] != u {
                u = links[u];
                steps += 1;
                assert!(steps <= links.len(), "cycle in links");
            }
            u
        })
        .collect()
}

/// Steepest ascending neighbor by direct evaluation over an explicit graph.
pub fn steepest_links<T: Scalar>(graph: &ExplicitGraph, points: &[Vec<T>], f: &[T]) -> Vec<usize> {
    (0..points.len())
        .map(|u| {
            let mut best = u;
            let mut best_score = T::zero();
            for &v in graph.neighbors(u) {
                if f[v] <= f[u] {
                    continue;
                }
                let score = (f[v] - f[u]) / d2(&points[u], &points[v]).sqrt();
                let wins = best == u
                    || score > best_score
                    || (score == best_score && (f[v] > f[best] || (f[v] == f[best] && v < best)));
                if wins {
                    best = v;
                    best_score = score;
                }
            }
            best
        })
        .collect()
}

/// Saddles from a complete undirected edge list.
pub fn edge_list_saddles<T: Scalar>(edges: &[(usize, usize)], f: &[T], labels: &[usize]) -> Vec<SaddleRecord<T>> {
    let above = |a: usize, b: usize| f[a] > f[b] || (f[a] == f[b] && a < b);
    let mut best: HashMap<(usize, usize), (T, usize)> = HashMap::new();
    for &(u, v) in edges {
        let (lu, lv) = (labels[u], labels[v]);
        if lu == lv {
            continue;
        }
        let low = if above(u, v) { v } else { u };
        let key = (lu.min(lv), lu.max(lv));
        let cand = (f[low], low);
        best.entry(key)
            .and_modify(|cur| {
                if cand.0 > cur.0 || (cand.0 == cur.0 && cand.1 < cur.1) {
                    *cur = cand;
                }
            })
            .or_insert(cand);
    }
    let mut out: Vec<_> = best
        .into_iter()
        .map(|((a, b), (value, vertex))| SaddleRecord { a, b, vertex, value })
        .collect();
    out.sort_unstable_by_key(|r| (r.a, r.b));
    out
}
