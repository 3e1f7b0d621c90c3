use std::collections::HashMap;

use rayon::prelude::*;

use super::labels::Segmentation;
use super::Order;
use crate::graph::NeighborGraph;
use crate::scalar::{cmp, Scalar};

/// The highest crossing between two adjacent segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleRecord<T> {
    /// Maximum ids, `a < b`.
    pub a: usize,
    pub b: usize,
    /// Lower endpoint of the best crossing edge.
    pub vertex: usize,
    pub value: T,
}

impl<T: Scalar> SaddleRecord<T> {
    /// Higher crossing value wins; ties go to the lower vertex id.
    pub fn beats(&self, other: &Self) -> bool {
        cmp(self.value, other.value)
            .then(other.vertex.cmp(&self.vertex))
            .is_gt()
    }
}

pub(crate) fn insert_best<T: Scalar>(
    map: &mut HashMap<(usize, usize), SaddleRecord<T>>,
    record: SaddleRecord<T>,
) {
    map.entry((record.a, record.b))
        .and_modify(|cur| {
            if record.beats(cur) {
                *cur = record;
            }
        })
        .or_insert(record);
}

/// Second streaming pass: for every edge whose endpoints carry different
/// labels, the lower endpoint is a saddle candidate for that pair of maxima.
/// Keeps the highest candidate per pair. The per-pair reduction is a
/// commutative max, so scheduling does not affect the result.
pub fn pass2_saddles<T: Scalar, G: NeighborGraph>(graph: &G, f: &[T], seg: &Segmentation) -> Vec<SaddleRecord<T>> {
    let order = Order::new(f);
    let merged = (0..graph.vertex_count())
        .into_par_iter()
        .fold(
            || (graph.new_scratch(), Vec::new(), HashMap::new()),
            |(mut scratch, mut neighbors, mut map), u| {
                graph.neighbors_into(u, &mut scratch, &mut neighbors);
                let lu = seg.labels[u];
                for &v in &neighbors {
                    let lv = seg.labels[v];
                    if lu == lv {
                        continue;
                    }
                    let low = if order.above(u, v) { v } else { u };
                    insert_best(
                        &mut map,
                        SaddleRecord {
                            a: lu.min(lv),
                            b: lu.max(lv),
                            vertex: low,
                            value: f[low],
                        },
                    );
                }
                (scratch, neighbors, map)
            },
        )
        .map(|(_, _, map)| map)
        .reduce(HashMap::new, |mut a, b| {
            for r in b.into_values() {
                insert_best(&mut a, r);
            }
            a
        });
    let mut out: Vec<_> = merged.into_values().collect();
    out.sort_unstable_by_key(|r| (r.a, r.b));
    out
}
