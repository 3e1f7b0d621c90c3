use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::SampleTable;
use crate::graph::NeighborGraph;
use crate::scalar::{cmp, Scalar};

/// How the ascent along an edge is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    /// `(f(v) − f(u)) / ‖v − u‖`.
    #[default]
    Slope,
    /// `f(v) − f(u)`.
    RawDifference,
}

/// Per-vertex steepest ascending neighbor; maxima link to themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteepestLinks {
    pub links: Vec<usize>,
}

impl SteepestLinks {
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn maxima(&self) -> Vec<usize> {
        (0..self.links.len()).filter(|&u| self.links[u] == u).collect()
    }
}

/// First streaming pass: the steepest strictly ascending neighbor of every
/// vertex. Ties go to the higher neighbor, then to the lower id. Each
/// neighborhood is generated, reduced to one link and dropped.
pub fn pass1_links<T: Scalar, G: NeighborGraph>(
    graph: &G,
    table: &SampleTable<T>,
    f: &[T],
    mode: GradientMode,
) -> SteepestLinks {
    let links = (0..graph.vertex_count())
        .into_par_iter()
        .map_init(
            || (graph.new_scratch(), Vec::new()),
            |(scratch, neighbors), u| {
                graph.neighbors_into(u, scratch, neighbors);
                steepest(u, neighbors, table, f, mode)
            },
        )
        .collect();
    SteepestLinks { links }
}

pub(crate) fn steepest<T: Scalar>(
    u: usize,
    neighbors: &[usize],
    table: &SampleTable<T>,
    f: &[T],
    mode: GradientMode,
) -> usize {
    let fu = f[u];
    let mut best: Option<(T, usize)> = None;
    for &v in neighbors {
        if !(f[v] > fu) {
            continue;
        }
        let score = match mode {
            GradientMode::Slope => (f[v] - fu) / table.dist2(u, v).sqrt(),
            GradientMode::RawDifference => f[v] - fu,
        };
        let better = match best {
            None => true,
            Some((s, b)) => cmp(score, s)
                .then(cmp(f[v], f[b]))
                .then(b.cmp(&v))
                .is_gt(),
        };
        if better {
            best = Some((score, v));
        }
    }
    best.map_or(u, |(_, v)| v)
}
