use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kdtree::{KnnScratch, Neighbor, ReverseRadii, SpatialIndex};
use super::lune::{LuneTest, WitnessMode};
use crate::dataset::SampleTable;
use crate::error::{Error, Result};
use crate::graph::NeighborGraph;
use crate::scalar::Scalar;

/// Parameters of the pruned neighborhood graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeStreamConfig<T> {
    /// Candidate count per vertex.
    pub k: usize,
    /// Lune shape; 1 is the Gabriel graph, 2 the relative neighborhood graph.
    pub beta: T,
    pub witness_mode: WitnessMode,
    /// Also consider every `v` that lists `u` among its k nearest.
    pub symmetrize: bool,
}

impl<T: Scalar> EdgeStreamConfig<T> {
    pub fn new(k: usize) -> Self {
        EdgeStreamConfig {
            k,
            beta: T::one(),
            witness_mode: WitnessMode::Strict,
            symmetrize: true,
        }
    }

    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_witness_mode(mut self, mode: WitnessMode) -> Self {
        self.witness_mode = mode;
        self
    }

    pub fn with_symmetrize(mut self, symmetrize: bool) -> Self {
        self.symmetrize = symmetrize;
        self
    }

    pub fn validate(&self, n_points: usize) -> Result<()> {
        if !(self.beta >= T::one()) {
            return Err(Error::InvalidArgument(format!("beta must be >= 1, got {}", self.beta)));
        }
        if n_points > 1 && (self.k == 0 || self.k >= n_points) {
            return Err(Error::KOutOfRange {
                k: self.k,
                n: n_points,
            });
        }
        Ok(())
    }
}

/// Surviving neighbors of one vertex, ascending by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedNeighborhood {
    pub vertex: usize,
    pub neighbors: Vec<usize>,
}

/// The empty-region graph, computed one vertex at a time.
///
/// Candidates for `u` are its k nearest neighbors, plus (when symmetrizing)
/// every vertex that lists `u` among its own k nearest. Each candidate edge
/// `(u, v)` survives iff no witness from `knn(u) ∪ knn(v)` lies in its lune.
/// Nothing is retained between calls except the per-vertex k-th neighbor
/// keys used to answer the reverse lookup.
pub struct StreamingGraph<'a, T> {
    index: &'a SpatialIndex<T>,
    config: EdgeStreamConfig<T>,
    reverse: Option<ReverseRadii<T>>,
}

#[derive(Debug)]
pub struct StreamScratch<T> {
    knn: KnnScratch<T>,
    near_u: Vec<Neighbor<T>>,
    near_v: Vec<Neighbor<T>>,
    reverse: Vec<usize>,
    stack: Vec<usize>,
    lune: LuneTest<T>,
}

impl<T: Scalar> Default for StreamScratch<T> {
    fn default() -> Self {
        StreamScratch {
            knn: KnnScratch::default(),
            near_u: Vec::new(),
            near_v: Vec::new(),
            reverse: Vec::new(),
            stack: Vec::new(),
            lune: LuneTest::new(),
        }
    }
}

impl<'a, T: Scalar> StreamingGraph<'a, T> {
    pub fn new(index: &'a SpatialIndex<T>, config: EdgeStreamConfig<T>) -> Result<Self> {
        config.validate(index.len())?;
        let reverse = if config.symmetrize && index.len() > 1 {
            Some(index.reverse_radii(config.k)?)
        } else {
            None
        };
        Ok(StreamingGraph {
            index,
            config,
            reverse,
        })
    }

    pub fn config(&self) -> &EdgeStreamConfig<T> {
        &self.config
    }

    pub fn index(&self) -> &SpatialIndex<T> {
        self.index
    }

    pub fn neighborhood(&self, vertex: usize) -> PrunedNeighborhood {
        let mut out = Vec::new();
        self.neighbors_into(vertex, &mut self.new_scratch(), &mut out);
        PrunedNeighborhood {
            vertex,
            neighbors: out,
        }
    }

    /// Candidate set of `u` before pruning, ascending by id.
    pub fn candidates_into(&self, u: usize, scratch: &mut StreamScratch<T>, out: &mut Vec<usize>) {
        self.index.knn_into(u, self.config.k, &mut scratch.knn, &mut scratch.near_u);
        out.clear();
        out.extend(scratch.near_u.iter().map(|n| n.id));
        if let Some(radii) = &self.reverse {
            self.index
                .reverse_knn_into(u, radii, &mut scratch.stack, &mut scratch.reverse);
            out.extend_from_slice(&scratch.reverse);
        }
        out.sort_unstable();
        out.dedup();
    }

    fn keep(&self, u: usize, v: usize, scratch: &mut StreamScratch<T>) -> bool {
        let beta = self.config.beta;
        let index = self.index;
        scratch
            .lune
            .set(index.point(u), index.point(v), beta, self.config.witness_mode);
        if beta < T::of(2.0) {
            // For β < 2 every lune point other than v is strictly closer to u
            // than v is (and symmetrically for v), so when v ∈ knn(u) or
            // u ∈ knn(v) the witnesses in knn(u) ∪ knn(v) are exactly the
            // table points in the lune. A range query finds them directly.
            !index.lune_has_witness(&scratch.lune, beta, &mut scratch.stack)
        } else {
            index.knn_into(v, self.config.k, &mut scratch.knn, &mut scratch.near_v);
            let lune = &scratch.lune;
            !scratch
                .near_u
                .iter()
                .chain(scratch.near_v.iter())
                .any(|w| lune.contains(index.point(w.id)))
        }
    }

    /// Total undirected edge count (each edge once).
    pub fn edge_count(&self) -> usize {
        let directed: usize = (0..self.vertex_count())
            .into_par_iter()
            .map_init(
                || (self.new_scratch(), Vec::new()),
                |(scratch, out), u| {
                    self.neighbors_into(u, scratch, out);
                    out.len()
                },
            )
            .sum();
        if self.config.symmetrize {
            directed / 2
        } else {
            // Without symmetrization the relation may be one-sided.
            let mut edges = std::collections::HashSet::new();
            let mut scratch = self.new_scratch();
            let mut out = Vec::new();
            for u in 0..self.vertex_count() {
                self.neighbors_into(u, &mut scratch, &mut out);
                edges.extend(out.iter().map(|&v| (u.min(v), u.max(v))));
            }
            edges.len()
        }
    }

    /// Writes surviving edges as little-endian `(u32, u32)` pairs. With
    /// symmetrization each undirected edge is written once as `(lo, hi)`;
    /// otherwise every directed pair `(u, v)` is written.
    pub fn dump_edges<W: Write>(&self, out: &mut W) -> Result<u64> {
        let mut scratch = self.new_scratch();
        let mut list = Vec::new();
        let mut written = 0u64;
        for u in 0..self.vertex_count() {
            self.neighbors_into(u, &mut scratch, &mut list);
            for &v in &list {
                if self.config.symmetrize && v < u {
                    continue;
                }
                out.write_all(&(u as u32).to_le_bytes())?;
                out.write_all(&(v as u32).to_le_bytes())?;
                written += 1;
            }
        }
        Ok(written)
    }
}

impl<T: Scalar> NeighborGraph for StreamingGraph<'_, T> {
    type Scratch = (StreamScratch<T>, Vec<usize>);

    fn vertex_count(&self) -> usize {
        self.index.len()
    }

    fn new_scratch(&self) -> Self::Scratch {
        (StreamScratch::default(), Vec::new())
    }

    fn neighbors_into(&self, vertex: usize, scratch: &mut Self::Scratch, out: &mut Vec<usize>) {
        let (stream, candidates) = scratch;
        out.clear();
        if self.index.len() < 2 {
            return;
        }
        self.candidates_into(vertex, stream, candidates);
        for &v in candidates.iter() {
            if self.keep(vertex, v, stream) {
                out.push(v);
            }
        }
    }
}

/// One-shot neighborhood of `vertex`.
///
/// Builds the reverse-lookup keys on every call; use [`StreamingGraph`] to
/// stream many vertices.
pub fn stream_neighborhood<T: Scalar>(
    index: &SpatialIndex<T>,
    _table: &SampleTable<T>,
    config: &EdgeStreamConfig<T>,
    vertex: usize,
) -> Result<PrunedNeighborhood> {
    Ok(StreamingGraph::new(index, *config)?.neighborhood(vertex))
}
