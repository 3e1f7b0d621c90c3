//! Topology-aware datacubes: per-leaf-segment histograms on global grids,
//! merged by addition whenever segments merge.

mod artifact;
mod build;
mod query;
mod selection;

pub use artifact::{load_cubes, read_cubes, read_leaf_at, save_cubes, write_cubes};
pub use build::{aggregate_at, build_cubes, leaf_threshold, merge_cubes, segment_leaves, LeafThreshold};
pub use query::{contour_counts, first_bin_at_or_above, hist1d, hist2d, pcp_pairs, Grid};
pub use selection::{selection_scan, SegmentSelection, SelectionCache, SelectionPredicate, SelectionQuery, SelectionResult};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::{Range, SampleTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_RESOLUTION: usize = 64;
pub const DEFAULT_MAX_LEAVES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSelection {
    /// Every unordered pair of axes, so any axis order can be served.
    All,
    /// Consecutive axes in declaration order plus the listed pairs.
    AdjacentPlus(Vec<(String, String)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeConfig {
    /// Bins per axis.
    pub resolution: usize,
    /// Domain axes to bin; empty means all. The function axis is appended.
    pub axes: Vec<String>,
    pub pairs: PairSelection,
    /// Adds an (i, j, f) cube for every stored pair of domain axes.
    pub include_f_triples: bool,
}

impl Default for CubeConfig {
    fn default() -> Self {
        CubeConfig {
            resolution: DEFAULT_RESOLUTION,
            axes: Vec::new(),
            pairs: PairSelection::All,
            include_f_triples: false,
        }
    }
}

impl CubeConfig {
    pub fn with_resolution(mut self, r: usize) -> Self {
        self.resolution = r;
        self
    }
}

/// Where an axis takes its values from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisSource {
    Domain(usize),
    Function,
}

/// Resolved bin grid shared by every cube of a set.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeLayout<T> {
    pub resolution: usize,
    pub names: Vec<String>,
    pub sources: Vec<AxisSource>,
    pub bounds: Vec<Range<T>>,
    /// Stored axis pairs, `i < j`.
    pub pairs: Vec<(usize, usize)>,
    /// Stored (i, j, f) cubes as domain axis pairs.
    pub triples: Vec<(usize, usize)>,
}

impl<T: Scalar> CubeLayout<T> {
    /// Resolves a config against a table and the active function values.
    pub fn resolve(table: &SampleTable<T>, f: &[T], f_label: &str, config: &CubeConfig) -> Result<Self> {
        if config.resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "cube resolution must be >= 2, got {}",
                config.resolution
            )));
        }
        let mut names = Vec::new();
        let mut sources = Vec::new();
        let mut bounds = Vec::new();
        let domain: Vec<usize> = if config.axes.is_empty() {
            (0..table.dims()).collect()
        } else {
            config
                .axes
                .iter()
                .map(|a| table.domain_index(a).ok_or_else(|| Error::UnknownAxis(a.clone())))
                .collect::<Result<_>>()?
        };
        for c in domain {
            let col = &table.domain_columns()[c];
            names.push(col.name.clone());
            sources.push(AxisSource::Domain(c));
            bounds.push(Range::of(&col.values));
        }
        names.push(f_label.to_string());
        sources.push(AxisSource::Function);
        bounds.push(Range::of(f));
        let n_axes = names.len();

        let mut pairs: Vec<(usize, usize)> = match &config.pairs {
            PairSelection::All => (0..n_axes).flat_map(|i| (i + 1..n_axes).map(move |j| (i, j))).collect(),
            PairSelection::AdjacentPlus(extra) => {
                let mut p: Vec<_> = (1..n_axes).map(|j| (j - 1, j)).collect();
                for (a, b) in extra {
                    let find = |n: &String| {
                        names
                            .iter()
                            .position(|x| x == n)
                            .ok_or_else(|| Error::UnknownAxis(n.clone()))
                    };
                    let (i, j) = (find(a)?, find(b)?);
                    if i == j {
                        return Err(Error::InvalidArgument(format!("pair axes must differ: {a}")));
                    }
                    p.push((i.min(j), i.max(j)));
                }
                p
            }
        };
        pairs.sort_unstable();
        pairs.dedup();
        let f_axis = n_axes - 1;
        let triples = if config.include_f_triples {
            pairs.iter().copied().filter(|&(_, j)| j != f_axis).collect()
        } else {
            Vec::new()
        };
        Ok(CubeLayout {
            resolution: config.resolution,
            names,
            sources,
            bounds,
            pairs,
            triples,
        })
    }

    pub fn n_axes(&self) -> usize {
        self.names.len()
    }

    pub fn f_axis(&self) -> usize {
        self.names.len() - 1
    }

    pub fn axis_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn pair_index(&self, i: usize, j: usize) -> Option<usize> {
        self.pairs.binary_search(&(i.min(j), i.max(j))).ok()
    }

    /// `floor((x − min)/(max − min) · r)` clamped into `[0, r−1]`; every
    /// value of a zero-width axis lands in bin 0.
    #[inline]
    pub fn bin(&self, axis: usize, x: T) -> usize {
        let Range { min, max } = self.bounds[axis];
        let width = max - min;
        if !(width > T::zero()) {
            return 0;
        }
        let b = ((x - min) / width * T::of_usize(self.resolution)).floor();
        if !(b > T::zero()) {
            0
        } else {
            b.to_usize().unwrap_or(usize::MAX).min(self.resolution - 1)
        }
    }

    /// Lower edge of bin `b`.
    pub fn lower_edge(&self, axis: usize, b: usize) -> T {
        let Range { min, max } = self.bounds[axis];
        min + (max - min) * T::of_usize(b) / T::of_usize(self.resolution)
    }

    pub fn shape(&self) -> CubeShape {
        CubeShape {
            resolution: self.resolution,
            axes: self.n_axes(),
            pairs: self.pairs.len(),
            triples: self.triples.len(),
        }
    }

    /// Value of `axis` at `row`.
    #[inline]
    pub fn value(&self, table: &SampleTable<T>, f: &[T], axis: usize, row: usize) -> T {
        match self.sources[axis] {
            AxisSource::Domain(c) => table.domain(c)[row],
            AxisSource::Function => f[row],
        }
    }
}

/// Array dimensions of a cube; two cubes merge iff their shapes agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeShape {
    pub resolution: usize,
    pub axes: usize,
    pub pairs: usize,
    pub triples: usize,
}

impl CubeShape {
    fn len1(&self) -> usize {
        self.axes * self.resolution
    }
    fn len2(&self) -> usize {
        self.pairs * self.resolution * self.resolution
    }
    fn len3(&self) -> usize {
        self.triples * self.resolution.pow(3)
    }
}

/// Histogram bundle of one cube. Counts are exact integers so merging is
/// plain addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histograms {
    pub shape: CubeShape,
    pub count: u64,
    /// `axes × r`.
    pub h1: Vec<u64>,
    /// `pairs × r × r`, row = bin of the lower-indexed axis.
    pub h2: Vec<u64>,
    /// `triples × r × r × r`, ordered (i, j, f).
    pub h3: Vec<u64>,
    /// Suffix sums of the function histogram, `r + 1` entries.
    pub f_suffix: Vec<u64>,
}

impl Histograms {
    pub fn zeros(shape: CubeShape) -> Self {
        Histograms {
            shape,
            count: 0,
            h1: vec![0; shape.len1()],
            h2: vec![0; shape.len2()],
            h3: vec![0; shape.len3()],
            f_suffix: vec![0; shape.resolution + 1],
        }
    }

    pub fn axis(&self, axis: usize) -> &[u64] {
        let r = self.shape.resolution;
        &self.h1[axis * r..(axis + 1) * r]
    }

    pub fn pair(&self, pair: usize) -> &[u64] {
        let r2 = self.shape.resolution.pow(2);
        &self.h2[pair * r2..(pair + 1) * r2]
    }

    pub fn triple(&self, triple: usize) -> &[u64] {
        let r3 = self.shape.resolution.pow(3);
        &self.h3[triple * r3..(triple + 1) * r3]
    }

    pub(crate) fn refresh_suffix(&mut self) {
        let r = self.shape.resolution;
        let f = self.shape.axes - 1;
        let mut acc = 0;
        self.f_suffix[r] = 0;
        for b in (0..r).rev() {
            acc += self.h1[f * r + b];
            self.f_suffix[b] = acc;
        }
    }

    pub(crate) fn add(&mut self, other: &Histograms) {
        self.count += other.count;
        for (a, b) in self.h1.iter_mut().zip(&other.h1) {
            *a += b;
        }
        for (a, b) in self.h2.iter_mut().zip(&other.h2) {
            *a += b;
        }
        for (a, b) in self.h3.iter_mut().zip(&other.h3) {
            *a += b;
        }
        for (a, b) in self.f_suffix.iter_mut().zip(&other.f_suffix) {
            *a += b;
        }
    }
}

/// Histograms of one leaf segment, named by its maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafCube {
    pub id: usize,
    pub hist: Histograms,
}

/// Sum of several leaf cubes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateCube {
    /// Contributing leaf ids, ascending.
    pub leaves: Vec<usize>,
    pub hist: Histograms,
}

/// Every leaf cube of a dataset plus the shared layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeSet<T> {
    pub layout: Arc<CubeLayout<T>>,
    /// Normalized threshold that produced the leaves.
    pub t_base: T,
    /// Ascending by id.
    pub leaves: Vec<LeafCube>,
}

impl<T: Scalar> CubeSet<T> {
    pub fn leaf(&self, id: usize) -> Option<&LeafCube> {
        self.leaves
            .binary_search_by_key(&id, |l| l.id)
            .ok()
            .map(|i| &self.leaves[i])
    }

    pub fn total_count(&self) -> u64 {
        self.leaves.iter().map(|l| l.hist.count).sum()
    }
}
