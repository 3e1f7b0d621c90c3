use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{AggregateCube, CubeConfig, CubeLayout, CubeSet, CubeShape, Histograms, LeafCube};
use crate::dataset::SampleTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topology::{MergeHierarchy, Segmentation};

/// One leaf cube per segment of `base`. Leaves are binned independently
/// (in parallel) from a per-segment row index.
pub fn build_cubes<T: Scalar>(
    table: &SampleTable<T>,
    f: &[T],
    f_label: &str,
    base: &Segmentation,
    config: &CubeConfig,
    t_base: T,
) -> Result<CubeSet<T>> {
    let layout = Arc::new(CubeLayout::resolve(table, f, f_label, config)?);
    let members = base.members();
    let leaves = members
        .into_par_iter()
        .map(|(id, rows)| LeafCube {
            id,
            hist: bin_rows(&layout, table, f, &rows),
        })
        .collect();
    Ok(CubeSet { layout, t_base, leaves })
}

fn bin_rows<T: Scalar>(layout: &CubeLayout<T>, table: &SampleTable<T>, f: &[T], rows: &[usize]) -> Histograms {
    let shape = layout.shape();
    let r = shape.resolution;
    let f_axis = layout.f_axis();
    let mut h = Histograms::zeros(shape);
    let mut bins = vec![0usize; layout.n_axes()];
    for &row in rows {
        for (a, b) in bins.iter_mut().enumerate() {
            *b = layout.bin(a, layout.value(table, f, a, row));
            h.h1[a * r + *b] += 1;
        }
        for (p, &(i, j)) in layout.pairs.iter().enumerate() {
            h.h2[(p * r + bins[i]) * r + bins[j]] += 1;
        }
        for (t, &(i, j)) in layout.triples.iter().enumerate() {
            h.h3[((t * r + bins[i]) * r + bins[j]) * r + bins[f_axis]] += 1;
        }
    }
    h.count = rows.len() as u64;
    h.refresh_suffix();
    h
}

/// Element-wise sum of leaf cubes of the given shape.
pub fn merge_cubes(shape: CubeShape, leaves: &[&LeafCube]) -> Result<AggregateCube> {
    let mut hist = Histograms::zeros(shape);
    let mut ids = Vec::with_capacity(leaves.len());
    for leaf in leaves {
        if leaf.hist.shape != shape {
            return Err(Error::CubeConfigMismatch);
        }
        hist.add(&leaf.hist);
        ids.push(leaf.id);
    }
    ids.sort_unstable();
    Ok(AggregateCube { leaves: ids, hist })
}

/// Smallest event threshold that leaves at most `max_leaves` segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafThreshold<T> {
    pub t: T,
    pub leaves: usize,
}

pub fn leaf_threshold<T: Scalar>(hierarchy: &MergeHierarchy<T>, max_leaves: usize) -> LeafThreshold<T> {
    let base = hierarchy.base_maxima.len();
    let max_leaves = max_leaves.max(1);
    let t = if base <= max_leaves || hierarchy.events.is_empty() {
        T::zero()
    } else {
        let needed = (base - max_leaves).min(hierarchy.events.len());
        hierarchy.normalized_persistence(needed - 1)
    };
    LeafThreshold {
        t,
        leaves: base - hierarchy.applied_events(t),
    }
}

/// Groups leaf ids under their surviving maximum at `t`.
pub fn segment_leaves<T: Scalar>(
    set: &CubeSet<T>,
    hierarchy: &MergeHierarchy<T>,
    t: T,
) -> Result<BTreeMap<usize, Vec<usize>>> {
    if t < set.t_base {
        return Err(Error::BelowLeafThreshold {
            t: t.as_f64(),
            t_base: set.t_base.as_f64(),
        });
    }
    let resolver = hierarchy.resolver(t);
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for leaf in &set.leaves {
        out.entry(resolver.root(leaf.id)).or_default().push(leaf.id);
    }
    Ok(out)
}

/// Aggregated cube of each segment alive at `t`, optionally restricted to
/// the listed segment ids.
pub fn aggregate_at<T: Scalar>(
    set: &CubeSet<T>,
    hierarchy: &MergeHierarchy<T>,
    t: T,
    segments: Option<&[usize]>,
) -> Result<BTreeMap<usize, AggregateCube>> {
    let groups = segment_leaves(set, hierarchy, t)?;
    let wanted: Vec<usize> = match segments {
        Some(ids) => {
            for id in ids {
                if !groups.contains_key(id) {
                    return Err(Error::UnknownSegment(*id));
                }
            }
            ids.to_vec()
        }
        None => groups.keys().copied().collect(),
    };
    let shape = set.layout.shape();
    wanted
        .into_iter()
        .map(|id| {
            let leaves: Vec<&LeafCube> = groups[&id].iter().map(|l| set.leaf(*l).unwrap()).collect();
            Ok((id, merge_cubes(shape, &leaves)?))
        })
        .collect()
}
