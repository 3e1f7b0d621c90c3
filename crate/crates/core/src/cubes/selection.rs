use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use parking_lot::Mutex;
use rayon::prelude::*;
use serde::Serialize;

use super::query::{first_bin_at_or_above, Grid};
use super::CubeLayout;
use crate::dataset::SampleTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topology::Segmentation;

/// Conjunction of closed per-axis ranges over cube axes (the function axis
/// included). Axes without a range are unconstrained.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectionPredicate<T> {
    pub ranges: BTreeMap<usize, (T, T)>,
}

impl<T: Scalar> SelectionPredicate<T> {
    pub fn all() -> Self {
        SelectionPredicate { ranges: BTreeMap::new() }
    }

    pub fn with_range(mut self, axis: usize, lo: T, hi: T) -> Self {
        self.ranges.insert(axis, (lo, hi));
        self
    }

    #[inline]
    fn accepts(&self, layout: &CubeLayout<T>, table: &SampleTable<T>, f: &[T], row: usize) -> bool {
        self.ranges.iter().all(|(&axis, &(lo, hi))| {
            let x = layout.value(table, f, axis, row);
            x >= lo && x <= hi
        })
    }
}

/// What to count besides per-segment totals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectionQuery<T> {
    /// Contour levels per segment id, ascending.
    pub levels: BTreeMap<usize, Vec<T>>,
    /// Axis pair whose selected joint counts are also returned.
    pub scatter: Option<(usize, usize)>,
    /// Segments contributing to the scatter grid; `None` means all.
    pub scatter_segments: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SegmentSelection {
    pub total: u64,
    pub selected: u64,
    /// Selected samples above each level of the segment, in level order.
    pub selected_above: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    /// Threshold the segmentation was taken at.
    pub t: f64,
    pub segments: BTreeMap<usize, SegmentSelection>,
    pub scatter: Option<Grid>,
}

/// One pass over the raw samples evaluating the predicate.
///
/// "Above a level" uses the same bin convention as the contour counts, so
/// a predicate that accepts everything reproduces them exactly.
pub fn selection_scan<T: Scalar>(
    table: &SampleTable<T>,
    f: &[T],
    seg_at_t: &Segmentation,
    t: T,
    layout: &CubeLayout<T>,
    predicate: &SelectionPredicate<T>,
    query: &SelectionQuery<T>,
) -> Result<SelectionResult> {
    for &axis in predicate.ranges.keys() {
        if axis >= layout.n_axes() {
            return Err(Error::UnknownAxis(axis.to_string()));
        }
    }
    let scatter = match query.scatter {
        Some((i, j)) if i < layout.n_axes() && j < layout.n_axes() && i != j => Some((i, j)),
        Some((i, j)) => return Err(Error::MissingPair(i, j)),
        None => None,
    };
    let f_axis = layout.f_axis();
    let r = layout.resolution;
    let level_bins: HashMap<usize, Vec<usize>> = query
        .levels
        .iter()
        .map(|(&s, levels)| (s, levels.iter().map(|&l| first_bin_at_or_above(layout, l)).collect()))
        .collect();
    let in_scatter = |s: usize| match &query.scatter_segments {
        None => true,
        Some(ids) => ids.contains(&s),
    };

    type Partial = (HashMap<usize, SegmentSelection>, Option<Grid>);
    let empty = || -> Partial { (HashMap::new(), scatter.map(|_| Grid::zeros(r))) };
    let (per_segment, grid) = (0..table.n_points())
        .into_par_iter()
        .fold(empty, |(mut acc, mut grid), row| {
            let s = seg_at_t.labels[row];
            let entry = acc.entry(s).or_insert_with(|| SegmentSelection {
                selected_above: vec![0; level_bins.get(&s).map_or(0, Vec::len)],
                ..Default::default()
            });
            entry.total += 1;
            if predicate.accepts(layout, table, f, row) {
                entry.selected += 1;
                if let Some(bins) = level_bins.get(&s) {
                    let b = layout.bin(f_axis, f[row]);
                    for (slot, &b0) in entry.selected_above.iter_mut().zip(bins) {
                        if b >= b0 {
                            *slot += 1;
                        }
                    }
                }
                if let (Some(g), Some((i, j))) = (grid.as_mut(), scatter) {
                    if in_scatter(s) {
                        let bi = layout.bin(i, layout.value(table, f, i, row));
                        let bj = layout.bin(j, layout.value(table, f, j, row));
                        g.counts[bi * r + bj] += 1;
                    }
                }
            }
            (acc, grid)
        })
        .reduce(empty, |(mut a, ga), (b, gb)| {
            for (s, sel) in b {
                let e = a.entry(s).or_insert_with(|| SegmentSelection {
                    selected_above: vec![0; sel.selected_above.len()],
                    ..Default::default()
                });
                e.total += sel.total;
                e.selected += sel.selected;
                for (x, y) in e.selected_above.iter_mut().zip(&sel.selected_above) {
                    *x += y;
                }
            }
            let grid = match (ga, gb) {
                (Some(mut x), Some(y)) => {
                    for (p, q) in x.counts.iter_mut().zip(&y.counts) {
                        *p += q;
                    }
                    Some(x)
                }
                (x, y) => x.or(y),
            };
            (a, grid)
        });

    let mut segments: BTreeMap<usize, SegmentSelection> = seg_at_t
        .maxima
        .iter()
        .map(|&m| {
            (
                m,
                SegmentSelection {
                    selected_above: vec![0; level_bins.get(&m).map_or(0, Vec::len)],
                    ..Default::default()
                },
            )
        })
        .collect();
    segments.extend(per_segment);
    Ok(SelectionResult {
        t: t.as_f64(),
        segments,
        scatter: grid,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    t: u64,
    ranges: Vec<(usize, u64, u64)>,
    levels: Vec<(usize, Vec<u64>)>,
    scatter: Option<(usize, usize)>,
    scatter_segments: Option<Vec<usize>>,
}

/// Keyed store of selection results. Results are deterministic, so two
/// writers racing on one key store identical values.
#[derive(Debug, Default)]
pub struct SelectionCache {
    entries: Mutex<HashMap<CacheKey, Arc<SelectionResult>>>,
}

impl SelectionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Returns the cached result for the key or computes and stores it.
    /// The boolean is true on a cache hit.
    pub fn get_or_scan<T: Scalar>(
        &self,
        t: T,
        predicate: &SelectionPredicate<T>,
        query: &SelectionQuery<T>,
        scan: impl FnOnce() -> Result<SelectionResult>,
    ) -> Result<(Arc<SelectionResult>, bool)> {
        let key = CacheKey {
            t: t.as_f64().to_bits(),
            ranges: predicate
                .ranges
                .iter()
                .map(|(&a, &(lo, hi))| (a, lo.as_f64().to_bits(), hi.as_f64().to_bits()))
                .collect(),
            levels: query
                .levels
                .iter()
                .map(|(&s, l)| (s, l.iter().map(|x| x.as_f64().to_bits()).collect()))
                .collect(),
            scatter: query.scatter,
            scatter_segments: query.scatter_segments.clone(),
        };
        if let Some(hit) = self.entries.lock().get(&key) {
            return Ok((hit.clone(), true));
        }
        let result = Arc::new(scan()?);
        self.entries.lock().insert(key, result.clone());
        Ok((result, false))
    }
}
