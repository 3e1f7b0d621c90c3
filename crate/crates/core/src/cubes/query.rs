use serde::Serialize;

use super::{AggregateCube, CubeLayout};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An `r × r` count grid, row-major; rows index the first axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub resolution: usize,
    pub counts: Vec<u64>,
}

impl Grid {
    pub fn zeros(resolution: usize) -> Self {
        Grid {
            resolution,
            counts: vec![0; resolution * resolution],
        }
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.resolution + b]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.resolution).map(|c| c.to_vec()).collect()
    }

    pub fn transposed(&self) -> Grid {
        let r = self.resolution;
        let mut counts = vec![0; r * r];
        for a in 0..r {
            for b in 0..r {
                counts[b * r + a] = self.counts[a * r + b];
            }
        }
        Grid { resolution: r, counts }
    }
}

pub fn hist1d<T: Scalar>(layout: &CubeLayout<T>, cube: &AggregateCube, axis: usize) -> Result<Vec<u64>> {
    if axis >= layout.n_axes() {
        return Err(Error::UnknownAxis(axis.to_string()));
    }
    Ok(cube.hist.axis(axis).to_vec())
}

/// Raw joint counts of axes `(i, j)`; `grid[a][b]` counts samples in bin
/// `a` of `i` and bin `b` of `j`.
pub fn hist2d<T: Scalar>(layout: &CubeLayout<T>, cube: &AggregateCube, i: usize, j: usize) -> Result<Grid> {
    let p = layout.pair_index(i, j).filter(|_| i != j).ok_or(Error::MissingPair(i, j))?;
    let grid = Grid {
        resolution: layout.resolution,
        counts: cube.hist.pair(p).to_vec(),
    };
    Ok(if i < j { grid } else { grid.transposed() })
}

/// One joint grid per adjacent pair of `axis_order`.
pub fn pcp_pairs<T: Scalar>(layout: &CubeLayout<T>, cube: &AggregateCube, axis_order: &[usize]) -> Result<Vec<Grid>> {
    axis_order
        .windows(2)
        .map(|w| hist2d(layout, cube, w[0], w[1]))
        .collect()
}

/// First function bin whose lower edge is `≥ level` (`r` if none).
pub fn first_bin_at_or_above<T: Scalar>(layout: &CubeLayout<T>, level: T) -> usize {
    let f = layout.f_axis();
    let r = layout.resolution;
    let (mut lo, mut hi) = (0, r);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if layout.lower_edge(f, mid) >= level {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Samples counted above each level: those in function bins whose lower
/// edge is at or above the level.
pub fn contour_counts<T: Scalar>(layout: &CubeLayout<T>, cube: &AggregateCube, levels: &[T]) -> Vec<u64> {
    levels
        .iter()
        .map(|&level| cube.hist.f_suffix[first_bin_at_or_above(layout, level)])
        .collect()
}
