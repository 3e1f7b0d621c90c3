use rayon::prelude::*;

use super::kdtree::{KnnScratch, SpatialIndex};
use crate::dataset::{Column, SampleTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_DENSITY_K: usize = 20;

/// Per-point k-NN density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Density<T> {
    pub k: usize,
    pub values: Vec<T>,
    /// Points whose k nearest neighbors all coincide with them; their
    /// density is set to the largest finite density in the table.
    pub degenerate: Vec<usize>,
}

impl<T: Scalar> Density<T> {
    /// Appends the density as a measure column named `name`.
    pub fn append_to(&self, table: SampleTable<T>, name: &str) -> Result<SampleTable<T>> {
        table.with_measure(Column::new(name, self.values.clone()))
    }
}

/// `ρ(u) = 1 / mean distance to the k nearest neighbors of u`.
pub fn knn_density<T: Scalar>(index: &SpatialIndex<T>, k: usize) -> Result<Density<T>> {
    let n = index.len();
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n });
    }
    let kt = T::of_usize(k);
    let mut values: Vec<T> = (0..n)
        .into_par_iter()
        .map_init(
            || (KnnScratch::default(), Vec::new()),
            |(scratch, out), u| {
                index.knn_into(u, k, scratch, out);
                let mean = out.iter().map(|nb| nb.distance()).sum::<T>() / kt;
                if mean > T::zero() {
                    T::one() / mean
                } else {
                    T::infinity()
                }
            },
        )
        .collect();
    let degenerate: Vec<usize> = (0..n).filter(|&i| !values[i].is_finite()).collect();
    if !degenerate.is_empty() {
        let cap = values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))
            .unwrap_or_else(T::one);
        for &i in &degenerate {
            values[i] = cap;
        }
    }
    Ok(Density { k, values, degenerate })
}

/// Convenience wrapper that appends the density column to `table`.
pub fn append_knn_density<T: Scalar>(
    index: &SpatialIndex<T>,
    table: SampleTable<T>,
    k: usize,
    name: &str,
) -> Result<(SampleTable<T>, Density<T>)> {
    let density = knn_density(index, k)?;
    Ok((density.append_to(table, name)?, density))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Column;

    fn line(xs: &[f64]) -> (SampleTable<f64>, SpatialIndex<f64>) {
        let t = SampleTable::from_columns(
            vec![Column::new("x", xs.to_vec())],
            vec![Column::new("f", vec![0.0; xs.len()])],
        )
        .unwrap();
        let idx = SpatialIndex::build(&t);
        (t, idx)
    }

    #[test]
    fn two_points() {
        let (_, idx) = line(&[0.0, 2.0]);
        assert_eq!(knn_density(&idx, 1).unwrap().values, vec![0.5, 0.5]);
    }

    #[test]
    fn three_collinear() {
        let (t, idx) = line(&[0.0, 1.0, 2.0]);
        let (t, d) = append_knn_density(&idx, t, 2, "density").unwrap();
        assert_eq!(d.values[1], 1.0);
        assert!((d.values[0] - 1.0 / 1.5).abs() < 1e-15);
        assert!((d.values[2] - 1.0 / 1.5).abs() < 1e-15);
        assert_eq!(t.measure("density").unwrap(), d.values.as_slice());
    }

    #[test]
    fn duplicates_take_max_finite_density() {
        let (_, idx) = line(&[0.0, 0.0, 4.0]);
        let d = knn_density(&idx, 1).unwrap();
        assert_eq!(d.degenerate, vec![0, 1]);
        assert_eq!(d.values, vec![0.25, 0.25, 0.25]);
    }

    #[test]
    fn k_range() {
        let (_, idx) = line(&[0.0, 1.0]);
        assert!(knn_density(&idx, 2).is_err());
        assert!(knn_density(&idx, 0).is_err());
    }
}
