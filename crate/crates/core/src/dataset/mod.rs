//! Point tables: ingestion, validation, bounds and synthetic fixtures.

mod io;
mod synth;

pub use io::{load_table, read_packed, save_packed, write_packed, Format, LoadReport, Schema};
pub use synth::{gaussian_mixture_value, synth_gaussian_mixture, GaussianMixture};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A named numeric column.
#[derive(Debug, Clone, PartialEq)]
pub struct Column<T> {
    pub name: String,
    pub units: String,
    pub values: Vec<T>,
}

impl<T> Column<T> {
    pub fn new(name: impl Into<String>, values: Vec<T>) -> Self {
        Column {
            name: name.into(),
            units: String::new(),
            values,
        }
    }

    pub fn with_units(mut self, units: impl Into<String>) -> Self {
        self.units = units.into();
        self
    }
}

/// N sampled points of a d-dimensional domain with m measured values each.
///
/// Storage is column-major and immutable once built. Every value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable<T> {
    n_points: usize,
    domain: Vec<Column<T>>,
    measures: Vec<Column<T>>,
}

impl<T: Scalar> SampleTable<T> {
    /// Builds a table from whole columns.
    ///
    /// Fails if either role is empty, lengths disagree, names repeat, or any
    /// value is non-finite. Row filtering happens at ingestion, not here.
    pub fn from_columns(domain: Vec<Column<T>>, measures: Vec<Column<T>>) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::Schema("at least one domain column is required".into()));
        }
        if measures.is_empty() {
            return Err(Error::Schema("at least one measure column is required".into()));
        }
        let n_points = domain[0].values.len();
        if n_points == 0 {
            return Err(Error::Schema("table has no rows".into()));
        }
        let mut seen = HashSet::new();
        for col in domain.iter().chain(&measures) {
            if !seen.insert(col.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name `{}`", col.name)));
            }
            if col.values.len() != n_points {
                return Err(Error::Schema(format!(
                    "column `{}` has {} rows, expected {}",
                    col.name,
                    col.values.len(),
                    n_points
                )));
            }
            if let Some(row) = col.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::Schema(format!(
                    "column `{}` has a non-finite value at row {row}",
                    col.name
                )));
            }
        }
        Ok(SampleTable {
            n_points,
            domain,
            measures,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Domain dimension d.
    pub fn dims(&self) -> usize {
        self.domain.len()
    }

    pub fn domain_columns(&self) -> &[Column<T>] {
        &self.domain
    }

    pub fn measure_columns(&self) -> &[Column<T>] {
        &self.measures
    }

    pub fn domain(&self, axis: usize) -> &[T] {
        &self.domain[axis].values
    }

    pub fn measure(&self, name: &str) -> Option<&[T]> {
        self.measures
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn domain_index(&self, name: &str) -> Option<usize> {
        self.domain.iter().position(|c| c.name == name)
    }

    pub fn domain_names(&self) -> impl Iterator<Item = &str> {
        self.domain.iter().map(|c| c.name.as_str())
    }

    /// Gathers the coordinates of point `row` into `out`.
    pub fn point_into(&self, row: usize, out: &mut Vec<T>) {
        out.clear();
        out.extend(self.domain.iter().map(|c| c.values[row]));
    }

    pub fn point(&self, row: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dims());
        self.point_into(row, &mut out);
        out
    }

    /// Squared Euclidean distance between two rows.
    pub fn dist2(&self, a: usize, b: usize) -> T {
        let mut acc = T::zero();
        for c in &self.domain {
            let t = c.values[a] - c.values[b];
            acc = acc + t * t;
        }
        acc
    }

    /// Row-major copy of the domain coordinates.
    pub fn row_major(&self) -> Vec<T> {
        let d = self.dims();
        let mut out = vec![T::zero(); self.n_points * d];
        for (axis, c) in self.domain.iter().enumerate() {
            for (row, v) in c.values.iter().enumerate() {
                out[row * d + axis] = *v;
            }
        }
        out
    }

    /// Returns a new table with `column` appended to the measures.
    pub fn with_measure(mut self, column: Column<T>) -> Result<Self> {
        if column.values.len() != self.n_points {
            return Err(Error::Schema(format!(
                "measure `{}` has {} rows, expected {}",
                column.name,
                column.values.len(),
                self.n_points
            )));
        }
        if self
            .domain
            .iter()
            .chain(&self.measures)
            .any(|c| c.name == column.name)
        {
            return Err(Error::Schema(format!("duplicate column name `{}`", column.name)));
        }
        if column.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema(format!("measure `{}` is not finite", column.name)));
        }
        self.measures.push(column);
        Ok(self)
    }

    /// Reorders rows: row `i` of the result is row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let take = |c: &Column<T>| Column {
            name: c.name.clone(),
            units: c.units.clone(),
            values: order.iter().map(|&r| c.values[r]).collect(),
        };
        SampleTable {
            n_points: order.len(),
            domain: self.domain.iter().map(take).collect(),
            measures: self.measures.iter().map(take).collect(),
        }
    }
}

/// Closed per-column value range over the full table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> Range<T> {
    pub fn of(values: &[T]) -> Range<T> {
        let mut it = values.iter().copied();
        let first = it.next().unwrap_or_else(T::zero);
        let (min, max) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Range { min, max }
    }

    pub fn width(&self) -> T {
        self.max - self.min
    }
}

/// Global per-column bounds; histogram grids derive from these so that
/// every segment bins on the same edges.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBounds<T> {
    pub domain: Vec<Range<T>>,
    pub measures: Vec<Range<T>>,
}

pub fn compute_bounds<T: Scalar>(table: &SampleTable<T>) -> DomainBounds<T> {
    DomainBounds {
        domain: table.domain.iter().map(|c| Range::of(&c.values)).collect(),
        measures: table.measures.iter().map(|c| Range::of(&c.values)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    Identity,
    /// Turns minima analysis into maxima analysis.
    Negate,
}

/// The measure column under analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSelector {
    pub column: String,
    #[serde(default)]
    pub transform: Transform,
}

impl FunctionSelector {
    pub fn new(column: impl Into<String>) -> Self {
        FunctionSelector {
            column: column.into(),
            transform: Transform::Identity,
        }
    }

    pub fn negated(mut self) -> Self {
        self.transform = Transform::Negate;
        self
    }

    /// Display label: the column name, prefixed with `-` when negated.
    pub fn label(&self) -> String {
        match self.transform {
            Transform::Identity => self.column.clone(),
            Transform::Negate => format!("-{}", self.column),
        }
    }

    /// Materializes the (possibly transformed) function values.
    pub fn values<T: Scalar>(&self, table: &SampleTable<T>) -> Result<Vec<T>> {
        let col = table.measure(&self.column).ok_or_else(|| {
            Error::Schema(format!("function column `{}` is not a measure", self.column))
        })?;
        Ok(match self.transform {
            Transform::Identity => col.to_vec(),
            Transform::Negate => col.iter().map(|v| -*v).collect(),
        })
    }
}
