use std::collections::BTreeMap;

use super::links::SteepestLinks;
use crate::error::{Error, Result};

/// Stable-manifold labels: every vertex carries the id of its maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub labels: Vec<usize>,
    /// Maximum ids, ascending.
    pub maxima: Vec<usize>,
}

impl Segmentation {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        self.maxima.len()
    }

    pub fn label(&self, vertex: usize) -> usize {
        self.labels[vertex]
    }

    /// Sample count per segment.
    pub fn sizes(&self) -> BTreeMap<usize, usize> {
        let mut out: BTreeMap<usize, usize> = self.maxima.iter().map(|&m| (m, 0)).collect();
        for &l in &self.labels {
            *out.entry(l).or_default() += 1;
        }
        out
    }

    /// Rows of each segment, ascending within a segment.
    pub fn members(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = self.maxima.iter().map(|&m| (m, Vec::new())).collect();
        for (row, &l) in self.labels.iter().enumerate() {
            out.entry(l).or_default().push(row);
        }
        out
    }
}

/// Follows every link chain to its root with full path compression.
///
/// Each vertex is finalized once, so the cost is linear in the number of
/// vertices. A chain that revisits an unfinished vertex is a cycle.
pub fn resolve_labels(links: &SteepestLinks) -> Result<Segmentation> {
    const UNSEEN: usize = usize::MAX;
    const OPEN: usize = usize::MAX - 1;
    let n = links.len();
    let mut labels = vec![UNSEEN; n];
    let mut path = Vec::new();
    for start in 0..n {
        if labels[start] != UNSEEN {
            continue;
        }
        path.clear();
        let mut u = start;
        let root = loop {
            match labels[u] {
                OPEN => return Err(Error::LinkCycle(u)),
                UNSEEN => {}
                resolved => break resolved,
            }
            let next = links.links[u];
            if next >= n {
                return Err(Error::InvalidArgument(format!("link {u} -> {next} is out of range")));
            }
            if next == u {
                labels[u] = u;
                break u;
            }
            labels[u] = OPEN;
            path.push(u);
            u = next;
        };
        for &p in &path {
            labels[p] = root;
        }
    }
    let maxima = links.maxima();
    Ok(Segmentation { labels, maxima })
}
