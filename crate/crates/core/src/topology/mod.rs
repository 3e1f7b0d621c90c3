//! Extremum-graph construction in two streaming passes and the persistence
//! hierarchy built on top of it.

mod artifact;
mod hierarchy;
mod labels;
mod links;
mod saddles;

pub use artifact::{read_topology, save_topology, write_topology, load_topology, TopologyArtifact};
pub use hierarchy::{
    build_hierarchy, persistence_curve, saddles_at, segmentation_at, MergeEvent, MergeHierarchy, PersistenceCurve,
    Resolver,
};
pub use labels::{resolve_labels, Segmentation};
pub use links::{pass1_links, GradientMode, SteepestLinks};
pub use saddles::{pass2_saddles, SaddleRecord};

use crate::dataset::SampleTable;
use crate::error::Result;
use crate::graph::NeighborGraph;
use crate::scalar::Scalar;

/// Total order on vertices: by function value, ties to the lower id.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Order<'a, T> {
    f: &'a [T],
}

impl<'a, T: Scalar> Order<'a, T> {
    pub(crate) fn new(f: &'a [T]) -> Self {
        Order { f }
    }

    /// Whether `a` ranks strictly above `b`.
    pub(crate) fn above(&self, a: usize, b: usize) -> bool {
        self.f[a] > self.f[b] || (self.f[a] == self.f[b] && a < b)
    }
}

/// Runs both passes and the simplification on any neighborhood source.
pub fn compute_topology<T: Scalar, G: NeighborGraph>(
    graph: &G,
    table: &SampleTable<T>,
    f: &[T],
    mode: GradientMode,
) -> Result<TopologyArtifact<T>> {
    let links = pass1_links(graph, table, f, mode);
    let segmentation = resolve_labels(&links)?;
    drop(links);
    let saddles = pass2_saddles(graph, f, &segmentation);
    let hierarchy = build_hierarchy(&segmentation, &saddles, f);
    Ok(TopologyArtifact {
        segmentation,
        saddles,
        hierarchy,
    })
}
