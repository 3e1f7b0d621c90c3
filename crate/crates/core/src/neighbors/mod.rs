//! Exact k-NN indexing and the streaming empty-region (β-skeleton) graph.

mod density;
mod kdtree;
mod lune;
mod saturation;
mod stream;

pub use density::{append_knn_density, knn_density, Density, DEFAULT_DENSITY_K};
pub use kdtree::{KnnScratch, Neighbor, ReverseRadii, SpatialIndex, DEFAULT_LEAF_SIZE};
pub use lune::{empty_region_keep, empty_region_keep_with, LuneTest, WitnessMode};
pub use saturation::{saturation_curve, SaturationPoint};
pub use stream::{stream_neighborhood, EdgeStreamConfig, PrunedNeighborhood, StreamScratch, StreamingGraph};

use crate::dataset::SampleTable;
use crate::scalar::Scalar;

pub fn build_index<T: Scalar>(table: &SampleTable<T>) -> SpatialIndex<T> {
    SpatialIndex::build(table)
}
