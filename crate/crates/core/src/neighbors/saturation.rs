use super::kdtree::SpatialIndex;
use super::lune::WitnessMode;
use super::stream::{EdgeStreamConfig, StreamingGraph};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One point of the k-saturation curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaturationPoint {
    pub k: usize,
    pub edges: usize,
}

/// Total surviving undirected edges of the symmetric empty-region graph
/// for each candidate count in `k_values`.
pub fn saturation_curve<T: Scalar>(
    index: &SpatialIndex<T>,
    k_values: &[usize],
    beta: T,
    witness_mode: WitnessMode,
) -> Result<Vec<SaturationPoint>> {
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("k values must be strictly ascending".into()));
    }
    k_values
        .iter()
        .map(|&k| {
            let config = EdgeStreamConfig::new(k)
                .with_beta(beta)
                .with_witness_mode(witness_mode)
                .with_symmetrize(true);
            let graph = StreamingGraph::new(index, config)?;
            Ok(SaturationPoint {
                k,
                edges: graph.edge_count(),
            })
        })
        .collect()
}
