//! Scalable topology of sampled high-dimensional scalar functions.
//!
//! The pipeline streams a pruned empty-region neighborhood graph over an
//! exact k-d tree, builds an extremum graph in two passes, simplifies it by
//! persistence, and summarizes every leaf segment with mergeable histogram
//! cubes that back the linked views.
//!
//! All numeric code is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the file formats store.

pub mod cubes;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod neighbors;
pub mod reference;
pub mod scalar;
pub mod spine;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Table = dataset::SampleTable<f64>;
pub type Table32 = dataset::SampleTable<f32>;
pub type Index = neighbors::SpatialIndex<f64>;
pub type EdgeConfig = neighbors::EdgeStreamConfig<f64>;
pub type Topology = topology::TopologyArtifact<f64>;
pub type Hierarchy = topology::MergeHierarchy<f64>;
pub type Saddle = topology::SaddleRecord<f64>;
pub type Cubes = cubes::CubeSet<f64>;
pub type CubeGrid = cubes::CubeLayout<f64>;
