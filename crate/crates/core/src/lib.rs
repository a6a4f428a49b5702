//! Fast CKR probabilistic partitions of sparse weighted graphs and the
//! structures built on them: hierarchical partitions over a scale family of
//! quotient graphs, sampled ultrametric tree embeddings, approximate distance
//! oracles, and randomized spanners.
//!
//! Every randomized entry point takes an explicit RNG or seed; equal seeds
//! reproduce every output bit for bit.

pub mod ckr;
pub mod error;
pub mod frt;
pub mod graph;
pub mod hierarchy;
pub mod oracle;
pub mod rng;
pub mod scales;
pub mod spanner;
pub mod ultrametric;

pub use ckr::{
    ckr_partition_graph, ckr_partition_graph_prioritized, ckr_partition_graph_with, ckr_partition_metric,
    parse_partition, Partition, PartitionRecord, SamplerTrace,
};
pub use error::{Error, Result};
pub use frt::{empirical_distortion, sample_frt, sample_frt_in, DistortionReport, PairStretch};
pub use graph::{
    dijkstra, dijkstra_multi, exact_metric, load_graph, parse_edge_list, DistanceMap, DistanceMatrix, Edge, VertexId,
    WeightedGraph,
};
pub use hierarchy::{
    hierarchy_to_ultrametric, padded_points, parse_hierarchy, pullback_partition, sample_hierarchy,
    sample_hierarchy_in, HierarchyTree, Multiscale, PaddedSet, SampledHierarchy, ScalePartition,
};
pub use oracle::{build_oracle, build_oracle_with_beta, oracle_from_matrix, DistanceOracle};
pub use scales::{build_scale_family, quotient, restrict, BottleneckTree, QuotientGraph, ScaleFamily, ScaleLevel};
pub use spanner::{baswana_sen, Spanner};
pub use ultrametric::{parse_ultrametric, ultra_distance, UltrametricTree};
