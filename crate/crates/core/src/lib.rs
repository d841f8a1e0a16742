//! Rectangular space-filling layouts ("VMaps") for vertex-weighted graphs.
//!
//! The pipeline partitions a display rectangle among graph vertices so that
//! rectangle areas encode vertex weights, opens fixed-width border corridors
//! without distorting those areas, marks adjacent connected vertices with
//! bridges, and routes longer connections through the corridors. A
//! simulated-annealing optimizer searches vertex positions, weights, and the
//! desired aspect ratio to trade areal error, topological error, and aspect
//! ratio loss.

pub mod anneal;
pub mod border;
pub mod datasets;
pub mod document;
pub mod geometry;
pub mod graph;
pub mod metrics;
pub mod partition;
pub mod pipeline;
pub mod render;
pub mod router;
pub mod service;

pub use document::LayoutDocument;
pub use geometry::{Axis, Point, Rect};
pub use graph::{VertexWeightedGraph, WeightProportions};
pub use partition::{Orientation, PartitionItem, PartitionTree};
pub use pipeline::{run_layout, LayoutOptions};
