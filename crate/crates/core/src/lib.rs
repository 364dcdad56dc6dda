//! Recommendation-session graph and the incoming-degree recommender.
//!
//! The graph is bipartite: every arc runs from a *kernel* (an order, a visit,
//! a category, ...) to an *object* (a product). A kernel together with its
//! outgoing arcs forms one recommendation session. Recommending for an anchor
//! object `m` ranks every other object by how many of `m`'s kernels also point
//! at it, optionally weighting each shared kernel by its class weight.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, ingestion and
//! the service live in the `ars` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod engine;
mod error;
pub mod graph;
mod ids;
pub mod metric;

pub use engine::{
    neighborhood_first, neighborhood_second, recommend, recommend_for_path, score_in_degrees, RecommendationVector,
    ScoreMap, Scored, SeedSet, Subgraph,
};
pub use error::Error;
pub use graph::{Arc, ClassKind, GraphBuilder, GraphSnapshot, GraphStats, KernelClass, Session, ValidationReport};
pub use ids::{ClassId, KernelId, ObjectId};
pub use metric::{effectiveness, effectiveness_hundredths};

/// Result alias used across the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;
