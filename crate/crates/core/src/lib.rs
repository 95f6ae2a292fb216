//! Tutte paths in 2-connected plane graphs.
//!
//! A Tutte path of a plane graph is a path P such that every P-bridge has at
//! most three attachments and every P-bridge containing an outer edge has at
//! most two. This crate computes, for a 2-connected plane graph G, a vertex
//! pair x, y and an outer edge α, a Tutte path from x to y through α, in
//! quadratic time, together with an independent verifier, an exhaustive
//! oracle for small instances, seeded instance generators, and a batch layer
//! used by the benchmarks.

pub mod batch;
pub mod connectivity;
pub mod decomposition;
pub mod error;
pub mod generator;
pub mod oracle;
pub mod plane_graph;
pub mod tpath;
pub mod verifier;

pub use error::{GenError, GraphError, OracleError, SolveError};
pub use plane_graph::{clockwise_arc, ArcEnd, PlaneGraph, VertexId};
// tpath re-exports added with the solver module
