//! Desk-scale laboratory for simple random walks on regular expanders:
//! cover, strong-cover and blanket times, visit counts, expansion of the
//! walk's trace graph and Hamiltonicity of that trace.

pub mod bounds;
pub mod error;
pub mod generators;
pub mod graph;
pub mod hamilton;
pub mod harness;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod walk;

pub use error::{LabError, Result};
pub use graph::{Graph, VertexSet};
