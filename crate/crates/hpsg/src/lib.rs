//! Scene-graph engine for sparse-view reconstruction outputs.
//!
//! Takes per-view point maps, confidence maps and instance masks, extracts the
//! dominant planar structure of the scene (floor, ceiling, walls), fuses masked
//! detections into 3D object instances, assembles a three-level scene graph and
//! answers retrieval requests with compact query-relevant subgraphs.

pub mod annotate;
pub mod config;
pub mod dbscan;
pub mod error;
pub mod fusion;
pub mod geometry;
pub mod graph;
pub mod ingest;
pub mod label;
pub mod oracle;
pub mod pipeline;
pub mod plane;
pub mod retrieval;
pub mod synth;

pub use error::Error;
