//! Intersection identification from single 360-degree panoramas by counting
//! possible directions of travel (PDoTs) around the camera.

pub mod aggregate;
pub mod classifier;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod pipeline;
pub mod raster;
pub mod sampler;
pub mod segment;
pub mod synth;

pub use error::{Error, Result};
