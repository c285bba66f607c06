//! Building blocks for constructing EMNIST-style handwritten-character
//! datasets from 128×128 binary scans and benchmarking them with
//! online pseudo-inverse classifiers.
//!
//! The numeric code (image pipeline, least-squares models) is generic over
//! the floating-point scalar; the aliases below pin the common choices.

pub mod bench;
pub mod class_code;
pub mod error;
pub mod forge;
pub mod idx;
pub mod ingest;
pub mod opium;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod verify;

pub use class_code::ClassCode;
pub use error::{Error, Result};
pub use pipeline::Glyph28;
pub use scalar::Scalar;

/// Double-precision working image.
pub type Image = pipeline::FloatImage<f64>;
/// Single-precision working image.
pub type ImageF32 = pipeline::FloatImage<f32>;
/// Double-precision pseudo-inverse model, the default for benchmarks.
pub type Model = opium::PseudoInverseModel<f64>;
/// Single-precision pseudo-inverse model (half the memory for large hidden layers).
pub type ModelF32 = opium::PseudoInverseModel<f32>;
