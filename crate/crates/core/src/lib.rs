//! Contour-based interactive segmentation: synthetic contour generation,
//! interaction encoding, dataset I/O, segmenter plumbing and evaluation.

pub mod dataset;
pub mod encoding;
mod error;
pub mod eval;
pub mod export;
pub mod generate;
mod mask;
pub mod raster;
pub mod rng;
pub mod segmenter;

pub use dataset::{
    load_dataset, validate_dataset, write_dataset, AnnotationRecord, DatasetCheck, DatasetIndex, ValidationReport,
};
pub use encoding::{encode_interaction, EncodingConfig, EncodingMode, InteractionEncoding};
pub use error::{Error, Result};
pub use eval::{Click, EvalConfig, EvalReport};
pub use generate::{generate_contour, GeneratedContour, GenerationParams, Polarity};
pub use mask::{BinaryMask, BoundingBox, ProbabilityMask};
pub use raster::ContourPolygon;
pub use segmenter::{Segmenter, SegmenterAnswer, SegmenterError, SegmenterQuery};
