//! Segmenter contract, built-in reference segmenters and the external
//! process client.

mod builtin;
mod external;
mod pool;
pub mod wire;

use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

pub use builtin::{predict_filled_baseline, predict_oracle, EmptySegmenter, FilledBaseline, OracleSegmenter};
pub use external::{external_predict, ExternalConfig, ExternalSegmenter};
pub use pool::SegmenterPool;

use crate::encoding::InteractionEncoding;
use crate::eval::Click;
use crate::mask::{BinaryMask, BoundingBox, ProbabilityMask};

#[derive(Debug, Error)]
pub enum SegmenterError {
    #[error("segmenter timed out after {0:?}")]
    Timeout(Duration),

    #[error("malformed segmenter response: {0}")]
    Malformed(String),

    #[error("segmenter returned {actual:?} mask for a {expected:?} query")]
    DimensionMismatch { expected: (u32, u32), actual: (u32, u32) },

    #[error("segmenter process exited: {0}")]
    ChildExited(String),

    #[error("segmenter reported an error: {0}")]
    Remote(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("oracle segmenter needs the ground truth in the query")]
    MissingGroundTruth,

    #[error("segmenter I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Errors after which a segmenter instance must not be reused.
pub trait FatalError {
    fn is_fatal(&self) -> bool;
}

impl FatalError for SegmenterError {
    fn is_fatal(&self) -> bool {
        matches!(
            self,
            SegmenterError::Timeout(_) | SegmenterError::ChildExited(_) | SegmenterError::Io(_)
        )
    }
}

impl FatalError for crate::Error {
    fn is_fatal(&self) -> bool {
        matches!(self, crate::Error::Segmenter(e) if e.is_fatal())
    }
}

/// Geometry applied to the source image to obtain the query's frame: first a
/// crop resized to `size`, then an optional horizontal mirror.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ImageView {
    pub crop: Option<BoundingBox>,
    pub size: Option<(u32, u32)>,
    pub flipped: bool,
}

impl ImageView {
    pub fn is_identity(&self) -> bool {
        self.crop.is_none() && !self.flipped
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmenterQuery {
    pub image_ref: Option<PathBuf>,
    pub encoding: InteractionEncoding,
    /// 1-based.
    pub interaction_index: u32,
    /// Click interactions so far (click protocol only).
    pub clicks: Vec<Click>,
    /// Ground truth, transformed with the query. Read only by the oracle and
    /// never sent over the wire.
    pub ground_truth: Option<BinaryMask>,
    pub view: ImageView,
}

impl SegmenterQuery {
    pub fn new(encoding: InteractionEncoding) -> Self {
        Self {
            image_ref: None,
            encoding,
            interaction_index: 1,
            clicks: Vec::new(),
            ground_truth: None,
            view: ImageView::default(),
        }
    }

    pub fn with_ground_truth(mut self, gt: BinaryMask) -> Self {
        self.ground_truth = Some(gt);
        self
    }

    pub fn dims(&self) -> (u32, u32) {
        self.encoding.dims()
    }

    /// Horizontally mirrored query (planes, ground truth and clicks).
    pub fn flipped(&self) -> SegmenterQuery {
        let (w, _) = self.dims();
        SegmenterQuery {
            image_ref: self.image_ref.clone(),
            encoding: self.encoding.flip_horizontal(),
            interaction_index: self.interaction_index,
            clicks: self.clicks.iter().map(|c| Click { x: w - 1 - c.x, ..*c }).collect(),
            ground_truth: self.ground_truth.as_ref().map(BinaryMask::flip_horizontal),
            view: ImageView {
                flipped: !self.view.flipped,
                ..self.view
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmenterAnswer {
    pub probabilities: ProbabilityMask,
}

pub trait Segmenter: Send {
    fn name(&self) -> &str;

    fn predict(&mut self, query: &SegmenterQuery) -> Result<SegmenterAnswer, SegmenterError>;
}

impl<S: Segmenter + ?Sized> Segmenter for Box<S> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn predict(&mut self, query: &SegmenterQuery) -> Result<SegmenterAnswer, SegmenterError> {
        (**self).predict(query)
    }
}

/// Creates independent segmenter instances, one per concurrent worker.
pub trait SegmenterFactory: Sync {
    fn create(&self) -> Result<Box<dyn Segmenter>, SegmenterError>;
}

impl<F> SegmenterFactory for F
where
    F: Fn() -> Result<Box<dyn Segmenter>, SegmenterError> + Sync,
{
    fn create(&self) -> Result<Box<dyn Segmenter>, SegmenterError> {
        self()
    }
}

/// The segmenters selectable by name.
#[derive(Clone, Debug, PartialEq)]
pub enum SegmenterSpec {
    Oracle,
    Baseline,
    Empty,
    External(ExternalConfig),
}

impl SegmenterFactory for SegmenterSpec {
    fn create(&self) -> Result<Box<dyn Segmenter>, SegmenterError> {
        Ok(match self {
            SegmenterSpec::Oracle => Box::new(OracleSegmenter),
            SegmenterSpec::Baseline => Box::new(FilledBaseline),
            SegmenterSpec::Empty => Box::new(EmptySegmenter),
            SegmenterSpec::External(config) => Box::new(ExternalSegmenter::spawn(config)?),
        })
    }
}

/// Checks an answer against the query frame.
pub(crate) fn check_dims(query: &SegmenterQuery, answer: &SegmenterAnswer) -> Result<(), SegmenterError> {
    let expected = query.dims();
    let actual = answer.probabilities.dims();
    if expected != actual {
        return Err(SegmenterError::DimensionMismatch { expected, actual });
    }
    Ok(())
}
