use crate::encoding::EncodingMode;
use crate::mask::{BinaryMask, ProbabilityMask};

use super::{Segmenter, SegmenterAnswer, SegmenterError, SegmenterQuery};

/// Returns the ground truth itself.
pub fn predict_oracle(query: &SegmenterQuery, gt: &BinaryMask) -> Result<SegmenterAnswer, SegmenterError> {
    if gt.dims() != query.dims() {
        return Err(SegmenterError::DimensionMismatch {
            expected: query.dims(),
            actual: gt.dims(),
        });
    }
    Ok(SegmenterAnswer {
        probabilities: gt.to_probability(),
    })
}

/// Filled positive region minus the negative region; elsewhere the previous
/// prediction passes through, cleared under the negative region.
pub fn predict_filled_baseline(query: &SegmenterQuery) -> Result<SegmenterAnswer, SegmenterError> {
    let enc = &query.encoding;
    if enc.mode != EncodingMode::Filled {
        return Err(SegmenterError::Unsupported("baseline requires filled encoding".into()));
    }
    let (w, h) = enc.dims();
    let probabilities = ProbabilityMask::from_fn(w, h, |x, y| {
        if enc.negative.get(x, y) {
            0.0
        } else if enc.positive.get(x, y) {
            1.0
        } else {
            enc.previous.get(x, y).max(0.0)
        }
    });
    Ok(SegmenterAnswer { probabilities })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OracleSegmenter;

impl Segmenter for OracleSegmenter {
    fn name(&self) -> &str {
        "oracle"
    }

    fn predict(&mut self, query: &SegmenterQuery) -> Result<SegmenterAnswer, SegmenterError> {
        let gt = query.ground_truth.as_ref().ok_or(SegmenterError::MissingGroundTruth)?;
        predict_oracle(query, gt)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FilledBaseline;

impl Segmenter for FilledBaseline {
    fn name(&self) -> &str {
        "baseline"
    }

    fn predict(&mut self, query: &SegmenterQuery) -> Result<SegmenterAnswer, SegmenterError> {
        predict_filled_baseline(query)
    }
}

/// Always predicts background.
#[derive(Clone, Copy, Debug, Default)]
pub struct EmptySegmenter;

impl Segmenter for EmptySegmenter {
    fn name(&self) -> &str {
        "empty"
    }

    fn predict(&mut self, query: &SegmenterQuery) -> Result<SegmenterAnswer, SegmenterError> {
        let (w, h) = query.dims();
        Ok(SegmenterAnswer {
            probabilities: ProbabilityMask::zeros(w, h),
        })
    }
}
