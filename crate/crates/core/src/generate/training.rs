use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mask::BinaryMask;
use crate::rng;

use super::{generate_contour, require_nonempty, GenerationParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// One synthesized training example for an external trainer.
///
/// Positive: select the object (`previous` empty, `target` = gt).
/// Negative: erase it (`previous` = gt, `target` empty).
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSample {
    pub polarity: Polarity,
    pub contour: BinaryMask,
    pub previous_mask: BinaryMask,
    pub target: BinaryMask,
    pub fallback_used: bool,
    pub params: GenerationParams,
}

pub fn synthesize_training_sample(gt_mask: &BinaryMask, seed: u64) -> Result<TrainingSample> {
    require_nonempty(gt_mask)?;
    let polarity = if rng::stream("polarity", seed, 0).random_bool(0.5) {
        Polarity::Positive
    } else {
        Polarity::Negative
    };
    let generated = generate_contour(gt_mask, seed)?;
    let (w, h) = gt_mask.dims();
    let (previous_mask, target) = match polarity {
        Polarity::Positive => (BinaryMask::new(w, h), gt_mask.clone()),
        Polarity::Negative => (gt_mask.clone(), BinaryMask::new(w, h)),
    };
    Ok(TrainingSample {
        polarity,
        contour: generated.filled,
        previous_mask,
        target,
        fallback_used: generated.fallback_used,
        params: generated.params,
    })
}
