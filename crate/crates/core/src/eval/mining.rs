use std::path::PathBuf;

use rayon::prelude::*;

use crate::dataset::DatasetIndex;
use crate::encoding::encode_interaction;
use crate::error::Result;
use crate::export::ExportSample;
use crate::generate::{generate_contour, GenerationParams, Polarity};
use crate::mask::{BinaryMask, ProbabilityMask};
use crate::raster::iou;
use crate::rng::derive_seed;
use crate::segmenter::{SegmenterFactory, SegmenterPool, SegmenterQuery};

use super::{predict_full_frame, zoom_in, EvalConfig};

/// A generated contour the segmenter turned into a near-perfect mask.
#[derive(Clone, Debug, PartialEq)]
pub struct MinedSample {
    pub image_id: String,
    pub annotation_number: String,
    pub image_path: Option<PathBuf>,
    pub mask_path: PathBuf,
    pub contour: BinaryMask,
    pub iou: f64,
    pub fallback_used: bool,
    pub params: GenerationParams,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MiningResult {
    pub total: usize,
    pub kept: Vec<MinedSample>,
    /// `(record key, reason)` for samples that could not be evaluated.
    pub skipped: Vec<(String, String)>,
}

impl MiningResult {
    /// Positive training samples: the mined contour as input, the ground truth
    /// as target.
    pub fn export_samples(&self) -> Result<Vec<ExportSample>> {
        self.kept
            .iter()
            .map(|m| {
                let (w, h) = m.contour.dims();
                let mut encoding =
                    crate::encoding::InteractionEncoding::blank(w, h, crate::encoding::EncodingMode::Filled);
                encoding.positive = m.contour.clone();
                encoding.previous = ProbabilityMask::zeros(w, h);
                Ok(ExportSample {
                    id: format!("{}_{}", m.image_id, m.annotation_number),
                    image_id: Some(m.image_id.clone()),
                    annotation_number: Some(m.annotation_number.clone()),
                    image_path: m.image_path.clone(),
                    polarity: Polarity::Positive,
                    encoding,
                    target: BinaryMask::read_png(&m.mask_path)?,
                    fallback_used: m.fallback_used,
                    iou: Some(m.iou),
                    params: Some(m.params.clone()),
                })
            })
            .collect()
    }
}

/// Generates one random contour per record (seeded by the record's position
/// in the sorted index) and keeps it when the segmenter's IoU exceeds
/// `iou_threshold`.
pub fn mine_finetune_set(
    factory: &dyn SegmenterFactory,
    dataset: &DatasetIndex,
    seed: u64,
    iou_threshold: f64,
    config: &EvalConfig,
) -> Result<MiningResult> {
    config.validate()?;
    let pool = SegmenterPool::new(factory);
    let outcomes: Vec<std::result::Result<Option<MinedSample>, (String, String)>> = dataset
        .records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let attempt = || -> Result<Option<MinedSample>> {
                let gt = rec.load_mask()?;
                let generated = generate_contour(&gt, derive_seed(seed, i as u64))?;
                let enc = encode_interaction(
                    &[generated.filled.clone().into()],
                    &[],
                    None,
                    &config.encoding,
                    gt.dims(),
                )?;
                let window = if config.zoom_in {
                    Some(zoom_in(&enc, config.expansion, config.zoom_size)?.1)
                } else {
                    None
                };
                let mut query = SegmenterQuery::new(enc).with_ground_truth(gt.clone());
                query.image_ref = dataset.image_path(&rec.image_id).map(Into::into);
                let prob = pool.with(|seg| predict_full_frame(seg, &query, window.as_ref(), config.flip_average))?;
                let score = iou(&prob.threshold(config.threshold), &gt)?;
                Ok((score > iou_threshold).then(|| MinedSample {
                    image_id: rec.image_id.clone(),
                    annotation_number: rec.annotation_number.clone(),
                    image_path: query.image_ref.clone(),
                    mask_path: rec.mask_path.clone(),
                    contour: generated.filled,
                    iou: score,
                    fallback_used: generated.fallback_used,
                    params: generated.params,
                }))
            };
            attempt().map_err(|e| (rec.key(), e.to_string()))
        })
        .collect();
    let mut result = MiningResult {
        total: outcomes.len(),
        ..Default::default()
    };
    for outcome in outcomes {
        match outcome {
            Ok(Some(m)) => result.kept.push(m),
            Ok(None) => {}
            Err(skip) => result.skipped.push(skip),
        }
    }
    Ok(result)
}
