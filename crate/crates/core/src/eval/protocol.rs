use rayon::prelude::*;

use crate::dataset::{close_contour, AnnotationRecord, DatasetIndex};
use crate::encoding::{encode_interaction, ContourInput};
use crate::error::{Error, Result};
use crate::mask::{BinaryMask, BoundingBox, ProbabilityMask};
use crate::raster::{bounding_box, iou};
use crate::segmenter::{
    check_dims, Segmenter, SegmenterAnswer, SegmenterError, SegmenterFactory, SegmenterPool, SegmenterQuery,
};

use super::clicks::next_click_with_clearance;
use super::report::{EquivalentClicks, EvalReport, NocValue, SampleResult};
use super::{click_encoding, EvalConfig, ZoomInWindow};

/// Mean of the answers for the query and its mirror image (un-mirrored).
pub fn flip_average(
    segmenter: &mut dyn Segmenter,
    query: &SegmenterQuery,
) -> std::result::Result<SegmenterAnswer, SegmenterError> {
    let a = segmenter.predict(query)?;
    check_dims(query, &a)?;
    let flipped = query.flipped();
    let b = segmenter.predict(&flipped)?;
    check_dims(&flipped, &b)?;
    let b = b.probabilities.flip_horizontal();
    let (w, h) = query.dims();
    let probabilities = ProbabilityMask::from_fn(w, h, |x, y| (a.probabilities.get(x, y) + b.get(x, y)) / 2.0);
    Ok(SegmenterAnswer { probabilities })
}

/// Queries the segmenter through an optional Zoom-In window and optional flip
/// averaging (done in crop space), returning a full-frame prediction.
pub fn predict_full_frame(
    segmenter: &mut dyn Segmenter,
    query: &SegmenterQuery,
    window: Option<&ZoomInWindow>,
    flip: bool,
) -> std::result::Result<ProbabilityMask, SegmenterError> {
    let ask = |seg: &mut dyn Segmenter, q: &SegmenterQuery| {
        if flip {
            flip_average(seg, q)
        } else {
            let a = seg.predict(q)?;
            check_dims(q, &a)?;
            Ok(a)
        }
    };
    match window {
        None => Ok(ask(segmenter, query)?.probabilities),
        Some(win) => {
            let cropped = win.crop_query(query);
            Ok(win.paste_back(&ask(segmenter, &cropped)?.probabilities))
        }
    }
}

/// 1-based index of the first click whose IoU reaches `iou_one_contour`.
pub fn equivalent_clicks(click_curve: &[f64], iou_one_contour: f64) -> EquivalentClicks {
    click_curve
        .iter()
        .position(|&v| v >= iou_one_contour)
        .map_or(EquivalentClicks::BeyondMax, |i| EquivalentClicks::Clicks(i as u32 + 1))
}

fn base_query(dataset: &DatasetIndex, rec: &AnnotationRecord, query: SegmenterQuery) -> SegmenterQuery {
    SegmenterQuery {
        image_ref: dataset.image_path(&rec.image_id).map(Into::into),
        ..query
    }
}

fn contours(polys: &[crate::raster::ContourPolygon]) -> Result<Vec<ContourInput>> {
    polys.iter().map(|p| close_contour(p).map(ContourInput::from)).collect()
}

fn contour_sample(
    seg: &mut dyn Segmenter,
    dataset: &DatasetIndex,
    rec: &AnnotationRecord,
    config: &EvalConfig,
) -> Result<f64> {
    let gt = rec.load_mask()?;
    let dims = gt.dims();
    let enc = encode_interaction(
        &contours(&rec.pos_contours)?,
        &contours(&rec.neg_contours)?,
        None,
        &config.encoding,
        dims,
    )?;
    let window = if config.zoom_in && !enc.positive.is_empty() {
        Some(super::zoom_in(&enc, config.expansion, config.zoom_size)?.1)
    } else {
        None
    };
    let query = base_query(dataset, rec, SegmenterQuery::new(enc).with_ground_truth(gt.clone()));
    let prob = predict_full_frame(seg, &query, window.as_ref(), config.flip_average)?;
    iou(&prob.threshold(config.threshold), &gt)
}

fn click_sample(
    seg: &mut dyn Segmenter,
    dataset: &DatasetIndex,
    rec: &AnnotationRecord,
    config: &EvalConfig,
) -> Result<(Vec<f64>, NocValue)> {
    let gt = rec.load_mask()?;
    let dims = gt.dims();
    let mut clicks = Vec::new();
    let mut disks = Vec::new();
    let mut previous: Option<ProbabilityMask> = None;
    let mut pred = BinaryMask::new(dims.0, dims.1);
    let mut curve = Vec::with_capacity(config.max_clicks as usize);
    for index in 1..=config.max_clicks {
        let (click, clearance) = match next_click_with_clearance(&gt, &pred) {
            Ok(c) => c,
            Err(Error::Converged) => {
                curve.push(iou(&pred, &gt)?);
                continue;
            }
            Err(e) => return Err(e),
        };
        clicks.push(click);
        disks.push((click, clearance.min(config.click_radius)));
        let enc = click_encoding(&disks, dims, previous.as_ref())?;
        let mut query = base_query(dataset, rec, SegmenterQuery::new(enc).with_ground_truth(gt.clone()));
        query.interaction_index = index;
        query.clicks = clicks.clone();
        // Zoom-In needs an object hypothesis, i.e. a previous prediction.
        let window = if config.zoom_in && !pred.is_empty() {
            let b = bounding_box(&pred)?;
            let bbox = clicks.iter().fold(b, |b, c| BoundingBox {
                x0: b.x0.min(c.x),
                y0: b.y0.min(c.y),
                x1: b.x1.max(c.x + 1),
                y1: b.y1.max(c.y + 1),
            });
            Some(ZoomInWindow::around(&bbox, dims, config.expansion, config.zoom_size))
        } else {
            None
        };
        let prob = predict_full_frame(seg, &query, window.as_ref(), config.flip_average)?;
        pred = prob.threshold(config.threshold);
        previous = Some(prob);
        curve.push(iou(&pred, &gt)?);
    }
    let noc = curve
        .iter()
        .position(|&v| v >= config.target_iou)
        .map_or(NocValue::NotReached, |i| NocValue::Clicks(i as u32 + 1));
    Ok((curve, noc))
}

fn run<T: Send>(
    factory: &dyn SegmenterFactory,
    dataset: &DatasetIndex,
    config: &EvalConfig,
    eval: impl Fn(&mut dyn Segmenter, &AnnotationRecord) -> Result<T> + Sync,
    record: impl Fn(&mut SampleResult, T) + Sync,
) -> Result<EvalReport> {
    config.validate()?;
    let pool = SegmenterPool::new(factory);
    let samples = dataset
        .records
        .par_iter()
        .map(|rec| {
            let mut row = SampleResult::new(&rec.image_id, &rec.annotation_number);
            match pool.with(|seg| eval(seg, rec)) {
                Ok(v) => record(&mut row, v),
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    Ok(EvalReport::new(config.clone(), samples))
}

/// IoU of a single annotated contour per record. Failed samples are recorded
/// in the report, not raised.
pub fn run_contour_eval(
    factory: &dyn SegmenterFactory,
    dataset: &DatasetIndex,
    config: &EvalConfig,
) -> Result<EvalReport> {
    run(
        factory,
        dataset,
        config,
        |seg, rec| contour_sample(seg, dataset, rec, config),
        |row, v| row.iou_at_1_contour = Some(v),
    )
}

/// Simulated-click loop per record: IoU after every click and NoC@k.
pub fn run_click_eval(
    factory: &dyn SegmenterFactory,
    dataset: &DatasetIndex,
    config: &EvalConfig,
) -> Result<EvalReport> {
    run(
        factory,
        dataset,
        config,
        |seg, rec| click_sample(seg, dataset, rec, config),
        |row, (curve, noc)| {
            row.iou_per_click = curve;
            row.noc_at_k = Some(noc);
        },
    )
}
