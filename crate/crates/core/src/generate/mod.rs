//! Randomized simulation of user contours from ground-truth instance masks.
//!
//! Pipeline per attempt: fill holes, dilate or erode, keep the largest
//! component, elastic warp, keep the largest component, Gaussian smoothing,
//! convexity-gated random scaling and a bbox-bounded random shift.

mod elastic;
mod heatmap;
mod params;
mod training;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use elastic::{elastic_deform, Affine};
pub use heatmap::{contour_line, generate_heatmap, Heatmap};
pub use params::{
    sample_generation_params, GenerationParams, Interval, CONVEXITY_THRESHOLD, D_AFFINE, D_ALPHA, D_DILATION,
    D_EROSION, D_SCALE_COMPLEX, D_SCALE_CONVEX, D_SIGMA, D_SIZE,
};
pub use training::{synthesize_training_sample, Polarity, TrainingSample};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, BoundingBox};
use crate::raster::{
    bounding_box, convexity_ratio, fill_holes, gaussian_smooth, iou, largest_component, morph_transform, round_odd,
    scale_about_centroid, shift_clipped,
};
use params::attempt_stream;

/// Attempts per contour before falling back to the hole-filled ground truth.
pub const MAX_ATTEMPTS: u32 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedContour {
    /// The filled contour region.
    pub filled: BinaryMask,
    /// Parameters of the successful attempt (or of the last failed one).
    pub params: GenerationParams,
    pub fallback_used: bool,
}

/// Runs the contour simulation for `gt_mask`. A pure function of its inputs.
pub fn generate_contour(gt_mask: &BinaryMask, seed: u64) -> Result<GeneratedContour> {
    let gt_bbox = bounding_box(gt_mask)?;
    let filled_gt = fill_holes(gt_mask);
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = attempt_stream(seed, attempt);
        let mut params = GenerationParams::draw(&mut rng, seed, attempt);
        if let Some(filled) = run_attempt(&filled_gt, &gt_bbox, &mut params, &mut rng) {
            return Ok(GeneratedContour {
                filled,
                params,
                fallback_used: false,
            });
        }
        last = Some(params);
    }
    Ok(GeneratedContour {
        filled: filled_gt,
        params: last.expect("at least one attempt"),
        fallback_used: true,
    })
}

fn nonempty(mask: BinaryMask) -> Option<BinaryMask> {
    (!mask.is_empty()).then_some(mask)
}

fn run_attempt(
    filled_gt: &BinaryMask,
    gt_bbox: &BoundingBox,
    params: &mut GenerationParams,
    rng: &mut crate::rng::StreamRng,
) -> Option<BinaryMask> {
    let (w, h) = filled_gt.dims();
    let diagonal = ((w as f64).powi(2) + (h as f64).powi(2)).sqrt();

    let kernel = round_odd(params.d_morph * diagonal);
    params.morph_kernel = Some(kernel);
    let mask = nonempty(morph_transform(filled_gt, params.morph_kind, kernel))?;
    let mask = largest_component(&mask);

    let object_size = bounding_box(&mask).ok()?.longer_side();
    params.elastic_object_size = Some(object_size);
    let mask = elastic_deform(&mask, params.d_affine, params.d_sigma, params.d_alpha, object_size, rng);
    let mask = largest_component(&nonempty(mask)?);

    let object_size = bounding_box(&mask).ok()?.longer_side();
    let blur = round_odd(params.d_size * object_size as f64);
    params.blur_kernel = Some(blur);
    let mask = nonempty(gaussian_smooth(&mask, blur))?;
    let mask = largest_component(&fill_holes(&mask));

    let r = convexity_ratio(&mask).ok()?;
    params.r = Some(r);
    let convex = r >= CONVEXITY_THRESHOLD;
    let scale_range = if convex { D_SCALE_CONVEX } else { D_SCALE_COMPLEX };
    let d_scale = scale_range.sample(rng);
    params.d_scale = Some(d_scale);
    let mask = nonempty(scale_about_centroid(&mask, d_scale))?;

    let tr = bounding_box(&mask).ok()?;
    let mut d_x = (tr.x0 as i64 - gt_bbox.x0 as i64)
        .abs()
        .min((tr.x1 as i64 - gt_bbox.x1 as i64).abs());
    let mut d_y = (tr.y0 as i64 - gt_bbox.y0 as i64)
        .abs()
        .min((tr.y1 as i64 - gt_bbox.y1 as i64).abs());
    if convex {
        d_x *= 2;
        d_y *= 2;
    }
    // clip to half the transformed box extent
    d_x = d_x.min(tr.width() as i64 / 2);
    d_y = d_y.min(tr.height() as i64 / 2);
    let shift_x = rng.random_range(-d_x..=d_x);
    let shift_y = rng.random_range(-d_y..=d_y);
    params.d_x = Some(d_x);
    params.d_y = Some(d_y);
    params.shift_x = Some(shift_x);
    params.shift_y = Some(shift_y);
    let mask = nonempty(shift_clipped(&mask, shift_x, shift_y))?;
    Some(largest_component(&fill_holes(&mask)))
}

/// One line of the generation log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationLogRecord {
    pub sample_id: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub image_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub annotation_number: Option<String>,
    #[serde(flatten)]
    pub params: GenerationParams,
    pub fallback_used: bool,
    pub iou: f64,
}

impl GenerationLogRecord {
    pub fn new(sample_id: u64, contour: &GeneratedContour, gt: &BinaryMask) -> Result<Self> {
        Ok(Self {
            sample_id,
            image_id: None,
            annotation_number: None,
            params: contour.params.clone(),
            fallback_used: contour.fallback_used,
            iou: iou(&contour.filled, gt)?,
        })
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = all logical CPUs).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
        .install(f)
}

/// Generates one contour per `(mask, sample_id)` with per-sample seeds
/// `derive_seed(seed, sample_id)`. The result is independent of the pool size.
pub fn generate_batch(masks: &[BinaryMask], seed: u64) -> Result<Vec<GeneratedContour>> {
    masks
        .par_iter()
        .enumerate()
        .map(|(i, m)| generate_contour(m, crate::rng::derive_seed(seed, i as u64)))
        .collect()
}

/// Validates a positive-size mask for the generator entry points.
pub(crate) fn require_nonempty(mask: &BinaryMask) -> Result<()> {
    if mask.is_empty() {
        Err(Error::EmptyMask)
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::component_count;

    fn centered_square(n: u32, side: u32) -> BinaryMask {
        let lo = (n - side) / 2;
        BinaryMask::from_fn(n, n, |x, y| {
            (lo..lo + side).contains(&x) && (lo..lo + side).contains(&y)
        })
    }

    #[test]
    fn deterministic() {
        let gt = centered_square(128, 40);
        for seed in 0..10 {
            assert_eq!(
                generate_contour(&gt, seed).unwrap(),
                generate_contour(&gt, seed).unwrap()
            );
        }
    }

    #[test]
    fn starts_from_sampled_params() {
        let gt = centered_square(64, 20);
        for seed in 0..20 {
            let c = generate_contour(&gt, seed).unwrap();
            if c.params.attempt == 0 {
                let p = sample_generation_params(seed, &gt).unwrap();
                assert_eq!(p.d_morph, c.params.d_morph);
                assert_eq!(p.d_size, c.params.d_size);
            }
        }
    }

    #[test]
    fn empty_gt_is_an_error() {
        assert!(generate_contour(&BinaryMask::new(8, 8), 1).is_err());
    }

    #[test]
    fn square_monte_carlo() {
        let gt = centered_square(128, 40);
        let mut overlapping = 0;
        for seed in 0..1000 {
            let c = generate_contour(&gt, seed).unwrap();
            assert!(!c.filled.is_empty());
            assert_eq!(component_count(&c.filled), 1);
            let p = &c.params;
            if !c.fallback_used {
                let d_scale = p.d_scale.unwrap();
                assert!((0.75..=1.2).contains(&d_scale));
                if p.r.unwrap() < 0.6 {
                    assert!((0.9..=1.1).contains(&d_scale));
                }
                assert!(p.shift_x.unwrap().abs() <= p.d_x.unwrap());
                assert!(p.shift_y.unwrap().abs() <= p.d_y.unwrap());
            }
            if iou(&c.filled, &gt).unwrap() > 0.0 {
                overlapping += 1;
            }
        }
        assert!(overlapping >= 950, "{overlapping}");
    }
}
