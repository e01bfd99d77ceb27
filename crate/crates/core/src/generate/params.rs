use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::raster::MorphKind;
use crate::rng::{self, StreamRng};

/// Closed sampling interval of one generator parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub(crate) fn sample(&self, rng: &mut StreamRng) -> f64 {
        rng.random_range(self.lo..=self.hi)
    }
}

/// Dilation kernel as a fraction of the image diagonal.
pub const D_DILATION: Interval = Interval::new(0.03, 0.06);
/// Erosion kernel as a fraction of the image diagonal.
pub const D_EROSION: Interval = Interval::new(0.02, 0.04);
/// Affine control-point jitter, times object size.
pub const D_AFFINE: Interval = Interval::new(0.4, 0.6);
/// Displacement-field blur sigma, times object size.
pub const D_SIGMA: Interval = Interval::new(0.5, 0.75);
/// Displacement-field magnitude, times object size.
pub const D_ALPHA: Interval = Interval::new(0.8, 1.2);
/// Smoothing kernel, times object size.
pub const D_SIZE: Interval = Interval::new(0.008, 0.06);
/// Scale range for shapes with convexity ratio below [`CONVEXITY_THRESHOLD`].
pub const D_SCALE_COMPLEX: Interval = Interval::new(0.9, 1.1);
/// Scale range for "almost convex" shapes.
pub const D_SCALE_CONVEX: Interval = Interval::new(0.75, 1.2);
pub const CONVEXITY_THRESHOLD: f64 = 0.6;

/// Every randomized quantity of one contour generation. Fields that depend on
/// intermediate masks stay `None` until the pipeline reaches them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub seed: u64,
    pub attempt: u32,
    pub morph_kind: MorphKind,
    /// `d_dilation` or `d_erosion`, depending on `morph_kind`.
    pub d_morph: f64,
    pub d_affine: f64,
    pub d_sigma: f64,
    pub d_alpha: f64,
    pub d_size: f64,
    pub morph_kernel: Option<u32>,
    pub elastic_object_size: Option<u32>,
    pub blur_kernel: Option<u32>,
    pub r: Option<f64>,
    pub d_scale: Option<f64>,
    pub d_x: Option<i64>,
    pub d_y: Option<i64>,
    pub shift_x: Option<i64>,
    pub shift_y: Option<i64>,
}

impl GenerationParams {
    pub(crate) fn draw(rng: &mut StreamRng, seed: u64, attempt: u32) -> Self {
        let morph_kind = if rng.random_bool(0.5) {
            MorphKind::Dilate
        } else {
            MorphKind::Erode
        };
        let d_morph = match morph_kind {
            MorphKind::Dilate => D_DILATION.sample(rng),
            MorphKind::Erode => D_EROSION.sample(rng),
        };
        GenerationParams {
            seed,
            attempt,
            morph_kind,
            d_morph,
            d_affine: D_AFFINE.sample(rng),
            d_sigma: D_SIGMA.sample(rng),
            d_alpha: D_ALPHA.sample(rng),
            d_size: D_SIZE.sample(rng),
            morph_kernel: None,
            elastic_object_size: None,
            blur_kernel: None,
            r: None,
            d_scale: None,
            d_x: None,
            d_y: None,
            shift_x: None,
            shift_y: None,
        }
    }

    pub fn morph_interval(&self) -> Interval {
        match self.morph_kind {
            MorphKind::Dilate => D_DILATION,
            MorphKind::Erode => D_EROSION,
        }
    }
}

pub(crate) fn attempt_stream(seed: u64, attempt: u32) -> StreamRng {
    rng::stream("contour", seed, attempt as u64)
}

/// The mask-independent draws of the first generation attempt for `seed`:
/// morphology kind and fraction, elastic parameters and smoothing fraction.
/// [`generate_contour`](super::generate_contour) with the same seed starts from
/// exactly these values.
pub fn sample_generation_params(seed: u64, object_mask: &BinaryMask) -> Result<GenerationParams> {
    if object_mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(GenerationParams::draw(&mut attempt_stream(seed, 0), seed, 0))
}
