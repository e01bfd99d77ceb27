use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::raster::{draw_polyline, largest_component, trace_boundary};
use crate::rng::derive_seed;

use super::{generate_contour, require_nonempty};

/// Per-pixel count of contour lines over many generations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Heatmap {
    pub width: u32,
    pub height: u32,
    pub counts: Vec<u32>,
    /// Number of contributing contours.
    pub draws: u32,
}

impl Heatmap {
    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.counts[y as usize * self.width as usize + x as usize]
    }

    pub fn max(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// 16-bit grayscale image holding the raw counts.
    pub fn to_image(&self) -> image::ImageBuffer<image::Luma<u16>, Vec<u16>> {
        image::ImageBuffer::from_fn(self.width, self.height, |x, y| {
            image::Luma([self.get(x, y).min(u16::MAX as u32) as u16])
        })
    }
}

/// Boundary line of one generated contour.
pub fn contour_line(filled: &BinaryMask, line_width: u32) -> Result<BinaryMask> {
    let (w, h) = filled.dims();
    let outline = trace_boundary(&largest_component(filled))?;
    Ok(draw_polyline(&outline, line_width, w, h, true))
}

/// Sums the boundary lines of `n` independently generated contours
/// (sample `i` uses `derive_seed(seed, i)`).
pub fn generate_heatmap(gt_mask: &BinaryMask, n: u32, seed: u64, line_width: u32) -> Result<Heatmap> {
    if n == 0 {
        return Err(Error::InvalidArgument("heatmap needs n >= 1".into()));
    }
    require_nonempty(gt_mask)?;
    let (w, h) = gt_mask.dims();
    let lines: Vec<BinaryMask> = (0..n)
        .into_par_iter()
        .map(|i| {
            let c = generate_contour(gt_mask, derive_seed(seed, i as u64))?;
            contour_line(&c.filled, line_width)
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u32; w as usize * h as usize];
    for line in &lines {
        for (c, &p) in counts.iter_mut().zip(line.pixels()) {
            *c += p as u32;
        }
    }
    Ok(Heatmap {
        width: w,
        height: h,
        counts,
        draws: n,
    })
}
