use crate::encoding::{EncodingMode, InteractionEncoding};
use crate::error::{Error, Result};
use crate::generate::Polarity;
use crate::mask::{BinaryMask, ProbabilityMask};
use crate::raster::edt::squared_edt;

use super::Click;

/// Next simulated click: inside the larger of the false-negative and
/// false-positive regions (ties go to false negatives), at the pixel farthest
/// from the region boundary. The image edge counts as boundary. Ties go to the
/// first pixel in row-major order.
pub fn simulate_next_click(gt: &BinaryMask, pred: &BinaryMask) -> Result<Click> {
    next_click(gt, pred).map(|(c, _)| c)
}

/// The next click and the largest disk radius around it that stays inside
/// its error region.
pub fn next_click_with_clearance(gt: &BinaryMask, pred: &BinaryMask) -> Result<(Click, u32)> {
    let (click, d2) = next_click(gt, pred)?;
    // every pixel closer than the nearest outside pixel is inside
    Ok((click, (d2 - 1).isqrt() as u32))
}

fn next_click(gt: &BinaryMask, pred: &BinaryMask) -> Result<(Click, u64)> {
    let false_neg = gt.difference(pred)?;
    let false_pos = pred.difference(gt)?;
    if false_neg.is_empty() && false_pos.is_empty() {
        return Err(Error::Converged);
    }
    let (region, polarity) = if false_neg.count() >= false_pos.count() {
        (false_neg, Polarity::Positive)
    } else {
        (false_pos, Polarity::Negative)
    };
    let (w, h) = region.dims();
    let (pw, ph) = (w as usize + 2, h as usize + 2);
    let dist = squared_edt(pw, ph, |i| {
        let (x, y) = (i % pw, i / pw);
        x == 0 || y == 0 || x == pw - 1 || y == ph - 1 || !region.get(x as u32 - 1, y as u32 - 1)
    });
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (x, y) in region.foreground() {
        let d = dist[(y as usize + 1) * pw + x as usize + 1];
        if d > best.0 {
            best = (d, x, y);
        }
    }
    let click = Click {
        x: best.1,
        y: best.2,
        polarity,
    };
    Ok((click, best.0 as u64))
}

/// Filled encoding of clicks as disks of the paired radius in pixels, with the
/// previous prediction in the third plane.
pub fn click_encoding(
    clicks: &[(Click, u32)],
    dims: (u32, u32),
    previous: Option<&ProbabilityMask>,
) -> Result<InteractionEncoding> {
    let (w, h) = dims;
    let mut enc = InteractionEncoding::blank(w, h, EncodingMode::Filled);
    if let Some(p) = previous {
        if p.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: p.dims(),
            });
        }
        enc.previous = p.clone();
    }
    for (c, radius) in clicks {
        let r = *radius as i64;
        if c.x >= w || c.y >= h {
            return Err(Error::InvalidArgument(format!(
                "click ({}, {}) outside the image",
                c.x, c.y
            )));
        }
        let plane = match c.polarity {
            Polarity::Positive => &mut enc.positive,
            Polarity::Negative => &mut enc.negative,
        };
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
                if x >= 0 && y >= 0 && x < w as i64 && y < h as i64 {
                    plane.set(x as u32, y as u32, true);
                }
            }
        }
    }
    Ok(enc)
}
