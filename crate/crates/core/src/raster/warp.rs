use super::geometry::bounding_box;
use super::runs::RunSet;
use crate::mask::BinaryMask;

/// Mean of foreground pixel centres, in pixel coordinates.
pub fn centroid(mask: &BinaryMask) -> Option<(f64, f64)> {
    let bbox = bounding_box(mask).ok()?;
    Some(centroid_of_runs(&RunSet::scan(mask, &bbox, true)))
}

fn centroid_of_runs(runs: &RunSet) -> (f64, f64) {
    // exact integer sums of doubled centre coordinates
    let (mut sx2, mut sy2, mut n) = (0u128, 0u128, 0u128);
    for r in 0..runs.rows() {
        let y = (runs.y0 as usize + r) as u128;
        for run in runs.row(r) {
            let (a, b) = (run.x0 as u128, run.x1 as u128);
            sx2 += b * b - a * a;
            sy2 += (b - a) * (2 * y + 1);
            n += b - a;
        }
    }
    let n2 = 2.0 * n as f64;
    (sx2 as f64 / n2, sy2 as f64 / n2)
}

/// Source index of `dst` under the inverse scaling about `c`, if in `0..len`.
fn inverse_index(dst: u32, c: f64, factor: f64, len: u32) -> Option<usize> {
    let s = (c + (dst as f64 + 0.5 - c) / factor).floor();
    (s >= 0.0 && s < len as f64).then_some(s as usize)
}

/// Nearest-neighbour rescaling of the foreground about its centroid. The
/// frame size is unchanged; anything scaled out of frame is lost.
pub fn scale_about_centroid(mask: &BinaryMask, factor: f64) -> BinaryMask {
    assert!(factor > 0.0, "scale factor must be positive");
    let Ok(bbox) = bounding_box(mask) else {
        return mask.clone();
    };
    if factor == 1.0 {
        return mask.clone();
    }
    let runs = RunSet::scan(mask, &bbox, true);
    let (cx, cy) = centroid_of_runs(&runs);
    let (w, h) = mask.dims();
    let mut out = BinaryMask::new(w, h);
    let lo_x = (cx + (bbox.x0 as f64 - cx) * factor).floor() - 1.0;
    let hi_x = (cx + (bbox.x1 as f64 - cx) * factor).ceil() + 1.0;
    let lo_y = (cy + (bbox.y0 as f64 - cy) * factor).floor() - 1.0;
    let hi_y = (cy + (bbox.y1 as f64 - cy) * factor).ceil() + 1.0;
    let x_range = lo_x.max(0.0) as u32..hi_x.clamp(0.0, w as f64) as u32;
    let y_range = lo_y.max(0.0) as u32..hi_y.clamp(0.0, h as f64) as u32;
    // first[s]: first destination column (from x_range.start) whose source
    // column is ≥ s; the inverse map is monotone in x
    let mut first = vec![x_range.end as usize; w as usize + 1];
    let mut next = 0;
    for x in x_range.clone() {
        let s = (cx + (x as f64 + 0.5 - cx) / factor).floor();
        if s < 0.0 {
            continue;
        }
        let s = s.min(w as f64) as usize;
        while next <= s {
            first[next] = x as usize;
            next += 1;
        }
    }
    let width = w as usize;
    let dst = out.pixels_mut();
    for y in y_range {
        let Some(sy) = inverse_index(y, cy, factor, h) else {
            continue;
        };
        if sy < bbox.y0 as usize || sy >= bbox.y1 as usize {
            continue;
        }
        let dst_row = &mut dst[y as usize * width..(y as usize + 1) * width];
        for run in runs.row(sy - bbox.y0 as usize) {
            let (a, b) = (first[run.x0 as usize], first[run.x1 as usize]);
            if a < b {
                dst_row[a..b].fill(true);
            }
        }
    }
    out
}

/// Integer translation; pixels leaving the frame are dropped.
pub fn shift_clipped(mask: &BinaryMask, dx: i64, dy: i64) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut out = BinaryMask::new(w, h);
    let Ok(bbox) = bounding_box(mask) else {
        return out;
    };
    let (w, h) = (w as i64, h as i64);
    let x_lo = (bbox.x0 as i64).max(-dx);
    let x_hi = (bbox.x1 as i64).min(w - dx);
    if x_lo >= x_hi {
        return out;
    }
    let width = w as usize;
    let src = mask.pixels();
    let dst = out.pixels_mut();
    for y in bbox.y0 as i64..bbox.y1 as i64 {
        let ny = y + dy;
        if ny < 0 || ny >= h {
            continue;
        }
        let from = y as usize * width + x_lo as usize;
        let to = ny as usize * width + (x_lo + dx) as usize;
        let len = (x_hi - x_lo) as usize;
        dst[to..to + len].copy_from_slice(&src[from..from + len]);
    }
    out
}
