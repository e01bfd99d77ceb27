//! Hole filling, disk dilation/erosion and connected components.
//!
//! Foreground connectivity is 8, background connectivity is 4.

use serde::{Deserialize, Serialize};

use super::geometry::bounding_box;
use super::runs::RunSet;
use crate::mask::{BinaryMask, BoundingBox};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphKind {
    Dilate,
    Erode,
}

/// Sets every background pixel that is not 4-connected to the frame border.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let Ok(bbox) = bounding_box(mask) else {
        return mask.clone();
    };
    let (w, h) = mask.dims();
    // Background outside the foreground bbox always reaches the border, so
    // only the bbox plus a one pixel ring matters.
    let roi = bbox.expand(1, w, h);
    let background = RunSet::scan(mask, &roi, false);
    let (labels, n) = background.label(false);
    let mut outside = vec![false; n];
    let last_row = background.rows() - 1;
    for r in 0..background.rows() {
        for k in background.row_offset(r)..background.row_offset(r + 1) {
            let run = background.runs[k];
            if r == 0 || r == last_row || run.x0 == roi.x0 || run.x1 == roi.x1 {
                outside[labels[k] as usize] = true;
            }
        }
    }
    let mut out = mask.clone();
    background.paint(&mut out, true, |k| !outside[labels[k] as usize]);
    out
}

/// Offsets of the disk structuring element of diameter `kernel_size`
/// (`dx² + dy² ≤ r²`, `r = (kernel_size − 1) / 2`).
pub fn structuring_element(kernel_size: u32) -> Vec<(i64, i64)> {
    let r = (kernel_size.max(1) as i64 - 1) / 2;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                offsets.push((dx, dy));
            }
        }
    }
    offsets
}

/// Half-widths of the disk rows: `hw[|dy|] = ⌊√(r² − dy²)⌋`.
fn disk_half_widths(r: u32) -> Vec<u32> {
    let r2 = r as u64 * r as u64;
    (0..=r as u64)
        .map(|dy| {
            let rest = r2 - dy * dy;
            let mut x = (rest as f64).sqrt() as u64;
            while x * x > rest {
                x -= 1;
            }
            while (x + 1) * (x + 1) <= rest {
                x += 1;
            }
            x as u32
        })
        .collect()
}

/// Pixels of `target` within disk distance `r` of a run of `source`, reported
/// per target row as a coverage count over `target`'s columns.
fn disk_cover(source: &RunSet, r: u32, target: &BoundingBox, mut emit: impl FnMut(u32, &[i32])) {
    let hw = disk_half_widths(r);
    let width = target.width() as usize;
    let mut cover = vec![0i32; width + 1];
    let src_lo = source.y0 as i64;
    let src_hi = src_lo + source.rows() as i64;
    for y in target.y0..target.y1 {
        cover.fill(0);
        let lo = (y as i64 - r as i64).max(src_lo);
        let hi = (y as i64 + r as i64 + 1).min(src_hi);
        for sy in lo..hi {
            let half = hw[(sy - y as i64).unsigned_abs() as usize] as i64;
            for run in source.row((sy - src_lo) as usize) {
                let a = (run.x0 as i64 - half).max(target.x0 as i64);
                let b = (run.x1 as i64 + half).min(target.x1 as i64);
                if a < b {
                    cover[(a - target.x0 as i64) as usize] += 1;
                    cover[(b - target.x0 as i64) as usize] -= 1;
                }
            }
        }
        let mut acc = 0;
        for c in cover.iter_mut().take(width) {
            acc += *c;
            *c = acc;
        }
        emit(y, &cover[..width]);
    }
}

/// Dilation or erosion with a disk of diameter `kernel_size` (odd, ≥ 1).
///
/// Pixels outside the frame act as background for dilation and do not erode
/// the mask from the border.
pub fn morph_transform(mask: &BinaryMask, kind: MorphKind, kernel_size: u32) -> BinaryMask {
    let r = (kernel_size.max(1) - 1) / 2;
    if r == 0 {
        return mask.clone();
    }
    let Ok(bbox) = bounding_box(mask) else {
        return mask.clone();
    };
    let (w, h) = mask.dims();
    let roi = bbox.expand(r, w, h);
    let width = w as usize;
    let mut out = mask.clone();
    match kind {
        MorphKind::Dilate => {
            let fg = RunSet::scan(mask, &bbox, true);
            let px = out.pixels_mut();
            disk_cover(&fg, r, &roi, |y, cover| {
                let row = &mut px[y as usize * width + roi.x0 as usize..][..cover.len()];
                for (p, &c) in row.iter_mut().zip(cover) {
                    *p |= c > 0;
                }
            });
        }
        MorphKind::Erode => {
            // Background farther than r from the bbox cannot reach it.
            let bg = RunSet::scan(mask, &roi, false);
            let px = out.pixels_mut();
            disk_cover(&bg, r, &bbox, |y, cover| {
                let row = &mut px[y as usize * width + bbox.x0 as usize..][..cover.len()];
                for (p, &c) in row.iter_mut().zip(cover) {
                    *p &= c == 0;
                }
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub area: usize,
    pub bbox: BoundingBox,
}

fn components(mask: &BinaryMask) -> Option<(RunSet, Vec<u32>, Vec<Component>)> {
    let bbox = bounding_box(mask).ok()?;
    let runs = RunSet::scan(mask, &bbox, true);
    let (labels, n) = runs.label(true);
    let mut comps: Vec<Option<Component>> = vec![None; n];
    for r in 0..runs.rows() {
        let y = runs.y0 + r as u32;
        for k in runs.row_offset(r)..runs.row_offset(r + 1) {
            let run = runs.runs[k];
            let len = (run.x1 - run.x0) as usize;
            match &mut comps[labels[k] as usize] {
                slot @ None => {
                    *slot = Some(Component {
                        area: len,
                        bbox: BoundingBox::new(run.x0, y, run.x1, y + 1),
                    })
                }
                Some(c) => {
                    c.area += len;
                    c.bbox.x0 = c.bbox.x0.min(run.x0);
                    c.bbox.x1 = c.bbox.x1.max(run.x1);
                    c.bbox.y1 = y + 1;
                }
            }
        }
    }
    let comps = comps.into_iter().map(|c| c.expect("every label has a run")).collect();
    Some((runs, labels, comps))
}

/// 8-connected foreground labelling. Returns a label per pixel (0 = background,
/// components numbered from 1 in raster-scan discovery order) and the
/// component summaries indexed by `label − 1`.
pub fn label_components(mask: &BinaryMask) -> (Vec<u32>, Vec<Component>) {
    let (w, h) = mask.dims();
    let mut pixel_labels = vec![0u32; w as usize * h as usize];
    let Some((runs, labels, comps)) = components(mask) else {
        return (pixel_labels, Vec::new());
    };
    for r in 0..runs.rows() {
        let y = (runs.y0 as usize + r) * w as usize;
        let span = runs.row_offset(r)..runs.row_offset(r + 1);
        for (run, &label) in runs.runs[span.clone()].iter().zip(&labels[span]) {
            pixel_labels[y + run.x0 as usize..y + run.x1 as usize].fill(label + 1);
        }
    }
    (pixel_labels, comps)
}

pub fn component_count(mask: &BinaryMask) -> usize {
    match bounding_box(mask) {
        Ok(bbox) => RunSet::scan(mask, &bbox, true).label(true).1,
        Err(_) => 0,
    }
}

/// Keeps the largest 8-connected component. Ties go to the component whose
/// bbox has the smallest `(y0, x0)`. An empty mask stays empty.
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let Some((runs, labels, comps)) = components(mask) else {
        return mask.clone();
    };
    if comps.len() <= 1 {
        return mask.clone();
    }
    let best = comps
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            b.area
                .cmp(&a.area)
                .then(a.bbox.y0.cmp(&b.bbox.y0))
                .then(a.bbox.x0.cmp(&b.bbox.x0))
        })
        .map(|(i, _)| i as u32)
        .expect("at least two components");
    let (w, h) = mask.dims();
    let mut out = BinaryMask::new(w, h);
    runs.paint(&mut out, true, |k| labels[k] == best);
    out
}
