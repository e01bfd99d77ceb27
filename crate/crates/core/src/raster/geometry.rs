use crate::error::{Error, Result};
use crate::mask::{as_bytes, BinaryMask, BoundingBox};

use super::polygon::polygon_spans;
use super::runs::RunSet;

/// Intersection over union; two empty masks score 1.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &q) in a.pixels().iter().zip(b.pixels()) {
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Tight box around the foreground.
pub fn bounding_box(mask: &BinaryMask) -> Result<BoundingBox> {
    let w = mask.dims().0 as usize;
    let px = as_bytes(mask.pixels());
    let first = memchr::memchr(1, px).ok_or(Error::EmptyMask)?;
    let last = memchr::memrchr(1, px).expect("a foreground pixel exists");
    let (y0, y1) = (first / w, last / w + 1);
    let (mut x0, mut x1) = (first % w, last % w + 1);
    for row in px[y0 * w..y1 * w].chunks_exact(w) {
        if let Some(x) = memchr::memchr(1, &row[..x0]) {
            x0 = x;
        }
        if let Some(x) = memchr::memrchr(1, &row[x1..]) {
            x1 += x + 1;
        }
    }
    Ok(BoundingBox::new(x0 as u32, y0 as u32, x1 as u32, y1 as u32))
}

/// Convex hull (counter-clockwise in image coordinates, i.e. with y down)
/// of the corners of all foreground pixel squares.
pub fn convex_hull_corners(mask: &BinaryMask) -> Result<Vec<(i64, i64)>> {
    let bbox = bounding_box(mask)?;
    Ok(hull_of_runs(&RunSet::scan(mask, &bbox, true)))
}

fn hull_of_runs(runs: &RunSet) -> Vec<(i64, i64)> {
    let mut points = Vec::new();
    for r in 0..runs.rows() {
        let row = runs.row(r);
        if let (Some(first), Some(last)) = (row.first(), row.last()) {
            let y = (runs.y0 as usize + r) as i64;
            let (l, r) = (first.x0 as i64, last.x1 as i64);
            points.extend([(l, y), (l, y + 1), (r, y), (r, y + 1)]);
        }
    }
    monotone_chain(points)
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn monotone_chain(mut points: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    points.sort_unstable();
    points.dedup();
    if points.len() < 3 {
        return points;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(points.len() * 2);
    for &p in &points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in points.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Foreground area over rasterized convex-hull area.
///
/// The hull spans the pixel squares (not just their centres) so that every
/// foreground pixel centre is strictly inside it; the ratio is then always in
/// `(0, 1]` and exactly 1 for rectangles.
pub fn convexity_ratio(mask: &BinaryMask) -> Result<f64> {
    let runs = RunSet::scan(mask, &bounding_box(mask)?, true);
    let area: usize = runs.runs.iter().map(|run| (run.x1 - run.x0) as usize).sum();
    let hull = hull_of_runs(&runs);
    let vertices: Vec<(f64, f64)> = hull.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
    let (w, h) = mask.dims();
    let mut hull_area = 0usize;
    polygon_spans(&vertices, w, h, |_, lo, hi| hull_area += (hi - lo) as usize);
    Ok(area as f64 / hull_area.max(1) as f64)
}
