//! Polygons in normalized image coordinates, scanline filling and thick
//! polyline stamping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// Ordered vertices in normalized image coordinates (`x` along the width,
/// `y` along the height, both nominally in `[0, 1]`). Consecutive duplicate
/// vertices are removed on construction.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContourPolygon {
    vertices: Vec<[f64; 2]>,
}

impl ContourPolygon {
    pub fn new(vertices: impl IntoIterator<Item = [f64; 2]>) -> Self {
        let mut out: Vec<[f64; 2]> = Vec::new();
        for v in vertices {
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        Self { vertices: out }
    }

    /// Builds a polygon from pixel-space points of a `width × height` frame.
    pub fn from_pixels(points: impl IntoIterator<Item = (f64, f64)>, width: u32, height: u32) -> Self {
        Self::new(points.into_iter().map(|(x, y)| [x / width as f64, y / height as f64]))
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.len() >= 2 && self.vertices.first() == self.vertices.last()
    }

    /// Appends the first vertex when the path is open. Idempotent.
    pub fn closed(&self) -> Result<ContourPolygon> {
        if self.vertices.len() < 2 {
            return Err(Error::DegenerateContour(format!(
                "{} vertices, need at least 2",
                self.vertices.len()
            )));
        }
        let mut vertices = self.vertices.clone();
        if !self.is_closed() {
            vertices.push(vertices[0]);
        }
        Ok(ContourPolygon { vertices })
    }

    pub fn to_pixels(&self, width: u32, height: u32) -> Vec<(f64, f64)> {
        self.vertices
            .iter()
            .map(|[x, y]| (x * width as f64, y * height as f64))
            .collect()
    }

    /// Signed shoelace area in normalized units.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..n {
            let [x0, y0] = self.vertices[i];
            let [x1, y1] = self.vertices[(i + 1) % n];
            acc += x0 * y1 - x1 * y0;
        }
        acc * 0.5
    }

    /// True when any coordinate falls outside `[0, 1]`.
    pub fn out_of_range(&self) -> bool {
        self.vertices
            .iter()
            .flatten()
            .any(|&c| !(0.0..=1.0).contains(&c) || c.is_nan())
    }

    pub fn flip_horizontal(&self) -> ContourPolygon {
        ContourPolygon {
            vertices: self.vertices.iter().map(|&[x, y]| [1.0 - x, y]).collect(),
        }
    }
}

/// Result of filling a polygon.
#[derive(Clone, Debug, PartialEq)]
pub struct Rasterization {
    pub mask: BinaryMask,
    /// Set when the polygon encloses zero area; the mask is then empty.
    pub degenerate: bool,
}

/// Even-odd scanline fill. Vertex `(x, y)` maps to pixel coordinate
/// `(x · width, y · height)`; a pixel is foreground iff its centre
/// `(col + 0.5, row + 0.5)` is inside.
pub fn rasterize_polygon(poly: &ContourPolygon, width: u32, height: u32) -> Rasterization {
    let degenerate = poly.len() < 3 || poly.signed_area() == 0.0;
    if degenerate {
        return Rasterization {
            mask: BinaryMask::new(width, height),
            degenerate,
        };
    }
    Rasterization {
        mask: fill_pixel_polygon(&poly.to_pixels(width, height), width, height),
        degenerate,
    }
}

/// Scanline fill of a pixel-space polygon (implicitly closed).
pub(crate) fn fill_pixel_polygon(vertices: &[(f64, f64)], width: u32, height: u32) -> BinaryMask {
    let mut mask = BinaryMask::new(width, height);
    let w = width as usize;
    let px = mask.pixels_mut();
    polygon_spans(vertices, width, height, |row, lo, hi| {
        px[row as usize * w + lo as usize..row as usize * w + hi as usize].fill(true);
    });
    mask
}

/// Even-odd scanline spans `[lo, hi)` of pixel columns whose centres lie in
/// the polygon, per pixel row. A centre on a left edge is inside, on a right
/// edge outside.
pub(crate) fn polygon_spans(vertices: &[(f64, f64)], width: u32, height: u32, mut emit: impl FnMut(u32, u32, u32)) {
    let n = vertices.len();
    if n < 3 {
        return;
    }
    let (ymin, ymax) = vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    if !ymin.is_finite() || !ymax.is_finite() {
        return;
    }
    let row_lo = (ymin - 0.5).floor().max(0.0) as u32;
    let row_hi = ((ymax - 0.5).ceil() + 1.0).clamp(0.0, height as f64) as u32;
    let mut xs: Vec<f64> = Vec::new();
    for row in row_lo..row_hi {
        let py = row as f64 + 0.5;
        xs.clear();
        for i in 0..n {
            let (xi, yi) = vertices[i];
            let (xj, yj) = vertices[(i + n - 1) % n];
            if (yi > py) != (yj > py) {
                xs.push((xj - xi) * (py - yi) / (yj - yi) + xi);
            }
        }
        xs.sort_by(|a, b| a.total_cmp(b));
        for span in xs.chunks_exact(2) {
            let (xa, xb) = (span[0], span[1]);
            // first column with centre ≥ xa, first column with centre ≥ xb
            let first_at_or_after = |v: f64| {
                let mut col = ((v - 0.5).ceil() - 1.0).clamp(0.0, width as f64) as u32;
                while col < width && (col as f64 + 0.5) < v {
                    col += 1;
                }
                col
            };
            let (lo, hi) = (first_at_or_after(xa), first_at_or_after(xb));
            if lo < hi {
                emit(row, lo, hi);
            }
        }
    }
}

fn segment_distance_sq(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    cx * cx + cy * cy
}

/// Marks every pixel whose centre lies within `line_width / 2` of the path
/// (round caps and joins). With `close`, the last vertex is joined to the first.
pub fn draw_polyline(poly: &ContourPolygon, line_width: u32, width: u32, height: u32, close: bool) -> BinaryMask {
    let mut mask = BinaryMask::new(width, height);
    let pts = poly.to_pixels(width, height);
    let half = line_width.max(1) as f64 / 2.0;
    let mut segments: Vec<((f64, f64), (f64, f64))> = match pts.len() {
        0 => return mask,
        1 => vec![(pts[0], pts[0])],
        _ => pts.windows(2).map(|w| (w[0], w[1])).collect(),
    };
    if close && pts.len() > 2 {
        segments.push((pts[pts.len() - 1], pts[0]));
    }
    for (a, b) in segments {
        stamp_segment(&mut mask, a, b, half);
    }
    mask
}

fn stamp_segment(mask: &mut BinaryMask, a: (f64, f64), b: (f64, f64), half: f64) {
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    let x_lo = (a.0.min(b.0) - half - 1.0).floor().max(0.0);
    let x_hi = (a.0.max(b.0) + half + 1.0).ceil().min(w);
    let y_lo = (a.1.min(b.1) - half - 1.0).floor().max(0.0);
    let y_hi = (a.1.max(b.1) + half + 1.0).ceil().min(h);
    if x_lo >= x_hi || y_lo >= y_hi {
        return;
    }
    let r2 = half * half;
    for y in y_lo as u32..y_hi as u32 {
        for x in x_lo as u32..x_hi as u32 {
            if segment_distance_sq((x as f64 + 0.5, y as f64 + 0.5), a, b) <= r2 {
                mask.set(x, y, true);
            }
        }
    }
}
