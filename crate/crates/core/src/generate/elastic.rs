//! Affine jitter followed by a smoothed random displacement field.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::mask::{BinaryMask, BoundingBox};
use crate::raster::bounding_box;

/// `p' = m · p + t`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub m: [[f64; 2]; 2],
    pub t: [f64; 2],
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        m: [[1.0, 0.0], [0.0, 1.0]],
        t: [0.0, 0.0],
    };

    /// Map sending the three `from` points onto the three `to` points.
    pub fn from_triangles(from: [(f64, f64); 3], to: [(f64, f64); 3]) -> Option<Affine> {
        let (u, v) = (sub(from[1], from[0]), sub(from[2], from[0]));
        let (up, vp) = (sub(to[1], to[0]), sub(to[2], to[0]));
        let det = u.0 * v.1 - u.1 * v.0;
        if det.abs() < 1e-12 {
            return None;
        }
        // inverse of [u v]
        let inv = [[v.1 / det, -v.0 / det], [-u.1 / det, u.0 / det]];
        let m = [
            [up.0 * inv[0][0] + vp.0 * inv[1][0], up.0 * inv[0][1] + vp.0 * inv[1][1]],
            [up.1 * inv[0][0] + vp.1 * inv[1][0], up.1 * inv[0][1] + vp.1 * inv[1][1]],
        ];
        let t = [
            to[0].0 - (m[0][0] * from[0].0 + m[0][1] * from[0].1),
            to[0].1 - (m[1][0] * from[0].0 + m[1][1] * from[0].1),
        ];
        Some(Affine { m, t })
    }

    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        (
            self.m[0][0] * p.0 + self.m[0][1] * p.1 + self.t[0],
            self.m[1][0] * p.0 + self.m[1][1] * p.1 + self.t[1],
        )
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Option<Affine> {
        let det = self.determinant();
        if det.abs() < 1e-9 {
            return None;
        }
        let m = [
            [self.m[1][1] / det, -self.m[0][1] / det],
            [-self.m[1][0] / det, self.m[0][0] / det],
        ];
        let t = [
            -(m[0][0] * self.t[0] + m[0][1] * self.t[1]),
            -(m[1][0] * self.t[0] + m[1][1] * self.t[1]),
        ];
        Some(Affine { m, t })
    }
}

fn sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

/// Gaussian-smoothed `U(−1, 1)` noise on a `width × height` grid.
///
/// For wide kernels the noise is accumulated in `b × b` blocks
/// (`b = ⌊σ / 4⌋`): each block sum of `b²` uniforms is drawn directly as a
/// normal with variance `b² / 3`, blurred on the block grid and bilinearly
/// interpolated back. At `b = 1` this is the exact per-pixel construction.
struct NoiseField {
    coarse: Vec<f64>,
    cw: usize,
    ch: usize,
    block: usize,
    kr: usize,
    width: usize,
    /// Per fine column: left coarse column and interpolation weight.
    columns: Vec<(usize, f64)>,
    /// Maximal fine column ranges `[start, end)` sharing a left coarse column.
    segments: Vec<(usize, usize, usize)>,
}

impl NoiseField {
    fn new<R: Rng>(width: usize, height: usize, sigma: f64, rng: &mut R) -> Self {
        let sigma = sigma.max(1e-3);
        let b = ((sigma / 4.0).floor() as usize).max(1);
        let kr = (3.0 * sigma / b as f64).ceil() as usize;
        let cw = width.div_ceil(b) + 2 * kr;
        let ch = height.div_ceil(b) + 2 * kr;

        let noise: Vec<f64> = if b == 1 {
            (0..cw * ch).map(|_| rng.random_range(-1.0..=1.0)).collect()
        } else {
            let normal = Normal::new(0.0, b as f64 / 3f64.sqrt()).expect("positive std");
            (0..cw * ch).map(|_| normal.sample(rng)).collect()
        };

        let raw: Vec<f64> = (-(kr as i64)..=kr as i64)
            .map(|k| {
                let d = k as f64 * b as f64;
                (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let norm = b as f64 * raw.iter().sum::<f64>();
        let taps: Vec<f64> = raw.iter().map(|t| t / norm).collect();

        let blur_axis = |src: &[f64], stride: usize, len: usize, count: usize, step: usize| {
            let mut out = vec![0.0; src.len()];
            for line in 0..count {
                let base = line * step;
                for i in 0..len {
                    let mut acc = 0.0;
                    for (k, t) in taps.iter().enumerate() {
                        let j = i as i64 + k as i64 - kr as i64;
                        if j >= 0 && (j as usize) < len {
                            acc += t * src[base + j as usize * stride];
                        }
                    }
                    out[base + i * stride] = acc;
                }
            }
            out
        };
        let horiz = blur_axis(&noise, 1, cw, ch, cw);
        let coarse = blur_axis(&horiz, cw, ch, cw, 1);
        let mut field = NoiseField {
            coarse,
            cw,
            ch,
            block: b,
            kr,
            width,
            columns: Vec::new(),
            segments: Vec::new(),
        };
        if b > 1 {
            field.columns = (0..width)
                .map(|x| {
                    let u = field.coarse_coord(x);
                    (u.floor() as usize, u - u.floor())
                })
                .collect();
            for (x, &(ix, _)) in field.columns.iter().enumerate() {
                match field.segments.last_mut() {
                    Some(seg) if seg.0 == ix => seg.2 = x + 1,
                    _ => field.segments.push((ix, x, x + 1)),
                }
            }
        }
        field
    }

    /// Position of fine pixel `i` on the coarse grid; block `j` covers fine
    /// pixels `[(j − kr)·b, (j − kr + 1)·b)`.
    fn coarse_coord(&self, i: usize) -> f64 {
        let b = self.block as f64;
        let origin = -(self.kr as f64) * b + (b - 1.0) / 2.0;
        (i as f64 - origin) / b
    }

    fn at(&self, cx: usize, cy: usize) -> f64 {
        self.coarse[cy.min(self.ch - 1) * self.cw + cx.min(self.cw - 1)]
    }

    /// Fine row `y`, using `scratch` for the row-interpolated coarse values.
    fn row(&self, y: usize, out: &mut [f64], scratch: &mut Vec<f64>) {
        if self.block == 1 {
            let start = (y + self.kr) * self.cw + self.kr;
            out.copy_from_slice(&self.coarse[start..start + self.width]);
            return;
        }
        self.coarse_row(y, scratch);
        for (v, &(ix, tx)) in out.iter_mut().zip(&self.columns) {
            *v = scratch[ix] * (1.0 - tx) + scratch[ix + 1] * tx;
        }
    }
}

impl NoiseField {
    /// Coarse row interpolated at fine row `y`.
    fn coarse_row(&self, y: usize, scratch: &mut Vec<f64>) {
        let uy = self.coarse_coord(y);
        let (iy, ty) = (uy.floor() as usize, uy - uy.floor());
        scratch.clear();
        scratch.extend((0..self.cw + 1).map(|cx| self.at(cx, iy) * (1.0 - ty) + self.at(cx, iy + 1) * ty));
    }
}

#[cfg(test)]
pub(crate) fn smoothed_noise<R: Rng>(width: usize, height: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    let field = NoiseField::new(width, height, sigma, rng);
    let mut out = vec![0.0; width * height];
    let mut scratch = Vec::new();
    for (y, row) in out.chunks_mut(width).enumerate() {
        field.row(y, row, &mut scratch);
    }
    out
}

const FIXED_ONE: f64 = (1u64 << 32) as f64;

/// Indices `k` in `0..len`, padded by one on each side, for which
/// `f0 + k · df` may fall in `[0, limit)`.
fn inside_range(f0: f64, df: f64, limit: f64, len: f64) -> (usize, usize) {
    let (lo, hi) = if df == 0.0 {
        if f0 >= 0.0 && f0 < limit {
            (0.0, len)
        } else {
            (0.0, 0.0)
        }
    } else {
        let (a, b) = (-f0 / df, (limit - f0) / df);
        (a.min(b) - 1.0, a.max(b) + 2.0)
    };
    let clamp = |v: f64| if v > 0.0 { v.min(len) as usize } else { 0 };
    (clamp(lo), clamp(hi))
}

/// Random affine jitter of the bbox triangle plus an elastic displacement
/// field, resampled with nearest neighbour. `object_size` scales all three
/// strength parameters.
pub fn elastic_deform<R: Rng>(
    mask: &BinaryMask,
    d_affine: f64,
    d_sigma: f64,
    d_alpha: f64,
    object_size: u32,
    rng: &mut R,
) -> BinaryMask {
    let Ok(bbox) = bounding_box(mask) else {
        return mask.clone();
    };
    let size = object_size as f64;
    let jitter = d_affine * size;
    let from = [
        (bbox.x0 as f64, bbox.y0 as f64),
        (bbox.x1 as f64, bbox.y0 as f64),
        (bbox.x0 as f64, bbox.y1 as f64),
    ];
    let mut draw = || rng.random_range(-jitter..=jitter);
    let to = from.map(|(x, y)| (x + draw(), y + draw()));
    let (w, h) = mask.dims();
    let empty = BinaryMask::new(w, h);
    let Some(forward) = Affine::from_triangles(from, to) else {
        return empty;
    };
    let Some(inverse) = forward.inverse() else {
        return empty;
    };

    let sigma = d_sigma * size;
    let alpha = d_alpha * size;
    // A normalized Gaussian of width σ averages U(−1,1) noise down to a
    // standard deviation of about 0.163 / σ.
    let expected_std = if sigma > 0.0 { 0.163 / sigma.max(0.5) } else { 1.0 };
    let margin = 2.0 + (alpha * (4.0 * expected_std).min(1.0)).ceil();

    let corners = [
        (bbox.x0 as f64, bbox.y0 as f64),
        (bbox.x1 as f64, bbox.y0 as f64),
        (bbox.x0 as f64, bbox.y1 as f64),
        (bbox.x1 as f64, bbox.y1 as f64),
    ]
    .map(|p| forward.apply(p));
    let lo_x = corners.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - margin;
    let hi_x = corners.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + margin;
    let lo_y = corners.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) - margin;
    let hi_y = corners.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) + margin;
    let x0 = lo_x.floor().clamp(0.0, w as f64) as u32;
    let x1 = hi_x.ceil().clamp(0.0, w as f64) as u32;
    let y0 = lo_y.floor().clamp(0.0, h as f64) as u32;
    let y1 = hi_y.ceil().clamp(0.0, h as f64) as u32;
    if x0 >= x1 || y0 >= y1 {
        return empty;
    }
    let roi = BoundingBox::new(x0, y0, x1, y1);
    let (rw, rh) = (roi.width() as usize, roi.height() as usize);

    let fields = (alpha > 0.0).then(|| (NoiseField::new(rw, rh, sigma, rng), NoiseField::new(rw, rh, sigma, rng)));
    let (mut fx, mut fy) = (vec![0.0; rw], vec![0.0; rw]);
    let (mut row_x, mut row_y) = (Vec::new(), Vec::new());
    let [[a, b], [c, d]] = inverse.m;
    let [tx, ty] = inverse.t;
    let (bx0, by0) = (bbox.x0 as f64, bbox.y0 as f64);
    let (bw, bh) = (bbox.width() as f64, bbox.height() as f64);
    let src = mask.pixels();
    let mut out = empty;
    let width = w as usize;
    let dst = out.pixels_mut();
    let src_origin = by0 as usize * width + bx0 as usize;
    let (bw_px, bh_px) = (bbox.width() as u64, bbox.height() as u64);
    // offsets from the source bbox corner; outside it nothing is set, inside
    // it truncation is floor
    let sample = |sx: f64, sy: f64| -> Option<bool> {
        (sx >= 0.0 && sy >= 0.0 && sx < bw && sy < bh).then(|| src[src_origin + sy as usize * width + sx as usize])
    };
    for y in 0..rh {
        let py_base = roi.y0 as f64 + y as f64 + 0.5;
        let row = &mut dst[(roi.y0 as usize + y) * width + roi.x0 as usize..][..rw];
        match &fields {
            Some((nx, ny)) if nx.block > 1 => {
                // bilinear noise is linear in x within a segment
                nx.coarse_row(y, &mut row_x);
                ny.coarse_row(y, &mut row_y);
                let step = 1.0 / nx.block as f64;
                for &(ix, start, end) in &nx.segments {
                    let t0 = nx.columns[start].1;
                    let (gx, gy) = (row_x[ix + 1] - row_x[ix], row_y[ix + 1] - row_y[ix]);
                    let px = roi.x0 as f64 + start as f64 + 0.5 + alpha * (row_x[ix] + gx * t0);
                    let py = py_base + alpha * (row_y[ix] + gy * t0);
                    let (dpx, dpy) = (1.0 + alpha * gx * step, alpha * gy * step);
                    let sx0 = a * px + b * py + tx - bx0;
                    let sy0 = c * px + d * py + ty - by0;
                    let (dsx, dsy) = (a * dpx + b * dpy, c * dpx + d * dpy);
                    let len = (end - start) as f64;
                    let (k_lo, k_hi) = inside_range(sx0, dsx, bw, len);
                    let (k_lo2, k_hi2) = inside_range(sy0, dsy, bh, len);
                    let (k_lo, k_hi) = (k_lo.max(k_lo2), k_hi.min(k_hi2));
                    if k_lo >= k_hi {
                        continue;
                    }
                    // 32.32 fixed point; the wrapped unsigned compare rejects
                    // negative coordinates too
                    let fixed = |v: f64| (v * FIXED_ONE) as i64;
                    let (mut fx, mut fy) = (fixed(sx0 + k_lo as f64 * dsx), fixed(sy0 + k_lo as f64 * dsy));
                    let (step_x, step_y) = (fixed(dsx), fixed(dsy));
                    for p in &mut row[start + k_lo..start + k_hi] {
                        let (ix, iy) = ((fx >> 32) as u64, (fy >> 32) as u64);
                        if ix < bw_px && iy < bh_px {
                            *p = src[src_origin + iy as usize * width + ix as usize];
                        }
                        fx += step_x;
                        fy += step_y;
                    }
                }
            }
            _ => {
                if let Some((nx, ny)) = &fields {
                    nx.row(y, &mut fx, &mut row_x);
                    ny.row(y, &mut fy, &mut row_y);
                }
                for (x, p) in row.iter_mut().enumerate() {
                    let px = roi.x0 as f64 + x as f64 + 0.5 + alpha * fx[x];
                    let py = py_base + alpha * fy[x];
                    if let Some(v) = sample(a * px + b * py + tx - bx0, c * px + d * py + ty - by0) {
                        *p = v;
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn zero_strength_is_identity() {
        let m = BinaryMask::from_fn(40, 30, |x, y| (x as i64 - 20).pow(2) + (y as i64 - 15).pow(2) < 80);
        let out = elastic_deform(&m, 0.0, 0.6, 0.0, 20, &mut stream("t", 1, 0));
        assert_eq!(out, m);
    }

    #[test]
    fn affine_from_triangles_roundtrip() {
        let from = [(0.0, 0.0), (10.0, 0.0), (0.0, 5.0)];
        let to = [(1.0, 2.0), (9.0, 3.0), (-1.0, 8.0)];
        let a = Affine::from_triangles(from, to).unwrap();
        for (p, q) in from.iter().zip(&to) {
            let r = a.apply(*p);
            assert!((r.0 - q.0).abs() < 1e-9 && (r.1 - q.1).abs() < 1e-9);
        }
        let inv = a.inverse().unwrap();
        let back = inv.apply(a.apply((3.3, -2.1)));
        assert!((back.0 - 3.3).abs() < 1e-9 && (back.1 + 2.1).abs() < 1e-9);
        assert!(Affine::from_triangles(from, [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])
            .unwrap()
            .inverse()
            .is_none());
    }

    #[test]
    fn noise_is_bounded_and_deterministic() {
        for sigma in [0.8, 3.0, 25.0] {
            let a = smoothed_noise(37, 23, sigma, &mut stream("n", 3, 0));
            let b = smoothed_noise(37, 23, sigma, &mut stream("n", 3, 0));
            assert_eq!(a, b);
            assert_eq!(a.len(), 37 * 23);
            assert!(a.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn block_noise_variance_matches_fine_noise() {
        // Var of a Gaussian-smoothed U(−1,1) field ≈ (1/3) / (4πσ²).
        let sigma = 12.0;
        let expected = (1.0 / 3.0) / (4.0 * std::f64::consts::PI * sigma * sigma);
        let mut acc = 0.0;
        let mut n = 0.0;
        for seed in 0..40 {
            let f = smoothed_noise(64, 64, sigma, &mut stream("v", seed, 0));
            acc += f.iter().map(|v| v * v).sum::<f64>();
            n += f.len() as f64;
        }
        let var = acc / n;
        assert!(
            var > 0.5 * expected && var < 2.0 * expected,
            "var {var} expected {expected}"
        );
    }

    #[test]
    fn square_stays_mostly_nonempty() {
        let m = BinaryMask::from_fn(128, 128, |x, y| (44..84).contains(&x) && (44..84).contains(&y));
        let mut nonempty = 0;
        for seed in 0..1000 {
            let mut rng = stream("sq", seed, 0);
            let out = elastic_deform(&m, 0.5, 0.6, 1.0, 40, &mut rng);
            nonempty += (!out.is_empty()) as usize;
        }
        assert!(nonempty >= 990, "{nonempty}");
    }
}
