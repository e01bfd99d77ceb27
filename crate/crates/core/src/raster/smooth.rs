use super::geometry::bounding_box;
use super::runs::RunSet;
use crate::mask::BinaryMask;

/// Standard deviation used for a Gaussian kernel of the given (odd) size.
pub fn sigma_for_kernel(kernel_size: u32) -> f64 {
    0.3 * ((kernel_size as f64 - 1.0) * 0.5 - 1.0) + 0.8
}

/// Normalized 1-D Gaussian taps for a kernel of `kernel_size` (odd).
pub fn gaussian_kernel(kernel_size: u32) -> Vec<f64> {
    let radius = (kernel_size.max(1) - 1) / 2;
    let sigma = sigma_for_kernel(kernel_size);
    let taps: Vec<f64> = (-(radius as i64)..=radius as i64)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Adds (or with `sign` false, removes) one row of horizontal sums to the
/// per-column counts of nonzero and not-full values.
fn shift_row(row: &[f64], full: f64, sign: bool, nonzero: &mut [u32], partial: &mut [u32]) {
    let counts = nonzero.iter_mut().zip(partial.iter_mut()).zip(row);
    if sign {
        for ((n, p), &v) in counts {
            *n = n.wrapping_add((v != 0.0) as u32);
            *p = p.wrapping_add((v != full) as u32);
        }
    } else {
        for ((n, p), &v) in counts {
            *n = n.wrapping_sub((v != 0.0) as u32);
            *p = p.wrapping_sub((v != full) as u32);
        }
    }
}

/// Gaussian blur of the 0/1 raster followed by re-binarization at 0.5.
/// Frame edges replicate the outermost pixels.
pub fn gaussian_smooth(mask: &BinaryMask, kernel_size: u32) -> BinaryMask {
    let radius = (kernel_size.max(1) - 1) / 2;
    if radius == 0 {
        return mask.clone();
    }
    let Ok(bbox) = bounding_box(mask) else {
        return mask.clone();
    };
    let (w, h) = mask.dims();
    // Outside bbox + radius the response is zero; clamping to this region
    // replicates either the true frame edge or background.
    let roi = bbox.expand(radius, w, h);
    let rw = roi.width() as usize;
    let rh = roi.height() as usize;
    let taps = gaussian_kernel(kernel_size);
    let r = radius as usize;
    let span = 2 * r + 1;
    // cumulative[j] = taps[0] + … + taps[j − 1]
    let mut cumulative = vec![0.0; span + 1];
    for (j, t) in taps.iter().enumerate() {
        cumulative[j + 1] = cumulative[j] + t;
    }
    let full = cumulative[span];

    // Horizontal pass from the runs: a run [a, b) adds the taps that fall
    // inside it, a difference of two cumulative sums.
    let runs = RunSet::scan(mask, &roi, true);
    let mut horiz = vec![0.0; rw * rh];
    for row in 0..rh {
        let out = &mut horiz[row * rw..(row + 1) * rw];
        for run in runs.row(row) {
            let a = (run.x0 - roi.x0) as i64;
            let b = (run.x1 - roi.x0) as i64;
            // replicate the edge pixels of the window
            let a_ext = if a == 0 { -(span as i64) } else { a };
            let b_ext = if b == rw as i64 { rw as i64 + span as i64 } else { b };
            let lo = (a - r as i64).max(0) as usize;
            let hi = ((b + r as i64) as usize).min(rw);
            // the whole window lies inside the run on [a_ext + r, b_ext − r]
            let in_lo = ((a_ext + r as i64).max(lo as i64) as usize).min(hi);
            let in_hi = ((b_ext - r as i64).min(hi as i64).max(in_lo as i64)) as usize;
            let edge = |x: usize| {
                let x = x as i64 - r as i64;
                let t0 = (a_ext - x).clamp(0, span as i64) as usize;
                let t1 = (b_ext - x).clamp(0, span as i64) as usize;
                cumulative[t1] - cumulative[t0]
            };
            for x in (lo..in_lo).chain(in_hi..hi) {
                out[x] += edge(x);
            }
            let inside = cumulative[span] - cumulative[0];
            for v in &mut out[in_lo..in_hi] {
                *v += inside;
            }
        }
    }

    // Vertical pass, computed only where the window mixes values; elsewhere
    // it is all zero (0) or all full rows (≈ 1). Per column, the window
    // counts rows that are nonzero and rows that are not full.
    let mut nonzero = vec![0u32; rw];
    let mut partial = vec![0u32; rw];
    let clamp_row = |y: i64| y.clamp(0, rh as i64 - 1) as usize;
    let shift = |row: usize, sign: bool, nonzero: &mut [u32], partial: &mut [u32]| {
        shift_row(&horiz[row * rw..(row + 1) * rw], full, sign, nonzero, partial);
    };
    for t in 0..span {
        shift(clamp_row(t as i64 - r as i64), true, &mut nonzero, &mut partial);
    }
    let mut out = mask.clone();
    let width = w as usize;
    let px = out.pixels_mut();
    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut acc = vec![0.0; rw];
    for y in 0..rh {
        if y > 0 {
            shift(clamp_row(y as i64 - 1 - r as i64), false, &mut nonzero, &mut partial);
            shift(clamp_row(y as i64 + r as i64), true, &mut nonzero, &mut partial);
        }
        let dst = &mut px[(roi.y0 as usize + y) * width + roi.x0 as usize..][..rw];
        segments.clear();
        for ((d, &n), &p) in dst.iter_mut().zip(&nonzero).zip(&partial) {
            *d = (n != 0) & (p == 0);
        }
        let mixed = |x: usize| (nonzero[x] != 0) & (partial[x] != 0);
        for (i, (n, p)) in nonzero.chunks(16).zip(partial.chunks(16)).enumerate() {
            if !n.iter().zip(p).fold(false, |any, (&n, &p)| any | ((n != 0) & (p != 0))) {
                continue;
            }
            for x in i * 16..(i * 16 + 16).min(rw) {
                if !mixed(x) {
                    continue;
                }
                match segments.last_mut() {
                    Some((_, end)) if *end == x => *end = x + 1,
                    _ => segments.push((x, x + 1)),
                }
            }
        }
        // mixed windows: accumulate tap by tap along contiguous row segments
        for &(start, end) in &segments {
            let acc = &mut acc[..end - start];
            acc.fill(0.0);
            for (k, t) in taps.iter().enumerate() {
                let src = clamp_row(y as i64 + k as i64 - r as i64) * rw;
                for (a, &v) in acc.iter_mut().zip(&horiz[src + start..src + end]) {
                    *a += t * v;
                }
            }
            for (d, &a) in dst[start..end].iter_mut().zip(acc.iter()) {
                *d = a >= 0.5;
            }
        }
    }
    out
}
