//! Exact squared Euclidean distance transform (lower envelope of parabolas).

const INF: f64 = 1e20;

/// Squared distance from every cell of a `width × height` grid to the nearest
/// cell where `is_feature` holds. Cells with no feature anywhere get `f64::INFINITY`.
pub(crate) fn squared_edt(width: usize, height: usize, is_feature: impl Fn(usize) -> bool) -> Vec<f64> {
    let n = width * height;
    let mut grid: Vec<f64> = (0..n).map(|i| if is_feature(i) { 0.0 } else { INF }).collect();
    let longest = width.max(height);
    let mut f = vec![0.0; longest];
    let mut d = vec![0.0; longest];
    let mut v = vec![0usize; longest];
    let mut z = vec![0.0; longest + 1];

    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        transform_1d(&f[..height], &mut d[..height], &mut v, &mut z);
        for y in 0..height {
            grid[y * width + x] = d[y];
        }
    }
    for y in 0..height {
        let row = &mut grid[y * width..(y + 1) * width];
        f[..width].copy_from_slice(row);
        transform_1d(&f[..width], &mut d[..width], &mut v, &mut z);
        row.copy_from_slice(&d[..width]);
    }
    for value in &mut grid {
        if *value >= INF * 0.5 {
            *value = f64::INFINITY;
        }
    }
    grid
}

fn transform_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        loop {
            let p = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * qf - 2.0 * p);
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0: replace the only parabola
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
            }
            break;
        }
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dq = q as f64 - v[k] as f64;
        *out = dq * dq + f[v[k]];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(width: usize, height: usize, feat: &[bool]) -> Vec<f64> {
        let mut out = vec![f64::INFINITY; width * height];
        for y in 0..height {
            for x in 0..width {
                for fy in 0..height {
                    for fx in 0..width {
                        if feat[fy * width + fx] {
                            let dx = x as f64 - fx as f64;
                            let dy = y as f64 - fy as f64;
                            let d = dx * dx + dy * dy;
                            if d < out[y * width + x] {
                                out[y * width + x] = d;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        let mut state = 12345u64;
        for _ in 0..200 {
            let w = 1 + (state % 13) as usize;
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let h = 1 + (state % 11) as usize;
            let feat: Vec<bool> = (0..w * h)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    (state >> 33).is_multiple_of(7)
                })
                .collect();
            let got = squared_edt(w, h, |i| feat[i]);
            assert_eq!(got, brute(w, h, &feat), "{w}x{h}");
        }
    }

    #[test]
    fn no_features_is_infinite() {
        assert!(squared_edt(4, 3, |_| false).iter().all(|v| v.is_infinite()));
    }
}
