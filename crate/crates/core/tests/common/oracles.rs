//! Independent brute-force reference implementations.

use std::collections::VecDeque;

use contoursim::BinaryMask;

/// Even-odd crossing test of W. R. Franklin.
pub fn pnpoly(vertices: &[(f64, f64)], px: f64, py: f64) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = vertices[i];
        let (xj, yj) = vertices[j];
        if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Per-pixel 8-connected labels by breadth-first flood: 0 for background,
/// components numbered from 1 in row-major order of their first pixel.
pub fn flood_labels(mask: &BinaryMask) -> Vec<u32> {
    let (w, h) = mask.dims();
    let mut labels = vec![0u32; (w * h) as usize];
    let mut next = 0;
    for start in 0..(w * h) as usize {
        if labels[start] != 0 || !mask.pixels()[start] {
            continue;
        }
        next += 1;
        labels[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i as u32 % w) as i64, (i as u32 / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = (ny * w as i64 + nx) as usize;
                    if labels[j] == 0 && mask.pixels()[j] {
                        labels[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    labels
}

/// Component sizes in discovery order.
pub fn flood_components(mask: &BinaryMask) -> Vec<usize> {
    let labels = flood_labels(mask);
    let n = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut sizes = vec![0; n];
    for &l in labels.iter().filter(|&&l| l > 0) {
        sizes[l as usize - 1] += 1;
    }
    sizes
}

pub fn brute_iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&p, &q) in a.pixels().iter().zip(b.pixels()) {
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}
