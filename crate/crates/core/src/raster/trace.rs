use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

use super::morphology::component_count;
use super::polygon::ContourPolygon;

/// Clockwise on screen (y down), starting west.
const NEIGHBORS: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn direction(dx: i64, dy: i64) -> usize {
    NEIGHBORS
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("backtrack pixel must be an 8-neighbour")
}

/// Outer boundary pixels of a single 8-connected component, in clockwise
/// order starting at the topmost-then-leftmost pixel. Pixels the tracer
/// revisits (one pixel wide spurs) appear once, at their first visit.
pub fn trace_boundary_pixels(mask: &BinaryMask) -> Result<Vec<(u32, u32)>> {
    let start = mask.foreground().next().ok_or(Error::EmptyMask)?;
    let comps = component_count(mask);
    if comps != 1 {
        return Err(Error::MultipleComponents(comps));
    }
    let fg = |p: (i64, i64)| mask.get_signed(p.0, p.1);
    let s = (start.0 as i64, start.1 as i64);
    let mut path = vec![s];
    let mut cur = s;
    let mut back = (s.0 - 1, s.1);
    let mut first_step: Option<(i64, i64)> = None;
    let limit = 4 * mask.count() + 16;

    for _ in 0..limit {
        let bdir = direction(back.0 - cur.0, back.1 - cur.1);
        let found = (1..=8).map(|i| (bdir + i) % 8).find(|&d| {
            let (dx, dy) = NEIGHBORS[d];
            fg((cur.0 + dx, cur.1 + dy))
        });
        let Some(d) = found else {
            break; // isolated pixel
        };
        let next = (cur.0 + NEIGHBORS[d].0, cur.1 + NEIGHBORS[d].1);
        let (bx, by) = NEIGHBORS[(d + 7) % 8];
        let new_back = (cur.0 + bx, cur.1 + by);
        if cur == s {
            match first_step {
                Some(f) if f == next => break,
                Some(_) => {}
                None => first_step = Some(next),
            }
        }
        path.push(next);
        back = new_back;
        cur = next;
    }
    if path.len() > 1 && path.last() == Some(&s) {
        path.pop();
    }
    let mut seen = HashSet::with_capacity(path.len());
    Ok(path
        .into_iter()
        .filter(|p| seen.insert(*p))
        .map(|(x, y)| (x as u32, y as u32))
        .collect())
}

/// [`trace_boundary_pixels`] as a polygon through the boundary pixel centres,
/// in normalized coordinates.
pub fn trace_boundary(mask: &BinaryMask) -> Result<ContourPolygon> {
    let (w, h) = mask.dims();
    let pixels = trace_boundary_pixels(mask)?;
    Ok(ContourPolygon::from_pixels(
        pixels.into_iter().map(|(x, y)| (x as f64 + 0.5, y as f64 + 0.5)),
        w,
        h,
    ))
}
