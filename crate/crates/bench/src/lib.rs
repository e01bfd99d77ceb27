//! Shared inputs for the benchmarks.

use contoursim::{BinaryMask, ContourPolygon};

/// A filled disk of radius `n / 4` centered in an `n × n` frame.
pub fn disk(n: u32) -> BinaryMask {
    let c = n as f64 / 2.0;
    let r = n as f64 / 4.0;
    BinaryMask::from_fn(n, n, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - c, y as f64 + 0.5 - c);
        dx * dx + dy * dy <= r * r
    })
}

/// A star-shaped polygon with `points` spikes in normalized coordinates.
pub fn star(points: usize) -> ContourPolygon {
    ContourPolygon::new((0..2 * points).map(|i| {
        let a = std::f64::consts::PI * i as f64 / points as f64;
        let r = if i % 2 == 0 { 0.45 } else { 0.2 };
        [0.5 + r * a.cos(), 0.5 + r * a.sin()]
    }))
}
