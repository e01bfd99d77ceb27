//! Deterministic binary-raster and geometry primitives.

pub(crate) mod edt;
mod geometry;
mod morphology;
mod polygon;
pub(crate) mod runs;
mod smooth;
mod trace;
mod warp;

pub use geometry::{bounding_box, convex_hull_corners, convexity_ratio, iou};
pub use morphology::{
    component_count, fill_holes, label_components, largest_component, morph_transform, structuring_element, Component,
    MorphKind,
};
pub use polygon::{draw_polyline, rasterize_polygon, ContourPolygon, Rasterization};
pub use smooth::{gaussian_kernel, gaussian_smooth, sigma_for_kernel};
pub use trace::{trace_boundary, trace_boundary_pixels};
pub use warp::{centroid, scale_about_centroid, shift_clipped};

/// Nearest odd integer to `value`, never below 3.
pub fn round_odd(value: f64) -> u32 {
    let odd = 2.0 * ((value - 1.0) / 2.0).round() + 1.0;
    if odd.is_nan() {
        return 3;
    }
    odd.max(3.0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_odd_values() {
        assert_eq!(round_odd(0.2), 3);
        assert_eq!(round_odd(4.0), 5); // ties go away from zero
        assert_eq!(round_odd(5.9), 5);
        assert_eq!(round_odd(6.1), 7);
        assert_eq!(round_odd(43.4), 43);
    }
}
