use crate::encoding::InteractionEncoding;
use crate::error::{Error, Result};
use crate::mask::{BinaryMask, BoundingBox, ProbabilityMask};
use crate::raster::bounding_box;
use crate::segmenter::{ImageView, SegmenterQuery};

use super::Click;

/// Crop of the full frame and its affine map onto the segmenter's input grid:
/// `forward(x) = (x - offset) · scale` per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZoomInWindow {
    pub crop: BoundingBox,
    pub frame: (u32, u32),
    pub size: (u32, u32),
    pub offset: (f64, f64),
    pub scale: (f64, f64),
}

impl ZoomInWindow {
    /// Window around `bbox` grown by `expansion` about its center and clipped
    /// to the frame. With `target_side`, the crop is resampled so its longer
    /// side has that many pixels.
    pub fn around(bbox: &BoundingBox, frame: (u32, u32), expansion: f64, target_side: Option<u32>) -> Self {
        let axis = |lo: u32, hi: u32, limit: u32| {
            let center = (lo + hi) as f64 / 2.0;
            let half = (hi - lo) as f64 * expansion / 2.0;
            let a = (center - half + 1e-9).floor().max(0.0) as u32;
            let b = ((center + half - 1e-9).ceil() as u32).min(limit);
            (a, b.max(a + 1))
        };
        let (x0, x1) = axis(bbox.x0, bbox.x1, frame.0);
        let (y0, y1) = axis(bbox.y0, bbox.y1, frame.1);
        let crop = BoundingBox::new(x0, y0, x1, y1);
        let (cw, ch) = (crop.width(), crop.height());
        let size = match target_side {
            None => (cw, ch),
            Some(side) => {
                let s = side as f64 / crop.longer_side() as f64;
                (
                    ((cw as f64 * s).round() as u32).max(1),
                    ((ch as f64 * s).round() as u32).max(1),
                )
            }
        };
        Self {
            crop,
            frame,
            size,
            offset: (x0 as f64, y0 as f64),
            scale: (size.0 as f64 / cw as f64, size.1 as f64 / ch as f64),
        }
    }

    pub fn forward(&self, p: (f64, f64)) -> (f64, f64) {
        (
            (p.0 - self.offset.0) * self.scale.0,
            (p.1 - self.offset.1) * self.scale.1,
        )
    }

    pub fn inverse(&self, q: (f64, f64)) -> (f64, f64) {
        (q.0 / self.scale.0 + self.offset.0, q.1 / self.scale.1 + self.offset.1)
    }

    /// Frame pixel to crop-grid pixel (through pixel centers).
    pub fn forward_pixel(&self, x: u32, y: u32) -> (u32, u32) {
        let (u, v) = self.forward((x as f64 + 0.5, y as f64 + 0.5));
        (
            (u.floor().max(0.0) as u32).min(self.size.0 - 1),
            (v.floor().max(0.0) as u32).min(self.size.1 - 1),
        )
    }

    /// Crop-grid pixel to frame pixel (through pixel centers).
    pub fn inverse_pixel(&self, u: u32, v: u32) -> (u32, u32) {
        let (x, y) = self.inverse((u as f64 + 0.5, v as f64 + 0.5));
        (
            (x.floor().max(self.crop.x0 as f64) as u32).min(self.crop.x1 - 1),
            (y.floor().max(self.crop.y0 as f64) as u32).min(self.crop.y1 - 1),
        )
    }

    pub fn crop_mask(&self, mask: &BinaryMask) -> BinaryMask {
        BinaryMask::from_fn(self.size.0, self.size.1, |u, v| {
            let (x, y) = self.inverse_pixel(u, v);
            mask.get(x, y)
        })
    }

    pub fn crop_probability(&self, mask: &ProbabilityMask) -> ProbabilityMask {
        ProbabilityMask::from_fn(self.size.0, self.size.1, |u, v| {
            let (x, y) = self.inverse_pixel(u, v);
            mask.get(x, y)
        })
    }

    pub fn crop_encoding(&self, enc: &InteractionEncoding) -> InteractionEncoding {
        InteractionEncoding {
            mode: enc.mode,
            positive: self.crop_mask(&enc.positive),
            negative: self.crop_mask(&enc.negative),
            previous: self.crop_probability(&enc.previous),
        }
    }

    /// The query as seen through the window. Clicks outside the crop are dropped.
    pub fn crop_query(&self, query: &SegmenterQuery) -> SegmenterQuery {
        SegmenterQuery {
            image_ref: query.image_ref.clone(),
            encoding: self.crop_encoding(&query.encoding),
            interaction_index: query.interaction_index,
            clicks: query
                .clicks
                .iter()
                .filter(|c| self.crop.contains(c.x, c.y))
                .map(|c| {
                    let (x, y) = self.forward_pixel(c.x, c.y);
                    Click { x, y, ..*c }
                })
                .collect(),
            ground_truth: query.ground_truth.as_ref().map(|g| self.crop_mask(g)),
            view: ImageView {
                crop: Some(self.crop),
                size: Some(self.size),
                flipped: false,
            },
        }
    }

    /// Warps a crop-grid prediction back into a zero full-frame canvas.
    pub fn paste_back(&self, pred: &ProbabilityMask) -> ProbabilityMask {
        assert_eq!(pred.dims(), self.size, "prediction does not match the zoom window");
        let (w, h) = self.frame;
        ProbabilityMask::from_fn(w, h, |x, y| {
            if self.crop.contains(x, y) {
                let (u, v) = self.forward_pixel(x, y);
                pred.get(u, v)
            } else {
                0.0
            }
        })
    }
}

/// Crops the encoding to the expanded bounding box of its positive plane.
pub fn zoom_in(
    encoding: &InteractionEncoding,
    expansion: f64,
    target_side: Option<u32>,
) -> Result<(InteractionEncoding, ZoomInWindow)> {
    if encoding.positive.is_empty() {
        return Err(Error::ZoomWithoutContour);
    }
    let bbox = bounding_box(&encoding.positive)?;
    let window = ZoomInWindow::around(&bbox, encoding.dims(), expansion, target_side);
    Ok((window.crop_encoding(encoding), window))
}
