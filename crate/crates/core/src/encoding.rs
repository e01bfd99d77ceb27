//! Three-plane interaction encoding: positive contours, negative contours and
//! the previous prediction.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, ProbabilityMask};
use crate::raster::{draw_polyline, label_components, rasterize_polygon, trace_boundary, ContourPolygon};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingMode {
    /// Ones inside the contour, zeros outside.
    #[default]
    Filled,
    /// The contour stroke only.
    Line,
}

impl std::str::FromStr for EncodingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "filled" => Ok(Self::Filled),
            "line" => Ok(Self::Line),
            other => Err(Error::InvalidArgument(format!("unknown encoding mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingConfig {
    pub mode: EncodingMode,
    /// Line width as a fraction of the shorter image side (line mode only).
    pub w: f64,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            mode: EncodingMode::Filled,
            w: 0.02,
        }
    }
}

impl EncodingConfig {
    pub fn line(w: f64) -> Self {
        Self {
            mode: EncodingMode::Line,
            w,
        }
    }
}

/// Stroke width in pixels: `round(w · min(width, height))`, at least 1.
pub fn line_width_px(w: f64, image_width: u32, image_height: u32) -> u32 {
    let px = (w * image_width.min(image_height) as f64).round();
    if px.is_nan() || px < 1.0 {
        1
    } else {
        px as u32
    }
}

/// A contour given either as a filled region or as a polygon.
#[derive(Clone, Debug, PartialEq)]
pub enum ContourInput {
    Mask(BinaryMask),
    Polygon(ContourPolygon),
}

impl From<BinaryMask> for ContourInput {
    fn from(m: BinaryMask) -> Self {
        ContourInput::Mask(m)
    }
}

impl From<ContourPolygon> for ContourInput {
    fn from(p: ContourPolygon) -> Self {
        ContourInput::Polygon(p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteractionEncoding {
    pub mode: EncodingMode,
    pub positive: BinaryMask,
    pub negative: BinaryMask,
    pub previous: ProbabilityMask,
}

impl InteractionEncoding {
    /// No contours and an all-zero previous mask.
    pub fn blank(width: u32, height: u32, mode: EncodingMode) -> Self {
        Self {
            mode,
            positive: BinaryMask::new(width, height),
            negative: BinaryMask::new(width, height),
            previous: ProbabilityMask::zeros(width, height),
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        self.positive.dims()
    }

    pub fn flip_horizontal(&self) -> Self {
        Self {
            mode: self.mode,
            positive: self.positive.flip_horizontal(),
            negative: self.negative.flip_horizontal(),
            previous: self.previous.flip_horizontal(),
        }
    }

    /// Writes `<stem>_pos.png`, `<stem>_neg.png` and `<stem>_prev.png`.
    pub fn write_pngs(&self, dir: &Path, stem: &str) -> Result<[PathBuf; 3]> {
        let paths = [
            dir.join(format!("{stem}_pos.png")),
            dir.join(format!("{stem}_neg.png")),
            dir.join(format!("{stem}_prev.png")),
        ];
        self.positive.write_png(&paths[0])?;
        self.negative.write_png(&paths[1])?;
        self.previous.write_png(&paths[2])?;
        Ok(paths)
    }
}

fn render(input: &ContourInput, config: &EncodingConfig, dims: (u32, u32)) -> Result<BinaryMask> {
    let (w, h) = dims;
    let line_width = line_width_px(config.w, w, h);
    match (input, config.mode) {
        (ContourInput::Mask(m), mode) => {
            if m.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    actual: m.dims(),
                });
            }
            match mode {
                EncodingMode::Filled => Ok(m.clone()),
                EncodingMode::Line => outline(m, line_width),
            }
        }
        (ContourInput::Polygon(p), EncodingMode::Filled) => Ok(rasterize_polygon(&p.closed()?, w, h).mask),
        (ContourInput::Polygon(p), EncodingMode::Line) => Ok(draw_polyline(p, line_width, w, h, true)),
    }
}

/// Stroke along the outer boundary of every component of `filled`.
fn outline(filled: &BinaryMask, line_width: u32) -> Result<BinaryMask> {
    let (w, h) = filled.dims();
    let (labels, comps) = label_components(filled);
    let mut out = BinaryMask::new(w, h);
    for label in 1..=comps.len() as u32 {
        let pixels = labels.iter().map(|&l| l == label).collect();
        let comp = BinaryMask::from_vec(w, h, pixels)?;
        let line = draw_polyline(&trace_boundary(&comp)?, line_width, w, h, true);
        out = out.union(&line)?;
    }
    Ok(out)
}

fn union_all(inputs: &[ContourInput], config: &EncodingConfig, dims: (u32, u32)) -> Result<BinaryMask> {
    let mut plane = BinaryMask::try_new(dims.0, dims.1)?;
    for input in inputs {
        plane = plane.union(&render(input, config, dims)?)?;
    }
    Ok(plane)
}

/// Builds the segmenter input from positive and negative contours and the
/// previous prediction (all-zero when absent). Contours of one polarity are
/// merged by union.
pub fn encode_interaction(
    positive: &[ContourInput],
    negative: &[ContourInput],
    previous: Option<&ProbabilityMask>,
    config: &EncodingConfig,
    dims: (u32, u32),
) -> Result<InteractionEncoding> {
    if config.mode == EncodingMode::Line && config.w <= 0.0 {
        return Err(Error::InvalidArgument("line width fraction must be positive".into()));
    }
    let pos = union_all(positive, config, dims)?;
    let neg = union_all(negative, config, dims)?;
    if pos.is_empty() && neg.is_empty() && previous.is_none() {
        return Err(Error::NoInteraction);
    }
    let previous = match previous {
        Some(p) if p.dims() != dims => {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: p.dims(),
            })
        }
        Some(p) => p.clone(),
        None => ProbabilityMask::zeros(dims.0, dims.1),
    };
    Ok(InteractionEncoding {
        mode: config.mode,
        positive: pos,
        negative: neg,
        previous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{morph_transform, MorphKind};

    fn square(n: u32, lo: u32, hi: u32) -> BinaryMask {
        BinaryMask::from_fn(n, n, |x, y| (lo..hi).contains(&x) && (lo..hi).contains(&y))
    }

    #[test]
    fn widths() {
        assert_eq!(line_width_px(0.02, 640, 480), 10);
        assert_eq!(line_width_px(0.005, 100, 100), 1);
        assert_eq!(line_width_px(0.1, 500, 900), 50);
        assert_eq!(line_width_px(0.001, 100, 100), 1);
    }

    #[test]
    fn filled_square() {
        let sq = square(40, 10, 30);
        let enc = encode_interaction(&[sq.clone().into()], &[], None, &EncodingConfig::default(), (40, 40)).unwrap();
        assert_eq!(enc.positive, sq);
        assert!(enc.negative.is_empty());
        assert!(enc.previous.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn line_mode_is_thin_and_near_boundary() {
        let n = 200;
        let sq = square(n, 50, 150);
        let config = EncodingConfig::line(0.02);
        let enc = encode_interaction(&[sq.clone().into()], &[], None, &config, (n, n)).unwrap();
        assert!(enc.positive.count() * 5 < sq.count());
        let lw = line_width_px(0.02, n, n);
        // boundary band: pixels within lw of the inner/outer boundary
        let outer = morph_transform(&sq, MorphKind::Dilate, 2 * lw + 1);
        let inner = morph_transform(&sq, MorphKind::Erode, 2 * lw + 1);
        let band = outer.difference(&inner).unwrap();
        assert!(enc.positive.is_subset_of(&band));
    }

    #[test]
    fn overlapping_contours_union() {
        let a = square(30, 5, 15);
        let b = square(30, 10, 20);
        let enc = encode_interaction(
            &[a.clone().into(), b.clone().into(), a.clone().into()],
            &[],
            None,
            &EncodingConfig::default(),
            (30, 30),
        )
        .unwrap();
        assert_eq!(enc.positive, a.union(&b).unwrap());
    }

    #[test]
    fn polygons_are_closed_before_filling() {
        let open = ContourPolygon::new([[0.1, 0.1], [0.9, 0.1], [0.9, 0.9], [0.1, 0.9]]);
        let enc = encode_interaction(&[open.into()], &[], None, &EncodingConfig::default(), (10, 10)).unwrap();
        assert_eq!(enc.positive.count(), 64);
    }

    #[test]
    fn nothing_to_encode() {
        let err = encode_interaction(&[], &[], None, &EncodingConfig::default(), (8, 8)).unwrap_err();
        assert_eq!(err.to_string(), "no interaction to encode");
        let prev = ProbabilityMask::zeros(8, 8);
        assert!(encode_interaction(&[], &[], Some(&prev), &EncodingConfig::default(), (8, 8)).is_ok());
    }

    #[test]
    fn encoding_is_repeatable() {
        let sq = square(50, 12, 31);
        let cfg = EncodingConfig::line(0.05);
        let a = encode_interaction(&[sq.clone().into()], &[sq.clone().into()], None, &cfg, (50, 50)).unwrap();
        let b = encode_interaction(&[sq.clone().into()], &[sq.into()], None, &cfg, (50, 50)).unwrap();
        assert_eq!(a, b);
    }
}
