//! Newline-delimited JSON protocol spoken with external segmenter processes.
//!
//! Request (one line):
//!
//! ```json
//! {"id": 1, "width": 640, "height": 480, "image_path": "images/0000001.jpg",
//!  "channels": {"pos": "<base64 PNG>", "neg": "<base64 PNG>", "prev": "<base64 PNG>"}}
//! ```
//!
//! `pos` and `neg` are 8-bit grayscale PNGs with foreground 255; `prev` holds
//! `round(p · 255)`. Two optional fields appear only when needed: `clicks`, a
//! list of `[x, y, "positive" | "negative"]` in query pixel coordinates, and
//! `view`, the transform from the source image to the query frame
//! (`{"crop": [x0, y0, x1, y1], "size": [w, h], "flipped": true}`: crop, resize,
//! then mirror).
//!
//! Response (one line): `{"id": 1, "mask": "<base64 PNG>"}` with
//! `round(p · 255)` per pixel, or `{"id": 1, "error": "..."}`.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::encoding::{EncodingMode, InteractionEncoding};
use crate::eval::Click;
use crate::generate::Polarity;
use crate::mask::{BinaryMask, BoundingBox, ProbabilityMask};

use super::{ImageView, SegmenterError, SegmenterQuery};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireChannels {
    pub pos: String,
    pub neg: String,
    pub prev: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireView {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop: Option<[u32; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<[u32; 2]>,
    #[serde(default)]
    pub flipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub id: u64,
    pub width: u32,
    pub height: u32,
    pub image_path: Option<String>,
    pub channels: WireChannels,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clicks: Vec<(u32, u32, Polarity)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<WireView>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireResponse {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn malformed(e: impl std::fmt::Display) -> SegmenterError {
    SegmenterError::Malformed(e.to_string())
}

fn png_b64(bytes: crate::Result<Vec<u8>>) -> Result<String, SegmenterError> {
    Ok(BASE64.encode(bytes.map_err(malformed)?))
}

fn decode_b64(s: &str) -> Result<Vec<u8>, SegmenterError> {
    BASE64.decode(s).map_err(malformed)
}

impl WireRequest {
    pub fn from_query(id: u64, query: &SegmenterQuery) -> Result<Self, SegmenterError> {
        let (width, height) = query.dims();
        let enc = &query.encoding;
        let view = (!query.view.is_identity()).then(|| WireView {
            crop: query.view.crop.map(|b| [b.x0, b.y0, b.x1, b.y1]),
            size: query.view.size.map(|(w, h)| [w, h]),
            flipped: query.view.flipped,
        });
        Ok(WireRequest {
            id,
            width,
            height,
            image_path: query.image_ref.as_ref().map(|p| p.display().to_string()),
            channels: WireChannels {
                pos: png_b64(enc.positive.to_png_bytes())?,
                neg: png_b64(enc.negative.to_png_bytes())?,
                prev: png_b64(enc.previous.to_png_bytes())?,
            },
            clicks: query.clicks.iter().map(|c| (c.x, c.y, c.polarity)).collect(),
            view,
        })
    }

    /// Rebuilds the query a child process sees. The previous plane carries the
    /// 8-bit quantization of the wire.
    pub fn to_query(&self) -> Result<SegmenterQuery, SegmenterError> {
        let pos = BinaryMask::from_png_bytes(&decode_b64(&self.channels.pos)?).map_err(malformed)?;
        let neg = BinaryMask::from_png_bytes(&decode_b64(&self.channels.neg)?).map_err(malformed)?;
        let prev = ProbabilityMask::from_png_bytes(&decode_b64(&self.channels.prev)?).map_err(malformed)?;
        let dims = (self.width, self.height);
        for actual in [pos.dims(), neg.dims(), prev.dims()] {
            if actual != dims {
                return Err(SegmenterError::DimensionMismatch { expected: dims, actual });
            }
        }
        let view = self
            .view
            .as_ref()
            .map(|v| ImageView {
                crop: v.crop.map(|[x0, y0, x1, y1]| BoundingBox { x0, y0, x1, y1 }),
                size: v.size.map(|[w, h]| (w, h)),
                flipped: v.flipped,
            })
            .unwrap_or_default();
        Ok(SegmenterQuery {
            image_ref: self.image_path.as_ref().map(Into::into),
            encoding: InteractionEncoding {
                mode: EncodingMode::Filled,
                positive: pos,
                negative: neg,
                previous: prev,
            },
            interaction_index: 1,
            clicks: self
                .clicks
                .iter()
                .map(|&(x, y, polarity)| Click { x, y, polarity })
                .collect(),
            ground_truth: None,
            view,
        })
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }

    pub fn from_line(line: &str) -> Result<Self, SegmenterError> {
        serde_json::from_str(line).map_err(malformed)
    }
}

impl WireResponse {
    pub fn from_mask(id: u64, mask: &ProbabilityMask) -> Result<Self, SegmenterError> {
        Ok(WireResponse {
            id,
            mask: Some(png_b64(mask.to_png_bytes())?),
            error: None,
        })
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }

    pub fn from_line(line: &str) -> Result<Self, SegmenterError> {
        serde_json::from_str(line).map_err(malformed)
    }

    /// Decodes the mask and checks it against the request id and frame size.
    pub fn into_mask(self, expected_id: u64, dims: (u32, u32)) -> Result<ProbabilityMask, SegmenterError> {
        if self.id != expected_id {
            return Err(SegmenterError::Malformed(format!(
                "response id {} does not match request id {expected_id}",
                self.id
            )));
        }
        if let Some(err) = self.error {
            return Err(SegmenterError::Remote(err));
        }
        let encoded = self
            .mask
            .ok_or_else(|| SegmenterError::Malformed("response has neither mask nor error".into()))?;
        let mask = ProbabilityMask::from_png_bytes(&decode_b64(&encoded)?).map_err(malformed)?;
        if mask.dims() != dims {
            return Err(SegmenterError::DimensionMismatch {
                expected: dims,
                actual: mask.dims(),
            });
        }
        Ok(mask)
    }
}
