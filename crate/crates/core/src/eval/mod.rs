//! Evaluation protocols: single-contour IoU, simulated-click NoC curves,
//! equivalent clicks, Zoom-In, flip averaging and fine-tune-set mining.

mod clicks;
mod mining;
mod protocol;
mod report;
mod zoom;

use serde::{Deserialize, Serialize};

use crate::encoding::EncodingConfig;
use crate::error::{Error, Result};
use crate::generate::Polarity;

pub use clicks::{click_encoding, next_click_with_clearance, simulate_next_click};
pub use mining::{mine_finetune_set, MinedSample, MiningResult};
pub use protocol::{equivalent_clicks, flip_average, predict_full_frame, run_click_eval, run_contour_eval};
pub use report::{export_curves, Aggregates, CurveExport, EquivalentClicks, EvalReport, NocValue, SampleResult};
pub use zoom::{zoom_in, ZoomInWindow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Click {
    pub x: u32,
    pub y: u32,
    pub polarity: Polarity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// IoU target k for NoC@k.
    pub target_iou: f64,
    pub max_clicks: u32,
    pub threshold: f64,
    pub zoom_in: bool,
    pub flip_average: bool,
    /// Zoom-In crop size relative to the interaction bounding box.
    pub expansion: f64,
    /// Longer side of the resampled Zoom-In crop; `None` keeps crop pixels 1:1.
    pub zoom_size: Option<u32>,
    pub encoding: EncodingConfig,
    /// Largest radius of the disk drawn for each click in the encoding planes.
    /// Each disk is shrunk to stay inside the error region it was placed in.
    pub click_radius: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            target_iou: 0.9,
            max_clicks: 20,
            threshold: 0.5,
            zoom_in: false,
            flip_average: false,
            expansion: 1.4,
            zoom_size: None,
            encoding: EncodingConfig::default(),
            click_radius: 5,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.target_iou > 0.0 && self.target_iou <= 1.0) {
            return bad("target IoU must be in (0, 1]");
        }
        if self.max_clicks == 0 {
            return bad("max clicks must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad("threshold must be in [0, 1]");
        }
        if !(self.expansion >= 1.0 && self.expansion.is_finite()) {
            return bad("zoom-in expansion must be at least 1");
        }
        if self.zoom_size == Some(0) {
            return bad("zoom-in size must be positive");
        }
        Ok(())
    }
}
