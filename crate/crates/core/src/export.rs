//! Training-sample export: PNG channel triplets plus target per sample and a
//! JSON-lines manifest.
//!
//! Layout under the export directory:
//!
//! ```text
//! manifest.jsonl
//! samples/<id>_pos.png  samples/<id>_neg.png  samples/<id>_prev.png  samples/<id>_target.png
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoding::InteractionEncoding;
use crate::error::{Error, Result};
use crate::generate::{GenerationParams, Polarity, TrainingSample};
use crate::mask::BinaryMask;

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const SAMPLES_DIR: &str = "samples";

#[derive(Clone, Debug, PartialEq)]
pub struct ExportSample {
    pub id: String,
    pub image_id: Option<String>,
    pub annotation_number: Option<String>,
    pub image_path: Option<PathBuf>,
    pub polarity: Polarity,
    pub encoding: InteractionEncoding,
    pub target: BinaryMask,
    pub fallback_used: bool,
    pub iou: Option<f64>,
    pub params: Option<GenerationParams>,
}

impl ExportSample {
    /// The contour goes into the plane matching its polarity.
    pub fn from_training(id: impl Into<String>, sample: &TrainingSample) -> Self {
        let (w, h) = sample.contour.dims();
        let mut encoding = InteractionEncoding::blank(w, h, crate::encoding::EncodingMode::Filled);
        match sample.polarity {
            Polarity::Positive => encoding.positive = sample.contour.clone(),
            Polarity::Negative => encoding.negative = sample.contour.clone(),
        }
        encoding.previous = sample.previous_mask.to_probability();
        Self {
            id: id.into(),
            image_id: None,
            annotation_number: None,
            image_path: None,
            polarity: sample.polarity,
            encoding,
            target: sample.target.clone(),
            fallback_used: sample.fallback_used,
            iou: None,
            params: Some(sample.params.clone()),
        }
    }
}

/// One manifest line. Paths are relative to the export directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotation_number: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
    pub polarity: Polarity,
    pub pos: String,
    pub neg: String,
    pub prev: String,
    pub target: String,
    pub fallback_used: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iou: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<GenerationParams>,
}

/// Writes the samples in the given order and returns the manifest path.
pub fn write_sample_export(dir: &Path, samples: &[ExportSample]) -> Result<PathBuf> {
    let sample_dir = dir.join(SAMPLES_DIR);
    fs::create_dir_all(&sample_dir).map_err(|e| Error::io(&sample_dir, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut manifest = Vec::new();
    for s in samples {
        s.encoding.write_pngs(&sample_dir, &s.id)?;
        s.target.write_png(&sample_dir.join(format!("{}_target.png", s.id)))?;
        let rel = |suffix: &str| format!("{SAMPLES_DIR}/{}_{suffix}.png", s.id);
        let entry = ManifestEntry {
            id: s.id.clone(),
            image_id: s.image_id.clone(),
            annotation_number: s.annotation_number.clone(),
            image_path: s.image_path.as_ref().map(|p| p.display().to_string()),
            polarity: s.polarity,
            pos: rel("pos"),
            neg: rel("neg"),
            prev: rel("prev"),
            target: rel("target"),
            fallback_used: s.fallback_used,
            iou: s.iou,
            params: s.params.clone(),
        };
        serde_json::to_writer(&mut manifest, &entry).expect("manifest entry serializes");
        manifest.push(b'\n');
    }
    let mut file = fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    file.write_all(&manifest).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::synthesize_training_sample;

    #[test]
    fn export_layout() {
        let dir = tempfile::tempdir().unwrap();
        let gt = BinaryMask::from_fn(24, 24, |x, y| (6..18).contains(&x) && (5..17).contains(&y));
        let samples: Vec<ExportSample> = (0..4)
            .map(|i| ExportSample::from_training(format!("{i:06}"), &synthesize_training_sample(&gt, i).unwrap()))
            .collect();
        let manifest = write_sample_export(dir.path(), &samples).unwrap();
        let text = fs::read_to_string(manifest).unwrap();
        assert_eq!(text.lines().count(), 4);
        for (line, s) in text.lines().zip(&samples) {
            let entry: ManifestEntry = serde_json::from_str(line).unwrap();
            assert_eq!(entry.id, s.id);
            let target = BinaryMask::read_png(&dir.path().join(&entry.target)).unwrap();
            assert_eq!(target, s.target);
            let plane = match entry.polarity {
                Polarity::Positive => &entry.pos,
                Polarity::Negative => &entry.neg,
            };
            assert!(!BinaryMask::read_png(&dir.path().join(plane)).unwrap().is_empty());
        }
    }
}
