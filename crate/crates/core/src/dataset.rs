//! The on-disk contour dataset: `images/`, `masks/` and `contours.json`.
//!
//! ```text
//! dataset/
//!     contours.json
//!     images/0000001.jpg
//!     masks/0000001_01.png
//!     masks/0000001_02.png
//! ```
//!
//! `contours.json` maps each image id to a list of annotations, one per
//! annotator, each with `pos_contours` and `neg_contours`. A contour is a list
//! of `[x, y]` vertices in normalized image coordinates. Annotation `k`
//! (1-based) of image `ID` has its instance mask at `masks/ID_kk.png`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::BinaryMask;
use crate::raster::{iou, rasterize_polygon, ContourPolygon};

pub const ANNOTATIONS_FILE: &str = "contours.json";
pub const IMAGES_DIR: &str = "images";
pub const MASKS_DIR: &str = "masks";
const IMAGE_EXTENSIONS: [&str; 4] = ["jpg", "jpeg", "png", "JPG"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing {0}")]
    Missing(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed JSON: {message}")]
    Json { path: PathBuf, message: String },

    #[error("{entry}: {message}")]
    Malformed { entry: String, message: String },

    #[error("{entry}: name does not follow [IMAGE_ID]_[ANNOTATION_NUMBER].png")]
    NameConvention { entry: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotationRecord {
    pub image_id: String,
    /// Two digits, starting at "01".
    pub annotation_number: String,
    pub pos_contours: Vec<ContourPolygon>,
    pub neg_contours: Vec<ContourPolygon>,
    pub mask_path: PathBuf,
}

impl AnnotationRecord {
    pub fn key(&self) -> String {
        format!("{}_{}", self.image_id, self.annotation_number)
    }

    pub fn load_mask(&self) -> crate::Result<BinaryMask> {
        BinaryMask::read_png(&self.mask_path)
    }

    /// Union of the closed, filled positive contours at `dims`.
    pub fn positive_region(&self, dims: (u32, u32)) -> crate::Result<BinaryMask> {
        let mut region = BinaryMask::try_new(dims.0, dims.1)?;
        for poly in &self.pos_contours {
            region = region.union(&rasterize_polygon(&close_contour(poly)?, dims.0, dims.1).mask)?;
        }
        Ok(region)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetIndex {
    pub root: PathBuf,
    /// Sorted by image id, then annotation number.
    pub records: Vec<AnnotationRecord>,
    pub images: BTreeMap<String, PathBuf>,
    pub warnings: Vec<String>,
}

impl DatasetIndex {
    pub fn empty(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            records: Vec::new(),
            images: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn image_path(&self, image_id: &str) -> Option<&Path> {
        self.images.get(image_id).map(PathBuf::as_path)
    }
}

#[derive(Debug, Deserialize)]
struct RawAnnotation {
    #[serde(default)]
    pos_contours: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    neg_contours: Vec<Vec<[f64; 2]>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DatasetError::Missing(path.to_path_buf())
        } else {
            DatasetError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

fn valid_image_id(id: &str) -> bool {
    !id.is_empty() && id != "." && id != ".." && !id.contains(['/', '\\'])
}

fn to_polygons(entry: &str, raw: Vec<Vec<[f64; 2]>>) -> Result<Vec<ContourPolygon>, DatasetError> {
    raw.into_iter()
        .enumerate()
        .map(|(j, pts)| {
            let poly = ContourPolygon::new(pts);
            if poly.len() < 2 {
                return Err(DatasetError::Malformed {
                    entry: format!("{entry}[{j}]"),
                    message: "degenerate contour (fewer than 2 distinct vertices)".into(),
                });
            }
            Ok(poly)
        })
        .collect()
}

/// Reads and cross-checks a dataset directory.
pub fn load_dataset(root: &Path) -> Result<DatasetIndex, DatasetError> {
    let json_path = root.join(ANNOTATIONS_FILE);
    let images_dir = root.join(IMAGES_DIR);
    let masks_dir = root.join(MASKS_DIR);
    let text = std::fs::read_to_string(&json_path).map_err(io_err(&json_path))?;
    for dir in [&images_dir, &masks_dir] {
        if !dir.is_dir() {
            return Err(DatasetError::Missing(dir.clone()));
        }
    }
    let parsed: BTreeMap<String, serde_json::Value> = serde_json::from_str(&text).map_err(|e| DatasetError::Json {
        path: json_path.clone(),
        message: e.to_string(),
    })?;

    let mut index = DatasetIndex::empty(root);
    if parsed.is_empty() {
        index.warnings.push("no annotations".into());
    }
    let mut expected_masks = BTreeMap::new();
    for (image_id, value) in parsed {
        if !valid_image_id(&image_id) {
            return Err(DatasetError::Malformed {
                entry: image_id,
                message: "invalid image id".into(),
            });
        }
        let annotations: Vec<RawAnnotation> = serde_json::from_value(value).map_err(|e| DatasetError::Malformed {
            entry: image_id.clone(),
            message: e.to_string(),
        })?;
        if annotations.is_empty() {
            index.warnings.push(format!("{image_id}: image has no annotations"));
        }
        if annotations.len() > 99 {
            return Err(DatasetError::Malformed {
                entry: image_id,
                message: "more than 99 annotations".into(),
            });
        }
        let image_path = IMAGE_EXTENSIONS
            .iter()
            .map(|ext| images_dir.join(format!("{image_id}.{ext}")))
            .find(|p| p.is_file())
            .ok_or_else(|| DatasetError::Missing(images_dir.join(format!("{image_id}.jpg"))))?;
        index.images.insert(image_id.clone(), image_path);

        for (k, raw) in annotations.into_iter().enumerate() {
            let annotation_number = format!("{:02}", k + 1);
            let entry = format!("{image_id}[{k}]");
            let mask_name = format!("{image_id}_{annotation_number}.png");
            let mask_path = masks_dir.join(&mask_name);
            if !mask_path.is_file() {
                return Err(DatasetError::Missing(mask_path));
            }
            expected_masks.insert(mask_name, ());
            index.records.push(AnnotationRecord {
                pos_contours: to_polygons(&format!("{entry}.pos_contours"), raw.pos_contours)?,
                neg_contours: to_polygons(&format!("{entry}.neg_contours"), raw.neg_contours)?,
                image_id: image_id.clone(),
                annotation_number,
                mask_path,
            });
        }
    }

    let mut listing: Vec<PathBuf> = std::fs::read_dir(&masks_dir)
        .map_err(io_err(&masks_dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(&masks_dir)))
        .collect::<Result<_, _>>()?;
    listing.sort();
    for path in listing {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if name.starts_with('.') || path.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        if !expected_masks.contains_key(name) {
            return Err(DatasetError::NameConvention {
                entry: format!("{MASKS_DIR}/{name}"),
            });
        }
    }
    Ok(index)
}

/// Appends the first vertex when the contour is open. Idempotent.
pub fn close_contour(poly: &ContourPolygon) -> crate::Result<ContourPolygon> {
    poly.closed()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub status: CheckStatus,
    pub check: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordValidation {
    pub image_id: String,
    pub annotation_number: String,
    pub status: CheckStatus,
    pub findings: Vec<Finding>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub records: Vec<RecordValidation>,
    pub dataset_warnings: Vec<String>,
}

impl ValidationReport {
    pub fn status(&self) -> CheckStatus {
        let worst = self.records.iter().map(|r| r.status).max().unwrap_or(CheckStatus::Pass);
        if worst == CheckStatus::Pass && !self.dataset_warnings.is_empty() {
            CheckStatus::Warn
        } else {
            worst
        }
    }

    /// 0 = all pass, 1 = warnings only, 2 = failures.
    pub fn exit_code(&self) -> i32 {
        match self.status() {
            CheckStatus::Pass => 0,
            CheckStatus::Warn => 1,
            CheckStatus::Fail => 2,
        }
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }
}

fn validate_record(index: &DatasetIndex, record: &AnnotationRecord) -> RecordValidation {
    let mut findings = Vec::new();
    let mut fail = |check: &str, message: String| {
        findings.push(Finding {
            status: CheckStatus::Fail,
            check: check.into(),
            message,
        })
    };

    if record.pos_contours.is_empty() {
        fail("positive_contour", "no positive contour".into());
    }
    let mask = match record.load_mask() {
        Ok(m) => Some(m),
        Err(e) => {
            fail("mask_readable", e.to_string());
            None
        }
    };
    if let (Some(mask), Some(image)) = (&mask, index.image_path(&record.image_id)) {
        match image::image_dimensions(image) {
            Ok(dims) if dims != mask.dims() => {
                fail("mask_dims", format!("mask is {:?}, image is {:?}", mask.dims(), dims))
            }
            Ok(_) => {}
            Err(e) => fail("image_readable", format!("{}: {e}", image.display())),
        }
    }
    if let Some(mask) = &mask {
        if mask.is_empty() {
            fail("mask_nonempty", "mask has no foreground".into());
        } else if !record.pos_contours.is_empty() {
            match record.positive_region(mask.dims()).and_then(|r| iou(&r, mask)) {
                Ok(v) if v <= 0.0 => fail(
                    "contour_overlap",
                    format!("positive contour does not overlap the mask (IoU={v})"),
                ),
                Ok(_) => {}
                Err(e) => fail("contour_overlap", e.to_string()),
            }
        }
    }

    let out_of_range = record
        .pos_contours
        .iter()
        .chain(&record.neg_contours)
        .filter(|p| p.out_of_range())
        .count();
    if out_of_range > 0 {
        findings.push(Finding {
            status: CheckStatus::Warn,
            check: "coordinate_range".into(),
            message: format!("{out_of_range} contour(s) with coordinates outside [0, 1]"),
        });
    }

    let status = findings.iter().map(|f| f.status).max().unwrap_or(CheckStatus::Pass);
    RecordValidation {
        image_id: record.image_id.clone(),
        annotation_number: record.annotation_number.clone(),
        status,
        findings,
    }
}

/// Per-record checks. Never fails; every finding lands in the report.
pub fn validate_dataset(index: &DatasetIndex) -> ValidationReport {
    ValidationReport {
        records: index.records.par_iter().map(|r| validate_record(index, r)).collect(),
        dataset_warnings: index.warnings.clone(),
    }
}

fn write_contours(out: &mut String, contours: &[ContourPolygon]) {
    out.push('[');
    for (i, poly) in contours.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for (j, [x, y]) in poly.vertices().iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "[{x:.6}, {y:.6}]");
        }
        out.push(']');
    }
    out.push(']');
}

/// `contours.json` bytes for `index`: keys sorted, coordinates with six
/// decimals, one image per line.
pub fn serialize_annotations(index: &DatasetIndex) -> Vec<u8> {
    let mut by_image: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
    for id in index.images.keys() {
        by_image.entry(id.as_str()).or_default();
    }
    for r in &index.records {
        by_image.entry(r.image_id.as_str()).or_default().push(r);
    }
    if by_image.is_empty() {
        return b"{}".to_vec();
    }
    let mut out = String::from("{\n");
    let n = by_image.len();
    for (i, (id, mut records)) in by_image.into_iter().enumerate() {
        records.sort_by(|a, b| a.annotation_number.cmp(&b.annotation_number));
        let key = serde_json::to_string(id).expect("string key");
        let _ = write!(out, "  {key}: [");
        for (k, r) in records.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push_str("{\"neg_contours\": ");
            write_contours(&mut out, &r.neg_contours);
            out.push_str(", \"pos_contours\": ");
            write_contours(&mut out, &r.pos_contours);
            out.push('}');
        }
        out.push(']');
        if i + 1 < n {
            out.push(',');
        }
        out.push('\n');
    }
    out.push('}');
    out.into_bytes()
}

/// Outcome of loading and validating a dataset directory.
#[derive(Debug)]
pub enum DatasetCheck {
    Validated(ValidationReport),
    /// The directory could not be loaded at all; counts as a failure.
    Unloadable(DatasetError),
}

impl DatasetCheck {
    pub fn run(root: &Path) -> Self {
        match load_dataset(root) {
            Ok(index) => DatasetCheck::Validated(validate_dataset(&index)),
            Err(e) => DatasetCheck::Unloadable(e),
        }
    }

    /// 0 = all pass, 1 = warnings only, 2 = failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            DatasetCheck::Validated(report) => report.exit_code(),
            DatasetCheck::Unloadable(_) => 2,
        }
    }
}

/// One annotation to write with [`write_dataset`].
#[derive(Clone, Debug)]
pub struct AnnotationEntry {
    pub pos_contours: Vec<ContourPolygon>,
    pub neg_contours: Vec<ContourPolygon>,
    pub mask: BinaryMask,
}

/// One image to write with [`write_dataset`]; its size is taken from the
/// first mask.
#[derive(Clone, Debug)]
pub struct ImageEntry {
    pub image_id: String,
    pub annotations: Vec<AnnotationEntry>,
}

/// Writes a dataset directory: a flat gray JPEG per image, the instance
/// masks and `contours.json`, then loads it back.
pub fn write_dataset(root: &Path, entries: &[ImageEntry]) -> crate::Result<DatasetIndex> {
    let images_dir = root.join(IMAGES_DIR);
    let masks_dir = root.join(MASKS_DIR);
    for dir in [&images_dir, &masks_dir] {
        std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    }
    let mut index = DatasetIndex::empty(root);
    for entry in entries {
        if !valid_image_id(&entry.image_id) {
            return Err(crate::Error::InvalidArgument(format!(
                "invalid image id {:?}",
                entry.image_id
            )));
        }
        let Some(first) = entry.annotations.first() else {
            return Err(crate::Error::InvalidArgument(format!(
                "{}: no annotations",
                entry.image_id
            )));
        };
        let (w, h) = first.mask.dims();
        let image_path = images_dir.join(format!("{}.jpg", entry.image_id));
        image::GrayImage::from_pixel(w, h, image::Luma([128]))
            .save(&image_path)
            .map_err(|e| crate::Error::Image {
                path: image_path.clone(),
                message: e.to_string(),
            })?;
        index.images.insert(entry.image_id.clone(), image_path);
        for (k, ann) in entry.annotations.iter().enumerate() {
            let annotation_number = format!("{:02}", k + 1);
            let mask_path = masks_dir.join(format!("{}_{annotation_number}.png", entry.image_id));
            ann.mask.write_png(&mask_path)?;
            index.records.push(AnnotationRecord {
                image_id: entry.image_id.clone(),
                annotation_number,
                pos_contours: ann.pos_contours.clone(),
                neg_contours: ann.neg_contours.clone(),
                mask_path,
            });
        }
    }
    index
        .records
        .sort_by(|a, b| (&a.image_id, &a.annotation_number).cmp(&(&b.image_id, &b.annotation_number)));
    let json_path = root.join(ANNOTATIONS_FILE);
    std::fs::write(&json_path, serialize_annotations(&index)).map_err(|e| crate::Error::io(&json_path, e))?;
    Ok(load_dataset(root)?)
}
