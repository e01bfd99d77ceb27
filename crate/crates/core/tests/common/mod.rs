#![allow(dead_code)]

pub mod oracles;

use std::path::{Path, PathBuf};

use contoursim::dataset::{AnnotationEntry, ImageEntry};
use contoursim::raster::trace_boundary;
use contoursim::{write_dataset, BinaryMask, ContourPolygon, DatasetIndex};

pub fn rect(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| (x0..x1).contains(&x) && (y0..y1).contains(&y))
}

pub fn disk(w: u32, h: u32, cx: f64, cy: f64, r: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
        dx * dx + dy * dy <= r * r
    })
}

pub fn ring(w: u32, h: u32, cx: f64, cy: f64, r_out: f64, r_in: f64) -> BinaryMask {
    disk(w, h, cx, cy, r_out).difference(&disk(w, h, cx, cy, r_in)).unwrap()
}

/// L-shape inside the box `[x0, x1) × [y0, y1)` with arms of the given thickness.
pub fn l_shape(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32, thickness: u32) -> BinaryMask {
    rect(w, h, x0, y0, x0 + thickness, y1)
        .union(&rect(w, h, x0, y1 - thickness, x1, y1))
        .unwrap()
}

/// The 20 shapes of the generator validity suite on a `n × n` frame.
pub fn shape_suite(n: u32) -> Vec<(String, BinaryMask)> {
    let c = n as f64 / 2.0;
    let mut shapes = Vec::new();
    for (i, side) in [n / 4, n / 3, n / 2, 2 * n / 3, 3 * n / 4].into_iter().enumerate() {
        let lo = (n - side) / 2;
        shapes.push((format!("square{i}"), rect(n, n, lo, lo, lo + side, lo + side)));
    }
    for (i, (span, t)) in [
        (n / 2, n / 8),
        (n / 2, n / 5),
        (2 * n / 3, n / 6),
        (3 * n / 4, n / 10),
        (n / 3, n / 10),
    ]
    .into_iter()
    .enumerate()
    {
        let lo = (n - span) / 2;
        shapes.push((format!("l{i}"), l_shape(n, n, lo, lo, lo + span, lo + span, t)));
    }
    for (i, (ro, ri)) in [(0.3, 0.15), (0.35, 0.25), (0.25, 0.1), (0.4, 0.3), (0.2, 0.12)]
        .into_iter()
        .enumerate()
    {
        let (ro, ri) = (ro * n as f64, ri * n as f64);
        shapes.push((format!("ring{i}"), ring(n, n, c, c, ro, ri)));
    }
    for (i, (len, t, vertical)) in [
        (n / 2, n / 16, false),
        (2 * n / 3, n / 12, true),
        (3 * n / 4, n / 20, false),
        (n / 2, n / 10, true),
        (n / 3, n / 24, false),
    ]
    .into_iter()
    .enumerate()
    {
        let (a0, b0) = ((n - len) / 2, (n - t) / 2);
        let m = if vertical {
            rect(n, n, b0, a0, b0 + t.max(1), a0 + len)
        } else {
            rect(n, n, a0, b0, a0 + len, b0 + t.max(1))
        };
        shapes.push((format!("bar{i}"), m));
    }
    shapes
}

/// Outline of a mask as a normalized polygon.
pub fn outline(mask: &BinaryMask) -> ContourPolygon {
    trace_boundary(mask).unwrap()
}

/// Polygon through pixel-space points of a `w × h` frame.
pub fn pixel_polygon(points: &[(f64, f64)], w: u32, h: u32) -> ContourPolygon {
    ContourPolygon::from_pixels(points.iter().copied(), w, h)
}

/// Axis-aligned rectangle polygon on pixel edges, so that it rasterizes to
/// exactly `rect(w, h, x0, y0, x1, y1)`.
pub fn rect_polygon(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> ContourPolygon {
    let (x0, y0, x1, y1) = (x0 as f64, y0 as f64, x1 as f64, y1 as f64);
    pixel_polygon(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)], w, h)
}

/// Regular polygon approximating a circle.
pub fn circle_polygon(w: u32, h: u32, cx: f64, cy: f64, r: f64, sides: usize) -> ContourPolygon {
    let pts: Vec<(f64, f64)> = (0..sides)
        .map(|i| {
            let t = i as f64 / sides as f64 * std::f64::consts::TAU;
            (cx + r * t.cos(), cy + r * t.sin())
        })
        .collect();
    pixel_polygon(&pts, w, h)
}

fn entry(image_id: &str, annotations: Vec<AnnotationEntry>) -> ImageEntry {
    ImageEntry {
        image_id: image_id.into(),
        annotations,
    }
}

fn ann(pos: Vec<ContourPolygon>, neg: Vec<ContourPolygon>, mask: BinaryMask) -> AnnotationEntry {
    AnnotationEntry {
        pos_contours: pos,
        neg_contours: neg,
        mask,
    }
}

/// Three images, five annotations. Annotation `0000003_01` is annotated with
/// the exact mask outline.
pub fn fixture_entries() -> Vec<ImageEntry> {
    let (w1, h1) = (64, 48);
    let (w2, h2) = (80, 60);
    let (w3, h3) = (48, 48);
    vec![
        entry(
            "0000001",
            vec![
                ann(
                    vec![pixel_polygon(
                        &[(7.0, 5.0), (33.0, 6.0), (32.0, 31.0), (8.0, 30.0)],
                        w1,
                        h1,
                    )],
                    vec![],
                    rect(w1, h1, 10, 8, 30, 28),
                ),
                ann(
                    vec![circle_polygon(w1, h1, 46.0, 30.0, 13.0, 16)],
                    vec![],
                    disk(w1, h1, 45.0, 30.0, 10.0),
                ),
            ],
        ),
        entry(
            "0000002",
            vec![
                ann(
                    vec![pixel_polygon(
                        &[
                            (8.0, 8.0),
                            (24.0, 8.0),
                            (24.0, 36.0),
                            (44.0, 36.0),
                            (44.0, 52.0),
                            (8.0, 52.0),
                        ],
                        w2,
                        h2,
                    )],
                    vec![],
                    l_shape(w2, h2, 10, 10, 42, 50, 12),
                ),
                ann(
                    vec![circle_polygon(w2, h2, 60.0, 24.0, 17.0, 20)],
                    vec![circle_polygon(w2, h2, 60.0, 24.0, 5.0, 8)],
                    ring(w2, h2, 60.0, 24.0, 15.0, 6.0),
                ),
            ],
        ),
        entry(
            "0000003",
            vec![ann(
                vec![rect_polygon(w3, h3, 12, 12, 36, 36)],
                vec![],
                rect(w3, h3, 12, 12, 36, 36),
            )],
        ),
    ]
}

pub fn fixture_dataset(root: &Path) -> DatasetIndex {
    write_dataset(root, &fixture_entries()).unwrap()
}

pub fn echo_segmenter() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_echo-segmenter"))
}

/// Single-fault edits of the fixture dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corruption {
    MissingMask,
    BadMaskName,
    CoordinateOutOfRange,
    MaskDimsMismatch,
    EmptyMask,
    DisjointContour,
}

impl Corruption {
    pub const ALL: [Corruption; 6] = [
        Corruption::MissingMask,
        Corruption::BadMaskName,
        Corruption::CoordinateOutOfRange,
        Corruption::MaskDimsMismatch,
        Corruption::EmptyMask,
        Corruption::DisjointContour,
    ];

    /// Validator exit code for a fixture carrying this fault.
    pub fn expected_exit_code(self) -> i32 {
        match self {
            Corruption::CoordinateOutOfRange => 1,
            _ => 2,
        }
    }

    pub fn apply(self, root: &Path) {
        let masks = root.join("masks");
        match self {
            Corruption::MissingMask => std::fs::remove_file(masks.join("0000001_02.png")).unwrap(),
            Corruption::BadMaskName => {
                std::fs::copy(masks.join("0000003_01.png"), masks.join("0000003_1.png")).unwrap();
            }
            Corruption::CoordinateOutOfRange => rewrite_contours(root, |r| {
                if r.key() == "0000003_01" {
                    let mut v = r.pos_contours[0].vertices().to_vec();
                    v[1][0] = 1.3;
                    r.pos_contours[0] = ContourPolygon::new(v);
                }
            }),
            Corruption::MaskDimsMismatch => {
                rect(70, 60, 10, 10, 40, 50)
                    .write_png(&masks.join("0000002_01.png"))
                    .unwrap();
            }
            Corruption::EmptyMask => BinaryMask::new(64, 48)
                .write_png(&masks.join("0000001_01.png"))
                .unwrap(),
            Corruption::DisjointContour => rewrite_contours(root, |r| {
                if r.key() == "0000003_01" {
                    r.pos_contours = vec![ContourPolygon::new([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1]])];
                }
            }),
        }
    }
}

fn rewrite_contours(root: &Path, mut edit: impl FnMut(&mut contoursim::dataset::AnnotationRecord)) {
    let mut index = contoursim::load_dataset(root).unwrap();
    index.records.iter_mut().for_each(&mut edit);
    std::fs::write(
        root.join("contours.json"),
        contoursim::dataset::serialize_annotations(&index),
    )
    .unwrap();
}
