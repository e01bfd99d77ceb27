use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

use super::EvalConfig;

/// NoC@k for one sample: the first click reaching the target, or not reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NocValue {
    Clicks(u32),
    NotReached,
}

impl NocValue {
    /// Value used in means: "not reached" counts as `max_clicks`.
    pub fn for_mean(self, max_clicks: u32) -> u32 {
        match self {
            NocValue::Clicks(n) => n,
            NocValue::NotReached => max_clicks,
        }
    }
}

/// Clicks needed to match a single contour, or beyond the evaluated range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivalentClicks {
    Clicks(u32),
    BeyondMax,
}

macro_rules! count_or_label {
    ($ty:ident, $other:ident, $label:literal) => {
        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                match self {
                    $ty::Clicks(n) => write!(f, "{n}"),
                    $ty::$other => f.write_str($label),
                }
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                match self {
                    $ty::Clicks(n) => s.serialize_u32(*n),
                    $ty::$other => s.serialize_str($label),
                }
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                #[derive(Deserialize)]
                #[serde(untagged)]
                enum Raw {
                    N(u32),
                    S(String),
                }
                match Raw::deserialize(d)? {
                    Raw::N(n) => Ok($ty::Clicks(n)),
                    Raw::S(s) if s == $label => Ok($ty::$other),
                    Raw::S(s) => Err(serde::de::Error::custom(format!(
                        "expected a count or {:?}, got {s:?}",
                        $label
                    ))),
                }
            }
        }
    };
}

count_or_label!(NocValue, NotReached, "not reached");
count_or_label!(EquivalentClicks, BeyondMax, "beyond max");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub image_id: String,
    pub annotation_number: String,
    pub iou_at_1_contour: Option<f64>,
    #[serde(default)]
    pub iou_per_click: Vec<f64>,
    pub noc_at_k: Option<NocValue>,
    pub equivalent_clicks: Option<EquivalentClicks>,
    #[serde(default)]
    pub fallback_used: bool,
    pub error: Option<String>,
}

impl SampleResult {
    pub fn new(image_id: &str, annotation_number: &str) -> Self {
        Self {
            image_id: image_id.to_string(),
            annotation_number: annotation_number.to_string(),
            iou_at_1_contour: None,
            iou_per_click: Vec::new(),
            noc_at_k: None,
            equivalent_clicks: None,
            fallback_used: false,
            error: None,
        }
    }

    fn key(&self) -> (&str, &str) {
        (&self.image_id, &self.annotation_number)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub samples: usize,
    pub failed: usize,
    pub mean_iou_at_1: Option<f64>,
    pub mean_noc_at_k: Option<f64>,
    pub not_reached: usize,
    pub mean_iou_curve: Vec<f64>,
    /// Equivalent clicks of the mean curve against the mean IoU@1.
    pub equivalent_clicks: Option<EquivalentClicks>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub samples: Vec<SampleResult>,
    pub aggregates: Aggregates,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

impl EvalReport {
    /// Sorts the rows by key and computes the aggregates, so the report does
    /// not depend on the order samples were evaluated in.
    pub fn new(config: EvalConfig, mut samples: Vec<SampleResult>) -> Self {
        samples.sort_by(|a, b| a.key().cmp(&b.key()));
        let ok: Vec<&SampleResult> = samples.iter().filter(|s| s.error.is_none()).collect();
        let mean_iou_at_1 = mean(ok.iter().filter_map(|s| s.iou_at_1_contour));
        let nocs: Vec<NocValue> = ok.iter().filter_map(|s| s.noc_at_k).collect();
        let mean_noc_at_k = mean(nocs.iter().map(|n| n.for_mean(config.max_clicks) as f64));
        let curve_len = ok.iter().map(|s| s.iou_per_click.len()).max().unwrap_or(0);
        let with_curves: Vec<&&SampleResult> = ok.iter().filter(|s| s.iou_per_click.len() == curve_len).collect();
        let mean_iou_curve: Vec<f64> = (0..curve_len)
            .map(|i| mean(with_curves.iter().map(|s| s.iou_per_click[i])).unwrap_or(0.0))
            .collect();
        let equivalent = match mean_iou_at_1 {
            Some(target) if !mean_iou_curve.is_empty() => Some(super::equivalent_clicks(&mean_iou_curve, target)),
            _ => None,
        };
        let aggregates = Aggregates {
            samples: samples.len(),
            failed: samples.len() - ok.len(),
            mean_iou_at_1,
            mean_noc_at_k,
            not_reached: nocs.iter().filter(|n| **n == NocValue::NotReached).count(),
            mean_iou_curve,
            equivalent_clicks: equivalent,
        };
        Self {
            config,
            samples,
            aggregates,
        }
    }

    /// Adds single-contour IoUs from `contour` to this click report and fills
    /// in per-sample equivalent clicks.
    pub fn with_contour_results(self, contour: &EvalReport) -> Self {
        let mut samples = self.samples;
        for s in &mut samples {
            let found = contour
                .samples
                .binary_search_by(|c| c.key().cmp(&s.key()))
                .ok()
                .map(|i| &contour.samples[i]);
            if let Some(c) = found {
                s.iou_at_1_contour = c.iou_at_1_contour;
                if let (Some(target), false) = (c.iou_at_1_contour, s.iou_per_click.is_empty()) {
                    s.equivalent_clicks = Some(super::equivalent_clicks(&s.iou_per_click, target));
                }
            }
        }
        EvalReport::new(self.config, samples)
    }

    fn noc_label(&self) -> String {
        format!("noc_at_{}", (self.config.target_iou * 100.0).round() as u32)
    }

    /// Two-column summary with IoU values in percent.
    pub fn summary_csv(&self) -> String {
        let a = &self.aggregates;
        let mut out = String::from("metric,value\n");
        let _ = writeln!(out, "samples,{}", a.samples);
        let _ = writeln!(out, "failed,{}", a.failed);
        if let Some(v) = a.mean_iou_at_1 {
            let _ = writeln!(out, "mean_iou_at_1,{:.2}", v * 100.0);
        }
        if let Some(v) = a.mean_noc_at_k {
            let _ = writeln!(out, "mean_{},{:.2}", self.noc_label(), v);
            let _ = writeln!(out, "not_reached,{}", a.not_reached);
        }
        if let Some(e) = a.equivalent_clicks {
            let _ = writeln!(out, "equivalent_clicks,{e}");
        }
        out
    }

    /// One row per sample; IoU values in percent.
    pub fn samples_csv(&self) -> String {
        let mut out = format!(
            "image_id,annotation_number,iou_at_1_contour,{},equivalent_clicks,fallback_used,error\n",
            self.noc_label()
        );
        let opt = |v: Option<String>| v.unwrap_or_default();
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.image_id,
                s.annotation_number,
                opt(s.iou_at_1_contour.map(|v| format!("{:.2}", v * 100.0))),
                opt(s.noc_at_k.map(|n| n.to_string())),
                opt(s.equivalent_clicks.map(|n| n.to_string())),
                s.fallback_used,
                opt(s.error.as_ref().map(|e| csv_field(e))),
            );
        }
        out
    }

    pub fn samples_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s).expect("sample serializes"));
            out.push('\n');
        }
        out
    }

    /// Writes `report.json`, `summary.csv`, `samples.csv`, `samples.jsonl` and,
    /// when there is something to plot, `curves.csv` and `curves.svg`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, contents: &str| {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))
        };
        write(
            "report.json",
            &serde_json::to_string_pretty(self).expect("report serializes"),
        )?;
        write("summary.csv", &self.summary_csv())?;
        write("samples.csv", &self.samples_csv())?;
        write("samples.jsonl", &self.samples_jsonl())?;
        if let Ok(curves) = export_curves(self) {
            write("curves.csv", &curves.csv)?;
            write("curves.svg", &curves.svg)?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveExport {
    pub csv: String,
    pub svg: String,
}

/// Mean-IoU-per-click curve and the single-contour reference line, as CSV
/// (`clicks,mean_iou,contour_iou`, percent with two decimals) and SVG.
pub fn export_curves(report: &EvalReport) -> Result<CurveExport> {
    let curve = &report.aggregates.mean_iou_curve;
    let contour = report.aggregates.mean_iou_at_1;
    if curve.is_empty() && contour.is_none() {
        return Err(Error::InvalidArgument("report has no curve to export".into()));
    }
    let contour_cell = contour.map(|v| format!("{:.2}", v * 100.0)).unwrap_or_default();
    let mut csv = String::from("clicks,mean_iou,contour_iou\n");
    if curve.is_empty() {
        let _ = writeln!(csv, "1,,{contour_cell}");
    }
    for (i, v) in curve.iter().enumerate() {
        let _ = writeln!(csv, "{},{:.2},{contour_cell}", i + 1, v * 100.0);
    }
    Ok(CurveExport {
        csv,
        svg: render_svg(curve, contour),
    })
}

fn render_svg(curve: &[f64], contour: Option<f64>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 50.0;
    let n = curve.len().max(1) as f64;
    let px = |click: f64| LEFT + if n > 1.0 { (click - 1.0) / (n - 1.0) } else { 0.5 } * (W - LEFT - RIGHT);
    let py = |iou: f64| TOP + (1.0 - iou.clamp(0.0, 1.0)) * (H - TOP - BOTTOM);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x_end, y_end) = (W - RIGHT, H - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{y_end}" x2="{x_end}" y2="{y_end}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{y_end}" stroke="black"/>"#
    );
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            (v * 100.0).round()
        );
    }
    for (i, _) in curve.iter().enumerate() {
        let x = px(i as f64 + 1.0);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y_end + 16.0,
            i + 1
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">clicks</text>"#,
        (LEFT + x_end) / 2.0,
        H - 10.0
    );
    if let Some(c) = contour {
        let y = py(c);
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT}" y1="{y:.2}" x2="{x_end}" y2="{y:.2}" stroke="firebrick" stroke-dasharray="6 4" class="contour"/>"#
        );
    }
    if !curve.is_empty() {
        let points: Vec<String> = curve
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", px(i as f64 + 1.0), py(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2" class="clicks"/>"#,
            points.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    svg
}
