//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use contoursim::dataset::DatasetCheck;
use contoursim::encoding::ContourInput;
use contoursim::eval::{mine_finetune_set, run_click_eval, run_contour_eval};
use contoursim::export::{write_sample_export, ExportSample};
use contoursim::generate::{generate_heatmap, synthesize_training_sample, GenerationLogRecord};
use contoursim::rng::derive_seed;
use contoursim::segmenter::SegmenterSpec;
use contoursim::{
    encode_interaction, generate_contour, load_dataset, AnnotationRecord, DatasetIndex, EncodingConfig, EvalConfig,
};
use rayon::prelude::*;
use serde_json::json;

use crate::CliError;

pub fn load(dataset: &Path) -> Result<DatasetIndex, CliError> {
    let index = load_dataset(dataset).map_err(|e| CliError::Failure(e.to_string()))?;
    if index.records.is_empty() {
        return Err(CliError::Failure(format!("{}: no annotations", dataset.display())));
    }
    Ok(index)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn jsonl<T: serde::Serialize>(rows: &[T]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).expect("row serializes") + "\n")
        .collect()
}

/// The record used for sample `i` when cycling through the dataset.
fn record_for(index: &DatasetIndex, i: u32) -> &AnnotationRecord {
    &index.records[i as usize % index.records.len()]
}

/// One generated contour per sample, `contours/<sample>.png`, plus
/// `generation.jsonl` with every drawn parameter.
pub fn generate(index: &DatasetIndex, out: &Path, seed: u64, n: u32) -> Result<u32, CliError> {
    let dir = out.join("contours");
    create_dir(&dir)?;
    let records: Vec<GenerationLogRecord> = (0..n)
        .into_par_iter()
        .map(|i| {
            let rec = record_for(index, i);
            let gt = rec.load_mask()?;
            let contour = generate_contour(&gt, derive_seed(seed, i as u64))?;
            contour.filled.write_png(&dir.join(format!("{i:06}.png")))?;
            let mut log = GenerationLogRecord::new(i as u64, &contour, &gt)?;
            log.image_id = Some(rec.image_id.clone());
            log.annotation_number = Some(rec.annotation_number.clone());
            Ok(log)
        })
        .collect::<contoursim::Result<_>>()?;
    write_file(&out.join("generation.jsonl"), jsonl(&records))?;
    Ok(n)
}

/// A 16-bit count image per record, `heatmaps/<key>.png`, plus
/// `heatmaps.jsonl`.
pub fn heatmap(index: &DatasetIndex, out: &Path, seed: u64, n: u32, line_width: u32) -> Result<usize, CliError> {
    let dir = out.join("heatmaps");
    create_dir(&dir)?;
    let rows = index
        .records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let map = generate_heatmap(&rec.load_mask()?, n, derive_seed(seed, i as u64), line_width)?;
            let path = dir.join(format!("{}.png", rec.key()));
            map.to_image()
                .save(&path)
                .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
            Ok(json!({"key": rec.key(), "draws": map.draws, "max": map.max(), "total": map.total()}))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    write_file(&out.join("heatmaps.jsonl"), jsonl(&rows))?;
    Ok(rows.len())
}

/// Encodes the annotated contours of every record into
/// `encodings/<key>_{pos,neg,prev}.png`.
pub fn encode(index: &DatasetIndex, out: &Path, config: &EncodingConfig) -> Result<usize, CliError> {
    let dir = out.join("encodings");
    create_dir(&dir)?;
    index.records.par_iter().try_for_each(|rec| -> contoursim::Result<()> {
        let dims = rec.load_mask()?.dims();
        let polys = |v: &[contoursim::ContourPolygon]| -> contoursim::Result<Vec<ContourInput>> {
            v.iter()
                .map(|p| Ok(contoursim::dataset::close_contour(p)?.into()))
                .collect()
        };
        let enc = encode_interaction(
            &polys(&rec.pos_contours)?,
            &polys(&rec.neg_contours)?,
            None,
            config,
            dims,
        )?;
        enc.write_pngs(&dir, &rec.key())?;
        Ok(())
    })?;
    Ok(index.records.len())
}

/// Validates the dataset; the report goes to stdout and, with `--out`, to
/// `validation.json`. Returns the validator exit code.
pub fn validate(dataset: &Path, out: Option<&Path>) -> Result<i32, CliError> {
    let check = DatasetCheck::run(dataset);
    let code = check.exit_code();
    let summary = match &check {
        DatasetCheck::Validated(report) => {
            if let Some(out) = out {
                create_dir(out)?;
                let text = serde_json::to_string_pretty(report).expect("report serializes");
                write_file(&out.join("validation.json"), text + "\n")?;
            }
            for rec in &report.records {
                for f in &rec.findings {
                    println!(
                        "{}_{}\t{:?}\t{}\t{}",
                        rec.image_id, rec.annotation_number, f.status, f.check, f.message
                    );
                }
            }
            for w in &report.dataset_warnings {
                println!("dataset\tWarn\t-\t{w}");
            }
            format!("{} records", report.records.len())
        }
        DatasetCheck::Unloadable(e) => return Err(CliError::Failure(e.to_string())),
    };
    println!("{summary}, exit code {code}");
    Ok(code)
}

pub enum EvalKind {
    Contour,
    Clicks,
}

/// Runs the evaluation and writes the report files. Returns the number of
/// failed samples.
pub fn eval(
    kind: EvalKind,
    index: &DatasetIndex,
    out: &Path,
    segmenter: &SegmenterSpec,
    config: &EvalConfig,
) -> Result<usize, CliError> {
    let contour = run_contour_eval(segmenter, index, config)?;
    let report = match kind {
        EvalKind::Contour => contour,
        EvalKind::Clicks => run_click_eval(segmenter, index, config)?.with_contour_results(&contour),
    };
    report.write(out)?;
    print!("{}", report.summary_csv());
    Ok(report.aggregates.failed)
}

/// Mines generated contours the segmenter reproduces above `iou_threshold`
/// and exports them as training samples plus `mining.json`.
pub fn mine(
    index: &DatasetIndex,
    out: &Path,
    segmenter: &SegmenterSpec,
    seed: u64,
    iou_threshold: f64,
    config: &EvalConfig,
) -> Result<(usize, usize), CliError> {
    let mined = mine_finetune_set(segmenter, index, seed, iou_threshold, config)?;
    create_dir(out)?;
    write_sample_export(out, &mined.export_samples()?)?;
    let skipped: Vec<_> = mined
        .skipped
        .iter()
        .map(|(k, r)| json!({"key": k, "reason": r}))
        .collect();
    let summary = json!({
        "total": mined.total,
        "kept": mined.kept.len(),
        "iou_threshold": iou_threshold,
        "skipped": skipped,
    });
    write_file(
        &out.join("mining.json"),
        serde_json::to_string_pretty(&summary).expect("json") + "\n",
    )?;
    println!("kept {} of {}", mined.kept.len(), mined.total);
    Ok((mined.kept.len(), mined.skipped.len()))
}

/// Positive and negative training samples, one per sample id, cycling
/// through the records.
pub fn export_samples(index: &DatasetIndex, out: &Path, seed: u64, n: u32) -> Result<u32, CliError> {
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let rec = record_for(index, i);
            let sample = synthesize_training_sample(&rec.load_mask()?, derive_seed(seed, i as u64))?;
            let mut export = ExportSample::from_training(format!("{i:06}"), &sample);
            export.image_id = Some(rec.image_id.clone());
            export.annotation_number = Some(rec.annotation_number.clone());
            export.image_path = index.image_path(&rec.image_id).map(PathBuf::from);
            Ok(export)
        })
        .collect::<contoursim::Result<Vec<_>>>()?;
    create_dir(out)?;
    write_sample_export(out, &samples)?;
    Ok(n)
}
