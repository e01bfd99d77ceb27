//! Flag definitions and their merge with an optional TOML config file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, ValueEnum};
use contoursim::encoding::{EncodingConfig, EncodingMode};
use contoursim::segmenter::{ExternalConfig, SegmenterSpec};
use contoursim::EvalConfig;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmenterKind {
    Oracle,
    Baseline,
    Empty,
    External,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Filled,
    Line,
}

/// Config file keys, one per flag.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub n: Option<u32>,
    pub segmenter: Option<SegmenterKind>,
    pub segmenter_cmd: Option<String>,
    pub timeout: Option<f64>,
    pub zoom_in: Option<bool>,
    pub flip_average: Option<bool>,
    pub threshold: Option<f64>,
    pub max_clicks: Option<u32>,
    pub target_iou: Option<f64>,
    pub mode: Option<ModeArg>,
    pub w: Option<f64>,
    pub line_width: Option<u32>,
    pub iou_threshold: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Dataset root holding images/, masks/ and contours.json.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: logical CPU count).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Output directory; nothing is written outside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SeedArgs {
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    /// Number of samples.
    #[arg(long)]
    pub n: Option<u32>,
}

#[derive(Args, Debug)]
pub struct EncodingArgs {
    /// Contour encoding.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Line width as a fraction of the shorter image side.
    #[arg(long)]
    pub w: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SegmenterArgs {
    #[arg(long, value_enum)]
    pub segmenter: Option<SegmenterKind>,
    /// Command line of the external segmenter (split on whitespace).
    #[arg(long)]
    pub segmenter_cmd: Option<String>,
    /// Per-query timeout of the external segmenter, in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub zoom_in: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub flip_average: Option<bool>,
    /// Probability threshold for binarizing predictions.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub max_clicks: Option<u32>,
    /// IoU target of NoC@k, as a fraction.
    #[arg(long)]
    pub target_iou: Option<f64>,
    #[command(flatten)]
    pub encoding: EncodingArgs,
}

/// Flags merged with the config file.
pub struct Resolver {
    file: FileConfig,
}

impl Resolver {
    pub fn new(common: &CommonArgs) -> Result<Self, CliError> {
        Ok(Self {
            file: FileConfig::load(common.config.as_deref())?,
        })
    }

    pub fn dataset(&self, common: &CommonArgs) -> Result<PathBuf, CliError> {
        common
            .dataset
            .clone()
            .or_else(|| self.file.dataset.clone())
            .ok_or_else(|| CliError::Usage("missing required flag --dataset".into()))
    }

    pub fn out(&self, out: &OutArgs) -> Option<PathBuf> {
        out.out.clone().or_else(|| self.file.out.clone())
    }

    pub fn required_out(&self, out: &OutArgs) -> Result<PathBuf, CliError> {
        self.out(out)
            .ok_or_else(|| CliError::Usage("missing required flag --out".into()))
    }

    pub fn workers(&self, common: &CommonArgs) -> usize {
        common.workers.or(self.file.workers).unwrap_or(0)
    }

    pub fn seed(&self, seed: &SeedArgs) -> u64 {
        seed.seed.or(self.file.seed).unwrap_or(0)
    }

    pub fn n(&self, count: &CountArgs) -> Option<u32> {
        count.n.or(self.file.n)
    }

    pub fn line_width(&self, flag: Option<u32>) -> Result<u32, CliError> {
        let lw = flag.or(self.file.line_width).unwrap_or(1);
        if lw == 0 {
            return Err(CliError::Usage("--line-width must be at least 1".into()));
        }
        Ok(lw)
    }

    pub fn iou_threshold(&self, flag: Option<f64>) -> f64 {
        flag.or(self.file.iou_threshold).unwrap_or(0.97)
    }

    pub fn encoding(&self, args: &EncodingArgs) -> Result<EncodingConfig, CliError> {
        let default = EncodingConfig::default();
        let mode = match args.mode.or(self.file.mode) {
            Some(ModeArg::Line) => EncodingMode::Line,
            Some(ModeArg::Filled) | None => EncodingMode::Filled,
        };
        let w = args.w.or(self.file.w).unwrap_or(default.w);
        if !(w > 0.0 && w <= 1.0) {
            return Err(CliError::Usage(format!("--w must be in (0, 1], got {w}")));
        }
        Ok(EncodingConfig { mode, w })
    }

    pub fn eval_config(&self, args: &SegmenterArgs) -> Result<EvalConfig, CliError> {
        let d = EvalConfig::default();
        let config = EvalConfig {
            target_iou: args.target_iou.or(self.file.target_iou).unwrap_or(d.target_iou),
            max_clicks: args.max_clicks.or(self.file.max_clicks).unwrap_or(d.max_clicks),
            threshold: args.threshold.or(self.file.threshold).unwrap_or(d.threshold),
            zoom_in: args.zoom_in.or(self.file.zoom_in).unwrap_or(d.zoom_in),
            flip_average: args.flip_average.or(self.file.flip_average).unwrap_or(d.flip_average),
            encoding: self.encoding(&args.encoding)?,
            ..d
        };
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }

    pub fn segmenter(&self, args: &SegmenterArgs) -> Result<SegmenterSpec, CliError> {
        let kind = args
            .segmenter
            .or(self.file.segmenter)
            .ok_or_else(|| CliError::Usage("missing required flag --segmenter".into()))?;
        Ok(match kind {
            SegmenterKind::Oracle => SegmenterSpec::Oracle,
            SegmenterKind::Baseline => SegmenterSpec::Baseline,
            SegmenterKind::Empty => SegmenterSpec::Empty,
            SegmenterKind::External => {
                let cmd = args
                    .segmenter_cmd
                    .clone()
                    .or_else(|| self.file.segmenter_cmd.clone())
                    .ok_or_else(|| CliError::Usage("--segmenter external needs --segmenter-cmd".into()))?;
                let mut config = ExternalConfig::from_command_line(&cmd)
                    .ok_or_else(|| CliError::Usage("--segmenter-cmd is empty".into()))?;
                if let Some(secs) = args.timeout.or(self.file.timeout) {
                    config.timeout = Duration::try_from_secs_f64(secs)
                        .ok()
                        .filter(|d| !d.is_zero())
                        .ok_or_else(|| CliError::Usage(format!("--timeout must be positive, got {secs}")))?;
                }
                SegmenterSpec::External(config)
            }
        })
    }
}
