//! `contoursim` command-line front-end.

mod commands;
mod config;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use contoursim::generate::with_workers;
use contoursim::segmenter::SegmenterSpec;
use serde_json::{json, Value};

use commands::EvalKind;
use config::{CommonArgs, CountArgs, EncodingArgs, OutArgs, Resolver, SeedArgs, SegmenterArgs};

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<contoursim::Error> for CliError {
    fn from(e: contoursim::Error) -> Self {
        match e {
            contoursim::Error::Io { .. } => CliError::Internal(e.to_string()),
            e => CliError::Failure(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "contoursim",
    version,
    about = "Contour simulation and evaluation for interactive segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one random contour per sample, cycling through the records.
    Generate(GenerateArgs),
    /// Accumulate contour lines of many generations per record.
    Heatmap(HeatmapArgs),
    /// Encode the annotated contours into segmenter input planes.
    Encode(EncodeArgs),
    /// Check a dataset directory (exit 0 pass, 1 warnings, 2 failures).
    Validate(ValidateArgs),
    /// IoU after a single annotated contour.
    EvalContour(EvalArgs),
    /// Simulated-click evaluation with NoC and equivalent clicks.
    EvalClicks(EvalArgs),
    /// Keep generated contours the segmenter turns into near-perfect masks.
    Mine(MineArgs),
    /// Export positive and negative training samples.
    ExportSamples(ExportArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    count: CountArgs,
}

#[derive(Args, Debug)]
struct HeatmapArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    count: CountArgs,
    /// Contour line width in pixels.
    #[arg(long)]
    line_width: Option<u32>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    encoding: EncodingArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    segmenter: SegmenterArgs,
}

#[derive(Args, Debug)]
struct MineArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    segmenter: SegmenterArgs,
    /// Keep samples whose IoU exceeds this fraction.
    #[arg(long)]
    iou_threshold: Option<f64>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    count: CountArgs,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Heatmap(_) => "heatmap",
            Command::Encode(_) => "encode",
            Command::Validate(_) => "validate",
            Command::EvalContour(_) => "eval-contour",
            Command::EvalClicks(_) => "eval-clicks",
            Command::Mine(_) => "mine",
            Command::ExportSamples(_) => "export-samples",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Generate(a) => &a.common,
            Command::Heatmap(a) => &a.common,
            Command::Encode(a) => &a.common,
            Command::Validate(a) => &a.common,
            Command::EvalContour(a) | Command::EvalClicks(a) => &a.common,
            Command::Mine(a) => &a.common,
            Command::ExportSamples(a) => &a.common,
        }
    }
}

fn segmenter_json(spec: &SegmenterSpec) -> Value {
    match spec {
        SegmenterSpec::Oracle => json!("oracle"),
        SegmenterSpec::Baseline => json!("baseline"),
        SegmenterSpec::Empty => json!("empty"),
        SegmenterSpec::External(c) => json!({
            "program": c.program,
            "args": c.args,
            "timeout_secs": c.timeout.as_secs_f64(),
        }),
    }
}

fn log_config(command: &str, config: Value) {
    eprintln!("{}", json!({"command": command, "config": config}));
}

fn path_json(p: &Path) -> Value {
    json!(p.display().to_string())
}

/// Runs a parsed command and returns its exit code.
fn run(command: &Command) -> Result<u8, CliError> {
    let common = command.common();
    let resolver = Resolver::new(common)?;
    let workers = resolver.workers(common);
    let dataset = resolver.dataset(common)?;
    let name = command.name();
    let mut config = json!({"dataset": path_json(&dataset), "workers": workers});
    let mut log = |extra: Value| {
        if let (Value::Object(base), Value::Object(extra)) = (&mut config, extra) {
            base.extend(extra);
        }
        log_config(name, config.clone());
    };

    with_workers(workers, || match command {
        Command::Generate(a) => {
            let out = resolver.required_out(&a.out)?;
            let seed = resolver.seed(&a.seed);
            let index = commands::load(&dataset)?;
            let n = resolver.n(&a.count).unwrap_or(index.records.len() as u32);
            log(json!({"out": path_json(&out), "seed": seed, "n": n}));
            commands::generate(&index, &out, seed, n)?;
            Ok(EXIT_OK)
        }
        Command::Heatmap(a) => {
            let out = resolver.required_out(&a.out)?;
            let seed = resolver.seed(&a.seed);
            let n = resolver.n(&a.count).unwrap_or(100);
            let line_width = resolver.line_width(a.line_width)?;
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            log(json!({"out": path_json(&out), "seed": seed, "n": n, "line_width": line_width}));
            commands::heatmap(&commands::load(&dataset)?, &out, seed, n, line_width)?;
            Ok(EXIT_OK)
        }
        Command::Encode(a) => {
            let out = resolver.required_out(&a.out)?;
            let encoding = resolver.encoding(&a.encoding)?;
            log(json!({"out": path_json(&out), "encoding": encoding}));
            commands::encode(&commands::load(&dataset)?, &out, &encoding)?;
            Ok(EXIT_OK)
        }
        Command::Validate(a) => {
            let out = resolver.out(&a.out);
            log(json!({"out": out.as_deref().map(path_json)}));
            Ok(commands::validate(&dataset, out.as_deref())? as u8)
        }
        Command::EvalContour(a) | Command::EvalClicks(a) => {
            let out = resolver.required_out(&a.out)?;
            let segmenter = resolver.segmenter(&a.segmenter)?;
            let eval = resolver.eval_config(&a.segmenter)?;
            log(json!({"out": path_json(&out), "segmenter": segmenter_json(&segmenter), "eval": eval}));
            let kind = match command {
                Command::EvalContour(_) => EvalKind::Contour,
                _ => EvalKind::Clicks,
            };
            let failed = commands::eval(kind, &commands::load(&dataset)?, &out, &segmenter, &eval)?;
            if failed > 0 {
                return Err(CliError::Failure(format!("{failed} samples failed; see samples.csv")));
            }
            Ok(EXIT_OK)
        }
        Command::Mine(a) => {
            let out = resolver.required_out(&a.out)?;
            let seed = resolver.seed(&a.seed);
            let segmenter = resolver.segmenter(&a.segmenter)?;
            let eval = resolver.eval_config(&a.segmenter)?;
            let iou_threshold = resolver.iou_threshold(a.iou_threshold);
            log(json!({
                "out": path_json(&out),
                "seed": seed,
                "segmenter": segmenter_json(&segmenter),
                "eval": eval,
                "iou_threshold": iou_threshold,
            }));
            let (_, skipped) =
                commands::mine(&commands::load(&dataset)?, &out, &segmenter, seed, iou_threshold, &eval)?;
            if skipped > 0 {
                return Err(CliError::Failure(format!("{skipped} samples failed; see mining.json")));
            }
            Ok(EXIT_OK)
        }
        Command::ExportSamples(a) => {
            let out = resolver.required_out(&a.out)?;
            let seed = resolver.seed(&a.seed);
            let index = commands::load(&dataset)?;
            let n = resolver.n(&a.count).unwrap_or(index.records.len() as u32);
            log(json!({"out": path_json(&out), "seed": seed, "n": n}));
            commands::export_samples(&index, &out, seed, n)?;
            Ok(EXIT_OK)
        }
    })
}

fn error_line(code: u8, message: &str) {
    eprintln!("{}", json!({"error": message, "exit_code": code}));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            if code != EXIT_OK {
                let message = match e.kind() {
                    ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => "missing subcommand".to_string(),
                    _ => e
                        .to_string()
                        .lines()
                        .next()
                        .unwrap_or("usage error")
                        .trim_start_matches("error: ")
                        .to_string(),
                };
                error_line(code, &message);
            }
            return ExitCode::from(code);
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| run(&cli.command))).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(CliError::Internal(message))
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.exit_code();
            if let CliError::Usage(m) = &e {
                eprintln!("error: {m}");
            }
            error_line(code, e.message());
            ExitCode::from(code)
        }
    }
}
