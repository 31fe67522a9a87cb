use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod input;

#[derive(Parser)]
#[command(
    name = "amodal",
    version,
    about = "Amodal segmentation scenes: validation, rendering, statistics and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here instead of standard output.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check scene files against the annotation rules.
    Validate {
        #[arg(required = true)]
        scenes: Vec<PathBuf>,
        /// Regions below this many pixels draw a warning.
        #[arg(long, default_value_t = 600)]
        min_region_pixels: usize,
        /// Amodal pixel coverage below this fraction draws a warning.
        #[arg(long, default_value_t = 0.5)]
        coverage_floor: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Render a scene and summarize per-region occlusion.
    Render {
        scene: PathBuf,
        /// Also write amodal, visible and edge bitmaps as PBM files.
        #[arg(long)]
        pbm_dir: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Dataset statistics over a set of scenes.
    Stats {
        #[arg(required = true)]
        scenes: Vec<PathBuf>,
        /// Also write histogram CSV files.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// Include per-region shape metrics in the report.
        #[arg(long)]
        shapes: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Average recall of ranked proposals, overall and by occlusion stratum.
    EvalAr {
        /// Ground-truth scenes; the image name is the file stem.
        #[arg(long, required = true, num_args = 1..)]
        gt: Vec<PathBuf>,
        /// Prediction bundle.
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value_t = amodal_core::eval::MAX_PROPOSALS)]
        max_proposals: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Pairwise depth-order accuracy.
    EvalOrder {
        #[arg(long, required = true, num_args = 1..)]
        gt: Vec<PathBuf>,
        /// Prediction bundle; without it the ground-truth amodal masks are ordered.
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OrdererKind::Area)]
        orderer: OrdererKind,
        /// Invert every verdict.
        #[arg(long)]
        negate: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Region-level agreement between annotations of one image.
    EvalConsistency {
        #[arg(required = true, num_args = 2..)]
        scenes: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Amodal)]
        mode: Mode,
        #[command(flatten)]
        output: Output,
    },
    /// Edge precision/recall sweep (ODS, AP, R50).
    EvalEdges {
        /// Edge manifest listing soft predictions and ground truth per image.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 99)]
        thresholds: usize,
        /// Matching distance in pixels; defaults to ceil(0.0075 * diagonal) per image.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Score annotators against each other instead of the predictions.
        #[arg(long)]
        human: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Generate a seeded synthetic corpus with planted ground truth.
    Synth(SynthArgs),
    /// Convert COCO polygon annotations into scene files.
    ImportCoco {
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out_dir: PathBuf,
    /// Target none,partial,heavy shares, e.g. 0.39,0.31,0.30.
    #[arg(long, value_parser = parse_triple)]
    strata: Option<[f64; 3]>,
    /// Shape weights blob,star,rect.
    #[arg(long, value_parser = parse_triple)]
    shapes: Option<[f64; 3]>,
    #[arg(long, value_enum, default_value_t = Order::Free)]
    order: Order,
    /// Region count range min,max.
    #[arg(long, value_parser = parse_range)]
    regions: Option<(usize, usize)>,
    #[arg(long, default_value_t = 128)]
    width: u32,
    #[arg(long, default_value_t = 128)]
    height: u32,
    /// Also write identity and hull-expansion prediction bundles.
    #[arg(long)]
    baselines: bool,
    #[command(flatten)]
    output: Output,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> =
        s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected three comma-separated numbers, got {}", v.len()))
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    match s.split_once(',') {
        Some((a, b)) => {
            Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
        }
        None => Err("expected min,max".into()),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrdererKind {
    Area,
    Yaxis,
    YaxisCentroid,
    /// Verdicts stored in the prediction bundle.
    Bundle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Amodal,
    Modal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Free,
    SmallerInFront,
    LargerInFront,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("AMODAL_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("AMODAL_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
