use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use amodal_core::eval::{
    depth_order_accuracy, edge_benchmark, human_edge_consistency, region_consistency, ConsistencyMode, EdgeBenchConfig,
    GtSegment, Negated, OrderEvalReport, Orderer, Prf,
};
use amodal_core::io::{
    bundle_to_json, import_coco, parse_bundle, scene_to_json, to_report_json, write_pbm, write_pbm_raw,
    ImagePredictions, MaskSource, PairVerdict, PredictionBundle, Proposal, RenderSummary,
};
use amodal_core::stats::OCCLUSION_BINS;
use amodal_core::synth::{GenConfig, GeneratedScene, OrderMode, ShapeMix};
use amodal_core::{
    amodal_hull_expand, generate_corpus, render_scene, summarize, validate_scene_with, AreaOrderer, Finding, MaskGrid,
    OrderInput, ValidationConfig, YAxisOrderer, YKey,
};

use crate::input::{create_dir, emit, load_edge_manifest, load_named_scenes, load_scene, read, write_file};
use crate::{Command, Mode, Order, OrdererKind, SynthArgs};

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { scenes, min_region_pixels, coverage_floor, output } => {
            let cfg = ValidationConfig { min_region_pixels, coverage_floor };
            validate(&scenes, &cfg, output.out.as_deref())
        }
        Command::Render { scene, pbm_dir, output } => {
            render(&scene, pbm_dir.as_deref(), output.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { scenes, csv_dir, shapes, output } => {
            stats(&scenes, csv_dir.as_deref(), shapes, output.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::EvalAr { gt, pred, max_proposals, output } => {
            eval_ar(&gt, &pred, max_proposals, output.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::EvalOrder { gt, pred, orderer, negate, output } => {
            eval_order(&gt, pred.as_deref(), orderer, negate, output.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::EvalConsistency { scenes, mode, output } => {
            eval_consistency(&scenes, mode, output.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::EvalEdges { manifest, thresholds, tolerance, human, output } => {
            eval_edges(&manifest, thresholds, tolerance, human, output.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth(args) => {
            synth(&args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ImportCoco { input, out_dir, output } => {
            coco(&input, &out_dir, output.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Serialize)]
struct FileValidation {
    file: String,
    valid: bool,
    errors: Vec<Finding>,
    warnings: Vec<Finding>,
}

#[derive(Serialize)]
struct ValidateReport {
    valid: bool,
    files: Vec<FileValidation>,
}

fn validate(paths: &[std::path::PathBuf], cfg: &ValidationConfig, out: Option<&Path>) -> Result<ExitCode> {
    let files: Vec<FileValidation> = paths
        .par_iter()
        .map(|p| {
            let file = p.display().to_string();
            match load_scene(p) {
                Ok(scene) => {
                    let r = validate_scene_with(&scene, cfg);
                    FileValidation { file, valid: r.is_valid(), errors: r.errors, warnings: r.warnings }
                }
                Err(e) => FileValidation {
                    file,
                    valid: false,
                    errors: vec![Finding { rule: "parse".into(), region: None, message: format!("{e:#}") }],
                    warnings: Vec::new(),
                },
            }
        })
        .collect();
    for f in &files {
        for (level, finding) in f.errors.iter().map(|x| ("error", x)).chain(f.warnings.iter().map(|x| ("warning", x))) {
            let region = finding.region.map(|r| format!(" region {r}")).unwrap_or_default();
            eprintln!("{}: {level}[{}]{region}: {}", f.file, finding.rule, finding.message);
        }
    }
    let valid = files.iter().all(|f| f.valid);
    emit(out, &to_report_json("validate", &ValidateReport { valid, files }))?;
    Ok(if valid { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn render(path: &Path, pbm_dir: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let scene = load_scene(path)?;
    let render = render_scene(&scene).with_context(|| format!("{}", path.display()))?;
    if let Some(dir) = pbm_dir {
        create_dir(dir)?;
        for r in &render.regions {
            write_file(&dir.join(format!("region-{}-amodal.pbm", r.id)), write_pbm(&r.amodal))?;
            write_file(&dir.join(format!("region-{}-visible.pbm", r.id)), write_pbm(&r.visible))?;
        }
        write_file(&dir.join("edges-visible.pbm"), write_pbm(&render.edges.visible))?;
        write_file(&dir.join("edges-hidden.pbm"), write_pbm(&render.edges.hidden))?;
    }
    emit(out, &to_report_json("render", &RenderSummary::new(&scene, &render)))
}

fn histogram_csv<K: std::fmt::Display>(header: &str, rows: impl IntoIterator<Item = (K, usize)>) -> String {
    let mut s = format!("{header},count\n");
    for (k, n) in rows {
        s.push_str(&format!("{k},{n}\n"));
    }
    s
}

fn stats(paths: &[std::path::PathBuf], csv_dir: Option<&Path>, shapes: bool, out: Option<&Path>) -> Result<()> {
    let scenes: Vec<_> = paths.iter().map(|p| load_scene(p)).collect::<Result<_>>()?;
    let summary = summarize(&scenes)?;
    if let Some(dir) = csv_dir {
        create_dir(dir)?;
        let labels = (0..OCCLUSION_BINS).map(|b| {
            if b == 0 {
                "0".to_string()
            } else {
                format!("({:.1}-{:.1}]", (b - 1) as f64 / 10.0, b as f64 / 10.0)
            }
        });
        write_file(
            &dir.join("occlusion.csv"),
            histogram_csv("occlusion", labels.zip(summary.occlusion_histogram.iter().copied())),
        )?;
        write_file(&dir.join("cc_count.csv"), histogram_csv("components", summary.cc_count_histogram.clone()))?;
        write_file(&dir.join("cc_size.csv"), histogram_csv("size", summary.cc_size_histogram.clone()))?;
        write_file(&dir.join("depth_layers.csv"), histogram_csv("layers", summary.depth_layer_histogram.clone()))?;
    }
    let mut value = serde_json::to_value(&summary)?;
    if !shapes {
        value.as_object_mut().expect("summary is an object").remove("shapes");
    }
    emit(out, &to_report_json("stats", &value))
}

fn load_bundle(path: &Path) -> Result<PredictionBundle> {
    parse_bundle(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn bundle_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

#[derive(Serialize)]
struct ArOut<'a> {
    images: usize,
    max_proposals: usize,
    #[serde(flatten)]
    report: &'a amodal_core::eval::ARReport,
}

fn eval_ar(gt: &[std::path::PathBuf], pred: &Path, max_proposals: usize, out: Option<&Path>) -> Result<()> {
    let scenes = load_named_scenes(gt)?;
    let bundle = load_bundle(pred)?;
    let names: BTreeMap<&str, &amodal_core::Scene> = scenes.iter().map(|(n, s)| (n.as_str(), s)).collect();
    bundle.check_images(|n| names.contains_key(n))?;
    let base = bundle_dir(pred);
    let per: Vec<(String, Vec<GtSegment>, Option<Vec<MaskGrid>>)> = scenes
        .par_iter()
        .map(|(name, scene)| {
            let render = render_scene(scene).with_context(|| format!("ground truth `{name}`"))?;
            let segs =
                render.regions.into_iter().map(|r| GtSegment { mask: r.amodal, occlusion: r.occlusion }).collect();
            let props = bundle
                .image(name)
                .map(|img| img.masks(base, scene.width, scene.height).map(|m| m.into_iter().map(|p| p.1).collect()))
                .transpose()
                .with_context(|| format!("predictions for `{name}`"))?;
            Ok((name.clone(), segs, props))
        })
        .collect::<Result<_>>()?;
    let mut gts = BTreeMap::new();
    let mut proposals = BTreeMap::new();
    for (name, segs, props) in per {
        if let Some(p) = props {
            proposals.insert(name.clone(), p);
        }
        gts.insert(name, segs);
    }
    let report = amodal_core::eval::average_recall(&proposals, &gts, max_proposals)?;
    emit(out, &to_report_json("ar", &ArOut { images: gts.len(), max_proposals, report: &report }))
}

#[derive(Serialize)]
struct ImageOrder {
    image: String,
    #[serde(flatten)]
    report: OrderEvalReport,
}

#[derive(Serialize)]
struct OrderOut {
    orderer: &'static str,
    negated: bool,
    accuracy: Option<f64>,
    evaluated_pairs: usize,
    gt_pairs: usize,
    recall_of_pairs: Option<f64>,
    images: Vec<ImageOrder>,
}

fn eval_order(
    gt: &[std::path::PathBuf],
    pred: Option<&Path>,
    kind: OrdererKind,
    negate: bool,
    out: Option<&Path>,
) -> Result<()> {
    let scenes = load_named_scenes(gt)?;
    let bundle = pred.map(load_bundle).transpose()?;
    if let Some(b) = &bundle {
        b.check_images(|n| scenes.iter().any(|(s, _)| s == n))?;
    } else if matches!(kind, OrdererKind::Bundle) {
        bail!("--orderer bundle needs --pred");
    }
    let empty = ImagePredictions { image: String::new(), proposals: Vec::new(), order: Vec::new() };
    let images: Vec<ImageOrder> = scenes
        .par_iter()
        .map(|(name, scene)| {
            let render = render_scene(scene).with_context(|| format!("ground truth `{name}`"))?;
            let image = bundle.as_ref().map(|b| b.image(name).unwrap_or(&empty));
            let predictions: Vec<(u64, MaskGrid)> = match (image, pred) {
                (Some(img), Some(p)) => img.masks(bundle_dir(p), scene.width, scene.height)?,
                _ => render.regions.iter().map(|r| (r.id, r.amodal.clone())).collect(),
            };
            let base: Box<dyn Orderer + Sync> = match kind {
                OrdererKind::Area => Box::new(AreaOrderer),
                OrdererKind::Yaxis => Box::new(YAxisOrderer(YKey::TopRow)),
                OrdererKind::YaxisCentroid => Box::new(YAxisOrderer(YKey::CentroidRow)),
                OrdererKind::Bundle => Box::new(image.expect("bundle present").orderer()),
            };
            let report = if negate {
                depth_order_accuracy(&predictions, &Negated(base.as_ref()), &render)
            } else {
                depth_order_accuracy(&predictions, base.as_ref(), &render)
            }
            .with_context(|| format!("image `{name}`"))?;
            Ok(ImageOrder { image: name.clone(), report })
        })
        .collect::<Result<_>>()?;
    // per-image credit is a multiple of 1/2, so this recovers it exactly
    let credit: f64 = images
        .iter()
        .map(|i| (i.report.accuracy.unwrap_or(0.0) * i.report.evaluated_pairs as f64 * 2.0).round() / 2.0)
        .sum();
    let evaluated: usize = images.iter().map(|i| i.report.evaluated_pairs).sum();
    let gt_pairs: usize = images.iter().map(|i| i.report.gt_pairs).sum();
    let name = match kind {
        OrdererKind::Area => "area",
        OrdererKind::Yaxis => "yaxis",
        OrdererKind::YaxisCentroid => "yaxis-centroid",
        OrdererKind::Bundle => "bundle",
    };
    let report = OrderOut {
        orderer: name,
        negated: negate,
        accuracy: (evaluated > 0).then(|| credit / evaluated as f64),
        evaluated_pairs: evaluated,
        gt_pairs,
        recall_of_pairs: (gt_pairs > 0).then(|| evaluated as f64 / gt_pairs as f64),
        images,
    };
    emit(out, &to_report_json("order", &report))
}

#[derive(Serialize)]
struct ConsistencyOut {
    mode: &'static str,
    files: Vec<String>,
    mean_precision: f64,
    mean_recall: f64,
    mean_f: f64,
    pairs: Vec<amodal_core::eval::PairScore>,
}

fn eval_consistency(paths: &[std::path::PathBuf], mode: Mode, out: Option<&Path>) -> Result<()> {
    let scenes: Vec<_> = paths.iter().map(|p| load_scene(p)).collect::<Result<_>>()?;
    let (mode, label) = match mode {
        Mode::Amodal => (ConsistencyMode::Amodal, "amodal"),
        Mode::Modal => (ConsistencyMode::Modal, "modal"),
    };
    let pairs = region_consistency(&scenes, mode)?;
    let mean = |f: fn(&Prf) -> f64| pairs.iter().map(|p| f(&p.prf)).sum::<f64>() / pairs.len() as f64;
    let report = ConsistencyOut {
        mode: label,
        files: paths.iter().map(|p| p.display().to_string()).collect(),
        mean_precision: mean(|p| p.precision),
        mean_recall: mean(|p| p.recall),
        mean_f: mean(|p| p.f),
        pairs,
    };
    emit(out, &to_report_json("consistency", &report))
}

#[derive(Serialize)]
struct EdgesOut<'a> {
    images: usize,
    thresholds: usize,
    tolerance: Option<f64>,
    #[serde(flatten)]
    report: &'a amodal_core::eval::EdgeBenchReport,
}

#[derive(Serialize)]
struct HumanEdgesOut {
    images: usize,
    tolerance: Option<f64>,
    counts: amodal_core::eval::EdgeCounts,
    #[serde(flatten)]
    prf: Prf,
}

fn eval_edges(
    manifest: &Path,
    thresholds: usize,
    tolerance: Option<f64>,
    human: bool,
    out: Option<&Path>,
) -> Result<()> {
    let m = load_edge_manifest(manifest)?;
    if human {
        let counts = human_edge_consistency(&m.ground_truth, tolerance)?;
        let report = HumanEdgesOut { images: m.names.len(), tolerance, counts, prf: counts.prf() };
        return emit(out, &to_report_json("edges-human", &report));
    }
    let images = m.bench_images()?;
    let report = edge_benchmark(&images, &EdgeBenchConfig { thresholds, tolerance })?;
    emit(out, &to_report_json("edges", &EdgesOut { images: images.len(), thresholds, tolerance, report: &report }))
}

#[derive(Serialize)]
struct SynthOut {
    config: GenConfig,
    count: usize,
    scenes: Vec<String>,
    regions: usize,
    /// Realized none / partial / heavy region counts.
    strata: [usize; 3],
    strata_share: [f64; 3],
    baselines: Vec<String>,
}

fn synth(args: &SynthArgs) -> Result<()> {
    let mut cfg = GenConfig {
        seed: args.seed,
        width: args.width,
        height: args.height,
        order: match args.order {
            Order::Free => OrderMode::Free,
            Order::SmallerInFront => OrderMode::SmallerInFront,
            Order::LargerInFront => OrderMode::LargerInFront,
        },
        ..GenConfig::default()
    };
    cfg.strata = args.strata;
    if let Some([blob, star, rect]) = args.shapes {
        cfg.shapes = ShapeMix { blob, star, rect };
    }
    if let Some(r) = args.regions {
        cfg.regions = r;
    }
    let corpus = generate_corpus(&cfg, args.count)?;
    let dir = &args.out_dir;
    create_dir(dir)?;
    let names: Vec<String> = (0..corpus.len()).map(|i| format!("scene-{i:04}")).collect();
    for (name, g) in names.iter().zip(&corpus) {
        write_file(&dir.join(format!("{name}.json")), scene_to_json(&g.scene))?;
        write_file(&dir.join(format!("{name}.truth.json")), amodal_core::io::to_fixed_json(&g.truth))?;
    }
    let mut baselines = Vec::new();
    if args.baselines {
        create_dir(&dir.join("masks"))?;
        for kind in ["identity", "hull"] {
            let bundle = baseline_bundle(dir, &names, &corpus, kind)?;
            let file = format!("predictions-{kind}.json");
            write_file(&dir.join(&file), bundle_to_json(&bundle))?;
            baselines.push(file);
        }
    }
    let mut strata = [0usize; 3];
    for g in &corpus {
        for &q in &g.truth.occlusion {
            strata[amodal_core::eval::Stratum::of(q).index()] += 1;
        }
    }
    let regions: usize = strata.iter().sum();
    let share = |k: usize| if regions == 0 { 0.0 } else { strata[k] as f64 / regions as f64 };
    let report = SynthOut {
        config: cfg,
        count: corpus.len(),
        scenes: names,
        regions,
        strata,
        strata_share: [share(0), share(1), share(2)],
        baselines,
    };
    emit(args.output.out.as_deref(), &to_report_json("synth", &report))
}

/// Modal-input amodal baselines as a bundle of raw PBM masks, with area
/// heuristic verdicts for every proposal pair.
fn baseline_bundle(dir: &Path, names: &[String], corpus: &[GeneratedScene], kind: &str) -> Result<PredictionBundle> {
    let per: Vec<Vec<(u64, MaskGrid)>> = corpus
        .par_iter()
        .map(|g| {
            g.render
                .regions
                .iter()
                .filter(|r| !r.visible.is_empty())
                .map(|r| {
                    let m = if kind == "hull" { amodal_hull_expand(&r.visible)? } else { r.visible.clone() };
                    Ok((r.id, m))
                })
                .collect::<amodal_core::Result<Vec<_>>>()
        })
        .collect::<amodal_core::Result<_>>()?;
    let mut images = Vec::with_capacity(names.len());
    for (name, masks) in names.iter().zip(per) {
        let mut proposals = Vec::with_capacity(masks.len());
        for (id, m) in &masks {
            let rel = format!("masks/{name}-{kind}-{id}.pbm");
            write_file(&dir.join(&rel), write_pbm_raw(m))?;
            proposals.push(Proposal { id: *id, score: 1.0, mask: MaskSource::Pbm(rel) });
        }
        let mut order = Vec::new();
        for (i, (a, ma)) in masks.iter().enumerate() {
            for (b, mb) in &masks[i + 1..] {
                let p = AreaOrderer.order(OrderInput { id: *a, mask: ma }, OrderInput { id: *b, mask: mb })?;
                order.push(PairVerdict { first: *a, second: *b, verdict: p.verdict, confidence: p.confidence });
            }
        }
        images.push(ImagePredictions { image: name.clone(), proposals, order });
    }
    Ok(PredictionBundle { images })
}

#[derive(Serialize)]
struct Skipped {
    annotation: u64,
    reason: String,
}

#[derive(Serialize)]
struct CocoOut {
    scenes: Vec<String>,
    skipped: Vec<Skipped>,
}

fn coco(input: &Path, out_dir: &Path, out: Option<&Path>) -> Result<()> {
    let imported = import_coco(&read(input)?).with_context(|| format!("{}", input.display()))?;
    create_dir(out_dir)?;
    let mut scenes = Vec::new();
    for (name, scene) in &imported.scenes {
        let file = format!("{name}.json");
        if scenes.contains(&file) {
            bail!("two COCO images map to the scene name `{name}`");
        }
        write_file(&out_dir.join(&file), scene_to_json(scene))?;
        scenes.push(file);
    }
    let skipped =
        imported.skipped.into_iter().map(|s| Skipped { annotation: s.annotation, reason: s.reason }).collect();
    emit(out, &to_report_json("import-coco", &CocoOut { scenes, skipped }))
}
