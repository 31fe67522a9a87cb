//! Seeded synthetic scenes with planted ground truth, and overlay augmentation.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Stratum;
use crate::geometry::{Point, Polygon};
use crate::mask::MaskGrid;
use crate::raster::{rasterize, render_scene_reference, SceneRender};
use crate::scene::{validate_scene, Region, RegionKind, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeFamily {
    Blob,
    Star,
    Rect,
}

/// Relative weights of the shape families; must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeMix {
    pub blob: f64,
    pub star: f64,
    pub rect: f64,
}

impl Default for ShapeMix {
    fn default() -> Self {
        ShapeMix { blob: 0.4, star: 0.3, rect: 0.3 }
    }
}

/// Depth order planted by the generator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderMode {
    #[default]
    Free,
    /// Strictly increasing amodal pixel area from front to back.
    SmallerInFront,
    /// Strictly decreasing amodal pixel area from front to back.
    LargerInFront,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    /// Inclusive bounds on the number of regions.
    pub regions: (usize, usize),
    pub shapes: ShapeMix,
    /// Inclusive bounds on the shape radius in pixels.
    pub size: (f64, f64),
    /// Target share of regions in the none / partial / heavy occlusion strata.
    pub strata: Option<[f64; 3]>,
    pub order: OrderMode,
    /// Placement attempts per region before giving up.
    pub max_attempts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            width: 128,
            height: 128,
            regions: (3, 8),
            shapes: ShapeMix::default(),
            size: (14.0, 36.0),
            strata: None,
            order: OrderMode::Free,
            max_attempts: 400,
        }
    }
}

/// Occlusion profile with 39% / 31% / 30% of regions unoccluded, partially
/// and heavily occluded.
pub const REFERENCE_STRATA: [f64; 3] = [0.39, 0.31, 0.30];

const MIN_REGION_PIXELS: usize = 40;

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return bad("image dimensions must be positive");
        }
        if self.regions.0 > self.regions.1 {
            return bad("empty region count range");
        }
        if !(self.size.0 > 0.0 && self.size.0 <= self.size.1) {
            return bad("size range must be positive and non-empty");
        }
        let m = self.shapes;
        if [m.blob, m.star, m.rect].iter().any(|&p| p < 0.0) || (m.blob + m.star + m.rect - 1.0).abs() > 1e-9 {
            return bad("shape mix must be non-negative and sum to 1");
        }
        if let Some(s) = self.strata {
            if s.iter().any(|&p| p < 0.0) || (s.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad("strata targets must be non-negative and sum to 1");
            }
            if self.order != OrderMode::Free {
                return bad("strata targets require free depth order");
            }
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive");
        }
        Ok(())
    }
}

/// What the generator planted, for checking metrics against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub seed: u64,
    pub depth_order: Vec<u64>,
    pub families: Vec<ShapeFamily>,
    pub occlusion: Vec<f64>,
    pub target_strata: Vec<Option<Stratum>>,
}

#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub scene: Scene,
    /// Produced by the per-pixel reference renderer.
    pub render: SceneRender,
    pub truth: PlantedTruth,
}

/// Independent per-scene seed derived from a master seed and an index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

struct Candidate {
    family: ShapeFamily,
    polygon: Polygon,
    mask: MaskGrid,
}

fn pick_family(rng: &mut ChaCha8Rng, mix: &ShapeMix) -> ShapeFamily {
    let u: f64 = rng.gen();
    if u < mix.blob {
        ShapeFamily::Blob
    } else if u < mix.blob + mix.star {
        ShapeFamily::Star
    } else {
        ShapeFamily::Rect
    }
}

/// Shape centred at the origin with the given outer radius.
fn shape(rng: &mut ChaCha8Rng, family: ShapeFamily, radius: f64) -> Vec<Point> {
    use std::f64::consts::TAU;
    let rot: f64 = rng.gen_range(0.0..TAU);
    let place = |x: f64, y: f64| Point::new(x * rot.cos() - y * rot.sin(), x * rot.sin() + y * rot.cos());
    match family {
        ShapeFamily::Blob => {
            // vertices on an ellipse at increasing angles form a convex polygon
            let n = rng.gen_range(6..=12);
            let minor = radius * rng.gen_range(0.6..1.0);
            let mut angles: Vec<f64> = (0..n).map(|k| (k as f64 + rng.gen_range(0.1..0.9)) * TAU / n as f64).collect();
            angles.sort_by(f64::total_cmp);
            angles.into_iter().map(|t| place(radius * t.cos(), minor * t.sin())).collect()
        }
        ShapeFamily::Star => {
            let spikes = rng.gen_range(5..=7);
            let inner = radius * rng.gen_range(0.35..0.6);
            (0..2 * spikes)
                .map(|k| {
                    let t = k as f64 * TAU / (2 * spikes) as f64;
                    let r = if k % 2 == 0 { radius } else { inner };
                    place(r * t.cos(), r * t.sin())
                })
                .collect()
        }
        ShapeFamily::Rect => {
            let hw = radius * rng.gen_range(0.5..1.0);
            let hh = radius * rng.gen_range(0.5..1.0);
            [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)].into_iter().map(|(x, y)| place(x, y)).collect()
        }
    }
}

/// Translates an origin-centred shape to `center`, shifting it back inside the
/// image (and shrinking it if it cannot fit).
fn fit(mut pts: Vec<Point>, center: Point, width: u32, height: u32) -> Option<Polygon> {
    let (w, h) = (width as f64, height as f64);
    let span = |pts: &[Point]| {
        let (mut lo, mut hi) = (Point::new(f64::MAX, f64::MAX), Point::new(f64::MIN, f64::MIN));
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    };
    let (lo, hi) = span(&pts);
    let scale = ((w - 1.0) / (hi.x - lo.x)).min((h - 1.0) / (hi.y - lo.y)).min(1.0);
    if scale < 1.0 {
        pts.iter_mut().for_each(|p| *p = Point::new(p.x * scale, p.y * scale));
    }
    let (lo, hi) = span(&pts);
    let cx = center.x.min(w - 0.5 - hi.x).max(0.5 - lo.x);
    let cy = center.y.min(h - 0.5 - hi.y).max(0.5 - lo.y);
    // snap to 1/64 px so the coordinates survive a decimal round trip exactly
    let snap = |v: f64, hi: f64| ((v * 64.0).round() / 64.0).clamp(0.0, hi);
    let poly =
        Polygon::new(pts.into_iter().map(|p| Point::new(snap(p.x + cx, w), snap(p.y + cy, h))).collect()).ok()?;
    poly.is_simple().then_some(poly)
}

fn occlusion_against(mask: &MaskGrid, covered: &MaskGrid) -> f64 {
    let n = mask.count();
    if n == 0 {
        return 0.0;
    }
    mask.intersection_count(covered) as f64 / n as f64
}

/// Per-region stratum targets. The frontmost region is necessarily
/// unoccluded, so the remaining draws are reweighted to keep the expected
/// share of each stratum at the configured target.
fn draw_targets(rng: &mut ChaCha8Rng, n: usize, target: [f64; 3]) -> Vec<Stratum> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = vec![Stratum::None];
    if n == 1 {
        return out;
    }
    let m = n as f64;
    let mut p = [((m * target[0] - 1.0) / (m - 1.0)).max(0.0), m * target[1] / (m - 1.0), m * target[2] / (m - 1.0)];
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    for _ in 1..n {
        let u: f64 = rng.gen();
        out.push(if u < p[0] {
            Stratum::None
        } else if u < p[0] + p[1] {
            Stratum::Partial
        } else {
            Stratum::Heavy
        });
    }
    out
}

fn sample_candidate(
    rng: &mut ChaCha8Rng,
    cfg: &GenConfig,
    target: Option<Stratum>,
    placed: &[Candidate],
    attempt: usize,
) -> Option<Candidate> {
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let family = pick_family(rng, &cfg.shapes);
    let mut radius = rng.gen_range(cfg.size.0..=cfg.size.1);
    // unoccluded placements get harder as the image fills; shrink over time
    if target == Some(Stratum::None) && attempt > cfg.max_attempts / 3 {
        radius = (radius * 0.6).max(cfg.size.0 * 0.5);
    }
    let anchor = match (target, placed.choose(rng)) {
        (Some(Stratum::Partial | Stratum::Heavy), Some(other)) => {
            let (lo, hi) = other.polygon.bounds();
            let c = Point::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0);
            let reach = ((hi.x - lo.x).max(hi.y - lo.y) / 2.0 + radius).max(1.0);
            let d = if target == Some(Stratum::Heavy) {
                rng.gen_range(0.0..0.6) * reach
            } else {
                rng.gen_range(0.55..1.0) * reach
            };
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Point::new(c.x + d * t.cos(), c.y + d * t.sin())
        }
        _ => Point::new(rng.gen_range(0.0..w), rng.gen_range(0.0..h)),
    };
    let pts = shape(rng, family, radius);
    let polygon = fit(pts, anchor, cfg.width, cfg.height)?;
    let mask = rasterize(&polygon, cfg.width, cfg.height).ok()?;
    (mask.count() >= MIN_REGION_PIXELS).then_some(Candidate { family, polygon, mask })
}

/// Generates one scene. Regions are placed front to back; with strata targets
/// each region is resampled until its occlusion by the regions already in
/// front lands in its target stratum.
pub fn generate_scene(cfg: &GenConfig) -> Result<GeneratedScene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = rng.gen_range(cfg.regions.0..=cfg.regions.1);
    let targets: Vec<Option<Stratum>> = match cfg.strata {
        Some(t) => draw_targets(&mut rng, n, t).into_iter().map(Some).collect(),
        None => vec![None; n],
    };

    let mut placed: Vec<Candidate> = Vec::with_capacity(n);
    let mut covered = MaskGrid::new(cfg.width, cfg.height);
    for (k, &target) in targets.iter().enumerate() {
        let mut accepted = None;
        for attempt in 0..cfg.max_attempts {
            let Some(c) = sample_candidate(&mut rng, cfg, target, &placed, attempt) else { continue };
            let ok = match target {
                Some(s) => Stratum::of(occlusion_against(&c.mask, &covered)) == s,
                None => cfg.order == OrderMode::Free || placed.iter().all(|p| p.mask.count() != c.mask.count()),
            };
            if ok {
                accepted = Some(c);
                break;
            }
        }
        let c = accepted.ok_or_else(|| {
            Error::Infeasible(format!(
                "seed {}: region {k} could not reach target {:?} in {} attempts",
                cfg.seed, target, cfg.max_attempts
            ))
        })?;
        covered.union_with(&c.mask);
        placed.push(c);
    }
    match cfg.order {
        OrderMode::Free => {}
        OrderMode::SmallerInFront => placed.sort_by_key(|c| c.mask.count()),
        OrderMode::LargerInFront => placed.sort_by_key(|c| std::cmp::Reverse(c.mask.count())),
    }

    let regions: Vec<Region> = placed
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let id = i as u64 + 1;
            let name = match c.family {
                ShapeFamily::Blob => "blob",
                ShapeFamily::Star => "star",
                ShapeFamily::Rect => "slab",
            };
            Region {
                id,
                name: format!("{name}-{id}"),
                polygon: c.polygon.clone(),
                kind: Some(if c.family == ShapeFamily::Rect { RegionKind::Stuff } else { RegionKind::Thing }),
                is_group: false,
            }
        })
        .collect();
    let scene = Scene::new(cfg.width, cfg.height, regions);
    let report = validate_scene(&scene);
    if !report.is_valid() {
        return Err(Error::Infeasible(format!("generated scene failed validation: {}", report.rules().join(", "))));
    }
    let render = render_scene_reference(&scene)?;
    let truth = PlantedTruth {
        seed: cfg.seed,
        depth_order: scene.regions.iter().map(|r| r.id).collect(),
        families: placed.iter().map(|c| c.family).collect(),
        occlusion: render.regions.iter().map(|r| r.occlusion).collect(),
        target_strata: if cfg.order == OrderMode::Free { targets } else { vec![None; n] },
    };
    Ok(GeneratedScene { scene, render, truth })
}

/// `count` scenes with seeds derived from `cfg.seed`; generated in parallel,
/// returned in index order.
pub fn generate_corpus(cfg: &GenConfig, count: usize) -> Result<Vec<GeneratedScene>> {
    cfg.validate()?;
    (0..count)
        .into_par_iter()
        .map(|i| generate_scene(&GenConfig { seed: derive_seed(cfg.seed, i as u64), ..cfg.clone() }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayConfig {
    pub seed: u64,
    /// Inclusive bounds on pastes per base scene.
    pub pastes: (usize, usize),
    /// Inclusive bounds on the paste scale factor.
    pub scale: (f64, f64),
}

impl Default for OverlayConfig {
    fn default() -> Self {
        OverlayConfig { seed: 0, pastes: (1, 3), scale: (0.5, 1.0) }
    }
}

/// Pastes randomly chosen bank regions over each base scene, in front of
/// everything already there. Pastes are scaled about their bounding-box centre
/// and translated by whole pixels so they stay inside the image.
pub fn overlay_augment(bank: &[Region], bases: &[Scene], cfg: &OverlayConfig) -> Result<Vec<Scene>> {
    if bank.is_empty() {
        return Err(Error::InvalidArgument("overlay bank is empty".into()));
    }
    if cfg.pastes.0 > cfg.pastes.1 || !(cfg.scale.0 > 0.0 && cfg.scale.0 <= cfg.scale.1) {
        return Err(Error::InvalidArgument("invalid overlay ranges".into()));
    }
    bases
        .iter()
        .enumerate()
        .map(|(i, base)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, i as u64));
            let (w, h) = (base.width as f64, base.height as f64);
            let mut scene = base.clone();
            let mut next_id = scene.regions.iter().map(|r| r.id).max().map_or(1, |m| m + 1);
            let n = rng.gen_range(cfg.pastes.0..=cfg.pastes.1);
            for _ in 0..n {
                let src = bank.choose(&mut rng).expect("non-empty bank");
                let (lo, hi) = src.polygon.bounds();
                let centre = Point::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0);
                let fit = (w / (hi.x - lo.x)).min(h / (hi.y - lo.y));
                let s = rng.gen_range(cfg.scale.0..=cfg.scale.1).min(fit);
                let poly = src.polygon.scaled(s, centre);
                let (lo, hi) = poly.bounds();
                let (dx0, dx1) = ((-lo.x).ceil(), (w - hi.x).floor());
                let (dy0, dy1) = ((-lo.y).ceil(), (h - hi.y).floor());
                if dx0 > dx1 || dy0 > dy1 {
                    continue;
                }
                let dx = rng.gen_range(dx0 as i64..=dx1 as i64) as f64;
                let dy = rng.gen_range(dy0 as i64..=dy1 as i64) as f64;
                let mut region = src.clone();
                region.id = next_id;
                region.polygon = poly.translated(dx, dy);
                next_id += 1;
                scene.regions.insert(0, region);
            }
            Ok(scene)
        })
        .collect()
}
