//! Annotation data model and rule-based validation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::geometry::{cross, Polygon};
use crate::mask::MaskGrid;
use crate::raster::rasterize;

pub type RegionId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Thing,
    Stuff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: RegionId,
    pub name: String,
    pub polygon: Polygon,
    pub kind: Option<RegionKind>,
    pub is_group: bool,
}

impl Region {
    pub fn new(id: RegionId, name: impl Into<String>, polygon: Polygon) -> Self {
        Region { id, name: name.into(), polygon, kind: None, is_group: false }
    }
}

/// A boundary stretch of `region_a`'s polygon (vertex `from_vertex` forward to
/// `to_vertex`) that is shared with `region_b` and has no figure side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharedEdgeMark {
    pub region_a: RegionId,
    pub region_b: RegionId,
    pub from_vertex: usize,
    pub to_vertex: usize,
}

/// One image's annotation. `regions` is in depth order, index 0 frontmost.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: u32,
    pub height: u32,
    pub regions: Vec<Region>,
    pub shared_edges: Vec<SharedEdgeMark>,
}

impl Scene {
    pub fn new(width: u32, height: u32, regions: Vec<Region>) -> Self {
        Scene { width, height, regions, shared_edges: Vec::new() }
    }

    pub fn region(&self, id: RegionId) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }

    pub fn depth_of(&self, id: RegionId) -> Option<usize> {
        self.regions.iter().position(|r| r.id == id)
    }
}

pub mod rule {
    pub const IMAGE_SIZE: &str = "image-size";
    pub const DUPLICATE_ID: &str = "duplicate-id";
    pub const UNNAMED: &str = "unnamed";
    pub const TRUNCATION: &str = "truncation";
    pub const DEGENERATE: &str = "degenerate";
    pub const SELF_INTERSECTION: &str = "self-intersection";
    /// Polygon doubles back along itself, the usual way a cut-in hole is drawn.
    pub const HOLE: &str = "hole";
    pub const SHARED_EDGE: &str = "shared-edge";
    pub const MIN_SIZE: &str = "min-size";
    pub const COVERAGE: &str = "coverage";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule: String,
    pub region: Option<RegionId>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, rule: &str, region: Option<RegionId>, message: String) {
        self.errors.push(Finding { rule: rule.to_string(), region, message });
    }

    fn warn(&mut self, rule: &str, region: Option<RegionId>, message: String) {
        self.warnings.push(Finding { rule: rule.to_string(), region, message });
    }

    pub fn rules(&self) -> Vec<&str> {
        self.errors.iter().map(|f| f.rule.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationConfig {
    /// Regions whose raster covers fewer pixels draw a `min-size` warning.
    pub min_region_pixels: usize,
    /// Scenes whose amodal pixel coverage falls below this draw a `coverage` warning.
    pub coverage_floor: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { min_region_pixels: 600, coverage_floor: 0.5 }
    }
}

fn collinear(p: &Polygon) -> bool {
    let v = p.vertices();
    match v.iter().find(|&&d| d != v[0]) {
        Some(&d) => v.iter().all(|&c| cross(v[0], d, c) == 0.0),
        None => true,
    }
}

pub fn validate_scene(scene: &Scene) -> ValidationReport {
    validate_scene_with(scene, &ValidationConfig::default())
}

pub fn validate_scene_with(scene: &Scene, cfg: &ValidationConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (w, h) = (scene.width as f64, scene.height as f64);
    if scene.width == 0 || scene.height == 0 {
        report.error(rule::IMAGE_SIZE, None, format!("image has zero area ({}x{})", scene.width, scene.height));
    }

    let mut seen = HashSet::new();
    for r in &scene.regions {
        if !seen.insert(r.id) {
            report.error(rule::DUPLICATE_ID, Some(r.id), format!("region id {} appears more than once", r.id));
        }
    }

    let mut geometry_ok = Vec::with_capacity(scene.regions.len());
    for r in &scene.regions {
        let mut ok = true;
        if r.name.trim().is_empty() {
            report.error(rule::UNNAMED, Some(r.id), "every region needs a non-empty name".into());
        }
        if let Some(p) = r.polygon.vertices().iter().find(|p| p.x < 0.0 || p.y < 0.0 || p.x > w || p.y > h) {
            report.error(
                rule::TRUNCATION,
                Some(r.id),
                format!(
                    "vertex ({}, {}) lies outside the {}x{} image; regions must be fully contained within the image boundaries",
                    p.x, p.y, scene.width, scene.height
                ),
            );
            ok = false;
        }
        if collinear(&r.polygon) {
            report.error(rule::DEGENERATE, Some(r.id), "polygon has zero area".into());
            ok = false;
        } else if !r.polygon.is_simple() {
            let (code, what) = if folds_back(&r.polygon) {
                (
                    rule::HOLE,
                    "polygon retraces its own boundary; only exterior outlines are kept, holes are not representable",
                )
            } else {
                (rule::SELF_INTERSECTION, "polygon edges cross each other")
            };
            report.error(code, Some(r.id), what.into());
            ok = false;
        }
        geometry_ok.push(ok);
    }

    for (k, m) in scene.shared_edges.iter().enumerate() {
        let a = scene.region(m.region_a);
        let b = scene.region(m.region_b);
        let msg = if m.region_a == m.region_b {
            Some(format!("shared edge #{k} links region {} to itself", m.region_a))
        } else if a.is_none() || b.is_none() {
            Some(format!("shared edge #{k} references missing region ({} / {})", m.region_a, m.region_b))
        } else {
            let n = a.map(|r| r.polygon.len()).unwrap_or(0);
            (m.from_vertex >= n || m.to_vertex >= n).then(|| {
                format!(
                    "shared edge #{k} vertex range {}..{} exceeds polygon of {n} vertices",
                    m.from_vertex, m.to_vertex
                )
            })
        };
        if let Some(msg) = msg {
            report.error(rule::SHARED_EDGE, Some(m.region_a), msg);
        }
    }

    if scene.width > 0 && scene.height > 0 {
        let mut coverage = MaskGrid::new(scene.width, scene.height);
        for (r, &ok) in scene.regions.iter().zip(&geometry_ok) {
            if !ok {
                continue;
            }
            let Ok(mask) = rasterize(&r.polygon, scene.width, scene.height) else {
                continue;
            };
            let area = mask.count();
            if area < cfg.min_region_pixels {
                report.warn(
                    rule::MIN_SIZE,
                    Some(r.id),
                    format!("region covers {area} pixels, below the {} pixel minimum", cfg.min_region_pixels),
                );
            }
            coverage.union_with(&mask);
        }
        let frac = coverage.count() as f64 / coverage.area() as f64;
        if frac < cfg.coverage_floor && geometry_ok.iter().all(|&ok| ok) {
            report.warn(
                rule::COVERAGE,
                None,
                format!(
                    "annotated regions cover {:.1}% of the image (floor {:.1}%)",
                    frac * 100.0,
                    cfg.coverage_floor * 100.0
                ),
            );
        }
    }
    report
}

fn folds_back(p: &Polygon) -> bool {
    use crate::geometry::cross;
    let e: Vec<_> = p.edges().filter(|(a, b)| a != b).collect();
    for i in 0..e.len() {
        for j in (i + 1)..e.len() {
            let ((a, b), (c, d)) = (e[i], e[j]);
            if cross(a, b, c) == 0.0 && cross(a, b, d) == 0.0 {
                let dir = (b.x - a.x) * (d.x - c.x) + (b.y - a.y) * (d.y - c.y);
                let (lo1, hi1, lo2, hi2) = if (b.x - a.x).abs() >= (b.y - a.y).abs() {
                    (a.x.min(b.x), a.x.max(b.x), c.x.min(d.x), c.x.max(d.x))
                } else {
                    (a.y.min(b.y), a.y.max(b.y), c.y.min(d.y), c.y.max(d.y))
                };
                if dir < 0.0 && hi1.min(hi2) - lo1.max(lo2) > 0.0 {
                    return true;
                }
            }
        }
    }
    false
}
