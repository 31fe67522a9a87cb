//! Polygon rasterization, depth-ordered compositing and edge extraction.
//!
//! Pixel `(row, col)` is covered when its center `(col + 0.5, row + 0.5)` lies
//! inside the polygon under the even-odd rule. Crossings are counted on a
//! half-open span in y and strictly to the right in x, so centers exactly on a
//! left or top edge are in and centers on a right or bottom edge are out.

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Point, Polygon};
use crate::mask::MaskGrid;
use crate::scene::{validate_scene, RegionId, Scene};

#[inline]
fn crossing_x(a: Point, b: Point, y: f64) -> f64 {
    a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y)
}

/// Scanline rasterization.
pub fn rasterize(p: &Polygon, width: u32, height: u32) -> Result<MaskGrid> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }
    let mut mask = MaskGrid::new(width, height);
    let (lo, hi) = p.bounds();
    let r0 = (lo.y - 0.5).floor().max(0.0) as u32;
    let r1 = ((hi.y + 0.5).ceil().max(0.0) as u32).min(height);
    let mut xs: Vec<f64> = Vec::with_capacity(16);
    for row in r0..r1 {
        let py = row as f64 + 0.5;
        xs.clear();
        xs.extend(p.edges().filter(|(a, b)| (a.y > py) != (b.y > py)).map(|(a, b)| crossing_x(a, b, py)));
        xs.sort_by(f64::total_cmp);
        for span in xs.chunks_exact(2) {
            let (c0, c1) = (first_center_at_or_after(span[0], width), first_center_at_or_after(span[1], width));
            mask.fill_span(row, c0, c1);
        }
    }
    Ok(mask)
}

/// Smallest column whose center is `>= x`, clamped to `[0, width]`.
fn first_center_at_or_after(x: f64, width: u32) -> u32 {
    if x <= 0.5 {
        return 0;
    }
    if x > width as f64 - 0.5 {
        return width;
    }
    let mut c = (x - 0.5).floor() as u32;
    while c > 0 && (c as f64 - 0.5) >= x {
        c -= 1;
    }
    while (c as f64 + 0.5) < x {
        c += 1;
    }
    c
}

/// Per-pixel even-odd point-in-polygon. Slow; serves as the reference the
/// scanline path is checked against.
pub fn rasterize_reference(p: &Polygon, width: u32, height: u32) -> Result<MaskGrid> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }
    Ok(MaskGrid::from_fn(width, height, |row, col| {
        let (px, py) = (col as f64 + 0.5, row as f64 + 0.5);
        let mut inside = false;
        for (a, b) in p.edges() {
            if (a.y > py) != (b.y > py) && px < crossing_x(a, b, py) {
                inside = !inside;
            }
        }
        inside
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRender {
    pub id: RegionId,
    pub amodal: MaskGrid,
    pub visible: MaskGrid,
    /// Occluded fraction of the amodal area; 0 for an empty amodal mask.
    pub occlusion: f64,
}

impl RegionRender {
    fn new(id: RegionId, amodal: MaskGrid, visible: MaskGrid) -> Self {
        let a = amodal.count();
        let occlusion = if a == 0 { 0.0 } else { 1.0 - visible.count() as f64 / a as f64 };
        RegionRender { id, amodal, visible, occlusion }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureLabel {
    None,
    Shared,
    Region(RegionId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureMap {
    width: u32,
    labels: Vec<FigureLabel>,
}

impl FigureMap {
    pub fn get(&self, row: u32, col: u32) -> FigureLabel {
        self.labels[row as usize * self.width as usize + col as usize]
    }

    pub fn labels(&self) -> &[FigureLabel] {
        &self.labels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMaps {
    pub visible: MaskGrid,
    pub hidden: MaskGrid,
    pub figure: FigureMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneRender {
    pub width: u32,
    pub height: u32,
    /// Same order as the scene's regions.
    pub regions: Vec<RegionRender>,
    pub edges: EdgeMaps,
}

impl SceneRender {
    pub fn region(&self, id: RegionId) -> Option<&RegionRender> {
        self.regions.iter().find(|r| r.id == id)
    }

    pub fn amodal_union(&self) -> MaskGrid {
        let mut m = MaskGrid::new(self.width, self.height);
        self.regions.iter().for_each(|r| m.union_with(&r.amodal));
        m
    }

    pub fn visible_union(&self) -> MaskGrid {
        let mut m = MaskGrid::new(self.width, self.height);
        self.regions.iter().for_each(|r| m.union_with(&r.visible));
        m
    }
}

fn ensure_valid(scene: &Scene) -> Result<()> {
    let report = validate_scene(scene);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidScene(report.rules().join(", ")))
    }
}

/// Renders a validated scene: amodal rasters, visible masks by front-to-back
/// compositing, occlusion levels and edge maps.
pub fn render_scene(scene: &Scene) -> Result<SceneRender> {
    ensure_valid(scene)?;
    let (w, h) = (scene.width, scene.height);
    let amodal: Vec<MaskGrid> = scene.regions.iter().map(|r| rasterize(&r.polygon, w, h)).collect::<Result<_>>()?;
    let mut covered = MaskGrid::new(w, h);
    let mut layers = Vec::with_capacity(amodal.len());
    for (region, amodal) in scene.regions.iter().zip(amodal) {
        let visible = amodal.difference(&covered);
        covered.union_with(&amodal);
        layers.push(RegionRender::new(region.id, amodal, visible));
    }
    let edges = extract_edges(&layers, scene);
    Ok(SceneRender { width: w, height: h, regions: layers, edges })
}

/// Reference renderer: per-pixel point-in-polygon tests and a frontmost-owner
/// scan for every pixel.
pub fn render_scene_reference(scene: &Scene) -> Result<SceneRender> {
    ensure_valid(scene)?;
    let (w, h) = (scene.width, scene.height);
    let amodal: Vec<MaskGrid> =
        scene.regions.iter().map(|r| rasterize_reference(&r.polygon, w, h)).collect::<Result<_>>()?;
    let mut visible: Vec<MaskGrid> = (0..amodal.len()).map(|_| MaskGrid::new(w, h)).collect();
    for row in 0..h {
        for col in 0..w {
            if let Some(owner) = amodal.iter().position(|m| m.get(row, col)) {
                visible[owner].set(row, col, true);
            }
        }
    }
    let layers: Vec<RegionRender> = scene
        .regions
        .iter()
        .zip(amodal.into_iter().zip(visible))
        .map(|(r, (a, v))| RegionRender::new(r.id, a, v))
        .collect();
    let edges = extract_edges(&layers, scene);
    Ok(SceneRender { width: w, height: h, regions: layers, edges })
}

/// Distance in pixels within which a visible-edge pixel center counts as lying
/// on a marked shared stretch.
pub const SHARED_EDGE_RADIUS: f64 = 1.0;

/// Derives edge maps from composited layers.
///
/// Visible edges are the 4-neighbourhood boundary pixels of every visible mask.
/// Each is labelled with the frontmost region among its owner and the owners of
/// its 4-neighbours, or `Shared` when it sits on a marked shared stretch and is
/// owned by one of the two regions sharing it. Hidden edges are amodal boundary
/// pixels not visible for their region, minus any visible edge pixel.
pub fn extract_edges(layers: &[RegionRender], scene: &Scene) -> EdgeMaps {
    let (w, h) = (scene.width, scene.height);
    let mut owner: Vec<Option<usize>> = vec![None; w as usize * h as usize];
    for (k, layer) in layers.iter().enumerate() {
        for (r, c) in layer.visible.iter_set() {
            owner[r as usize * w as usize + c as usize] = Some(k);
        }
    }
    let owner_at = |r: i64, c: i64| -> Option<usize> {
        if r < 0 || c < 0 || r >= h as i64 || c >= w as i64 {
            None
        } else {
            owner[r as usize * w as usize + c as usize]
        }
    };

    let mut visible = MaskGrid::new(w, h);
    let mut hidden = MaskGrid::new(w, h);
    for layer in layers {
        visible.union_with(&layer.visible.boundary());
        hidden.union_with(&layer.amodal.boundary().difference(&layer.visible));
    }
    hidden.subtract(&visible);

    let shared: Vec<(RegionId, RegionId, Vec<Point>)> = scene
        .shared_edges
        .iter()
        .filter_map(|m| {
            let a = scene.region(m.region_a)?;
            let n = a.polygon.len();
            (m.from_vertex < n && m.to_vertex < n)
                .then(|| (m.region_a, m.region_b, a.polygon.stretch(m.from_vertex, m.to_vertex)))
        })
        .collect();

    let mut labels = vec![FigureLabel::None; w as usize * h as usize];
    for (r, c) in visible.iter_set() {
        let (ri, ci) = (r as i64, c as i64);
        let Some(own) = owner_at(ri, ci) else { continue };
        let own_id = layers[own].id;
        let center = Point::new(c as f64 + 0.5, r as f64 + 0.5);
        let on_shared = shared
            .iter()
            .any(|(a, b, pts)| (own_id == *a || own_id == *b) && near_polyline(center, pts, SHARED_EDGE_RADIUS));
        labels[r as usize * w as usize + c as usize] = if on_shared {
            FigureLabel::Shared
        } else {
            let front = [(ri - 1, ci), (ri + 1, ci), (ri, ci - 1), (ri, ci + 1)]
                .into_iter()
                .filter_map(|(nr, nc)| owner_at(nr, nc))
                .fold(own, usize::min);
            FigureLabel::Region(layers[front].id)
        };
    }
    EdgeMaps { visible, hidden, figure: FigureMap { width: w, labels } }
}

fn near_polyline(p: Point, pts: &[Point], radius: f64) -> bool {
    if pts.len() == 1 {
        return p.dist(pts[0]) <= radius;
    }
    pts.windows(2).any(|s| point_segment_distance(p, s[0], s[1]) <= radius)
}
