//! Scene statistics: shape metrics, edge density, occlusion distributions and
//! overlap-DAG structure.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, polygon_area, polygon_perimeter, Polygon};
use crate::raster::{render_scene, SceneRender};
use crate::scene::{RegionId, Scene};

/// Area over convex-hull area.
pub fn shape_convexity(p: &Polygon) -> Result<f64> {
    let hull = convex_hull(p)?;
    let hull_area = polygon_area(&hull);
    if hull_area == 0.0 {
        return Err(Error::Degenerate("zero hull area"));
    }
    Ok(polygon_area(p) / hull_area)
}

/// `sqrt(4 pi area) / perimeter`; 1 for a circle.
pub fn shape_simplicity(p: &Polygon) -> Result<f64> {
    let perimeter = polygon_perimeter(p);
    if perimeter == 0.0 {
        return Err(Error::Degenerate("zero perimeter"));
    }
    Ok((4.0 * std::f64::consts::PI * polygon_area(p)).sqrt() / perimeter)
}

/// Fraction of image pixels on a visible edge.
pub fn edge_density(render: &SceneRender) -> f64 {
    render.edges.visible.count() as f64 / (render.width as f64 * render.height as f64)
}

/// Occluder-to-occludee precedence among regions whose amodal rasters share at
/// least one pixel. Nodes are kept in depth order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapDag {
    pub nodes: Vec<RegionId>,
    /// `(front, back)` pairs.
    pub edges: Vec<(RegionId, RegionId)>,
}

impl OverlapDag {
    pub fn from_edges(nodes: Vec<RegionId>, edges: Vec<(RegionId, RegionId)>) -> Self {
        OverlapDag { nodes, edges }
    }

    fn index(&self) -> BTreeMap<RegionId, usize> {
        self.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect()
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<RegionId>> {
        let idx = self.index();
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (a, b) in &self.edges {
            out[idx[a]].push(idx[b]);
            indeg[idx[b]] += 1;
        }
        let mut ready: std::collections::VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop_front() {
            order.push(self.nodes[u]);
            for &v in &out[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push_back(v);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

pub fn build_overlap_dag(render: &SceneRender) -> OverlapDag {
    let layers = &render.regions;
    let mut edges = Vec::new();
    for (i, a) in layers.iter().enumerate() {
        for b in &layers[i + 1..] {
            if a.amodal.intersects(&b.amodal) {
                edges.push((a.id, b.id));
            }
        }
    }
    OverlapDag { nodes: layers.iter().map(|l| l.id).collect(), edges }
}

/// Weakly connected components, each sorted by node position, listed by first
/// node position.
pub fn connected_components(dag: &OverlapDag) -> Vec<Vec<RegionId>> {
    let idx = dag.index();
    let n = dag.nodes.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in &dag.edges {
        adj[idx[a]].push(idx[b]);
        adj[idx[b]].push(idx[a]);
    }
    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<RegionId>> = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        comp[start] = id;
        let mut members = Vec::new();
        while let Some(u) = stack.pop() {
            members.push(u);
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        out.push(members.into_iter().map(|i| dag.nodes[i]).collect());
    }
    out
}

/// Nodes on the longest directed path inside `component`.
pub fn depth_layers(dag: &OverlapDag, component: &[RegionId]) -> usize {
    let Some(order) = dag.topological_order() else {
        panic!("overlap graph must be acyclic");
    };
    let members: std::collections::BTreeSet<RegionId> = component.iter().copied().collect();
    let mut succ: BTreeMap<RegionId, Vec<RegionId>> = BTreeMap::new();
    for &(a, b) in &dag.edges {
        if members.contains(&a) && members.contains(&b) {
            succ.entry(a).or_default().push(b);
        }
    }
    let mut longest: BTreeMap<RegionId, usize> = members.iter().map(|&m| (m, 1)).collect();
    for u in order.into_iter().filter(|u| members.contains(u)) {
        let here = longest[&u];
        for v in succ.get(&u).into_iter().flatten() {
            let e = longest.get_mut(v).unwrap();
            *e = (*e).max(here + 1);
        }
    }
    longest.values().copied().max().unwrap_or(0)
}

/// Occlusion-level histogram bins: `q == 0`, then ten bins `(k/10, (k+1)/10]`.
pub const OCCLUSION_BINS: usize = 11;

pub fn occlusion_bin(q: f64) -> usize {
    if q <= 0.0 {
        0
    } else {
        ((q * 10.0).ceil() as usize).clamp(1, 10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionShape {
    pub scene: usize,
    pub region: RegionId,
    pub convexity: f64,
    pub simplicity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub scenes: usize,
    pub regions: usize,
    pub regions_per_annotation: f64,
    pub points_per_region: f64,
    /// Fraction of pixels under at least one amodal mask.
    pub pixel_coverage: f64,
    /// Same, measured on visible masks.
    pub pixel_coverage_visible: f64,
    /// Fraction of regions with any occluded pixel.
    pub occlusion_rate: f64,
    /// Mean occlusion level over occluded regions.
    pub mean_occlusion_per_region: f64,
    pub edge_density: f64,
    pub mean_convexity: f64,
    pub mean_simplicity: f64,
    pub shapes: Vec<RegionShape>,
    pub occlusion_histogram: Vec<usize>,
    /// Number of CCs per annotation -> annotation count.
    pub cc_count_histogram: BTreeMap<usize, usize>,
    /// CC size -> CC count.
    pub cc_size_histogram: BTreeMap<usize, usize>,
    /// Depth layers per CC -> CC count.
    pub depth_layer_histogram: BTreeMap<usize, usize>,
}

struct SceneStats {
    regions: usize,
    points: usize,
    covered_amodal: usize,
    covered_visible: usize,
    pixels: usize,
    occlusions: Vec<f64>,
    edge_density: f64,
    shapes: Vec<(RegionId, f64, f64)>,
    cc_sizes: Vec<usize>,
    cc_layers: Vec<usize>,
}

fn scene_stats(scene: &Scene) -> Result<SceneStats> {
    let render = render_scene(scene)?;
    let dag = build_overlap_dag(&render);
    let ccs = connected_components(&dag);
    let shapes = scene
        .regions
        .iter()
        .map(|r| Ok((r.id, shape_convexity(&r.polygon)?, shape_simplicity(&r.polygon)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SceneStats {
        regions: scene.regions.len(),
        points: scene.regions.iter().map(|r| r.polygon.len()).sum(),
        covered_amodal: render.amodal_union().count(),
        covered_visible: render.visible_union().count(),
        pixels: scene.width as usize * scene.height as usize,
        occlusions: render.regions.iter().map(|r| r.occlusion).collect(),
        edge_density: edge_density(&render),
        shapes,
        cc_layers: ccs.iter().map(|cc| depth_layers(&dag, cc)).collect(),
        cc_sizes: ccs.iter().map(Vec::len).collect(),
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Dataset summary. Coverage and edge density are averaged per image; shape
/// metrics and occlusion figures per region.
pub fn summarize(dataset: &[Scene]) -> Result<StatsSummary> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let per: Vec<SceneStats> = dataset.par_iter().map(scene_stats).collect::<Result<_>>()?;

    let regions: usize = per.iter().map(|s| s.regions).sum();
    let occl: Vec<f64> = per.iter().flat_map(|s| s.occlusions.iter().copied()).collect();
    let occluded: Vec<f64> = occl.iter().copied().filter(|&q| q > 0.0).collect();
    let mut occlusion_histogram = vec![0; OCCLUSION_BINS];
    occl.iter().for_each(|&q| occlusion_histogram[occlusion_bin(q)] += 1);

    let mut cc_count_histogram = BTreeMap::new();
    let mut cc_size_histogram = BTreeMap::new();
    let mut depth_layer_histogram = BTreeMap::new();
    for s in &per {
        *cc_count_histogram.entry(s.cc_sizes.len()).or_insert(0) += 1;
        s.cc_sizes.iter().for_each(|&k| *cc_size_histogram.entry(k).or_insert(0) += 1);
        s.cc_layers.iter().for_each(|&k| *depth_layer_histogram.entry(k).or_insert(0) += 1);
    }
    let shapes: Vec<RegionShape> = per
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            s.shapes.iter().map(move |&(region, convexity, simplicity)| RegionShape {
                scene: i,
                region,
                convexity,
                simplicity,
            })
        })
        .collect();

    Ok(StatsSummary {
        scenes: dataset.len(),
        regions,
        regions_per_annotation: regions as f64 / dataset.len() as f64,
        points_per_region: if regions == 0 {
            0.0
        } else {
            per.iter().map(|s| s.points).sum::<usize>() as f64 / regions as f64
        },
        pixel_coverage: mean(per.iter().map(|s| s.covered_amodal as f64 / s.pixels as f64)),
        pixel_coverage_visible: mean(per.iter().map(|s| s.covered_visible as f64 / s.pixels as f64)),
        occlusion_rate: if regions == 0 { 0.0 } else { occluded.len() as f64 / regions as f64 },
        mean_occlusion_per_region: mean(occluded.iter().copied()),
        edge_density: mean(per.iter().map(|s| s.edge_density)),
        mean_convexity: mean(shapes.iter().map(|s| s.convexity)),
        mean_simplicity: mean(shapes.iter().map(|s| s.simplicity)),
        shapes,
        occlusion_histogram,
        cc_count_histogram,
        cc_size_histogram,
        depth_layer_histogram,
    })
}
