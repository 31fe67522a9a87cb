//! Boundary benchmarking: pixel correspondence within a distance tolerance,
//! threshold sweeps, ODS / AP / R50.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ratio, Prf};
use crate::error::{Error, Result};
use crate::mask::MaskGrid;
use crate::matching::max_cardinality_matching;

/// Real-valued edge strength map in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl SoftMap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::InvalidArgument(format!(
                "soft map has {} values for a {width}x{height} grid",
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("soft map values must lie in [0, 1]".into()));
        }
        Ok(SoftMap { width, height, values })
    }

    pub fn from_mask(mask: &MaskGrid, on: f64) -> Self {
        let mut values = vec![0.0; mask.area()];
        for (r, c) in mask.iter_set() {
            values[r as usize * mask.width() as usize + c as usize] = on;
        }
        SoftMap { width: mask.width(), height: mask.height(), values }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, row: u32, col: u32) -> f64 {
        self.values[row as usize * self.width as usize + col as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn set(&mut self, row: u32, col: u32, v: f64) {
        self.values[row as usize * self.width as usize + col as usize] = v;
    }

    /// Pixels with value at or above `threshold`.
    pub fn binarize(&self, threshold: f64) -> MaskGrid {
        MaskGrid::from_fn(self.width, self.height, |r, c| self.get(r, c) >= threshold)
    }
}

/// Zhang-Suen thinning to 1-pixel-wide curves.
pub fn thin(mask: &MaskGrid) -> MaskGrid {
    let mut m = mask.clone();
    let mut doomed: Vec<(u32, u32)> = Vec::new();
    loop {
        let mut changed = false;
        for step in 0..2 {
            doomed.clear();
            for (r, c) in m.iter_set() {
                let (ri, ci) = (r as i64, c as i64);
                // P2..P9, clockwise from north
                let n = [
                    m.get_signed(ri - 1, ci),
                    m.get_signed(ri - 1, ci + 1),
                    m.get_signed(ri, ci + 1),
                    m.get_signed(ri + 1, ci + 1),
                    m.get_signed(ri + 1, ci),
                    m.get_signed(ri + 1, ci - 1),
                    m.get_signed(ri, ci - 1),
                    m.get_signed(ri - 1, ci - 1),
                ];
                let b = n.iter().filter(|&&x| x).count();
                if !(2..=6).contains(&b) {
                    continue;
                }
                let a = (0..8).filter(|&k| !n[k] && n[(k + 1) % 8]).count();
                if a != 1 {
                    continue;
                }
                let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
                let keep =
                    if step == 0 { (p2 && p4 && p6) || (p4 && p6 && p8) } else { (p2 && p4 && p8) || (p2 && p6 && p8) };
                if !keep {
                    doomed.push((r, c));
                }
            }
            for &(r, c) in &doomed {
                m.set(r, c, false);
            }
            changed |= !doomed.is_empty();
        }
        if !changed {
            return m;
        }
    }
}

/// Matching tolerance in pixels: 0.75% of the image diagonal, rounded up.
pub fn default_tolerance(width: u32, height: u32) -> f64 {
    (0.0075 * (width as f64).hypot(height as f64)).ceil()
}

/// Raw correspondence counts; sums across images aggregate a dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub matched_pred: usize,
    pub total_pred: usize,
    pub matched_gt: usize,
    pub total_gt: usize,
}

impl EdgeCounts {
    pub fn prf(&self) -> Prf {
        Prf::new(ratio(self.matched_pred, self.total_pred), ratio(self.matched_gt, self.total_gt))
    }
}

impl std::ops::Add for EdgeCounts {
    type Output = EdgeCounts;

    fn add(self, o: EdgeCounts) -> EdgeCounts {
        EdgeCounts {
            matched_pred: self.matched_pred + o.matched_pred,
            total_pred: self.total_pred + o.total_pred,
            matched_gt: self.matched_gt + o.matched_gt,
            total_gt: self.total_gt + o.total_gt,
        }
    }
}

/// Maximum one-to-one matching between predicted and ground-truth edge pixels
/// no farther apart than `tolerance` (Euclidean, pixel units).
pub fn edge_prf(pred: &MaskGrid, gt: &MaskGrid, tolerance: f64) -> Result<EdgeCounts> {
    pred.check_shape(gt)?;
    let (w, h) = (gt.width() as i64, gt.height() as i64);
    let mut gt_index = vec![usize::MAX; gt.area()];
    let mut total_gt = 0;
    for (r, c) in gt.iter_set() {
        gt_index[r as usize * w as usize + c as usize] = total_gt;
        total_gt += 1;
    }
    let reach = tolerance.floor() as i64;
    let tol2 = tolerance * tolerance;
    let adj: Vec<Vec<usize>> = pred
        .iter_set()
        .map(|(r, c)| {
            let (r, c) = (r as i64, c as i64);
            let mut out = Vec::new();
            for dr in -reach..=reach {
                for dc in -reach..=reach {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr < 0 || nc < 0 || nr >= h || nc >= w || ((dr * dr + dc * dc) as f64) > tol2 {
                        continue;
                    }
                    let g = gt_index[nr as usize * w as usize + nc as usize];
                    if g != usize::MAX {
                        out.push(g);
                    }
                }
            }
            out
        })
        .collect();
    let total_pred = adj.len();
    let matched = max_cardinality_matching(total_gt, &adj).into_iter().flatten().count();
    Ok(EdgeCounts { matched_pred: matched, total_pred, matched_gt: matched, total_gt })
}

#[derive(Debug, Clone)]
pub struct EdgeBenchImage {
    pub prediction: SoftMap,
    /// One edge map per annotator; their union is the ground truth.
    pub ground_truth: Vec<MaskGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeBenchConfig {
    /// Thresholds `k / (n + 1)` for `k = 1..=n`.
    pub thresholds: usize,
    /// `None` picks `default_tolerance` per image.
    pub tolerance: Option<f64>,
}

impl Default for EdgeBenchConfig {
    fn default() -> Self {
        EdgeBenchConfig { thresholds: 99, tolerance: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
    pub counts: EdgeCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeBenchReport {
    pub ods: f64,
    pub ods_threshold: f64,
    pub ap: f64,
    pub r50: f64,
    pub curve: Vec<CurvePoint>,
}

fn union_of(maps: &[MaskGrid]) -> Result<MaskGrid> {
    let mut it = maps.iter();
    let first = it.next().ok_or_else(|| Error::InvalidArgument("image without ground truth".into()))?;
    let mut u = first.clone();
    for m in it {
        u.check_shape(m)?;
        u.union_with(m);
    }
    Ok(u)
}

/// Dataset-level sweep: at every threshold the prediction is binarized and
/// thinned, then matched against the thinned annotator union; counts are
/// summed over images before computing precision and recall.
pub fn edge_benchmark(images: &[EdgeBenchImage], cfg: &EdgeBenchConfig) -> Result<EdgeBenchReport> {
    if images.is_empty() {
        return Err(Error::InvalidArgument("edge benchmark needs at least one image".into()));
    }
    if cfg.thresholds == 0 {
        return Err(Error::InvalidArgument("need at least one threshold".into()));
    }
    let gts: Vec<MaskGrid> = images
        .iter()
        .map(|im| {
            let u = union_of(&im.ground_truth)?;
            if u.width() != im.prediction.width() || u.height() != im.prediction.height() {
                return Err(Error::DimensionMismatch(
                    im.prediction.width(),
                    im.prediction.height(),
                    u.width(),
                    u.height(),
                ));
            }
            Ok(thin(&u))
        })
        .collect::<Result<_>>()?;
    let k = cfg.thresholds;
    let curve: Vec<CurvePoint> = (1..=k)
        .into_par_iter()
        .map(|i| {
            let threshold = i as f64 / (k + 1) as f64;
            let counts = images
                .iter()
                .zip(&gts)
                .map(|(im, gt)| {
                    let tol = cfg.tolerance.unwrap_or_else(|| default_tolerance(gt.width(), gt.height()));
                    edge_prf(&thin(&im.prediction.binarize(threshold)), gt, tol)
                })
                .try_fold(EdgeCounts::default(), |acc, c| c.map(|c| acc + c))?;
            let prf = counts.prf();
            Ok(CurvePoint { threshold, precision: prf.precision, recall: prf.recall, f: prf.f, counts })
        })
        .collect::<Result<_>>()?;

    let best = curve.iter().fold(&curve[0], |b, p| if p.f > b.f { p } else { b });
    Ok(EdgeBenchReport {
        ods: best.f,
        ods_threshold: best.threshold,
        ap: interpolated_ap(&curve),
        r50: curve.iter().filter(|p| p.precision >= 0.5).map(|p| p.recall).fold(0.0, f64::max),
        curve,
    })
}

/// Area under the precision envelope (max precision at any recall at or
/// above the current one), integrated as a step function from recall 0.
fn interpolated_ap(curve: &[CurvePoint]) -> f64 {
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.recall, p.precision)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut envelope = vec![0.0; pts.len()];
    let mut running = 0.0f64;
    for i in (0..pts.len()).rev() {
        running = running.max(pts[i].1);
        envelope[i] = running;
    }
    let mut ap = 0.0;
    let mut prev = 0.0;
    for (i, &(r, _)) in pts.iter().enumerate() {
        ap += (r - prev) * envelope[i];
        prev = r;
    }
    ap
}

/// Human agreement: every annotator's map scored against the union of the
/// other annotators of the same image, counts summed over the dataset. Images
/// with a single annotator are skipped.
pub fn human_edge_consistency(gt_sets: &[Vec<MaskGrid>], tolerance: Option<f64>) -> Result<EdgeCounts> {
    let mut total = EdgeCounts::default();
    for maps in gt_sets.iter().filter(|m| m.len() >= 2) {
        for k in 0..maps.len() {
            let others: Vec<MaskGrid> =
                maps.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, m)| m.clone()).collect();
            let gt = thin(&union_of(&others)?);
            let tol = tolerance.unwrap_or_else(|| default_tolerance(gt.width(), gt.height()));
            total = total + edge_prf(&thin(&maps[k]), &gt, tol)?;
        }
    }
    Ok(total)
}
