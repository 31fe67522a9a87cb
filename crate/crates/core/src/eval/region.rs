use serde::{Deserialize, Serialize};

use super::ratio;
use crate::error::{Error, Result};
use crate::mask::{mask_iou, MaskGrid};
use crate::matching::max_weight_matching;
use crate::raster::render_scene;
use crate::scene::Scene;

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Prf { precision, recall, f }
    }
}

/// One-to-one correspondence between ground-truth and predicted masks, by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn total_iou(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).sum()
    }

    pub fn pred_for(&self, gt: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == gt).map(|p| p.1)
    }
}

/// Maximum-cardinality matching over pairs with IoU at or above `iou_threshold`;
/// among those, the one with the largest total IoU.
pub fn match_regions(gt: &[MaskGrid], pred: &[MaskGrid], iou_threshold: f64) -> Result<Matching> {
    let mut ious = vec![vec![0.0; pred.len()]; gt.len()];
    for (g, gm) in gt.iter().enumerate() {
        for (p, pm) in pred.iter().enumerate() {
            ious[g][p] = mask_iou(gm, pm)?;
        }
    }
    // one extra pair outweighs any IoU total over fewer pairs
    let bonus = (gt.len().min(pred.len()) + 1) as f64;
    let weights: Vec<Vec<f64>> = ious
        .iter()
        .map(|row| row.iter().map(|&v| if v >= iou_threshold { bonus + v } else { 0.0 }).collect())
        .collect();
    let assignment = max_weight_matching(&weights);
    let mut pairs = Vec::new();
    let mut pred_used = vec![false; pred.len()];
    let mut unmatched_gt = Vec::new();
    for (g, a) in assignment.into_iter().enumerate() {
        match a {
            Some(p) => {
                pred_used[p] = true;
                pairs.push((g, p, ious[g][p]));
            }
            None => unmatched_gt.push(g),
        }
    }
    let unmatched_pred = (0..pred.len()).filter(|&p| !pred_used[p]).collect();
    Ok(Matching { pairs, unmatched_gt, unmatched_pred })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsistencyMode {
    Amodal,
    Modal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub gt: usize,
    pub pred: usize,
    pub matched: usize,
    #[serde(flatten)]
    pub prf: Prf,
}

/// Treats each annotation as ground truth in turn against every other one,
/// giving `n (n - 1)` scores at IoU 0.5.
pub fn region_consistency(annotations: &[Scene], mode: ConsistencyMode) -> Result<Vec<PairScore>> {
    if annotations.len() < 2 {
        return Err(Error::InvalidArgument("region consistency needs at least two annotations".into()));
    }
    let masks: Vec<Vec<MaskGrid>> = annotations
        .iter()
        .map(|s| {
            let r = render_scene(s)?;
            Ok(r.regions
                .into_iter()
                .map(|l| match mode {
                    ConsistencyMode::Amodal => l.amodal,
                    ConsistencyMode::Modal => l.visible,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let n = masks.len();
    let mut matched = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let k = match_regions(&masks[a], &masks[b], 0.5)?.len();
            matched[a][b] = k;
            matched[b][a] = k;
        }
    }
    let mut out = Vec::with_capacity(n * (n - 1));
    for gt in 0..n {
        for pred in 0..n {
            if gt == pred {
                continue;
            }
            let k = matched[gt][pred];
            out.push(PairScore {
                gt,
                pred,
                matched: k,
                prf: Prf::new(ratio(k, masks[pred].len()), ratio(k, masks[gt].len())),
            });
        }
    }
    Ok(out)
}
