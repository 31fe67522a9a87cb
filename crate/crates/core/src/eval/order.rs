//! Pairwise depth-order evaluation on predicted masks matched to ground truth.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::match_regions;
use crate::error::{Error, Result};
use crate::mask::MaskGrid;
use crate::raster::SceneRender;
use crate::stats::build_overlap_dag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The first argument is in front of the second.
    Front,
    Back,
}

impl Verdict {
    pub fn flip(self) -> Verdict {
        match self {
            Verdict::Front => Verdict::Back,
            Verdict::Back => Verdict::Front,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderPrediction {
    pub verdict: Verdict,
    /// Probability that `verdict` is right, in `[0, 1]`.
    pub confidence: f64,
}

impl OrderPrediction {
    pub fn certain(verdict: Verdict) -> Self {
        OrderPrediction { verdict, confidence: 1.0 }
    }

    /// Probability that the first argument is in front.
    pub fn p_front(&self) -> f64 {
        match self.verdict {
            Verdict::Front => self.confidence,
            Verdict::Back => 1.0 - self.confidence,
        }
    }

    pub fn negated(self) -> Self {
        OrderPrediction { verdict: self.verdict.flip(), confidence: self.confidence }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OrderInput<'a> {
    pub id: u64,
    pub mask: &'a MaskGrid,
}

/// Decides which of two masks is in front.
pub trait Orderer {
    fn order(&self, a: OrderInput<'_>, b: OrderInput<'_>) -> Result<OrderPrediction>;
}

impl<O: Orderer + ?Sized> Orderer for &O {
    fn order(&self, a: OrderInput<'_>, b: OrderInput<'_>) -> Result<OrderPrediction> {
        (**self).order(a, b)
    }
}

/// Inverts every verdict of the wrapped orderer.
pub struct Negated<O>(pub O);

impl<O: Orderer> Orderer for Negated<O> {
    fn order(&self, a: OrderInput<'_>, b: OrderInput<'_>) -> Result<OrderPrediction> {
        self.0.order(a, b).map(OrderPrediction::negated)
    }
}

/// Orders by a known depth rank per id (lower rank in front).
#[derive(Debug, Clone, Default)]
pub struct DepthRankOrderer {
    rank: HashMap<u64, usize>,
}

impl DepthRankOrderer {
    pub fn new(rank: HashMap<u64, usize>) -> Self {
        DepthRankOrderer { rank }
    }

    fn rank(&self, id: u64) -> Result<usize> {
        self.rank.get(&id).copied().ok_or_else(|| Error::InvalidArgument(format!("no depth rank for id {id}")))
    }
}

impl Orderer for DepthRankOrderer {
    fn order(&self, a: OrderInput<'_>, b: OrderInput<'_>) -> Result<OrderPrediction> {
        let v = if self.rank(a.id)? < self.rank(b.id)? { Verdict::Front } else { Verdict::Back };
        Ok(OrderPrediction::certain(v))
    }
}

/// Replays externally produced verdicts keyed by `(first, second)` id pairs.
/// A missing pair is answered from its reverse.
#[derive(Debug, Clone, Default)]
pub struct PairVerdictOrderer {
    verdicts: HashMap<(u64, u64), OrderPrediction>,
}

impl PairVerdictOrderer {
    pub fn new(verdicts: HashMap<(u64, u64), OrderPrediction>) -> Self {
        PairVerdictOrderer { verdicts }
    }
}

impl Orderer for PairVerdictOrderer {
    fn order(&self, a: OrderInput<'_>, b: OrderInput<'_>) -> Result<OrderPrediction> {
        if let Some(p) = self.verdicts.get(&(a.id, b.id)) {
            return Ok(*p);
        }
        self.verdicts
            .get(&(b.id, a.id))
            .map(|p| p.negated())
            .ok_or_else(|| Error::InvalidArgument(format!("no order verdict for pair ({}, {})", a.id, b.id)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEvalReport {
    /// `None` when no pair could be evaluated.
    pub accuracy: Option<f64>,
    pub evaluated_pairs: usize,
    pub gt_pairs: usize,
    /// Fraction of overlapping ground-truth pairs with both members matched.
    pub recall_of_pairs: Option<f64>,
}

/// Matches predictions to ground-truth amodal masks (one-to-one, IoU >= 0.5),
/// then, for every overlapping ground-truth pair whose members are both
/// matched, asks the orderer about the corresponding predictions in both
/// argument orders and averages. A pair scores 1 when the averaged front
/// probability favours the true front region, 0 when it favours the other,
/// and 1/2 on an exact tie.
pub fn depth_order_accuracy(
    predictions: &[(u64, MaskGrid)],
    orderer: &dyn Orderer,
    gt: &SceneRender,
) -> Result<OrderEvalReport> {
    let gt_masks: Vec<MaskGrid> = gt.regions.iter().map(|r| r.amodal.clone()).collect();
    let pred_masks: Vec<MaskGrid> = predictions.iter().map(|p| p.1.clone()).collect();
    let matching = match_regions(&gt_masks, &pred_masks, 0.5)?;
    let position: HashMap<u64, usize> = gt.regions.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
    let dag = build_overlap_dag(gt);

    let mut credit = 0.0;
    let mut evaluated = 0;
    for &(front, back) in &dag.edges {
        let (Some(pf), Some(pb)) = (matching.pred_for(position[&front]), matching.pred_for(position[&back])) else {
            continue;
        };
        let a = OrderInput { id: predictions[pf].0, mask: &predictions[pf].1 };
        let b = OrderInput { id: predictions[pb].0, mask: &predictions[pb].1 };
        let forward = orderer.order(a, b)?.p_front();
        let reverse = orderer.order(b, a)?.p_front();
        let score = (forward + (1.0 - reverse)) / 2.0;
        credit += if score > 0.5 {
            1.0
        } else if score < 0.5 {
            0.0
        } else {
            0.5
        };
        evaluated += 1;
    }
    let gt_pairs = dag.edges.len();
    Ok(OrderEvalReport {
        accuracy: (evaluated > 0).then(|| credit / evaluated as f64),
        evaluated_pairs: evaluated,
        gt_pairs,
        recall_of_pairs: (gt_pairs > 0).then(|| evaluated as f64 / gt_pairs as f64),
    })
}
