//! Average recall of ranked proposals against amodal ground truth, overall and
//! per occlusion stratum.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{mask_iou, MaskGrid};

pub const MAX_PROPOSALS: usize = 1000;

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub fn iou_thresholds() -> [f64; 10] {
    std::array::from_fn(|k| (50 + 5 * k) as f64 / 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratum {
    /// `q == 0`
    None,
    /// `0 < q <= 0.25`
    Partial,
    /// `q > 0.25`
    Heavy,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::None, Stratum::Partial, Stratum::Heavy];

    pub fn of(q: f64) -> Stratum {
        if q <= 0.0 {
            Stratum::None
        } else if q <= 0.25 {
            Stratum::Partial
        } else {
            Stratum::Heavy
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtSegment {
    pub mask: MaskGrid,
    pub occlusion: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumCounts {
    pub none: usize,
    pub partial: usize,
    pub heavy: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ARReport {
    pub ar_all: f64,
    pub ar_none: Option<f64>,
    pub ar_partial: Option<f64>,
    pub ar_heavy: Option<f64>,
    pub thresholds: Vec<f64>,
    /// Recall at each threshold over all ground truth.
    pub recall_curve: Vec<f64>,
    pub counts: StratumCounts,
}

/// For every ground-truth segment, the best IoU among the first
/// `max_proposals` proposals of its image; recall at each threshold is the
/// fraction of segments reaching it, and AR is the mean over thresholds.
/// Images without proposals contribute zero-IoU segments.
pub fn average_recall(
    proposals: &BTreeMap<String, Vec<MaskGrid>>,
    gts: &BTreeMap<String, Vec<GtSegment>>,
    max_proposals: usize,
) -> Result<ARReport> {
    if let Some(stray) = proposals.keys().find(|k| !gts.contains_key(*k)) {
        return Err(Error::InvalidArgument(format!("proposals for unknown image `{stray}`")));
    }
    let empty = Vec::new();
    let per_image: Vec<Vec<(Stratum, f64)>> = gts
        .par_iter()
        .map(|(image, segs)| {
            let props = proposals.get(image).unwrap_or(&empty);
            let top = &props[..props.len().min(max_proposals)];
            segs.iter()
                .map(|g| {
                    let best =
                        top.iter().map(|p| mask_iou(&g.mask, p)).try_fold(0.0f64, |b, iou| iou.map(|v| b.max(v)))?;
                    Ok((Stratum::of(g.occlusion), best))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let best: Vec<(Stratum, f64)> = per_image.into_iter().flatten().collect();
    if best.is_empty() {
        return Err(Error::InvalidArgument("no ground-truth segments".into()));
    }

    let thresholds = iou_thresholds();
    let recall_at = |filter: Option<Stratum>| -> Option<Vec<f64>> {
        let pool: Vec<f64> = best.iter().filter(|(s, _)| filter.is_none_or(|f| f == *s)).map(|b| b.1).collect();
        (!pool.is_empty()).then(|| {
            thresholds.iter().map(|&t| pool.iter().filter(|&&v| v >= t).count() as f64 / pool.len() as f64).collect()
        })
    };
    let ar = |curve: &[f64]| curve.iter().sum::<f64>() / curve.len() as f64;
    let recall_curve = recall_at(None).expect("non-empty");
    let mut counts = StratumCounts { total: best.len(), ..Default::default() };
    for (s, _) in &best {
        match s {
            Stratum::None => counts.none += 1,
            Stratum::Partial => counts.partial += 1,
            Stratum::Heavy => counts.heavy += 1,
        }
    }
    Ok(ARReport {
        ar_all: ar(&recall_curve),
        ar_none: recall_at(Some(Stratum::None)).map(|c| ar(&c)),
        ar_partial: recall_at(Some(Stratum::Partial)).map(|c| ar(&c)),
        ar_heavy: recall_at(Some(Stratum::Heavy)).map(|c| ar(&c)),
        thresholds: thresholds.to_vec(),
        recall_curve,
        counts,
    })
}
