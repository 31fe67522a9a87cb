//! Heuristic depth orderers and amodal completion baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{OrderInput, OrderPrediction, Orderer, Verdict};
use crate::geometry::{hull_of_points, Point, Polygon};
use crate::mask::MaskGrid;
use crate::raster::rasterize;

fn tie_break(a: &OrderInput<'_>, b: &OrderInput<'_>) -> Verdict {
    if a.id < b.id {
        Verdict::Front
    } else {
        Verdict::Back
    }
}

/// Smaller mask in front; equal areas go to the lower id.
pub fn order_by_area(a: OrderInput<'_>, b: OrderInput<'_>) -> Result<OrderPrediction> {
    let (na, nb) = (a.mask.count(), b.mask.count());
    if na == 0 || nb == 0 {
        return Err(Error::EmptyMask);
    }
    let v = match na.cmp(&nb) {
        std::cmp::Ordering::Less => Verdict::Front,
        std::cmp::Ordering::Greater => Verdict::Back,
        std::cmp::Ordering::Equal => tie_break(&a, &b),
    };
    Ok(OrderPrediction::certain(v))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YKey {
    /// Topmost set row.
    #[default]
    TopRow,
    /// Mean row of set pixels.
    CentroidRow,
}

/// The mask reaching closer to the top of the image is behind; equal keys go
/// to the lower id.
pub fn order_by_yaxis(a: OrderInput<'_>, b: OrderInput<'_>, key: YKey) -> Result<OrderPrediction> {
    let k = |m: &MaskGrid| -> Result<f64> {
        match key {
            YKey::TopRow => m.top_row().map(f64::from),
            YKey::CentroidRow => m.centroid_row(),
        }
        .ok_or(Error::EmptyMask)
    };
    let (ka, kb) = (k(a.mask)?, k(b.mask)?);
    let v = if ka > kb {
        Verdict::Front
    } else if ka < kb {
        Verdict::Back
    } else {
        tie_break(&a, &b)
    };
    Ok(OrderPrediction::certain(v))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AreaOrderer;

impl Orderer for AreaOrderer {
    fn order(&self, a: OrderInput<'_>, b: OrderInput<'_>) -> Result<OrderPrediction> {
        order_by_area(a, b)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct YAxisOrderer(pub YKey);

impl Orderer for YAxisOrderer {
    fn order(&self, a: OrderInput<'_>, b: OrderInput<'_>) -> Result<OrderPrediction> {
        order_by_yaxis(a, b, self.0)
    }
}

/// Predicts no occlusion: the amodal guess is the visible mask itself.
pub fn amodal_identity(modal: &MaskGrid) -> MaskGrid {
    modal.clone()
}

/// Raster convex hull of the set pixels, taken over pixel squares and clipped
/// to the image.
pub fn amodal_hull_expand(modal: &MaskGrid) -> Result<MaskGrid> {
    if modal.is_empty() {
        return Err(Error::EmptyMask);
    }
    // only the extreme pixels of each row can contribute hull corners
    let mut ends: Vec<Option<(u32, u32)>> = vec![None; modal.height() as usize];
    for (r, c) in modal.iter_set() {
        let e = ends[r as usize].get_or_insert((c, c));
        e.0 = e.0.min(c);
        e.1 = e.1.max(c);
    }
    let mut corners = Vec::new();
    for (r, e) in ends.iter().enumerate() {
        if let Some((lo, hi)) = *e {
            let (y0, y1) = (r as f64, r as f64 + 1.0);
            corners.extend([
                Point::new(lo as f64, y0),
                Point::new(lo as f64, y1),
                Point::new(hi as f64 + 1.0, y0),
                Point::new(hi as f64 + 1.0, y1),
            ]);
        }
    }
    let hull = Polygon::new(hull_of_points(corners))?;
    let mut out = rasterize(&hull, modal.width(), modal.height())?;
    out.union_with(modal);
    Ok(out)
}
