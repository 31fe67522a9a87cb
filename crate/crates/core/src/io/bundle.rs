//! `amodal-pred-v1` prediction bundles.
//!
//! ```json
//! {
//!   "format": "amodal-pred-v1",
//!   "images": [
//!     {
//!       "image": "scene-0000",
//!       "proposals": [
//!         {"id": 1, "score": 0.9, "polygon": [10, 10, 40, 10, 40, 40]},
//!         {"id": 2, "score": 0.5, "pbm": "masks/scene-0000-2.pbm"}
//!       ],
//!       "order": [{"first": 1, "second": 2, "verdict": "front", "confidence": 0.8}]
//!     }
//!   ]
//! }
//! ```
//!
//! Proposals are ranked: scores must be non-increasing. Each proposal carries
//! exactly one of `polygon` (flat coordinates) or `pbm` (a path relative to
//! the bundle file).

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::netpbm::read_pbm;
use super::scene_json::from_json;
use crate::error::{Error, Result};
use crate::eval::{OrderPrediction, PairVerdictOrderer, Verdict};
use crate::geometry::Polygon;
use crate::mask::MaskGrid;
use crate::raster::rasterize;

pub const BUNDLE_FORMAT: &str = "amodal-pred-v1";

#[derive(Debug, Clone, PartialEq)]
pub enum MaskSource {
    Polygon(Polygon),
    Pbm(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub id: u64,
    pub score: f64,
    pub mask: MaskSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub first: u64,
    pub second: u64,
    pub verdict: Verdict,
    #[serde(default = "one")]
    pub confidence: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagePredictions {
    pub image: String,
    pub proposals: Vec<Proposal>,
    pub order: Vec<PairVerdict>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionBundle {
    pub images: Vec<ImagePredictions>,
}

#[derive(Serialize, Deserialize)]
struct BundleDoc {
    format: String,
    images: Vec<ImageDoc>,
}

#[derive(Serialize, Deserialize)]
struct ImageDoc {
    image: String,
    #[serde(default)]
    proposals: Vec<ProposalDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    order: Vec<PairVerdict>,
}

#[derive(Serialize, Deserialize)]
struct ProposalDoc {
    id: u64,
    score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polygon: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pbm: Option<String>,
}

fn invalid(path: String, message: impl Into<String>) -> Error {
    Error::Parse { path, message: message.into() }
}

pub fn parse_bundle(bytes: &[u8]) -> Result<PredictionBundle> {
    let doc: BundleDoc = from_json(bytes)?;
    if doc.format != BUNDLE_FORMAT {
        return Err(Error::UnknownFormat(doc.format));
    }
    let mut seen = BTreeSet::new();
    let mut images = Vec::with_capacity(doc.images.len());
    for (i, img) in doc.images.into_iter().enumerate() {
        let at = |rest: &str| format!("images[{i}]{rest}");
        if !seen.insert(img.image.clone()) {
            return Err(invalid(at(".image"), format!("duplicate image `{}`", img.image)));
        }
        let mut ids = BTreeSet::new();
        let mut proposals = Vec::with_capacity(img.proposals.len());
        let mut last = f64::INFINITY;
        for (j, p) in img.proposals.into_iter().enumerate() {
            let here = at(&format!(".proposals[{j}]"));
            if !p.score.is_finite() {
                return Err(invalid(format!("{here}.score"), "score must be finite"));
            }
            if p.score > last {
                return Err(invalid(format!("{here}.score"), "scores must be non-increasing"));
            }
            last = p.score;
            if !ids.insert(p.id) {
                return Err(invalid(format!("{here}.id"), format!("duplicate proposal id {}", p.id)));
            }
            let mask = match (p.polygon, p.pbm) {
                (Some(flat), None) => MaskSource::Polygon(
                    Polygon::from_flat(&flat).map_err(|e| invalid(format!("{here}.polygon"), e.to_string()))?,
                ),
                (None, Some(path)) => MaskSource::Pbm(path),
                _ => return Err(invalid(here, "exactly one of `polygon` or `pbm` is required")),
            };
            proposals.push(Proposal { id: p.id, score: p.score, mask });
        }
        for (k, v) in img.order.iter().enumerate() {
            if !(0.0..=1.0).contains(&v.confidence) {
                return Err(invalid(at(&format!(".order[{k}].confidence")), "confidence must lie in [0, 1]"));
            }
        }
        images.push(ImagePredictions { image: img.image, proposals, order: img.order });
    }
    Ok(PredictionBundle { images })
}

pub fn bundle_to_json(bundle: &PredictionBundle) -> String {
    let doc = BundleDoc {
        format: BUNDLE_FORMAT.into(),
        images: bundle
            .images
            .iter()
            .map(|img| ImageDoc {
                image: img.image.clone(),
                proposals: img
                    .proposals
                    .iter()
                    .map(|p| {
                        let (polygon, pbm) = match &p.mask {
                            MaskSource::Polygon(poly) => (Some(poly.to_flat()), None),
                            MaskSource::Pbm(path) => (None, Some(path.clone())),
                        };
                        ProposalDoc { id: p.id, score: p.score, polygon, pbm }
                    })
                    .collect(),
                order: img.order.clone(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("bundle serializes");
    s.push('\n');
    s
}

impl PredictionBundle {
    pub fn image(&self, name: &str) -> Option<&ImagePredictions> {
        self.images.iter().find(|i| i.image == name)
    }

    /// Errors on the first image not in `known`.
    pub fn check_images(&self, mut known: impl FnMut(&str) -> bool) -> Result<()> {
        match self.images.iter().find(|i| !known(&i.image)) {
            Some(i) => Err(Error::InvalidArgument(format!("prediction bundle refers to unknown image `{}`", i.image))),
            None => Ok(()),
        }
    }
}

impl ImagePredictions {
    /// Rasterizes or loads every proposal at the given size, in rank order.
    /// Bitmap paths resolve against `base`.
    pub fn masks(&self, base: &Path, width: u32, height: u32) -> Result<Vec<(u64, MaskGrid)>> {
        self.proposals
            .iter()
            .map(|p| {
                let mask = match &p.mask {
                    MaskSource::Polygon(poly) => rasterize(poly, width, height)?,
                    MaskSource::Pbm(rel) => {
                        let path = base.join(rel);
                        let bytes = std::fs::read(&path)?;
                        let m = read_pbm(&bytes).map_err(|e| match e {
                            Error::Parse { message, .. } => Error::Parse { path: path.display().to_string(), message },
                            other => other,
                        })?;
                        if (m.width(), m.height()) != (width, height) {
                            return Err(Error::DimensionMismatch(m.width(), m.height(), width, height));
                        }
                        m
                    }
                };
                Ok((p.id, mask))
            })
            .collect()
    }

    pub fn orderer(&self) -> PairVerdictOrderer {
        let map: HashMap<(u64, u64), OrderPrediction> = self
            .order
            .iter()
            .map(|v| ((v.first, v.second), OrderPrediction { verdict: v.verdict, confidence: v.confidence }))
            .collect();
        PairVerdictOrderer::new(map)
    }
}
