//! Importer for COCO-style instance annotations with polygon segmentations.
//!
//! Each COCO image becomes one scene. Annotations keep their file order as
//! depth order (first is frontmost) unless every annotation of the image
//! that imports cleanly carries an integer `order` field, in which case ascending `order` is used.
//! Category names become region names; a category `isthing` flag, when
//! present, sets the region kind. Annotations whose segmentation is RLE or
//! has more than one polygon part are skipped and listed in the result.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::scene_json::from_json;
use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::scene::{Region, RegionKind, Scene};

#[derive(Deserialize)]
struct CocoDoc {
    images: Vec<CocoImage>,
    annotations: Vec<CocoAnnotation>,
    #[serde(default)]
    categories: Vec<CocoCategory>,
}

#[derive(Deserialize)]
struct CocoImage {
    id: u64,
    width: u32,
    height: u32,
    #[serde(default)]
    file_name: Option<String>,
}

#[derive(Deserialize)]
struct CocoAnnotation {
    id: u64,
    image_id: u64,
    #[serde(default)]
    category_id: Option<u64>,
    segmentation: serde_json::Value,
    #[serde(default)]
    order: Option<i64>,
}

#[derive(Deserialize)]
struct CocoCategory {
    id: u64,
    name: String,
    #[serde(default)]
    isthing: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedAnnotation {
    pub annotation: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CocoImport {
    /// `(image name, scene)`; the name is the file stem, or `image-<id>`.
    pub scenes: Vec<(String, Scene)>,
    pub skipped: Vec<SkippedAnnotation>,
}

fn image_name(img: &CocoImage) -> String {
    img.file_name
        .as_deref()
        .and_then(|f| std::path::Path::new(f).file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("image-{}", img.id))
}

pub fn import_coco(bytes: &[u8]) -> Result<CocoImport> {
    let doc: CocoDoc = from_json(bytes)?;
    let categories: BTreeMap<u64, &CocoCategory> = doc.categories.iter().map(|c| (c.id, c)).collect();
    let mut by_image: BTreeMap<u64, Vec<&CocoAnnotation>> = doc.images.iter().map(|i| (i.id, Vec::new())).collect();
    for (k, a) in doc.annotations.iter().enumerate() {
        by_image
            .get_mut(&a.image_id)
            .ok_or_else(|| Error::Parse {
                path: format!("annotations[{k}].image_id"),
                message: format!("unknown image {}", a.image_id),
            })?
            .push(a);
    }

    let mut skipped = Vec::new();
    let mut scenes = Vec::with_capacity(doc.images.len());
    for img in &doc.images {
        let anns = by_image.remove(&img.id).unwrap_or_default();
        let mut regions = Vec::with_capacity(anns.len());
        let mut orders = Vec::with_capacity(anns.len());
        for a in anns {
            let parts = match &a.segmentation {
                serde_json::Value::Array(parts) => parts,
                _ => {
                    skipped.push(SkippedAnnotation { annotation: a.id, reason: "RLE segmentation".into() });
                    continue;
                }
            };
            if parts.len() != 1 {
                skipped.push(SkippedAnnotation { annotation: a.id, reason: format!("{} polygon parts", parts.len()) });
                continue;
            }
            let flat: Option<Vec<f64>> = parts[0].as_array().and_then(|xs| xs.iter().map(|v| v.as_f64()).collect());
            let polygon = match flat.map(|f| Polygon::from_flat(&f)) {
                Some(Ok(p)) => p,
                Some(Err(e)) => {
                    skipped.push(SkippedAnnotation { annotation: a.id, reason: e.to_string() });
                    continue;
                }
                None => {
                    skipped.push(SkippedAnnotation { annotation: a.id, reason: "non-numeric polygon".into() });
                    continue;
                }
            };
            let cat = a.category_id.and_then(|c| categories.get(&c));
            let mut region = Region::new(a.id, cat.map(|c| c.name.clone()).unwrap_or_default(), polygon);
            region.kind =
                cat.and_then(|c| c.isthing).map(|t| if t != 0 { RegionKind::Thing } else { RegionKind::Stuff });
            regions.push(region);
            orders.push(a.order);
        }
        if orders.iter().all(Option::is_some) {
            let mut keyed: Vec<_> = orders.into_iter().zip(regions).collect();
            keyed.sort_by_key(|(o, _)| *o);
            regions = keyed.into_iter().map(|(_, r)| r).collect();
        }
        scenes.push((image_name(img), Scene::new(img.width, img.height, regions)));
    }
    Ok(CocoImport { scenes, skipped })
}
