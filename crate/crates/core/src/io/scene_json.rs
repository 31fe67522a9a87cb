//! `amodal-v1` scene documents.
//!
//! ```json
//! {
//!   "format": "amodal-v1",
//!   "width": 640, "height": 480,
//!   "regions": [
//!     {"id": 1, "name": "person", "kind": "thing", "polygon": [10, 10, 80, 10, 80, 200, 10, 200]},
//!     {"id": 2, "name": "wall", "is_group": false, "polygon": [0, 0, 640, 0, 640, 300, 0, 300]}
//!   ],
//!   "shared_edges": [{"a": 1, "b": 2, "from_vertex": 0, "to_vertex": 1}]
//! }
//! ```
//!
//! `regions` is in depth order, frontmost first. Polygons are flat
//! `[x0, y0, x1, y1, ...]` lists in pixel units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::scene::{Region, RegionKind, Scene, SharedEdgeMark};

pub const SCENE_FORMAT: &str = "amodal-v1";

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    format: String,
    width: u32,
    height: u32,
    regions: Vec<RegionDoc>,
    #[serde(default)]
    shared_edges: Vec<SharedEdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct RegionDoc {
    id: u64,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<RegionKind>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    is_group: bool,
    polygon: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SharedEdgeDoc {
    a: u64,
    b: u64,
    from_vertex: usize,
    to_vertex: usize,
}

pub(crate) fn from_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse { path, message: inner.to_string() }
    })
}

/// Structural parse only; semantic checks belong to `validate_scene`.
pub fn parse_scene(bytes: &[u8]) -> Result<Scene> {
    let doc: SceneDoc = from_json(bytes)?;
    if doc.format != SCENE_FORMAT {
        return Err(Error::UnknownFormat(doc.format));
    }
    let regions = doc
        .regions
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let polygon = Polygon::from_flat(&r.polygon)
                .map_err(|e| Error::Parse { path: format!("regions[{i}].polygon"), message: e.to_string() })?;
            Ok(Region { id: r.id, name: r.name, polygon, kind: r.kind, is_group: r.is_group })
        })
        .collect::<Result<_>>()?;
    Ok(Scene {
        width: doc.width,
        height: doc.height,
        regions,
        shared_edges: doc
            .shared_edges
            .into_iter()
            .map(|m| SharedEdgeMark {
                region_a: m.a,
                region_b: m.b,
                from_vertex: m.from_vertex,
                to_vertex: m.to_vertex,
            })
            .collect(),
    })
}

pub fn scene_to_json(scene: &Scene) -> String {
    let doc = SceneDoc {
        format: SCENE_FORMAT.to_string(),
        width: scene.width,
        height: scene.height,
        regions: scene
            .regions
            .iter()
            .map(|r| RegionDoc {
                id: r.id,
                name: r.name.clone(),
                kind: r.kind,
                is_group: r.is_group,
                polygon: r.polygon.to_flat(),
            })
            .collect(),
        shared_edges: scene
            .shared_edges
            .iter()
            .map(|m| SharedEdgeDoc { a: m.region_a, b: m.region_b, from_vertex: m.from_vertex, to_vertex: m.to_vertex })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("scene serializes");
    s.push('\n');
    s
}
