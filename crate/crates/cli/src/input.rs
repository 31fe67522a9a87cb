//! Reading inputs and writing outputs.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use amodal_core::eval::{EdgeBenchImage, SoftMap};
use amodal_core::io::{parse_scene, read_pbm, read_pgm};
use amodal_core::{render_scene, MaskGrid, Scene};

pub fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    parse_scene(&read(path)?).with_context(|| format!("{}", path.display()))
}

pub fn image_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Scenes keyed by file stem; stems must be unique.
pub fn load_named_scenes(paths: &[PathBuf]) -> Result<Vec<(String, Scene)>> {
    let mut seen = BTreeSet::new();
    paths
        .iter()
        .map(|p| {
            let name = image_name(p);
            if !seen.insert(name.clone()) {
                bail!("two ground-truth files share the image name `{name}`");
            }
            Ok((name, load_scene(p)?))
        })
        .collect()
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

pub const EDGE_MANIFEST_FORMAT: &str = "amodal-edges-v1";

#[derive(Deserialize)]
struct ManifestDoc {
    format: String,
    images: Vec<ManifestImage>,
}

#[derive(Deserialize)]
struct ManifestImage {
    image: String,
    #[serde(default)]
    prediction: Option<String>,
    ground_truth: Vec<String>,
}

pub struct EdgeManifest {
    pub names: Vec<String>,
    pub predictions: Vec<Option<SoftMap>>,
    pub ground_truth: Vec<Vec<MaskGrid>>,
}

impl EdgeManifest {
    pub fn bench_images(&self) -> Result<Vec<EdgeBenchImage>> {
        self.names
            .iter()
            .zip(&self.predictions)
            .zip(&self.ground_truth)
            .map(|((name, p), gt)| {
                let prediction = p.clone().with_context(|| format!("image `{name}` has no prediction"))?;
                Ok(EdgeBenchImage { prediction, ground_truth: gt.clone() })
            })
            .collect()
    }
}

/// Ground-truth entries are PBM edge maps or scene files, whose rendered
/// visible edges are used.
fn load_edge_gt(path: &Path) -> Result<MaskGrid> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(render_scene(&load_scene(path)?).with_context(|| format!("{}", path.display()))?.edges.visible)
    } else {
        read_pbm(&read(path)?).with_context(|| format!("{}", path.display()))
    }
}

pub fn load_edge_manifest(path: &Path) -> Result<EdgeManifest> {
    let doc: ManifestDoc = serde_json::from_slice(&read(path)?).with_context(|| format!("{}", path.display()))?;
    if doc.format != EDGE_MANIFEST_FORMAT {
        bail!("{}: unknown format `{}`", path.display(), doc.format);
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut m = EdgeManifest { names: Vec::new(), predictions: Vec::new(), ground_truth: Vec::new() };
    for img in doc.images {
        let prediction = img
            .prediction
            .map(|p| {
                let p = base.join(p);
                read_pgm(&read(&p)?).with_context(|| format!("{}", p.display()))
            })
            .transpose()?;
        let gt = img.ground_truth.iter().map(|g| load_edge_gt(&base.join(g))).collect::<Result<Vec<_>>>()?;
        m.names.push(img.image);
        m.predictions.push(prediction);
        m.ground_truth.push(gt);
    }
    Ok(m)
}
