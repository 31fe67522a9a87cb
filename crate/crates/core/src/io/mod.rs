//! File formats: scene documents, prediction bundles, Netpbm bitmaps, report
//! JSON and a COCO polygon importer.

pub mod bundle;
pub mod coco;
pub mod netpbm;
pub mod report;
pub mod scene_json;

pub use bundle::{
    bundle_to_json, parse_bundle, ImagePredictions, MaskSource, PairVerdict, PredictionBundle, Proposal, BUNDLE_FORMAT,
};
pub use coco::{import_coco, CocoImport, SkippedAnnotation};
pub use netpbm::{read_pbm, read_pgm, write_pbm, write_pbm_raw, write_pgm};
pub use report::{to_fixed_json, to_report_json, RegionSummary, RenderSummary, REPORT_FORMAT};
pub use scene_json::{parse_scene, scene_to_json, SCENE_FORMAT};
