//! Amodal segmentation toolkit: scene validation, occlusion-aware rendering,
//! dataset statistics, evaluation metrics, baselines and a synthetic scene
//! generator.
//!
//! ```
//! use amodal_core::{render_scene, Polygon, Region, Scene};
//!
//! let square = |x0: f64, y0: f64, s: f64| {
//!     Polygon::from_coords(&[(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)]).unwrap()
//! };
//! let scene = Scene::new(
//!     40,
//!     40,
//!     vec![Region::new(1, "front", square(0.0, 0.0, 20.0)), Region::new(2, "back", square(10.0, 10.0, 20.0))],
//! );
//! let render = render_scene(&scene).unwrap();
//! assert_eq!(render.regions[1].occlusion, 0.25);
//! ```

pub mod baselines;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod mask;
pub mod matching;
pub mod raster;
pub mod scene;
pub mod stats;
pub mod synth;

pub use baselines::{
    amodal_hull_expand, amodal_identity, order_by_area, order_by_yaxis, AreaOrderer, YAxisOrderer, YKey,
};
pub use error::{Error, Result};
pub use eval::*;
pub use geometry::{convex_hull, polygon_area, polygon_perimeter, Point, Polygon};
pub use mask::{mask_iou, MaskGrid};
pub use raster::{
    extract_edges, rasterize, rasterize_reference, render_scene, render_scene_reference, EdgeMaps, FigureLabel,
    FigureMap, RegionRender, SceneRender,
};
pub use scene::{
    validate_scene, validate_scene_with, Finding, Region, RegionId, RegionKind, Scene, SharedEdgeMark,
    ValidationConfig, ValidationReport,
};
pub use stats::{
    build_overlap_dag, connected_components, depth_layers, edge_density, shape_convexity, shape_simplicity, summarize,
    OverlapDag, StatsSummary,
};
pub use synth::{generate_corpus, generate_scene, GenConfig, GeneratedScene, OrderMode, ShapeFamily, ShapeMix};
