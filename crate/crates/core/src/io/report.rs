//! Report emission. Every report is a JSON object tagged with
//! `"format": "amodal-report-v1"` and a `"report"` kind, with all floating
//! point fields written to exactly six decimal places.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::raster::{FigureLabel, SceneRender};
use crate::scene::Scene;

pub const REPORT_FORMAT: &str = "amodal-report-v1";

/// Pretty printer that writes every `f64` with `{:.6}`.
struct FixedFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        // avoid emitting "-0.000000"
        let v = if value == 0.0 || (value.abs() < 5e-7) { 0.0 } else { value };
        write!(w, "{v:.6}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes any value with the fixed-precision printer, newline terminated.
pub fn to_fixed_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report serializes");
    out.push(b'\n');
    String::from_utf8(out).expect("utf-8 output")
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    format: &'static str,
    report: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Wraps `body` (which must serialize as an object) with the format and kind
/// tags.
pub fn to_report_json<T: Serialize>(kind: &str, body: &T) -> String {
    to_fixed_json(&Tagged { format: REPORT_FORMAT, report: kind, body })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub id: u64,
    pub name: String,
    pub amodal_pixels: usize,
    pub visible_pixels: usize,
    pub occlusion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSummary {
    pub width: u32,
    pub height: u32,
    pub regions: Vec<RegionSummary>,
    pub visible_edge_pixels: usize,
    pub hidden_edge_pixels: usize,
    pub shared_edge_pixels: usize,
}

impl RenderSummary {
    pub fn new(scene: &Scene, render: &SceneRender) -> Self {
        RenderSummary {
            width: render.width,
            height: render.height,
            regions: scene
                .regions
                .iter()
                .zip(&render.regions)
                .map(|(s, r)| RegionSummary {
                    id: r.id,
                    name: s.name.clone(),
                    amodal_pixels: r.amodal.count(),
                    visible_pixels: r.visible.count(),
                    occlusion: r.occlusion,
                })
                .collect(),
            visible_edge_pixels: render.edges.visible.count(),
            hidden_edge_pixels: render.edges.hidden.count(),
            shared_edge_pixels: render.edges.figure.labels().iter().filter(|l| **l == FigureLabel::Shared).count(),
        }
    }
}
