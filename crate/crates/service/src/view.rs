//! JSON views served to tools and the editor.

use serde::Serialize;

use ifvc::face_model::{EyeRegion, FrameGeometry};
use ifvc::interact::{KeySource, Session};
use ifvc::stream::{inspect_stream, StreamHeader};
use ifvc::{EditOp, MorphableModel, Result, SemanticVector, Target, SEMANTIC_DIM};

#[derive(Debug, Clone, Serialize)]
pub struct EyeView {
    /// Model vertex indices of the visible eye vertices.
    pub indices: Vec<u32>,
    /// Recalibrated outline, empty when the eye is closed.
    pub polygon: Vec<[f64; 2]>,
    pub upper: [f64; 2],
    pub lower: [f64; 2],
    pub gap: f64,
}

impl From<&EyeRegion> for EyeView {
    fn from(r: &EyeRegion) -> Self {
        Self {
            indices: r.indices.clone(),
            polygon: r.polygon(),
            upper: r.p_hp_recal,
            lower: r.p_lp,
            gap: r.gap(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EyesView {
    pub left: Option<EyeView>,
    pub right: Option<EyeView>,
}

/// Projected 2D mesh of one frame.
#[derive(Debug, Clone, Serialize)]
pub struct MeshView {
    pub frame: usize,
    pub width: u32,
    pub height: u32,
    /// Pixel positions, `[0, 0]` where `visible` is false.
    pub vertices: Vec<[f64; 2]>,
    pub visible: Vec<bool>,
    pub triangles: Vec<[u32; 3]>,
    pub eyes: EyesView,
}

impl MeshView {
    pub fn new(frame: usize, geom: &FrameGeometry, model: &MorphableModel, size: (u32, u32)) -> Self {
        let mesh = geom.mesh();
        Self {
            frame,
            width: size.0,
            height: size.1,
            vertices: mesh.projected.clone(),
            visible: mesh.visible.clone(),
            triangles: model.triangles.clone(),
            eyes: EyesView {
                left: geom.eyes.left.as_ref().map(EyeView::from),
                right: geom.eyes.right.as_ref().map(EyeView::from),
            },
        }
    }

    pub fn for_frame(session: &Session, frame: usize, model: &MorphableModel) -> Result<Self> {
        let geom = session.frame_geometry(frame, model)?;
        let h = &session.stream().header;
        Ok(Self::new(
            frame,
            &geom,
            model,
            (u32::from(h.width), u32::from(h.height)),
        ))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameSemantics {
    pub frame: usize,
    /// Edit-target name to value, in wire order.
    pub values: serde_json::Map<String, serde_json::Value>,
    pub vector: [f64; SEMANTIC_DIM],
}

impl FrameSemantics {
    pub fn new(frame: usize, v: &SemanticVector) -> Self {
        let vector = v.flatten();
        let values = vector
            .iter()
            .enumerate()
            .filter_map(|(c, &x)| Some((Target::from_component(c)?.to_string(), x.into())))
            .collect();
        Self {
            frame,
            values,
            vector,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub header: StreamHeader,
    pub fps: f64,
    pub frame_count: usize,
    /// Edit-target names in wire order.
    pub components: Vec<String>,
    pub key_tag: String,
    pub key_source: &'static str,
    pub semantic_payload_bytes: usize,
    pub kbps: f64,
    pub edits: Vec<EditOp>,
}

impl Meta {
    pub fn new(session: &Session) -> Result<Self> {
        let report = inspect_stream(session.stream())?;
        Ok(Self {
            header: report.header,
            fps: report.fps,
            frame_count: session.frame_count(),
            components: (0..SEMANTIC_DIM)
                .filter_map(Target::from_component)
                .map(|t| t.to_string())
                .collect(),
            key_tag: report.key_tag,
            key_source: match session.key_source() {
                KeySource::Stream => "stream",
                KeySource::Virtual { .. } => "virtual",
            },
            semantic_payload_bytes: report.semantic_payload_bytes,
            kbps: report.kbps,
            edits: session.edits().to_vec(),
        })
    }
}
