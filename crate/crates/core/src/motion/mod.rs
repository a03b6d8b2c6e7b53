//! Dense motion from mesh motion, back-warped previews and wireframes.

pub mod flow;
pub mod frame;

pub use flow::{coarse_flow, interpolate_anchors, read_flo, write_flo, Anchor, FlowField};
pub use frame::{render_wireframe, warp_frame, PreviewFrame};

use crate::error::{Error, Result};
use crate::face_model::{frame_geometry, CameraIntrinsics, FrameGeometry, MorphableModel};
use crate::scalar::Scalar;
use crate::semantics::{KeyFrameSemantics, SemanticVector};

/// Everything produced while previewing one inter frame.
#[derive(Debug, Clone)]
pub struct Preview<T: Scalar = f64> {
    pub key: FrameGeometry<T>,
    pub inter: FrameGeometry<T>,
    pub flow: FlowField<T>,
    pub frame: PreviewFrame,
}

/// Builds the key and inter meshes, interpolates the coarse flow between
/// them and warps `key_image` into the inter frame.
pub fn preview_frame<T: Scalar>(
    model: &MorphableModel<T>,
    key: &KeyFrameSemantics<T>,
    frame: &SemanticVector<T>,
    key_image: &PreviewFrame,
    cam: &CameraIntrinsics<T>,
) -> Result<Preview<T>> {
    if key_image.width != cam.width || key_image.height != cam.height {
        return Err(Error::Dimension(format!(
            "key image is {}x{}, camera is {}x{}",
            key_image.width, key_image.height, cam.width, cam.height
        )));
    }
    let key_geom = frame_geometry(model, key, None, cam)?;
    let inter_geom = frame_geometry(model, key, Some(frame), cam)?;
    let flow = coarse_flow(key_geom.mesh(), inter_geom.mesh(), (cam.width, cam.height))?;
    let out = warp_frame(key_image, &flow)?;
    Ok(Preview {
        key: key_geom,
        inter: inter_geom,
        flow,
        frame: out,
    })
}
