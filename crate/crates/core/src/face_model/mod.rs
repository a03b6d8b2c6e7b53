//! 3D face synthesis from semantic coefficients, rigid pose and pinhole
//! projection, and eye-blink recalibration.

pub mod eyes;
pub mod model;
pub mod projection;

pub use eyes::{recalibrate_eyes, recalibrated_top, EyeMap, EyeRecalibration, EyeRegion};
pub use model::{Basis, MorphableModel, MOUTH_DIMS};
pub use projection::{pose_from_semantics, project, CameraIntrinsics, Mesh, RigidPose};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::semantics::{KeyFrameSemantics, SemanticVector};

/// A frame's projected mesh with its eyes recalibrated.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGeometry<T: Scalar = f64> {
    pub pose: RigidPose<T>,
    pub eyes: EyeRecalibration<T>,
}

impl<T: Scalar> FrameGeometry<T> {
    pub fn mesh(&self) -> &Mesh<T> {
        &self.eyes.mesh
    }
}

/// Full geometry path for one frame: synthesize, pose, project, recalibrate
/// eyes. `frame == None` builds the key frame from the key's own pose and
/// full expression vector.
pub fn frame_geometry<T: Scalar>(
    model: &MorphableModel<T>,
    key: &KeyFrameSemantics<T>,
    frame: Option<&SemanticVector<T>>,
    cam: &CameraIntrinsics<T>,
) -> Result<FrameGeometry<T>> {
    let semantics = frame.unwrap_or(&key.pose);
    let shape = model.synthesize_shape(key, frame)?;
    let pose = RigidPose::from_semantics(semantics);
    let mesh = project(&shape, &pose, cam)?;
    let eyes = recalibrate_eyes(&mesh, model, semantics.eye, (cam.width, cam.height))?;
    Ok(FrameGeometry { pose, eyes })
}
