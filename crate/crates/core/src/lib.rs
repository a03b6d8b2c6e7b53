//! Facial-semantics video coding.
//!
//! A session is one key-reference image plus fourteen semantic parameters
//! per frame (mouth, blink, head rotation, translation, location). The
//! parameters are predictively coded in closed loop, binarized with
//! zero-order exp-Golomb codes and compressed with a bitwise PPM model
//! driving a range coder. On the decoding side they drive a linear 3D face
//! model, whose projected meshes yield a dense motion field that back-warps
//! the key image into a preview frame.
//!
//! Geometry is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root pin the common instantiations. The bitstream path is `f64`.

pub mod entropy;
pub mod error;
pub mod face_model;
pub mod interact;
pub mod motion;
pub mod scalar;
pub mod semantics;
pub mod stream;
pub mod synth;
pub mod trace_io;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use semantics::{KeyFrameSemantics, SemanticTrace, SemanticVector, SEMANTIC_DIM};
pub use stream::{CodedStream, EncodeParams};

pub use face_model::{CameraIntrinsics, EyeRegion, Mesh, MorphableModel, RigidPose};
pub use interact::{EditMode, EditOp, FrameRange, Session, Target};
pub use motion::{FlowField, PreviewFrame};

pub type SemanticVectorF64 = SemanticVector<f64>;
pub type SemanticVectorF32 = SemanticVector<f32>;
pub type KeyFrameSemanticsF64 = KeyFrameSemantics<f64>;
pub type KeyFrameSemanticsF32 = KeyFrameSemantics<f32>;
pub type MorphableModelF64 = MorphableModel<f64>;
pub type MorphableModelF32 = MorphableModel<f32>;
pub type MeshF64 = Mesh<f64>;
pub type MeshF32 = Mesh<f32>;
pub type RigidPoseF64 = RigidPose<f64>;
pub type RigidPoseF32 = RigidPose<f32>;
pub type CameraF64 = CameraIntrinsics<f64>;
pub type CameraF32 = CameraIntrinsics<f32>;
pub type FlowFieldF64 = FlowField<f64>;
pub type FlowFieldF32 = FlowField<f32>;
