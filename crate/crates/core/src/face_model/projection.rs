use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::semantics::SemanticVector;

pub type Mat3<T> = [[T; 3]; 3];

/// Head rotation and translation in camera space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPose<T: Scalar = f64> {
    pub rotation: Mat3<T>,
    pub translation: [T; 3],
}

fn matmul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

fn rot_x<T: Scalar>(a: T) -> Mat3<T> {
    let (s, c) = a.sin_cos();
    let (o, l) = (T::zero(), T::one());
    [[l, o, o], [o, c, -s], [o, s, c]]
}

fn rot_y<T: Scalar>(a: T) -> Mat3<T> {
    let (s, c) = a.sin_cos();
    let (o, l) = (T::zero(), T::one());
    [[c, o, s], [o, l, o], [-s, o, c]]
}

fn rot_z<T: Scalar>(a: T) -> Mat3<T> {
    let (s, c) = a.sin_cos();
    let (o, l) = (T::zero(), T::one());
    [[c, -s, o], [s, c, o], [o, o, l]]
}

impl<T: Scalar> RigidPose<T> {
    pub fn identity() -> Self {
        let (o, l) = (T::zero(), T::one());
        Self {
            rotation: [[l, o, o], [o, l, o], [o, o, l]],
            translation: [o; 3],
        }
    }

    /// `R = Rx(rot[0]) * Ry(rot[1]) * Rz(rot[2])`,
    /// `t = (trans[0], trans[1], trans[2] + loc)`.
    pub fn from_semantics(v: &SemanticVector<T>) -> Self {
        let rotation = matmul(&matmul(&rot_x(v.rot[0]), &rot_y(v.rot[1])), &rot_z(v.rot[2]));
        Self {
            rotation,
            translation: [v.trans[0], v.trans[1], v.trans[2] + v.loc],
        }
    }

    pub fn apply(&self, p: &[T; 3]) -> [T; 3] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2],
        ]
    }

    /// Max-norm of `RᵀR - I`.
    pub fn orthogonality_error(&self) -> T {
        let r = &self.rotation;
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let dot = r[0][i] * r[0][j] + r[1][i] * r[1][j] + r[2][i] * r[2][j];
                let want = if i == j { T::one() } else { T::zero() };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> T {
        let r = &self.rotation;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }
}

pub fn pose_from_semantics<T: Scalar>(v: &SemanticVector<T>) -> RigidPose<T> {
    RigidPose::from_semantics(v)
}

/// Pinhole camera in pixel units; x right, y down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CameraIntrinsics<T: Scalar = f64> {
    pub focal: T,
    pub principal: [T; 2],
    pub width: u32,
    pub height: u32,
}

impl<T: Scalar> CameraIntrinsics<T> {
    pub fn new(focal: T, principal: [T; 2], width: u32, height: u32) -> Result<Self> {
        if !(focal.is_finite() && focal > T::zero()) {
            return Err(Error::Config(format!(
                "focal length must be positive, got {focal}"
            )));
        }
        Ok(Self {
            focal,
            principal,
            width,
            height,
        })
    }

    /// Focal length `1.2 * width`, principal point at the image center.
    pub fn default_for(width: u32, height: u32) -> Self {
        Self {
            focal: T::of(1.2 * f64::from(width)),
            principal: [T::of(f64::from(width) / 2.0), T::of(f64::from(height) / 2.0)],
            width,
            height,
        }
    }
}

/// A posed and projected face mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T: Scalar = f64> {
    /// Camera-space vertices `R v + t`.
    pub vertices: Vec<[T; 3]>,
    /// Pixel positions; zero for invisible vertices.
    pub projected: Vec<[T; 2]>,
    /// Camera-space depth is positive.
    pub visible: Vec<bool>,
}

impl<T: Scalar> Mesh<T> {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn visible_count(&self) -> usize {
        self.visible.iter().filter(|v| **v).count()
    }
}

/// Rigidly transforms and projects model-space vertices. Vertices at or
/// behind the camera plane are flagged invisible.
pub fn project<T: Scalar>(
    vertices: &[[T; 3]],
    pose: &RigidPose<T>,
    cam: &CameraIntrinsics<T>,
) -> Result<Mesh<T>> {
    let mut out = Mesh {
        vertices: Vec::with_capacity(vertices.len()),
        projected: Vec::with_capacity(vertices.len()),
        visible: Vec::with_capacity(vertices.len()),
    };
    for v in vertices {
        let p = pose.apply(v);
        let vis = p[2] > T::zero() && p.iter().all(|c| c.is_finite());
        let m = if vis {
            [
                cam.focal * p[0] / p[2] + cam.principal[0],
                cam.focal * p[1] / p[2] + cam.principal[1],
            ]
        } else {
            [T::zero(); 2]
        };
        out.vertices.push(p);
        out.projected.push(m);
        out.visible.push(vis);
    }
    if out.visible_count() == 0 {
        return Err(Error::Degenerate("no vertex lies in front of the camera".into()));
    }
    Ok(out)
}
