//! Per-frame facial semantics and the per-session key-frame coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of transmitted semantic components per frame.
pub const SEMANTIC_DIM: usize = 14;

/// Largest admissible blink intensity (fully closed eye).
pub const EYE_MAX: f64 = 5.0;

/// Component names in wire order. Also the CSV header.
pub const COMPONENT_NAMES: [&str; SEMANTIC_DIM] = [
    "mouth0", "mouth1", "mouth2", "mouth3", "mouth4", "mouth5", "eye", "rotx", "roty", "rotz", "transx",
    "transy", "transz", "loc",
];

/// Offsets of each group inside the flattened vector.
pub const MOUTH: std::ops::Range<usize> = 0..6;
pub const EYE: usize = 6;
pub const ROT: std::ops::Range<usize> = 7..10;
pub const TRANS: std::ops::Range<usize> = 10..13;
pub const LOC: usize = 13;

/// The compact per-frame semantic parameter set: mouth motion, eye blink,
/// head rotation, head translation and head location.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct SemanticVector<T: Scalar = f64> {
    /// First six expression-basis coefficients.
    pub mouth: [T; 6],
    /// Blink intensity, 0 (open) to 5 (closed).
    pub eye: T,
    /// Euler angles (pitch, yaw, roll) in radians.
    pub rot: [T; 3],
    /// Camera-space translation.
    pub trans: [T; 3],
    /// Depth offset added to the z translation.
    pub loc: T,
}

impl<T: Scalar> SemanticVector<T> {
    pub fn zero() -> Self {
        Self::unflatten(&[T::zero(); SEMANTIC_DIM])
    }

    /// Builds a vector and checks its invariants.
    pub fn new(mouth: [T; 6], eye: T, rot: [T; 3], trans: [T; 3], loc: T) -> Result<Self> {
        let v = Self {
            mouth,
            eye,
            rot,
            trans,
            loc,
        };
        v.validate(0)?;
        Ok(v)
    }

    /// Wire order: mouth[0..6], eye, rot[0..3], trans[0..3], loc.
    pub fn flatten(&self) -> [T; SEMANTIC_DIM] {
        let mut out = [T::zero(); SEMANTIC_DIM];
        out[MOUTH].copy_from_slice(&self.mouth);
        out[EYE] = self.eye;
        out[ROT].copy_from_slice(&self.rot);
        out[TRANS].copy_from_slice(&self.trans);
        out[LOC] = self.loc;
        out
    }

    /// Inverse of [`flatten`](Self::flatten). Does not validate.
    pub fn unflatten(flat: &[T; SEMANTIC_DIM]) -> Self {
        let mut mouth = [T::zero(); 6];
        mouth.copy_from_slice(&flat[MOUTH]);
        let mut rot = [T::zero(); 3];
        rot.copy_from_slice(&flat[ROT]);
        let mut trans = [T::zero(); 3];
        trans.copy_from_slice(&flat[TRANS]);
        Self {
            mouth,
            eye: flat[EYE],
            rot,
            trans,
            loc: flat[LOC],
        }
    }

    /// Unflattens a slice, reporting a dimension mismatch against `frame`.
    pub fn try_from_slice(values: &[T], frame: usize) -> Result<Self> {
        let flat: &[T; SEMANTIC_DIM] = values.try_into().map_err(|_| {
            Error::validation(
                frame,
                "frame",
                format!("expected {SEMANTIC_DIM} components, found {}", values.len()),
            )
        })?;
        let v = Self::unflatten(flat);
        v.validate(frame)?;
        Ok(v)
    }

    pub fn get(&self, component: usize) -> T {
        self.flatten()[component]
    }

    pub fn set(&mut self, component: usize, value: T) {
        let mut flat = self.flatten();
        flat[component] = value;
        *self = Self::unflatten(&flat);
    }

    /// Checks finiteness, the blink range and the rotation range.
    pub fn validate(&self, frame: usize) -> Result<()> {
        let flat = self.flatten();
        for (i, v) in flat.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::validation(frame, COMPONENT_NAMES[i], "non-finite value"));
            }
        }
        if self.eye < T::zero() || self.eye > T::of(EYE_MAX) {
            return Err(Error::validation(
                frame,
                "eye",
                format!("blink intensity {} outside [0, 5]", self.eye),
            ));
        }
        let pi = T::of(std::f64::consts::PI);
        for (i, r) in self.rot.iter().enumerate() {
            if *r < -pi || *r > pi {
                return Err(Error::validation(
                    frame,
                    COMPONENT_NAMES[ROT.start + i],
                    format!("angle {r} outside [-pi, pi]"),
                ));
            }
        }
        Ok(())
    }

    /// Projects eye and rotation components onto their admissible ranges.
    pub fn clamped(&self) -> Self {
        let pi = T::of(std::f64::consts::PI);
        let mut out = *self;
        out.eye = out.eye.max(T::zero()).min(T::of(EYE_MAX));
        for r in out.rot.iter_mut() {
            *r = r.max(-pi).min(pi);
        }
        out
    }

    pub fn cast<U: Scalar>(&self) -> SemanticVector<U> {
        let flat = self.flatten();
        SemanticVector::unflatten(&flat.map(|v| U::of(v.as_f64())))
    }
}

/// Coefficients taken from the key-reference frame and shared by the whole
/// session. Only `pose` is ever predicted against; the coefficient vectors
/// travel once in the container.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct KeyFrameSemantics<T: Scalar = f64> {
    pub id_coeffs: Vec<T>,
    pub alb_coeffs: Vec<T>,
    pub illum_coeffs: Vec<T>,
    pub exp_coeffs: Vec<T>,
    pub pose: SemanticVector<T>,
}

impl<T: Scalar> KeyFrameSemantics<T> {
    /// Key semantics with empty coefficient vectors, read as neutral (all zeros)
    /// by the face model.
    pub fn neutral(pose: SemanticVector<T>) -> Self {
        Self {
            pose,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let groups = [
            ("key.id", &self.id_coeffs),
            ("key.alb", &self.alb_coeffs),
            ("key.illum", &self.illum_coeffs),
            ("key.exp", &self.exp_coeffs),
        ];
        for (name, coeffs) in groups {
            if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
                return Err(Error::validation(0, format!("{name}[{i}]"), "non-finite value"));
            }
        }
        self.pose.validate(0).map_err(|e| match e {
            Error::Validation { field, message, .. } => {
                Error::validation(0, format!("key.pose.{field}"), message)
            }
            other => other,
        })
    }

    pub fn cast<U: Scalar>(&self) -> KeyFrameSemantics<U> {
        let conv = |v: &Vec<T>| v.iter().map(|x| U::of(x.as_f64())).collect();
        KeyFrameSemantics {
            id_coeffs: conv(&self.id_coeffs),
            alb_coeffs: conv(&self.alb_coeffs),
            illum_coeffs: conv(&self.illum_coeffs),
            exp_coeffs: conv(&self.exp_coeffs),
            pose: self.pose.cast(),
        }
    }
}

/// A session's worth of semantics: frame rate, key coefficients and one
/// vector per inter frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct SemanticTrace<T: Scalar = f64> {
    pub fps: f64,
    pub key: KeyFrameSemantics<T>,
    pub frames: Vec<SemanticVector<T>>,
}

impl<T: Scalar> SemanticTrace<T> {
    pub fn new(fps: f64, key: KeyFrameSemantics<T>, frames: Vec<SemanticVector<T>>) -> Result<Self> {
        let trace = Self { fps, key, frames };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::validation(
                0,
                "fps",
                format!("fps must be positive, got {}", self.fps),
            ));
        }
        if self.frames.is_empty() {
            return Err(Error::validation(0, "frames", "trace has no frames"));
        }
        self.key.validate()?;
        for (i, f) in self.frames.iter().enumerate() {
            f.validate(i)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}
