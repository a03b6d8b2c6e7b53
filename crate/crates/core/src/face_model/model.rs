//! Linear 3D morphable face model: mean shape/texture plus identity,
//! expression, albedo and illumination bases.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::semantics::{KeyFrameSemantics, SemanticVector};

/// Number of leading expression coefficients driven by the mouth semantics.
pub const MOUTH_DIMS: usize = 6;

/// A `(3N) x rank` matrix stored column-major; rows follow the interleaved
/// vertex layout `x0, y0, z0, x1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis<T: Scalar> {
    rows: usize,
    rank: usize,
    data: Vec<T>,
}

impl<T: Scalar> Basis<T> {
    pub fn new(rows: usize, rank: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * rank {
            return Err(Error::Dimension(format!(
                "basis data has {} values, expected {rows} x {rank}",
                data.len()
            )));
        }
        Ok(Self { rows, rank, data })
    }

    pub fn zeros(rows: usize, rank: usize) -> Self {
        Self {
            rows,
            rank,
            data: vec![T::zero(); rows * rank],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[col * self.rows + row]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// `out += self * coeffs`.
    fn accumulate(&self, coeffs: &[T], out: &mut [T]) {
        for (j, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, b) in out.iter_mut().zip(self.column(j)) {
                *o += *c * *b;
            }
        }
    }

    fn cast<U: Scalar>(&self) -> Basis<U> {
        Basis {
            rows: self.rows,
            rank: self.rank,
            data: self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphableModel<T: Scalar = f64> {
    pub name: String,
    pub mean_shape: Vec<T>,
    pub mean_texture: Vec<T>,
    pub id_basis: Basis<T>,
    pub exp_basis: Basis<T>,
    pub alb_basis: Basis<T>,
    pub illum_basis: Basis<T>,
    pub triangles: Vec<[u32; 3]>,
    pub eye_left: Vec<u32>,
    pub eye_right: Vec<u32>,
}

/// Expression coefficients in effect for a frame.
fn expression<T: Scalar>(
    model_rank: usize,
    key: &KeyFrameSemantics<T>,
    frame: Option<&SemanticVector<T>>,
) -> Result<Vec<T>> {
    match frame {
        None => coefficients("exp", &key.exp_coeffs, model_rank),
        Some(f) => {
            if model_rank < MOUTH_DIMS {
                return Err(Error::Dimension(format!(
                    "expression rank {model_rank} cannot hold {MOUTH_DIMS} mouth coefficients"
                )));
            }
            let mut exp = vec![T::zero(); model_rank];
            exp[..MOUTH_DIMS].copy_from_slice(&f.mouth);
            Ok(exp)
        }
    }
}

/// An empty coefficient vector stands for all zeros.
fn coefficients<T: Scalar>(name: &str, coeffs: &[T], rank: usize) -> Result<Vec<T>> {
    if coeffs.is_empty() {
        return Ok(vec![T::zero(); rank]);
    }
    if coeffs.len() != rank {
        return Err(Error::Dimension(format!(
            "{name} coefficients have length {}, model rank is {rank}",
            coeffs.len()
        )));
    }
    Ok(coeffs.to_vec())
}

fn to_points<T: Scalar>(flat: Vec<T>) -> Vec<[T; 3]> {
    flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

impl<T: Scalar> MorphableModel<T> {
    pub fn vertex_count(&self) -> usize {
        self.mean_shape.len() / 3
    }

    /// Checks every structural invariant of the model.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertex_count();
        let rows = 3 * n;
        if n == 0 || self.mean_shape.len() != rows {
            return Err(Error::Dimension("mean shape must hold 3N values, N > 0".into()));
        }
        if self.mean_texture.len() != rows {
            return Err(Error::Dimension("mean texture must hold 3N values".into()));
        }
        for (name, b) in [
            ("identity", &self.id_basis),
            ("expression", &self.exp_basis),
            ("albedo", &self.alb_basis),
            ("illumination", &self.illum_basis),
        ] {
            if b.rows != rows {
                return Err(Error::Dimension(format!(
                    "{name} basis has {} rows, expected {rows}",
                    b.rows
                )));
            }
        }
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(Error::Dimension(format!(
                "triangle {t:?} indexes past {n} vertices"
            )));
        }
        for (name, eye) in [("left", &self.eye_left), ("right", &self.eye_right)] {
            if eye.is_empty() {
                return Err(Error::Dimension(format!("{name} eye region is empty")));
            }
            if eye.iter().any(|&i| i as usize >= n) {
                return Err(Error::Dimension(format!(
                    "{name} eye region indexes past {n} vertices"
                )));
            }
        }
        if self.eye_left.iter().any(|i| self.eye_right.contains(i)) {
            return Err(Error::Dimension("eye regions overlap".into()));
        }
        Ok(())
    }

    /// `S = S_mean + S_id * id + S_exp * exp`.
    ///
    /// For the key frame (`frame == None`) the expression is the key's full
    /// expression vector. For an inter frame the first six expression
    /// coefficients come from its mouth semantics and the rest are zero.
    pub fn synthesize_shape(
        &self,
        key: &KeyFrameSemantics<T>,
        frame: Option<&SemanticVector<T>>,
    ) -> Result<Vec<[T; 3]>> {
        let id = coefficients("id", &key.id_coeffs, self.id_basis.rank)?;
        let exp = expression(self.exp_basis.rank, key, frame)?;
        let mut s = self.mean_shape.clone();
        self.id_basis.accumulate(&id, &mut s);
        self.exp_basis.accumulate(&exp, &mut s);
        Ok(to_points(s))
    }

    /// `T = T_mean + T_alb * alb + T_illum * illum`.
    pub fn synthesize_texture(&self, key: &KeyFrameSemantics<T>) -> Result<Vec<[T; 3]>> {
        let alb = coefficients("alb", &key.alb_coeffs, self.alb_basis.rank)?;
        let illum = coefficients("illum", &key.illum_coeffs, self.illum_basis.rank)?;
        let mut t = self.mean_texture.clone();
        self.alb_basis.accumulate(&alb, &mut t);
        self.illum_basis.accumulate(&illum, &mut t);
        Ok(to_points(t))
    }

    /// Checks that `key`'s coefficient vectors fit this model.
    pub fn check_key(&self, key: &KeyFrameSemantics<T>) -> Result<()> {
        coefficients("id", &key.id_coeffs, self.id_basis.rank)?;
        coefficients("exp", &key.exp_coeffs, self.exp_basis.rank)?;
        coefficients("alb", &key.alb_coeffs, self.alb_basis.rank)?;
        coefficients("illum", &key.illum_coeffs, self.illum_basis.rank)?;
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> MorphableModel<U> {
        let conv = |v: &Vec<T>| v.iter().map(|x| U::of(x.as_f64())).collect();
        MorphableModel {
            name: self.name.clone(),
            mean_shape: conv(&self.mean_shape),
            mean_texture: conv(&self.mean_texture),
            id_basis: self.id_basis.cast(),
            exp_basis: self.exp_basis.cast(),
            alb_basis: self.alb_basis.cast(),
            illum_basis: self.illum_basis.cast(),
            triangles: self.triangles.clone(),
            eye_left: self.eye_left.clone(),
            eye_right: self.eye_right.clone(),
        }
    }
}

// `.mmb` files: "MMB1", u32 LE length of a JSON header, the JSON header
// (name, dims, triangles, eye regions), then little-endian f64 arrays in
// the order mean_shape, mean_texture, id, exp, alb, illum bases
// (each basis column-major).

const MMB_MAGIC: [u8; 4] = *b"MMB1";

#[derive(Debug, Serialize, Deserialize)]
struct MmbHeader {
    name: String,
    vertices: usize,
    rank_id: usize,
    rank_exp: usize,
    rank_alb: usize,
    rank_illum: usize,
    triangles: Vec<[u32; 3]>,
    eye_left: Vec<u32>,
    eye_right: Vec<u32>,
}

impl MorphableModel<f64> {
    pub fn to_mmb_bytes(&self) -> Vec<u8> {
        let header = MmbHeader {
            name: self.name.clone(),
            vertices: self.vertex_count(),
            rank_id: self.id_basis.rank,
            rank_exp: self.exp_basis.rank,
            rank_alb: self.alb_basis.rank,
            rank_illum: self.illum_basis.rank,
            triangles: self.triangles.clone(),
            eye_left: self.eye_left.clone(),
            eye_right: self.eye_right.clone(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::new();
        out.extend_from_slice(&MMB_MAGIC);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for arr in [
            &self.mean_shape[..],
            &self.mean_texture[..],
            self.id_basis.as_slice(),
            self.exp_basis.as_slice(),
            self.alb_basis.as_slice(),
            self.illum_basis.as_slice(),
        ] {
            for v in arr {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_mmb_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Dimension(format!("invalid .mmb file: {m}"));
        if bytes.len() < 8 || bytes[..4] != MMB_MAGIC {
            return Err(bad("bad magic"));
        }
        let json_len = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let json = bytes
            .get(8..8 + json_len)
            .ok_or_else(|| bad("truncated header"))?;
        let h: MmbHeader = serde_json::from_slice(json).map_err(|e| bad(&format!("header: {e}")))?;
        let rows = h
            .vertices
            .checked_mul(3)
            .ok_or_else(|| bad("vertex count overflow"))?;
        let sizes = [
            Some(rows),
            Some(rows),
            rows.checked_mul(h.rank_id),
            rows.checked_mul(h.rank_exp),
            rows.checked_mul(h.rank_alb),
            rows.checked_mul(h.rank_illum),
        ];
        let mut data = &bytes[8 + json_len..];
        let mut arrays = Vec::with_capacity(6);
        for size in sizes {
            let size = size.ok_or_else(|| bad("array size overflow"))?;
            let nbytes = size.checked_mul(8).ok_or_else(|| bad("array size overflow"))?;
            if data.len() < nbytes {
                return Err(bad("truncated arrays"));
            }
            let (head, rest) = data.split_at(nbytes);
            arrays.push(
                head.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect::<Vec<_>>(),
            );
            data = rest;
        }
        if !data.is_empty() {
            return Err(bad("trailing bytes"));
        }
        let mut it = arrays.into_iter();
        let mut next = || it.next().expect("six arrays");
        let model = MorphableModel {
            name: h.name,
            mean_shape: next(),
            mean_texture: next(),
            id_basis: Basis::new(rows, h.rank_id, next())?,
            exp_basis: Basis::new(rows, h.rank_exp, next())?,
            alb_basis: Basis::new(rows, h.rank_alb, next())?,
            illum_basis: Basis::new(rows, h.rank_illum, next())?,
            triangles: h.triangles,
            eye_left: h.eye_left,
            eye_right: h.eye_right,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_mmb_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_mmb_bytes())?;
        Ok(())
    }

    /// A small deterministic face-like model for tests and demos: a 10 x 10
    /// vertex patch bulging toward the camera, two 2 x 2 eye regions, and
    /// smooth analytic bases. Image-style axes: x right, y down, z away
    /// from the camera.
    pub fn synthetic() -> Self {
        const COLS: usize = 10;
        const ROWS: usize = 10;
        let n = COLS * ROWS;
        let rows = 3 * n;
        let coord = |k: usize, count: usize| -1.0 + 2.0 * k as f64 / (count - 1) as f64;

        let mut mean_shape = Vec::with_capacity(rows);
        let mut mean_texture = Vec::with_capacity(rows);
        for r in 0..ROWS {
            for c in 0..COLS {
                let (x, y) = (coord(c, COLS), coord(r, ROWS));
                let z = 0.4 * (x * x + y * y) - 0.4;
                mean_shape.extend_from_slice(&[0.8 * x, y, z]);
                mean_texture.extend_from_slice(&[0.8, 0.6, 0.5]);
            }
        }
        let vertex = |i: usize| (mean_shape[3 * i], mean_shape[3 * i + 1]);

        let mut id_basis = Basis::zeros(rows, 8);
        for j in 0..8 {
            let f = (j + 1) as f64;
            let col = id_basis.column_mut(j);
            for i in 0..n {
                let (x, y) = vertex(i);
                col[3 * i] = 0.03 * (f * x + 0.5 * f).sin();
                col[3 * i + 1] = 0.03 * (0.7 * f * y + 0.3 * f).cos();
                col[3 * i + 2] = 0.02 * (0.5 * f * (x + y)).sin();
            }
        }
        // The first six expression columns act around the mouth.
        let mut exp_basis = Basis::zeros(rows, 10);
        for j in 0..10 {
            let f = (j + 1) as f64;
            let col = exp_basis.column_mut(j);
            for i in 0..n {
                let (x, y) = vertex(i);
                let w = if j < MOUTH_DIMS {
                    (-(x * x + (y - 0.55).powi(2)) / 0.12).exp()
                } else {
                    0.3
                };
                col[3 * i] = 0.05 * w * (f * x).sin();
                col[3 * i + 1] = 0.08 * w * (0.5 * f + y).cos();
                col[3 * i + 2] = 0.02 * w * (f * y).sin();
            }
        }
        let mut alb_basis = Basis::zeros(rows, 6);
        for j in 0..6 {
            let f = (j + 1) as f64;
            let col = alb_basis.column_mut(j);
            for i in 0..n {
                let (x, y) = vertex(i);
                for ch in 0..3 {
                    col[3 * i + ch] = 0.05 * (f * x + ch as f64 + y).sin();
                }
            }
        }
        let mut illum_basis = Basis::zeros(rows, 4);
        for j in 0..4 {
            let col = illum_basis.column_mut(j);
            for i in 0..n {
                let (x, y) = vertex(i);
                let shade = match j {
                    0 => 1.0,
                    1 => x,
                    2 => y,
                    _ => x * y,
                };
                for ch in 0..3 {
                    col[3 * i + ch] = 0.1 * shade;
                }
            }
        }

        let idx = |r: usize, c: usize| (r * COLS + c) as u32;
        let mut triangles = Vec::with_capacity(2 * (ROWS - 1) * (COLS - 1));
        for r in 0..ROWS - 1 {
            for c in 0..COLS - 1 {
                triangles.push([idx(r, c), idx(r, c + 1), idx(r + 1, c + 1)]);
                triangles.push([idx(r, c), idx(r + 1, c + 1), idx(r + 1, c)]);
            }
        }
        let eye = |c0: usize| vec![idx(3, c0), idx(3, c0 + 1), idx(4, c0), idx(4, c0 + 1)];

        let model = MorphableModel {
            name: "synthetic-100".into(),
            mean_shape,
            mean_texture,
            id_basis,
            exp_basis,
            alb_basis,
            illum_basis,
            triangles,
            eye_left: eye(2),
            eye_right: eye(6),
        };
        debug_assert!(model.validate().is_ok());
        model
    }
}
