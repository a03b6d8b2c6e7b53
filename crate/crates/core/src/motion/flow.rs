//! Coarse dense motion from projected mesh vertex motion.
//!
//! Anchors sit at the inter frame's projected vertices and carry the
//! displacement back to the matching key-frame vertex. The dense field is
//! the piecewise-linear interpolant over a Delaunay triangulation of the
//! anchors, evaluated at integer pixel coordinates. Pixels outside the
//! anchors' convex hull get zero motion and are marked in `outside`.

use std::io::{self, Read, Write};

use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::face_model::Mesh;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField<T: Scalar = f64> {
    pub width: u32,
    pub height: u32,
    /// Row-major per-pixel displacement in pixels.
    pub data: Vec<[T; 2]>,
    /// Pixels outside the anchors' hull, filled with zero motion.
    pub outside: Vec<bool>,
}

impl<T: Scalar> FlowField<T> {
    pub fn zeros(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            data: vec![[T::zero(); 2]; n],
            outside: vec![false; n],
        }
    }

    pub fn constant(width: u32, height: u32, d: [T; 2]) -> Self {
        let mut f = Self::zeros(width, height);
        f.data.fill(d);
        f
    }

    pub fn get(&self, x: u32, y: u32) -> [T; 2] {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn is_outside(&self, x: u32, y: u32) -> bool {
        self.outside[y as usize * self.width as usize + x as usize]
    }

    pub fn negated(&self) -> Self {
        let mut f = self.clone();
        for d in f.data.iter_mut() {
            *d = [-d[0], -d[1]];
        }
        f
    }
}

/// One interpolation anchor: a position and the displacement it carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor<T: Scalar = f64> {
    pub position: [T; 2],
    pub displacement: [T; 2],
}

/// Anchors for the key/inter mesh pair: vertices visible in both meshes,
/// positioned at the inter projection, displaced toward the key projection.
pub fn flow_anchors<T: Scalar>(mesh_key: &Mesh<T>, mesh_inter: &Mesh<T>) -> Result<Vec<Anchor<T>>> {
    if mesh_key.len() != mesh_inter.len() {
        return Err(Error::Dimension(format!(
            "meshes have {} and {} vertices",
            mesh_key.len(),
            mesh_inter.len()
        )));
    }
    Ok((0..mesh_inter.len())
        .filter(|&i| mesh_key.visible[i] && mesh_inter.visible[i])
        .map(|i| {
            let k = mesh_key.projected[i];
            let p = mesh_inter.projected[i];
            Anchor {
                position: p,
                displacement: [k[0] - p[0], k[1] - p[1]],
            }
        })
        .collect())
}

pub fn coarse_flow<T: Scalar>(
    mesh_key: &Mesh<T>,
    mesh_inter: &Mesh<T>,
    size: (u32, u32),
) -> Result<FlowField<T>> {
    interpolate_anchors(&flow_anchors(mesh_key, mesh_inter)?, size)
}

/// Piecewise-linear interpolation of scattered anchors onto the pixel grid.
/// Of several anchors at the same position, the first wins.
pub fn interpolate_anchors<T: Scalar>(anchors: &[Anchor<T>], size: (u32, u32)) -> Result<FlowField<T>> {
    let (width, height) = size;
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    // Triangulation vertex index -> anchor index.
    let mut owner: Vec<usize> = Vec::with_capacity(anchors.len());
    for (i, a) in anchors.iter().enumerate() {
        let p = Point2::new(a.position[0].as_f64(), a.position[1].as_f64());
        let handle = tri
            .insert(p)
            .map_err(|e| Error::Degenerate(format!("anchor {i} at {:?}: {e:?}", a.position)))?;
        if handle.index() == owner.len() {
            owner.push(i);
        }
    }
    if tri.num_inner_faces() == 0 {
        return Err(Error::Degenerate(format!(
            "{} distinct anchors are collinear or too few to triangulate",
            owner.len()
        )));
    }

    let mut field = FlowField::zeros(width, height);
    let mut filled = vec![false; field.data.len()];
    let tol = -T::epsilon() * T::of(64.0);
    for face in tri.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| &anchors[owner[v.fix().index()]]);
        let (pa, pb, pc) = (a.position, b.position, c.position);
        let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        if det == T::zero() {
            continue;
        }
        let lo_x = pa[0].min(pb[0]).min(pc[0]).ceil().max(T::zero());
        let hi_x = pa[0].max(pb[0]).max(pc[0]).floor();
        let lo_y = pa[1].min(pb[1]).min(pc[1]).ceil().max(T::zero());
        let hi_y = pa[1].max(pb[1]).max(pc[1]).floor();
        if hi_x < T::zero() || hi_y < T::zero() || width == 0 || height == 0 {
            continue;
        }
        let x0 = lo_x.to_usize().unwrap_or(usize::MAX);
        let y0 = lo_y.to_usize().unwrap_or(usize::MAX);
        let x1 = hi_x.to_usize().unwrap_or(0).min(width as usize - 1);
        let y1 = hi_y.to_usize().unwrap_or(0).min(height as usize - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let idx = y * width as usize + x;
                if filled[idx] {
                    continue;
                }
                let (px, py) = (T::of(x as f64), T::of(y as f64));
                let wb = ((px - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (py - pa[1])) / det;
                let wc = ((pb[0] - pa[0]) * (py - pa[1]) - (px - pa[0]) * (pb[1] - pa[1])) / det;
                let wa = T::one() - wb - wc;
                if wa < tol || wb < tol || wc < tol {
                    continue;
                }
                let d = [
                    wa * a.displacement[0] + wb * b.displacement[0] + wc * c.displacement[0],
                    wa * a.displacement[1] + wb * b.displacement[1] + wc * c.displacement[1],
                ];
                field.data[idx] = d;
                filled[idx] = true;
            }
        }
    }
    for (o, f) in field.outside.iter_mut().zip(&filled) {
        *o = !f;
    }
    Ok(field)
}

/// Middlebury `.flo` tag, the float 202021.25 in little-endian.
pub const FLO_MAGIC: [u8; 4] = *b"PIEH";

/// Writes the field as `.flo`: magic, u32 width, u32 height, then row-major
/// little-endian f32 (dx, dy) pairs.
pub fn write_flo<T: Scalar, W: Write>(flow: &FlowField<T>, mut w: W) -> io::Result<()> {
    w.write_all(&FLO_MAGIC)?;
    w.write_all(&flow.width.to_le_bytes())?;
    w.write_all(&flow.height.to_le_bytes())?;
    let mut buf = Vec::with_capacity(flow.data.len() * 8);
    for d in &flow.data {
        buf.extend_from_slice(&(d[0].as_f64() as f32).to_le_bytes());
        buf.extend_from_slice(&(d[1].as_f64() as f32).to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_flo<R: Read>(mut r: R) -> Result<FlowField<f32>> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head)?;
    if head[..4] != FLO_MAGIC {
        return Err(Error::Decode("bad .flo magic".into()));
    }
    let width = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
    let height = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes"));
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let n = width as usize * height as usize;
    if body.len() != n * 8 {
        return Err(Error::Decode(format!(
            "expected {} flow bytes, found {}",
            n * 8,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| {
            [
                f32::from_le_bytes(c[..4].try_into().expect("4 bytes")),
                f32::from_le_bytes(c[4..].try_into().expect("4 bytes")),
            ]
        })
        .collect();
    Ok(FlowField {
        width,
        height,
        data,
        outside: vec![false; n],
    })
}
