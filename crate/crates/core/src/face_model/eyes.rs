//! Eye-blink recalibration of projected eye regions.
//!
//! Per eye, the topmost (`P_hp`, smallest row) and bottommost (`P_lp`,
//! largest row) projected vertices bound the lid opening. The blink
//! intensity `e` in `[0, 5]` moves the top to
//! `P_lp - (5 - e) / 5 * |P_lp - P_hp|` and every eye vertex is rescaled
//! linearly between the new top and `P_lp`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::face_model::model::MorphableModel;
use crate::face_model::projection::Mesh;
use crate::scalar::Scalar;
use crate::semantics::EYE_MAX;

/// Recalibrated top row for one eye.
pub fn recalibrated_top<T: Scalar>(p_hp: T, p_lp: T, intensity: T) -> T {
    let five = T::of(EYE_MAX);
    p_lp - (five - intensity) / five * (p_lp - p_hp).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EyeRegion<T: Scalar = f64> {
    /// Visible model vertices of this eye.
    pub indices: Vec<u32>,
    pub p_hp: [T; 2],
    pub p_lp: [T; 2],
    /// `P_hp` after recalibration (same column, new row).
    pub p_hp_recal: [T; 2],
    /// Recalibrated positions of `indices`, in the same order.
    pub points: Vec<[T; 2]>,
}

impl<T: Scalar> EyeRegion<T> {
    /// Vertical lid opening after recalibration.
    pub fn gap(&self) -> T {
        (self.p_lp[1] - self.p_hp_recal[1]).abs()
    }

    /// Convex outline of the recalibrated eye, counter-clockwise in image
    /// coordinates. Empty when the outline has no area.
    pub fn polygon(&self) -> Vec<[T; 2]> {
        let hull = convex_hull(&self.points);
        if polygon_area(&hull).abs() <= T::epsilon() {
            return Vec::new();
        }
        hull
    }
}

/// Binary raster of the recalibrated eye polygons, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EyeMap {
    pub width: u32,
    pub height: u32,
    pub mask: Vec<bool>,
}

impl EyeMap {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            mask: vec![false; width as usize * height as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.mask[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Sets every pixel whose center lies inside the convex polygon.
    fn fill_convex<T: Scalar>(&mut self, poly: &[[T; 2]]) {
        if poly.len() < 3 || self.width == 0 || self.height == 0 {
            return;
        }
        let (mut x0, mut y0) = (T::infinity(), T::infinity());
        let (mut x1, mut y1) = (T::neg_infinity(), T::neg_infinity());
        for p in poly {
            x0 = x0.min(p[0]);
            y0 = y0.min(p[1]);
            x1 = x1.max(p[0]);
            y1 = y1.max(p[1]);
        }
        let w = T::of(f64::from(self.width - 1));
        let h = T::of(f64::from(self.height - 1));
        let clamp = |v: T, hi: T| v.max(T::zero()).min(hi).to_usize().unwrap_or(0);
        if x1 < T::zero() || y1 < T::zero() || x0 > w || y0 > h {
            return;
        }
        for y in clamp(y0.ceil(), h)..=clamp(y1.floor(), h) {
            for x in clamp(x0.ceil(), w)..=clamp(x1.floor(), w) {
                let p = [T::of(x as f64), T::of(y as f64)];
                if inside_convex(poly, p) {
                    self.mask[y * self.width as usize + x] = true;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EyeRecalibration<T: Scalar = f64> {
    pub left: Option<EyeRegion<T>>,
    pub right: Option<EyeRegion<T>>,
    pub map: EyeMap,
    /// The input mesh with its eye vertices moved to their recalibrated rows.
    pub mesh: Mesh<T>,
}

fn recalibrate_region<T: Scalar>(
    mesh: &Mesh<T>,
    region: &[u32],
    intensity: T,
) -> Result<Option<EyeRegion<T>>> {
    let mut indices = Vec::with_capacity(region.len());
    for &i in region {
        let iu = i as usize;
        if iu >= mesh.len() {
            return Err(Error::Dimension(format!(
                "eye vertex {i} outside mesh of {}",
                mesh.len()
            )));
        }
        if mesh.visible[iu] {
            indices.push(i);
        }
    }
    let Some(&first) = indices.first() else {
        return Ok(None);
    };
    let mut hp = mesh.projected[first as usize];
    let mut lp = hp;
    for &i in &indices[1..] {
        let p = mesh.projected[i as usize];
        if p[1] < hp[1] {
            hp = p;
        }
        if p[1] > lp[1] {
            lp = p;
        }
    }
    let top = recalibrated_top(hp[1], lp[1], intensity);
    let five = T::of(EYE_MAX);
    let scale = (five - intensity) / five;
    let points = indices
        .iter()
        .map(|&i| {
            let p = mesh.projected[i as usize];
            [p[0], lp[1] - (lp[1] - p[1]) * scale]
        })
        .collect();
    Ok(Some(EyeRegion {
        indices,
        p_hp: hp,
        p_lp: lp,
        p_hp_recal: [hp[0], top],
        points,
    }))
}

/// Recalibrates both eye regions of `mesh` for blink `intensity` and
/// rasterizes the result at the mesh's image size `(width, height)`.
pub fn recalibrate_eyes<T: Scalar>(
    mesh: &Mesh<T>,
    model: &MorphableModel<T>,
    intensity: T,
    size: (u32, u32),
) -> Result<EyeRecalibration<T>> {
    if !(intensity >= T::zero() && intensity <= T::of(EYE_MAX)) {
        return Err(Error::Range(format!(
            "blink intensity {intensity} outside [0, 5]"
        )));
    }
    let left = recalibrate_region(mesh, &model.eye_left, intensity)?;
    let right = recalibrate_region(mesh, &model.eye_right, intensity)?;
    let mut map = EyeMap::empty(size.0, size.1);
    let mut out = mesh.clone();
    for region in [&left, &right].into_iter().flatten() {
        map.fill_convex(&region.polygon());
        for (i, p) in region.indices.iter().zip(&region.points) {
            out.projected[*i as usize] = *p;
        }
    }
    Ok(EyeRecalibration {
        left,
        right,
        map,
        mesh: out,
    })
}

fn cross<T: Scalar>(o: [T; 2], a: [T; 2], b: [T; 2]) -> T {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain.
pub fn convex_hull<T: Scalar>(points: &[[T; 2]]) -> Vec<[T; 2]> {
    let mut pts: Vec<[T; 2]> = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a[1].partial_cmp(&b[1]).unwrap_or(std::cmp::Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[T; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

pub fn polygon_area<T: Scalar>(poly: &[[T; 2]]) -> T {
    if poly.len() < 3 {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a[0] * b[1] - a[1] * b[0];
    }
    acc / T::of(2.0)
}

fn inside_convex<T: Scalar>(poly: &[[T; 2]], p: [T; 2]) -> bool {
    (0..poly.len()).all(|i| cross(poly[i], poly[(i + 1) % poly.len()], p) >= T::zero())
}
