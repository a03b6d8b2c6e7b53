use std::io::Cursor;

use image::{ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::face_model::{EyeMap, Mesh};
use crate::motion::flow::FlowField;
use crate::scalar::Scalar;

/// 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreviewFrame {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl PreviewFrame {
    pub fn blank(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0; width as usize * height as usize * 3],
        }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> Self {
        let mut out = Self::blank(width, height);
        for y in 0..height {
            for x in 0..width {
                out.set(x, y, f(x, y));
            }
        }
        out
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Decodes any image format the `image` crate recognizes (PNG here).
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory(bytes).map_err(|e| Error::Image(e.to_string()))?;
        let rgb = img.to_rgb8();
        Ok(Self {
            width: rgb.width(),
            height: rgb.height(),
            data: rgb.into_raw(),
        })
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let img = RgbImage::from_raw(self.width, self.height, self.data.clone())
            .ok_or_else(|| Error::Image("raster size does not match dimensions".into()))?;
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png)
            .map_err(|e| Error::Image(e.to_string()))?;
        Ok(out.into_inner())
    }
}

/// Back-warps `key` by `flow`: each output pixel bilinearly samples the key
/// image at its own position plus its displacement, clamped to the border.
pub fn warp_frame<T: Scalar>(key: &PreviewFrame, flow: &FlowField<T>) -> Result<PreviewFrame> {
    if key.width != flow.width || key.height != flow.height {
        return Err(Error::Dimension(format!(
            "image is {}x{}, flow is {}x{}",
            key.width, key.height, flow.width, flow.height
        )));
    }
    let mut out = PreviewFrame::blank(key.width, key.height);
    if key.width == 0 || key.height == 0 {
        return Ok(out);
    }
    let max_x = T::of(f64::from(key.width - 1));
    let max_y = T::of(f64::from(key.height - 1));
    for y in 0..key.height {
        for x in 0..key.width {
            let d = flow.get(x, y);
            let sx = (T::of(f64::from(x)) + d[0]).max(T::zero()).min(max_x);
            let sy = (T::of(f64::from(y)) + d[1]).max(T::zero()).min(max_y);
            // NaN displacements fall back to the pixel itself.
            let (sx, sy) = if sx.is_finite() && sy.is_finite() {
                (sx, sy)
            } else {
                (T::of(f64::from(x)), T::of(f64::from(y)))
            };
            let x0 = sx.floor();
            let y0 = sy.floor();
            let ax = sx - x0;
            let ay = sy - y0;
            let x0 = x0.to_u32().unwrap_or(0);
            let y0 = y0.to_u32().unwrap_or(0);
            let x1 = (x0 + 1).min(key.width - 1);
            let y1 = (y0 + 1).min(key.height - 1);
            let (p00, p10, p01, p11) = (key.get(x0, y0), key.get(x1, y0), key.get(x0, y1), key.get(x1, y1));
            let mut rgb = [0u8; 3];
            for c in 0..3 {
                let v = (T::one() - ay)
                    * ((T::one() - ax) * T::of(f64::from(p00[c])) + ax * T::of(f64::from(p10[c])))
                    + ay * ((T::one() - ax) * T::of(f64::from(p01[c])) + ax * T::of(f64::from(p11[c])));
                rgb[c] = v.round().max(T::zero()).min(T::of(255.0)).to_u8().unwrap_or(0);
            }
            out.set(x, y, rgb);
        }
    }
    Ok(out)
}

pub const EDGE_COLOR: [u8; 3] = [255, 255, 255];
pub const EYE_COLOR: [u8; 3] = [255, 48, 48];

/// Draws the edges of every triangle whose vertices are all visible, then
/// overlays the eye map. Lines use integer Bresenham between rounded
/// endpoints, clipped to the image.
pub fn render_wireframe<T: Scalar>(
    mesh: &Mesh<T>,
    triangles: &[[u32; 3]],
    eyes: &EyeMap,
    size: (u32, u32),
) -> PreviewFrame {
    let (w, h) = size;
    let mut out = PreviewFrame::blank(w, h);
    let visible = |i: u32| mesh.visible.get(i as usize).copied().unwrap_or(false);
    for t in triangles {
        if !t.iter().all(|&i| visible(i)) {
            continue;
        }
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let pa = mesh.projected[a as usize];
            let pb = mesh.projected[b as usize];
            draw_line(
                &mut out,
                [pa[0].as_f64(), pa[1].as_f64()],
                [pb[0].as_f64(), pb[1].as_f64()],
            );
        }
    }
    if eyes.width == w && eyes.height == h {
        for y in 0..h {
            for x in 0..w {
                if eyes.get(x, y) {
                    out.set(x, y, EYE_COLOR);
                }
            }
        }
    }
    out
}

/// Liang-Barsky clip of segment `a`-`b` to `[xmin, xmax] x [ymin, ymax]`.
fn clip(a: [f64; 2], b: [f64; 2], xmax: f64, ymax: f64) -> Option<([f64; 2], [f64; 2])> {
    let (xmin, ymin) = (-1.0, -1.0);
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d[0], a[0] - xmin),
        (d[0], xmax - a[0]),
        (-d[1], a[1] - ymin),
        (d[1], ymax - a[1]),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then(|| {
        (
            [a[0] + t0 * d[0], a[1] + t0 * d[1]],
            [a[0] + t1 * d[0], a[1] + t1 * d[1]],
        )
    })
}

fn draw_line(img: &mut PreviewFrame, a: [f64; 2], b: [f64; 2]) {
    if !(a.iter().chain(b.iter()).all(|v| v.is_finite())) {
        return;
    }
    let Some((a, b)) = clip(a, b, f64::from(img.width), f64::from(img.height)) else {
        return;
    };
    let (mut x0, mut y0) = (a[0].round() as i64, a[1].round() as i64);
    let (x1, y1) = (b[0].round() as i64, b[1].round() as i64);
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if x0 >= 0 && y0 >= 0 && x0 < i64::from(img.width) && y0 < i64::from(img.height) {
            img.set(x0 as u32, y0 as u32, EDGE_COLOR);
        }
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}
