//! Deterministic demo content for the synthetic face model: a head-turn and
//! blink trace and a procedural portrait roughly aligned with the model's
//! default framing.

use std::f64::consts::TAU;

use crate::motion::PreviewFrame;
use crate::semantics::{KeyFrameSemantics, SemanticTrace, SemanticVector, EYE_MAX};

/// Camera-space depth of the synthetic head, split into `trans[2]` and `loc`.
pub const HEAD_DEPTH: f64 = 2.5;
pub const HEAD_LOC: f64 = 0.5;

/// Front-facing, eyes open, at the default depth.
pub fn rest_pose() -> SemanticVector {
    let mut v = SemanticVector::zero();
    v.trans[2] = HEAD_DEPTH;
    v.loc = HEAD_LOC;
    v
}

/// Knobs for [`talking_head`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalkingHead {
    pub frames: usize,
    pub fps: f64,
    /// Peak yaw in radians.
    pub yaw_amplitude: f64,
    pub yaw_period_s: f64,
    pub blink_interval_s: f64,
    /// Time from open to closed; reopening takes as long.
    pub blink_half_s: f64,
    pub mouth_amplitude: f64,
}

impl Default for TalkingHead {
    fn default() -> Self {
        Self {
            frames: 250,
            fps: 25.0,
            yaw_amplitude: 0.3,
            yaw_period_s: 4.0,
            blink_interval_s: 2.0,
            blink_half_s: 0.12,
            mouth_amplitude: 0.4,
        }
    }
}

/// Sinusoidal yaw, periodic blinks and a little mouth movement.
pub fn talking_head(cfg: &TalkingHead) -> SemanticTrace {
    let frames = (0..cfg.frames)
        .map(|i| {
            let t = i as f64 / cfg.fps;
            let mut v = rest_pose();
            v.rot[1] = cfg.yaw_amplitude * (TAU * t / cfg.yaw_period_s).sin();
            v.rot[0] = 0.05 * (TAU * t / 3.1).sin();
            // Blinks are centered on multiples of the interval after the first.
            let phase = (t % cfg.blink_interval_s) - cfg.blink_interval_s / 2.0;
            v.eye = EYE_MAX * (1.0 - phase.abs() / cfg.blink_half_s).max(0.0);
            for (k, m) in v.mouth.iter_mut().enumerate() {
                let f = 1.3 + 0.37 * k as f64;
                *m = cfg.mouth_amplitude / (k + 1) as f64 * (TAU * f * t + k as f64).sin();
            }
            v
        })
        .collect();
    SemanticTrace {
        fps: cfg.fps,
        key: KeyFrameSemantics::neutral(rest_pose()),
        frames,
    }
}

/// A flat-shaded face on a striped background. Stripes and features make
/// warps easy to see.
pub fn portrait(width: u32, height: u32) -> PreviewFrame {
    let (w, h) = (f64::from(width), f64::from(height));
    // Pixels per model unit at the default camera and head depth.
    let s = 1.2 * w / (HEAD_DEPTH + HEAD_LOC);
    let (cx, cy) = (w / 2.0, h / 2.0);
    let ellipse = |x: f64, y: f64, ex: f64, ey: f64, rx: f64, ry: f64| {
        let dx = (x - (cx + s * ex)) / (s * rx);
        let dy = (y - (cy + s * ey)) / (s * ry);
        dx * dx + dy * dy <= 1.0
    };
    PreviewFrame::from_fn(width, height, |px, py| {
        let (x, y) = (f64::from(px), f64::from(py));
        if ellipse(x, y, -0.35, -0.22, 0.12, 0.07) || ellipse(x, y, 0.35, -0.22, 0.12, 0.07) {
            return [40, 30, 20];
        }
        if ellipse(x, y, 0.0, 0.55, 0.25, 0.07) {
            return [170, 40, 50];
        }
        if ellipse(x, y, 0.0, 0.0, 0.8, 1.0) {
            let shade = (200.0 - 30.0 * ((y - cy) / (s * 1.0))).clamp(0.0, 255.0) as u8;
            let band = if (py / 6) % 2 == 0 { 0 } else { 12 };
            return [
                shade.saturating_sub(band),
                (shade as f64 * 0.75) as u8,
                (shade as f64 * 0.6) as u8,
            ];
        }
        let stripe = ((px + py) / 8) % 2 == 0;
        if stripe {
            [30, 50, 90]
        } else {
            [20, 30, 60]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_trace_shape() {
        let t = talking_head(&TalkingHead::default());
        assert_eq!(t.frames.len(), 250);
        t.validate().unwrap();
        let max_yaw = t.frames.iter().map(|f| f.rot[1].abs()).fold(0.0, f64::max);
        assert!(max_yaw > 0.29 && max_yaw <= 0.3);
        // Frame 25 is the middle of the first blink.
        assert_eq!(t.frames[25].eye, EYE_MAX);
        assert_eq!(t.frames[0].eye, 0.0);
        let closed = t.frames.iter().filter(|f| f.eye == EYE_MAX).count();
        assert_eq!(closed, 5);
    }

    #[test]
    fn portrait_is_deterministic() {
        let a = portrait(64, 48);
        assert_eq!(a, portrait(64, 48));
        assert_eq!((a.width, a.height), (64, 48));
        assert_ne!(a.get(32, 24), a.get(0, 0));
    }
}
