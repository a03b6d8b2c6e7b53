//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use ifvc::entropy::SymbolBlock;
use ifvc::stream::encode_stream;
use ifvc::synth::{rest_pose, talking_head, TalkingHead};
use ifvc::{CodedStream, EncodeParams, KeyFrameSemantics, SemanticTrace, SemanticVector};
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub const GOLDEN_STREAM: &str = "golden.ifvc";
pub const GOLDEN_SIZE: u16 = 32;

/// The trace behind `tests/data/golden.ifvc`.
pub fn golden_trace() -> SemanticTrace {
    talking_head(&TalkingHead {
        frames: 50,
        ..TalkingHead::default()
    })
}

pub fn golden_params() -> EncodeParams {
    EncodeParams {
        width: GOLDEN_SIZE,
        height: GOLDEN_SIZE,
        model_id: "synthetic-100".into(),
        ..EncodeParams::default()
    }
}

pub fn golden_bytes() -> Vec<u8> {
    std::fs::read(data_path(GOLDEN_STREAM)).expect("golden stream is committed")
}

pub fn encode_golden(key_payload: &[u8]) -> CodedStream {
    encode_stream(&golden_trace(), key_payload, &golden_params()).unwrap()
}

/// Symbols mostly near zero, with occasional large and extreme magnitudes.
pub fn random_symbol<R: Rng>(rng: &mut R) -> i32 {
    match rng.random_range(0..100) {
        0..=69 => rng.random_range(-3..=3),
        70..=94 => rng.random_range(-300..=300),
        95..=98 => rng.random_range(-(1 << 24)..=(1 << 24)),
        _ => {
            if rng.random_bool(0.5) {
                i32::MAX
            } else {
                -i32::MAX
            }
        }
    }
}

pub fn random_block<R: Rng>(rng: &mut R) -> SymbolBlock {
    let mut b = [0i32; 14];
    for s in b.iter_mut() {
        *s = random_symbol(rng);
    }
    SymbolBlock(b)
}

/// Random walk from the rest pose. Blink values stray past both limits now
/// and then so clamping is exercised.
pub fn random_trace<R: Rng>(rng: &mut R, frames: usize) -> SemanticTrace {
    let mut v = rest_pose();
    v.eye = rng.random_range(0.0..5.0);
    let key = KeyFrameSemantics::neutral(v);
    let mut out = Vec::with_capacity(frames);
    for _ in 0..frames {
        let mut next = SemanticVector::zero();
        for c in 0..14 {
            let scale = match c {
                0..=5 => 0.05,
                6 => 0.6,
                7..=9 => 0.02,
                _ => 0.01,
            };
            next.set(c, v.get(c) + rng.random_range(-scale..scale));
        }
        next.eye = next.eye.clamp(0.0, 5.0);
        for r in next.rot.iter_mut() {
            *r = r.clamp(-1.0, 1.0);
        }
        v = next;
        out.push(v);
    }
    SemanticTrace::new(25.0, key, out).unwrap()
}
