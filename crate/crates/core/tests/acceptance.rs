//! Acceptance gates. Runs without the libtest harness so every gate prints
//! one `PASS`/`FAIL` line whether or not output capture is on; the process
//! exits non-zero if any gate fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use ifvc::entropy::{decode_block, eg0_encode, encode_block, Bits, PpmModel};
use ifvc::face_model::{project, recalibrated_top, CameraIntrinsics, RigidPose};
use ifvc::interact::{EditMode, EditOp, FrameRange, Session, Target};
use ifvc::motion::{interpolate_anchors, warp_frame, Anchor, FlowField};
use ifvc::stream::{decode_stream, encode_stream_traced, inspect_stream};
use ifvc::synth::{portrait, talking_head, TalkingHead};
use ifvc::{CodedStream, EncodeParams, Error, PreviewFrame, SemanticVector};

type Outcome = Result<String, String>;
type Gate = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64, what: &str) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s as f64, || {
        format!("{what} took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn entropy_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1f00);
    let mut frames_total = 0usize;
    for seq in 0..1000 {
        let len = rng.random_range(1..=500);
        let mut enc = PpmModel::default();
        let mut dec = PpmModel::default();
        for f in 0..len {
            let block = random_block(&mut rng);
            let (bit_len, payload) = encode_block(&block, &mut enc);
            let back = decode_block(&payload, bit_len, &mut dec)
                .map_err(|e| format!("sequence {seq} frame {f}: {e}"))?;
            check(back == block, || {
                format!("sequence {seq} frame {f}: {back:?} != {block:?}")
            })?;
        }
        check(enc == dec, || format!("sequence {seq}: model states diverged"))?;
        frames_total += len;
    }
    within(start.elapsed(), 60, "1000 sequences")?;
    Ok(format!(
        "1000 sequences, {frames_total} blocks, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn closed_loop() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x100b);
    let params = EncodeParams::default();
    let steps = *params.quant.steps();
    let mut worst = 0.0f64;
    for t in 0..100 {
        let trace = random_trace(&mut rng, 250);
        let (stream, recon) = encode_stream_traced(&trace, b"key", &params).map_err(|e| e.to_string())?;
        let decoded = decode_stream(&stream).map_err(|e| e.to_string())?;
        for (l, ((r, d), o)) in recon.iter().zip(&decoded.frames).zip(&trace.frames).enumerate() {
            for (c, step) in steps.iter().enumerate() {
                check(r.get(c).to_bits() == d.get(c).to_bits(), || {
                    format!(
                        "trace {t} frame {l} component {c}: encoder {} decoder {}",
                        r.get(c),
                        d.get(c)
                    )
                })?;
                let ratio = (d.get(c) - o.get(c)).abs() / (step / 2.0);
                worst = worst.max(ratio);
                check(ratio <= 1.0 + 1e-9, || {
                    format!("trace {t} frame {l} component {c}: error {ratio:.6} half-steps")
                })?;
            }
        }
    }
    Ok(format!(
        "100 traces x 250 frames, worst error {worst:.4} half-steps"
    ))
}

fn exp_golomb_vectors() -> Outcome {
    // n + 1 in binary, preceded by one fewer zero than it has digits.
    let table = [
        "1",
        "010",
        "011",
        "00100",
        "00101",
        "00110",
        "00111",
        "0001000",
        "0001001",
        "0001010",
        "0001011",
        "0001100",
        "0001101",
        "0001110",
        "0001111",
        "000010000",
    ];
    for (n, want) in table.iter().enumerate() {
        let mut bits = Bits::new();
        eg0_encode(n as u32, &mut bits);
        check(bits.to_string() == *want, || {
            format!("{n} -> {bits}, want {want}")
        })?;
    }
    Ok("16 codewords".into())
}

fn rotation_projection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x207);
    let (mut orth, mut det) = (0.0f64, 0.0f64);
    for i in 0..100_000 {
        let mut v = SemanticVector::zero();
        for r in v.rot.iter_mut() {
            *r = rng.random_range(-PI..=PI);
        }
        let pose = RigidPose::from_semantics(&v);
        orth = orth.max(pose.orthogonality_error());
        det = det.max((pose.determinant() - 1.0).abs());
        check(orth <= 1e-12 && det <= 1e-12, || format!("pose {i} {:?}", v.rot))?;
    }
    let cam = CameraIntrinsics::new(1.0, [0.0, 0.0], 1, 1).map_err(|e| e.to_string())?;
    let mut v = SemanticVector::zero();
    v.trans = [0.0, 0.0, 2.0];
    let mesh = project(
        &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        &RigidPose::from_semantics(&v),
        &cam,
    )
    .map_err(|e| e.to_string())?;
    let want: [[f64; 2]; 2] = [[0.0, 0.0], [0.5, 0.0]];
    for (got, want) in mesh.projected.iter().zip(want) {
        check(
            (got[0] - want[0]).abs() <= 1e-12 && (got[1] - want[1]).abs() <= 1e-12,
            || format!("projected {got:?}, want {want:?}"),
        )?;
    }
    Ok(format!(
        "1e5 poses, max |RtR-I| {orth:.1e}, max |det-1| {det:.1e}; pinhole examples exact"
    ))
}

fn eye_endpoints() -> Outcome {
    let (hp, lp) = (10.0f64, 20.0f64);
    for (e, top, gap) in [(5.0, 20.0, 0.0), (0.0, 10.0, 10.0), (2.5, 15.0, 5.0)] {
        let got = recalibrated_top(hp, lp, e);
        check(
            (got - top).abs() <= 1e-12 && ((lp - got) - gap).abs() <= 1e-12,
            || format!("intensity {e}: top {got}, want {top}"),
        )?;
    }
    Ok("intensities 5, 0, 2.5".into())
}

fn flow_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf10);
    let (w, h) = (64u32, 48u32);

    // Anchors on grid nodes carry their own displacement exactly.
    let mut anchors: Vec<Anchor> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    while anchors.len() < 40 {
        let p = (rng.random_range(0..w), rng.random_range(0..h));
        if seen.insert(p) {
            anchors.push(Anchor {
                position: [f64::from(p.0), f64::from(p.1)],
                displacement: [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)],
            });
        }
    }
    let field = interpolate_anchors(&anchors, (w, h)).map_err(|e| e.to_string())?;
    let mut anchor_err = 0.0f64;
    for a in &anchors {
        let got = field.get(a.position[0] as u32, a.position[1] as u32);
        anchor_err = anchor_err.max(
            (got[0] - a.displacement[0])
                .abs()
                .max((got[1] - a.displacement[1]).abs()),
        );
    }
    check(anchor_err <= 1e-9, || format!("anchor error {anchor_err:e}"))?;

    // An affine field is reproduced everywhere inside the hull.
    let (a, b) = ([[0.03, -0.02], [0.015, 0.04]], [1.5, -2.25]);
    let affine = |p: [f64; 2]| {
        [
            a[0][0] * p[0] + a[0][1] * p[1] + b[0],
            a[1][0] * p[0] + a[1][1] * p[1] + b[1],
        ]
    };
    let scattered: Vec<Anchor> = (0..60)
        .map(|_| {
            let p = [rng.random_range(-4.0..68.0), rng.random_range(-4.0..52.0)];
            Anchor {
                position: p,
                displacement: affine(p),
            }
        })
        .collect();
    let field = interpolate_anchors(&scattered, (w, h)).map_err(|e| e.to_string())?;
    let mut affine_err = 0.0f64;
    let mut inside = 0;
    for y in 0..h {
        for x in 0..w {
            if field.is_outside(x, y) {
                continue;
            }
            inside += 1;
            let want = affine([f64::from(x), f64::from(y)]);
            let got = field.get(x, y);
            affine_err = affine_err.max((got[0] - want[0]).abs().max((got[1] - want[1]).abs()));
        }
    }
    check(inside > 0, || "no pixel inside the hull".into())?;
    check(affine_err <= 1e-6, || format!("affine error {affine_err:e}"))?;

    let img = PreviewFrame {
        width: w,
        height: h,
        data: (0..w * h * 3).map(|_| rng.random::<u8>()).collect(),
    };
    let warped = warp_frame(&img, &FlowField::<f64>::zeros(w, h)).map_err(|e| e.to_string())?;
    check(warped == img, || "zero flow changed the image".into())?;
    Ok(format!(
        "anchor error {anchor_err:.1e}, affine error {affine_err:.1e} over {inside} pixels, zero warp identical"
    ))
}

fn bitrate() -> Outcome {
    let start = Instant::now();
    let trace = talking_head(&TalkingHead::default());
    let key = portrait(256, 256).to_png().map_err(|e| e.to_string())?;
    let stream =
        ifvc::stream::encode_stream(&trace, &key, &EncodeParams::default()).map_err(|e| e.to_string())?;
    let bytes = stream.to_bytes();
    let reopened = CodedStream::from_bytes(&bytes).map_err(|e| e.to_string())?;
    decode_stream(&reopened).map_err(|e| e.to_string())?;
    let kbps = inspect_stream(&reopened).map_err(|e| e.to_string())?.kbps;
    within(start.elapsed(), 10, "encode")?;
    check(kbps <= 5.0, || format!("{kbps:.3} kbps"))?;
    Ok(format!(
        "{kbps:.3} kbps over {} frames, key excluded, {:.2}s",
        trace.frames.len(),
        start.elapsed().as_secs_f64()
    ))
}

fn edit_locality() -> Outcome {
    let trace = talking_head(&TalkingHead::default());
    let stream =
        ifvc::stream::encode_stream(&trace, b"key", &EncodeParams::default()).map_err(|e| e.to_string())?;
    let mut session = Session::from_stream(stream).map_err(|e| e.to_string())?;
    let before = session.current().clone();
    session
        .apply_edit(EditOp::new(
            FrameRange::Range(10, 20),
            Target::Rot(1),
            EditMode::Offset,
            0.2,
        ))
        .map_err(|e| e.to_string())?;
    let after = session.current();
    let mut changed = 0;
    for (l, (b, a)) in before.frames.iter().zip(&after.frames).enumerate() {
        for c in 0..14 {
            if c == 8 && (10..=20).contains(&l) {
                let d = a.get(c) - b.get(c);
                check((d - 0.2).abs() <= 1e-12, || format!("frame {l} yaw moved by {d}"))?;
                changed += 1;
            } else {
                check(a.get(c).to_bits() == b.get(c).to_bits(), || {
                    format!("frame {l} component {c} changed")
                })?;
            }
        }
    }
    Ok(format!(
        "{changed} values changed, {} untouched",
        250 * 14 - changed
    ))
}

fn container_fuzz() -> Outcome {
    let golden = golden_bytes();
    let frames = CodedStream::from_bytes(&golden)
        .map_err(|e| e.to_string())?
        .header
        .frame_count as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let mut structured = 0;
    for i in 0..1000 {
        let mut bytes = golden.clone();
        let pos = rng.random_range(0..bytes.len());
        bytes[pos] ^= rng.random_range(1..=255u8);
        let outcome =
            std::panic::catch_unwind(|| CodedStream::from_bytes(&bytes).and_then(|s| decode_stream(&s)))
                .map_err(|_| format!("corruption {i} at byte {pos} panicked"))?;
        match outcome {
            Err(e) => {
                check(!matches!(e, Error::Io(_)), || {
                    format!("corruption {i}: unstructured {e}")
                })?;
                structured += 1;
            }
            Ok(t) => check(t.frames.len() == frames, || {
                format!(
                    "corruption {i} at byte {pos}: decoded {} of {frames} frames",
                    t.frames.len()
                )
            })?,
        }
    }
    check(structured >= 990, || {
        format!("only {structured}/1000 corruptions detected")
    })?;
    Ok(format!("{structured}/1000 corruptions raised a structured error"))
}

fn main() {
    let gates: [Gate; 9] = [
        ("lossless entropy pipeline", entropy_round_trip),
        ("drift-free closed loop", closed_loop),
        ("exp-Golomb golden vectors", exp_golomb_vectors),
        ("rotation and projection invariants", rotation_projection),
        ("eye recalibration endpoints", eye_endpoints),
        ("flow exactness", flow_exactness),
        ("bitrate sanity", bitrate),
        ("edit locality", edit_locality),
        ("container fuzzing", container_fuzz),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, gate) in gates {
        let start = Instant::now();
        let result = std::panic::catch_unwind(gate).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
