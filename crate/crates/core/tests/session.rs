mod common;

use common::*;
use ifvc::interact::{EditMode, EditOp, FrameRange, KeySource, Session, Target};
use ifvc::synth::portrait;
use ifvc::{Error, MorphableModel, PreviewFrame};

fn golden_session() -> Session {
    Session::open(data_path(GOLDEN_STREAM)).unwrap()
}

fn op(frames: FrameRange, target: Target, mode: EditMode, value: f64) -> EditOp {
    EditOp::new(frames, target, mode, value)
}

#[test]
fn open_decodes_once_and_deterministically() {
    let a = golden_session();
    assert_eq!(a.frame_count(), a.stream().header.frame_count as usize);
    assert!(a.edits().is_empty());
    assert_eq!(a.current(), a.decoded());
    assert_eq!(golden_session().decoded(), a.decoded());

    let bytes = golden_bytes();
    let err = Session::from_bytes(&bytes[..bytes.len() / 2]).unwrap_err();
    assert!(matches!(err, Error::Container(_)), "{err}");
}

#[test]
fn edits_replay_from_the_log() {
    let mut s = golden_session();
    s.apply_edit(op(
        FrameRange::Range(2, 6),
        Target::Mouth(0),
        EditMode::Scale,
        0.0,
    ))
    .unwrap();
    s.apply_edit(op(FrameRange::All, Target::Eye, EditMode::Offset, 3.0))
        .unwrap();
    s.apply_edit(op(FrameRange::Range(0, 0), Target::Trans(2), EditMode::Set, 4.0))
        .unwrap();
    for l in 2..=6 {
        assert_eq!(s.frame(l).unwrap().mouth[0], 0.0);
    }
    assert!(s.current().frames.iter().all(|f| (0.0..=5.0).contains(&f.eye)));
    assert_eq!(s.frame(0).unwrap().trans[2], 4.0);

    // Replaying the log from scratch lands on the same semantics.
    let mut replayed = s.decoded().clone();
    for e in s.edits() {
        e.apply(&mut replayed).unwrap();
    }
    assert_eq!(&replayed, s.current());

    // Removing the middle edit equals never having applied it.
    let mut other = golden_session();
    other.apply_edit(s.edits()[0]).unwrap();
    other.apply_edit(s.edits()[2]).unwrap();
    let removed = s.remove_edit(1).unwrap();
    assert_eq!(removed.target, Target::Eye);
    assert_eq!(s.current(), other.current());
    assert!(matches!(s.remove_edit(5), Err(Error::Range(_))));

    s.clear_edits();
    assert_eq!(s.current(), s.decoded());
}

#[test]
fn bad_range_is_rejected() {
    let mut s = golden_session();
    let n = s.frame_count();
    let err = s.apply_edit(op(FrameRange::Range(n - 1, n), Target::Loc, EditMode::Set, 0.0));
    assert!(matches!(err, Err(Error::Range(_))));
    assert!(s.edits().is_empty());
    assert!(matches!(s.frame(n), Err(Error::Range(_))));
}

#[test]
fn closed_eyes_in_every_preview() {
    let model = MorphableModel::synthetic();
    let mut s = golden_session();
    s.apply_edit(op(FrameRange::All, Target::Eye, EditMode::Set, 5.0))
        .unwrap();
    for l in (0..s.frame_count()).step_by(7) {
        let p = s.preview(l, &model).unwrap();
        for eye in [&p.inter.eyes.left, &p.inter.eyes.right] {
            assert!(eye.as_ref().unwrap().gap().abs() < 1e-9, "frame {l}");
        }
        assert_eq!(p.inter.eyes.map.count(), 0);
    }
}

#[test]
fn key_substitution() {
    let model = MorphableModel::synthetic();
    let mut s = golden_session();
    let original: Vec<PreviewFrame> = [3, 17]
        .iter()
        .map(|&l| s.preview(l, &model).unwrap().frame)
        .collect();

    let same = s.key_image().unwrap();
    let key = s.stream().key_semantics.clone();
    s.substitute_key(same, key.clone()).unwrap();
    assert!(matches!(s.key_source(), KeySource::Virtual { .. }));
    for (i, &l) in [3, 17].iter().enumerate() {
        assert_eq!(s.preview(l, &model).unwrap().frame, original[i]);
    }

    // A different character: new identity, same motion.
    let mut character = key.clone();
    character.id_coeffs = vec![1.0, -0.5, 0.3, 0.0, 0.2, 0.0, 0.0, 0.4];
    let face = PreviewFrame::from_fn(32, 32, |x, y| [(x * 8) as u8, (y * 8) as u8, 128]);
    let before = s.frame_geometry(17, &model).unwrap();
    s.substitute_key(face.clone(), character.clone()).unwrap();
    let after = s.frame_geometry(17, &model).unwrap();
    assert_eq!(before.pose, after.pose);
    assert_ne!(before.mesh().projected, after.mesh().projected);
    let p = s.preview(17, &model).unwrap();
    assert_eq!(p.inter.pose, before.pose);

    let mut second = character.clone();
    second.id_coeffs[0] = -1.0;
    s.substitute_key(face, second).unwrap();
    assert_eq!(s.frame_geometry(17, &model).unwrap().pose, before.pose);
    // The semantic stream itself is untouched.
    assert_eq!(s.current(), s.decoded());
    assert_eq!(s.stream().to_bytes(), golden_bytes());

    let wrong = portrait(16, 32);
    assert!(matches!(
        s.substitute_key(wrong, key.clone()),
        Err(Error::Dimension(_))
    ));
    s.restore_key();
    assert_eq!(s.preview(3, &model).unwrap().frame, original[0]);
}

#[test]
fn export_without_edits_is_idempotent() {
    let s = golden_session();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.ifvc");
    s.export(&path).unwrap();
    let reopened = Session::open(&path).unwrap();
    assert_eq!(reopened.decoded(), s.decoded());
    for (a, b) in reopened.decoded().frames.iter().zip(&s.decoded().frames) {
        assert_eq!(a.flatten().map(f64::to_bits), b.flatten().map(f64::to_bits));
    }
}

#[test]
fn export_after_edit_keeps_the_edit() {
    let mut s = golden_session();
    s.apply_edit(op(
        FrameRange::Range(10, 20),
        Target::Rot(1),
        EditMode::Offset,
        0.2,
    ))
    .unwrap();
    let exported = Session::from_stream(s.export_stream().unwrap()).unwrap();
    let steps = *s.stream().header.quant.steps();
    for (l, (e, want)) in exported
        .decoded()
        .frames
        .iter()
        .zip(&s.current().frames)
        .enumerate()
    {
        for (c, step) in steps.iter().enumerate() {
            assert!(
                (e.get(c) - want.get(c)).abs() <= step / 2.0 + 1e-12,
                "frame {l} component {c}"
            );
        }
    }
    assert_eq!(exported.stream().key_payload, s.stream().key_payload);
    assert_eq!(exported.stream().header.quant, s.stream().header.quant);
}

#[test]
fn export_to_unwritable_path_changes_nothing() {
    let mut s = golden_session();
    s.apply_edit(op(FrameRange::All, Target::Loc, EditMode::Offset, 0.1))
        .unwrap();
    let (current, edits) = (s.current().clone(), s.edits().to_vec());
    let err = s.export("/nonexistent/dir/out.ifvc").unwrap_err();
    assert!(matches!(err, Error::Io(_)));
    assert_eq!(s.current(), &current);
    assert_eq!(s.edits(), edits.as_slice());
}
