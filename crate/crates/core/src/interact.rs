//! Bitstream-level editing sessions.
//!
//! A session decodes a stream once and keeps an ordered log of edits. The
//! current semantics are always the decoded trace with the log replayed on
//! top; nothing is baked in, so removing an edit is exact undo.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::face_model::{frame_geometry, CameraIntrinsics, FrameGeometry, MorphableModel};
use crate::motion::{preview_frame, Preview, PreviewFrame};
use crate::semantics::{
    KeyFrameSemantics, SemanticTrace, SemanticVector, EYE, EYE_MAX, LOC, MOUTH, ROT, TRANS,
};
use crate::stream::container::TAG_LOSSLESS;
use crate::stream::{decode_stream, encode_stream, CodedStream, EncodeParams};

/// Which semantic component an edit touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Target {
    Mouth(u8),
    Eye,
    Rot(u8),
    Trans(u8),
    Loc,
}

impl Target {
    /// Inverse of [`Target::component`].
    pub fn from_component(c: usize) -> Option<Self> {
        Some(match c {
            0..=5 => Target::Mouth(c as u8),
            EYE => Target::Eye,
            7..=9 => Target::Rot((c - ROT.start) as u8),
            10..=12 => Target::Trans((c - TRANS.start) as u8),
            LOC => Target::Loc,
            _ => return None,
        })
    }

    /// Index into the flattened semantic vector.
    pub fn component(self) -> usize {
        match self {
            Target::Mouth(i) => MOUTH.start + i as usize,
            Target::Eye => EYE,
            Target::Rot(i) => ROT.start + i as usize,
            Target::Trans(i) => TRANS.start + i as usize,
            Target::Loc => LOC,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Mouth(i) => write!(f, "mouth_{i}"),
            Target::Eye => f.write_str("eye"),
            Target::Rot(i) => write!(f, "rot_{i}"),
            Target::Trans(i) => write!(f, "trans_{i}"),
            Target::Loc => f.write_str("loc"),
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown edit target `{s}`"));
        match s {
            "eye" => return Ok(Target::Eye),
            "loc" => return Ok(Target::Loc),
            _ => {}
        }
        let (group, idx) = s.split_once('_').ok_or_else(bad)?;
        let i: u8 = idx.parse().map_err(|_| bad())?;
        match (group, i) {
            ("mouth", 0..=5) => Ok(Target::Mouth(i)),
            ("rot", 0..=2) => Ok(Target::Rot(i)),
            ("trans", 0..=2) => Ok(Target::Trans(i)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Target {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Target> for String {
    fn from(t: Target) -> Self {
        t.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditMode {
    Set,
    Offset,
    Scale,
}

/// Frames an edit applies to; `Range` is inclusive. Serialized as `"all"`
/// or `[first, last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FrameRangeRepr", into = "FrameRangeRepr")]
pub enum FrameRange {
    All,
    Range(usize, usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FrameRangeRepr {
    Word(String),
    Pair([usize; 2]),
}

impl TryFrom<FrameRangeRepr> for FrameRange {
    type Error = String;

    fn try_from(r: FrameRangeRepr) -> std::result::Result<Self, String> {
        match r {
            FrameRangeRepr::Word(w) if w == "all" => Ok(FrameRange::All),
            FrameRangeRepr::Word(w) => Err(format!("unknown frame range `{w}`")),
            FrameRangeRepr::Pair([a, b]) => Ok(FrameRange::Range(a, b)),
        }
    }
}

impl From<FrameRange> for FrameRangeRepr {
    fn from(r: FrameRange) -> Self {
        match r {
            FrameRange::All => FrameRangeRepr::Word("all".into()),
            FrameRange::Range(a, b) => FrameRangeRepr::Pair([a, b]),
        }
    }
}

impl FrameRange {
    /// Resolves to an inclusive index range over `len` frames.
    fn resolve(self, len: usize) -> Result<std::ops::RangeInclusive<usize>> {
        match self {
            FrameRange::All if len > 0 => Ok(0..=len - 1),
            FrameRange::Range(a, b) if a <= b && b < len => Ok(a..=b),
            _ => Err(Error::Range(format!("frame range {self:?} outside 0..{len}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditOp {
    pub frames: FrameRange,
    pub target: Target,
    pub mode: EditMode,
    pub value: f64,
}

impl EditOp {
    pub fn new(frames: FrameRange, target: Target, mode: EditMode, value: f64) -> Self {
        Self {
            frames,
            target,
            mode,
            value,
        }
    }

    /// Applies the edit in place. Blink results are clamped to `[0, 5]` and
    /// angles to `[-pi, pi]`.
    pub fn apply(&self, trace: &mut SemanticTrace) -> Result<()> {
        if !self.value.is_finite() {
            return Err(Error::Range(format!("edit value {} is not finite", self.value)));
        }
        let range = self.frames.resolve(trace.frames.len())?;
        let c = self.target.component();
        let mut edited = Vec::with_capacity(range.clone().count());
        for i in range.clone() {
            let old = trace.frames[i].get(c);
            let new = match self.mode {
                EditMode::Set => self.value,
                EditMode::Offset => old + self.value,
                EditMode::Scale => old * self.value,
            };
            let new = match self.target {
                Target::Eye => new.clamp(0.0, EYE_MAX),
                Target::Rot(_) => new.clamp(-std::f64::consts::PI, std::f64::consts::PI),
                _ => new,
            };
            if !new.is_finite() {
                return Err(Error::Range(format!(
                    "edit makes frame {i} `{}` non-finite",
                    self.target
                )));
            }
            edited.push(new);
        }
        for (i, v) in range.zip(edited) {
            trace.frames[i].set(c, v);
        }
        Ok(())
    }
}

/// Key image and semantics that previews are built on.
#[derive(Debug, Clone, PartialEq)]
pub enum KeySource {
    /// The stream's own key payload and key semantics.
    Stream,
    /// A substituted portrait with its own key semantics.
    Virtual {
        image: PreviewFrame,
        semantics: Box<KeyFrameSemantics>,
    },
}

#[derive(Debug, Clone)]
pub struct Session {
    stream: CodedStream,
    decoded: SemanticTrace,
    edits: Vec<EditOp>,
    current: SemanticTrace,
    key: KeySource,
}

impl Session {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_stream(CodedStream::read(path)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_stream(CodedStream::from_bytes(bytes)?)
    }

    pub fn from_stream(stream: CodedStream) -> Result<Self> {
        let decoded = decode_stream(&stream)?;
        Ok(Self {
            current: decoded.clone(),
            stream,
            decoded,
            edits: Vec::new(),
            key: KeySource::Stream,
        })
    }

    pub fn stream(&self) -> &CodedStream {
        &self.stream
    }

    pub fn decoded(&self) -> &SemanticTrace {
        &self.decoded
    }

    /// Decoded semantics with every edit applied.
    pub fn current(&self) -> &SemanticTrace {
        &self.current
    }

    pub fn edits(&self) -> &[EditOp] {
        &self.edits
    }

    pub fn key_source(&self) -> &KeySource {
        &self.key
    }

    pub fn frame_count(&self) -> usize {
        self.decoded.frames.len()
    }

    pub fn frame(&self, index: usize) -> Result<&SemanticVector> {
        self.current
            .frames
            .get(index)
            .ok_or_else(|| Error::Range(format!("frame {index} outside 0..{}", self.frame_count())))
    }

    fn replay(&self, edits: &[EditOp]) -> Result<SemanticTrace> {
        let mut t = self.decoded.clone();
        for e in edits {
            e.apply(&mut t)?;
        }
        Ok(t)
    }

    /// Appends an edit. On error the session is unchanged.
    pub fn apply_edit(&mut self, op: EditOp) -> Result<&SemanticTrace> {
        let mut next = self.current.clone();
        op.apply(&mut next)?;
        self.edits.push(op);
        self.current = next;
        Ok(&self.current)
    }

    /// Removes the edit at position `index` in the log and replays the rest.
    pub fn remove_edit(&mut self, index: usize) -> Result<EditOp> {
        if index >= self.edits.len() {
            return Err(Error::Range(format!(
                "no edit {index}, log has {}",
                self.edits.len()
            )));
        }
        let mut edits = self.edits.clone();
        let removed = edits.remove(index);
        // Clamping makes edits order-dependent, so replay from scratch.
        self.current = self.replay(&edits)?;
        self.edits = edits;
        Ok(removed)
    }

    pub fn clear_edits(&mut self) {
        self.edits.clear();
        self.current = self.decoded.clone();
    }

    /// Animates a different portrait with this stream's motion.
    pub fn substitute_key(&mut self, image: PreviewFrame, semantics: KeyFrameSemantics) -> Result<()> {
        let h = &self.stream.header;
        if image.width != u32::from(h.width) || image.height != u32::from(h.height) {
            return Err(Error::Dimension(format!(
                "key image is {}x{}, stream is {}x{}",
                image.width, image.height, h.width, h.height
            )));
        }
        semantics.validate()?;
        self.key = KeySource::Virtual {
            image,
            semantics: Box::new(semantics),
        };
        Ok(())
    }

    pub fn restore_key(&mut self) {
        self.key = KeySource::Stream;
    }

    pub fn key_semantics(&self) -> &KeyFrameSemantics {
        match &self.key {
            KeySource::Stream => &self.stream.key_semantics,
            KeySource::Virtual { semantics, .. } => semantics,
        }
    }

    pub fn key_image(&self) -> Result<PreviewFrame> {
        match &self.key {
            KeySource::Virtual { image, .. } => Ok(image.clone()),
            KeySource::Stream => {
                if self.stream.key_tag != TAG_LOSSLESS {
                    return Err(Error::Image(format!(
                        "cannot decode key payload with tag {:?}",
                        String::from_utf8_lossy(&self.stream.key_tag)
                    )));
                }
                PreviewFrame::decode(&self.stream.key_payload)
            }
        }
    }

    pub fn camera(&self) -> CameraIntrinsics {
        let h = &self.stream.header;
        CameraIntrinsics::default_for(u32::from(h.width), u32::from(h.height))
    }

    /// Projected, eye-recalibrated mesh of frame `index` built on the active key.
    pub fn frame_geometry(&self, index: usize, model: &MorphableModel) -> Result<FrameGeometry> {
        let frame = self.frame(index)?;
        frame_geometry(model, self.key_semantics(), Some(frame), &self.camera())
    }

    pub fn key_geometry(&self, model: &MorphableModel) -> Result<FrameGeometry> {
        frame_geometry(model, self.key_semantics(), None, &self.camera())
    }

    pub fn preview(&self, index: usize, model: &MorphableModel) -> Result<Preview> {
        let frame = self.frame(index)?;
        preview_frame(
            model,
            self.key_semantics(),
            frame,
            &self.key_image()?,
            &self.camera(),
        )
    }

    /// Re-encodes the edited semantics with the stream's original key and
    /// configuration.
    pub fn export_stream(&self) -> Result<CodedStream> {
        let h = &self.stream.header;
        let trace = SemanticTrace {
            fps: h.fps(),
            key: self.stream.key_semantics.clone(),
            frames: self.current.frames.clone(),
        };
        let params = EncodeParams {
            quant: h.quant,
            width: h.width,
            height: h.height,
            model_id: h.model_id.clone(),
            key_tag: self.stream.key_tag,
        };
        encode_stream(&trace, &self.stream.key_payload, &params)
    }

    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        self.export_stream()?.write(path)
    }
}
