//! The `.ifvc` container.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic        4   "IFVC"
//! version      u16
//! fps          u16  unsigned 8.8 fixed point
//! frame_count  u32
//! width        u16
//! height       u16
//! steps        14 x f64
//! model_id     u16 length + UTF-8 bytes
//! key_tag      4   fourCC of the key image codec ("LSLS" = embedded lossless image file)
//! key_payload  u32 length + bytes
//! key coeffs   id, alb, illum, exp: each u32 count + count x f64
//! key pose     14 x f64
//! frames       frame_count x (LEB128 bit_length, LEB128 byte_length, bytes)
//! payload_crc  u32  CRC-32 over every frame's (bit_length u32, bytes)
//! file_crc     u32  CRC-32 over everything before it
//! ```

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::entropy::QuantConfig;
use crate::error::{Error, Result};
use crate::semantics::{KeyFrameSemantics, SemanticVector, SEMANTIC_DIM};

pub const MAGIC: [u8; 4] = *b"IFVC";
pub const VERSION: u16 = 1;
/// Key payload tag for an embedded lossless image file (PNG).
pub const TAG_LOSSLESS: [u8; 4] = *b"LSLS";
pub const FILE_EXTENSION: &str = "ifvc";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamHeader {
    pub version: u16,
    /// Frame rate in 8.8 fixed point.
    pub fps_q8: u16,
    pub frame_count: u32,
    pub width: u16,
    pub height: u16,
    pub quant: QuantConfig,
    pub model_id: String,
}

impl StreamHeader {
    pub fn fps(&self) -> f64 {
        f64::from(self.fps_q8) / 256.0
    }

    /// Rounds `fps` to the nearest representable 8.8 value.
    pub fn fps_to_q8(fps: f64) -> Result<u16> {
        let q = (fps * 256.0).round();
        if !(1.0..=f64::from(u16::MAX)).contains(&q) {
            return Err(Error::Config(format!(
                "fps {fps} not representable in 8.8 fixed point"
            )));
        }
        Ok(q as u16)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FramePayload {
    pub bit_len: u32,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodedStream {
    pub header: StreamHeader,
    pub key_tag: [u8; 4],
    pub key_payload: Vec<u8>,
    pub key_semantics: KeyFrameSemantics,
    pub frames: Vec<FramePayload>,
    pub payload_crc: u32,
}

/// CRC-32 over the frame payloads, as stored in the container.
pub fn frame_payload_crc(frames: &[FramePayload]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    for f in frames {
        h.update(&f.bit_len.to_le_bytes());
        h.update(&f.bytes);
    }
    h.finalize()
}

impl CodedStream {
    pub fn semantic_payload_bytes(&self) -> usize {
        self.frames.iter().map(|f| f.bytes.len()).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Vec::with_capacity(128 + self.key_payload.len() + self.semantic_payload_bytes());
        let h = &self.header;
        w.extend_from_slice(&MAGIC);
        w.extend_from_slice(&h.version.to_le_bytes());
        w.extend_from_slice(&h.fps_q8.to_le_bytes());
        w.extend_from_slice(&h.frame_count.to_le_bytes());
        w.extend_from_slice(&h.width.to_le_bytes());
        w.extend_from_slice(&h.height.to_le_bytes());
        for s in h.quant.steps() {
            w.extend_from_slice(&s.to_le_bytes());
        }
        let id = h.model_id.as_bytes();
        w.extend_from_slice(&(id.len() as u16).to_le_bytes());
        w.extend_from_slice(id);

        w.extend_from_slice(&self.key_tag);
        w.extend_from_slice(&(self.key_payload.len() as u32).to_le_bytes());
        w.extend_from_slice(&self.key_payload);
        let k = &self.key_semantics;
        for coeffs in [&k.id_coeffs, &k.alb_coeffs, &k.illum_coeffs, &k.exp_coeffs] {
            w.extend_from_slice(&(coeffs.len() as u32).to_le_bytes());
            for c in coeffs {
                w.extend_from_slice(&c.to_le_bytes());
            }
        }
        for v in k.pose.flatten() {
            w.extend_from_slice(&v.to_le_bytes());
        }

        for f in &self.frames {
            write_varint(&mut w, u64::from(f.bit_len));
            write_varint(&mut w, f.bytes.len() as u64);
            w.extend_from_slice(&f.bytes);
        }
        w.extend_from_slice(&self.payload_crc.to_le_bytes());
        let crc = crc32fast::hash(&w);
        w.extend_from_slice(&crc.to_le_bytes());
        w
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            return Err(Error::container("bad magic, not an IFVC stream"));
        }
        if bytes.len() < 8 {
            return Err(Error::container("truncated header"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != stored {
            return Err(Error::container("file checksum mismatch"));
        }
        let mut r = Reader::new(body);
        r.take(4)?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::container(format!("unsupported version {version}")));
        }
        let fps_q8 = r.u16()?;
        if fps_q8 == 0 {
            return Err(Error::container("zero frame rate"));
        }
        let frame_count = r.u32()?;
        let width = r.u16()?;
        let height = r.u16()?;
        let mut steps = [0.0; SEMANTIC_DIM];
        for s in steps.iter_mut() {
            *s = r.f64()?;
        }
        let quant = QuantConfig::new(steps).map_err(|e| Error::container(e.to_string()))?;
        let id_len = r.u16()? as usize;
        let model_id = String::from_utf8(r.take(id_len)?.to_vec())
            .map_err(|_| Error::container("model id is not UTF-8"))?;

        let key_tag: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
        let key_len = r.u32()? as usize;
        let key_payload = r.take(key_len)?.to_vec();
        let mut groups: [Vec<f64>; 4] = Default::default();
        for g in groups.iter_mut() {
            let n = r.u32()? as usize;
            if n > r.remaining() / 8 {
                return Err(Error::container("key coefficient count exceeds stream size"));
            }
            *g = (0..n).map(|_| r.f64()).collect::<Result<_>>()?;
        }
        let mut pose = [0.0; SEMANTIC_DIM];
        for p in pose.iter_mut() {
            *p = r.f64()?;
        }
        let [id_coeffs, alb_coeffs, illum_coeffs, exp_coeffs] = groups;
        let key_semantics = KeyFrameSemantics {
            id_coeffs,
            alb_coeffs,
            illum_coeffs,
            exp_coeffs,
            pose: SemanticVector::unflatten(&pose),
        };
        key_semantics
            .validate()
            .map_err(|e| Error::container(format!("key semantics: {e}")))?;

        // Each frame record takes at least two bytes.
        if frame_count as usize > r.remaining() / 2 {
            return Err(Error::container("frame count exceeds stream size"));
        }
        let mut frames = Vec::with_capacity(frame_count as usize);
        for i in 0..frame_count {
            let bit_len = r.varint()?;
            let bit_len = u32::try_from(bit_len)
                .map_err(|_| Error::container(format!("frame {i}: bit length overflow")))?;
            let byte_len = r.varint()? as usize;
            let bytes = r.take(byte_len)?.to_vec();
            frames.push(FramePayload { bit_len, bytes });
        }
        let payload_crc = r.u32()?;
        if r.remaining() != 0 {
            return Err(Error::container(format!(
                "{} unexpected trailing bytes",
                r.remaining()
            )));
        }
        Ok(Self {
            header: StreamHeader {
                version,
                fps_q8,
                frame_count,
                width,
                height,
                quant,
                model_id,
            },
            key_tag,
            key_payload,
            key_semantics,
            frames,
            payload_crc,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }
}

fn write_varint(w: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7F) as u8;
        v >>= 7;
        if v == 0 {
            w.push(byte);
            return;
        }
        w.push(byte | 0x80);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(Error::container(format!(
                "truncated: wanted {n} bytes at offset {}, {} left",
                self.pos,
                self.remaining()
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn varint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.take(1)?[0];
            v |= u64::from(b & 0x7F) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(Error::container("varint longer than 64 bits"))
    }
}
