//! Closed-loop predictive coding of semantic traces.
//!
//! The first frame is predicted from the key frame's pose, every later one from
//! the *reconstructed* previous frame. The encoder runs the decoder's
//! reconstruction itself, so both sides hold identical state and the
//! quantization error never accumulates.

use std::fmt;

use serde::Serialize;

use crate::entropy::{self, dequantize, quantize, PpmModel, QuantConfig};
use crate::error::{Error, Result};
use crate::semantics::{SemanticTrace, SemanticVector, SEMANTIC_DIM};
use crate::stream::container::{
    frame_payload_crc, CodedStream, FramePayload, StreamHeader, TAG_LOSSLESS, VERSION,
};

/// State shared, bit for bit, by encoder and decoder after the same prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct CoderState {
    pub reconstructed_prev: SemanticVector,
    pub ppm: PpmModel,
}

impl CoderState {
    /// Fresh state whose predictor is the key frame's pose.
    pub fn new(key_pose: SemanticVector) -> Self {
        Self {
            reconstructed_prev: key_pose,
            ppm: PpmModel::default(),
        }
    }

    /// `prev + dequantized residual`, projected back onto the valid ranges.
    /// Both sides apply the same projection so they stay in lockstep.
    fn reconstruct(&self, symbols: &entropy::SymbolBlock, quant: &QuantConfig) -> SemanticVector {
        let pred = self.reconstructed_prev.flatten();
        let delta = dequantize(symbols, quant);
        let mut out = [0.0; SEMANTIC_DIM];
        for i in 0..SEMANTIC_DIM {
            out[i] = pred[i] + delta[i];
        }
        SemanticVector::unflatten(&out).clamped()
    }
}

#[derive(Debug, Clone)]
pub struct StreamEncoder {
    state: CoderState,
    quant: QuantConfig,
}

impl StreamEncoder {
    pub fn new(key_pose: SemanticVector, quant: QuantConfig) -> Self {
        Self {
            state: CoderState::new(key_pose),
            quant,
        }
    }

    /// Codes one frame and returns its payload with the reconstruction the
    /// decoder will produce.
    pub fn encode_frame(&mut self, frame: &SemanticVector) -> Result<(FramePayload, SemanticVector)> {
        let cur = frame.flatten();
        let pred = self.state.reconstructed_prev.flatten();
        let mut residual = [0.0; SEMANTIC_DIM];
        for i in 0..SEMANTIC_DIM {
            residual[i] = cur[i] - pred[i];
        }
        let symbols = quantize(&residual, &self.quant)?;
        let (bit_len, bytes) = entropy::encode_block(&symbols, &mut self.state.ppm);
        let recon = self.state.reconstruct(&symbols, &self.quant);
        self.state.reconstructed_prev = recon;
        Ok((
            FramePayload {
                bit_len: bit_len as u32,
                bytes,
            },
            recon,
        ))
    }

    pub fn state(&self) -> &CoderState {
        &self.state
    }
}

#[derive(Debug, Clone)]
pub struct StreamDecoder {
    state: CoderState,
    quant: QuantConfig,
}

impl StreamDecoder {
    pub fn new(key_pose: SemanticVector, quant: QuantConfig) -> Self {
        Self {
            state: CoderState::new(key_pose),
            quant,
        }
    }

    pub fn decode_frame(&mut self, frame: &FramePayload) -> Result<SemanticVector> {
        let symbols = entropy::decode_block(&frame.bytes, frame.bit_len as usize, &mut self.state.ppm)?;
        let recon = self.state.reconstruct(&symbols, &self.quant);
        self.state.reconstructed_prev = recon;
        Ok(recon)
    }

    pub fn state(&self) -> &CoderState {
        &self.state
    }
}

/// Everything besides the trace and key image that goes into a stream header.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeParams {
    pub quant: QuantConfig,
    pub width: u16,
    pub height: u16,
    pub model_id: String,
    pub key_tag: [u8; 4],
}

impl Default for EncodeParams {
    fn default() -> Self {
        Self {
            quant: QuantConfig::default(),
            width: 256,
            height: 256,
            model_id: String::new(),
            key_tag: TAG_LOSSLESS,
        }
    }
}

pub fn encode_stream(
    trace: &SemanticTrace,
    key_payload: &[u8],
    params: &EncodeParams,
) -> Result<CodedStream> {
    encode_stream_traced(trace, key_payload, params).map(|(s, _)| s)
}

/// Like [`encode_stream`], also returning the encoder-side reconstruction of
/// every frame.
pub fn encode_stream_traced(
    trace: &SemanticTrace,
    key_payload: &[u8],
    params: &EncodeParams,
) -> Result<(CodedStream, Vec<SemanticVector>)> {
    trace.validate()?;
    if key_payload.is_empty() {
        return Err(Error::Config("key payload is empty".into()));
    }
    if params.model_id.len() > usize::from(u16::MAX) {
        return Err(Error::Config("model id longer than 65535 bytes".into()));
    }
    let key_len_ok = u32::try_from(key_payload.len()).is_ok();
    let count = u32::try_from(trace.frames.len())
        .ok()
        .filter(|_| key_len_ok)
        .ok_or_else(|| Error::Config("trace or key payload too large for the container".into()))?;
    let mut enc = StreamEncoder::new(trace.key.pose, params.quant);
    let mut frames = Vec::with_capacity(trace.frames.len());
    let mut recon = Vec::with_capacity(trace.frames.len());
    for f in &trace.frames {
        let (payload, r) = enc.encode_frame(f)?;
        frames.push(payload);
        recon.push(r);
    }
    let stream = CodedStream {
        header: StreamHeader {
            version: VERSION,
            fps_q8: StreamHeader::fps_to_q8(trace.fps)?,
            frame_count: count,
            width: params.width,
            height: params.height,
            quant: params.quant,
            model_id: params.model_id.clone(),
        },
        key_tag: params.key_tag,
        key_payload: key_payload.to_vec(),
        key_semantics: trace.key.clone(),
        payload_crc: frame_payload_crc(&frames),
        frames,
    };
    Ok((stream, recon))
}

pub fn decode_stream(stream: &CodedStream) -> Result<SemanticTrace> {
    if stream.frames.len() != stream.header.frame_count as usize {
        return Err(Error::container(format!(
            "header declares {} frames, stream holds {}",
            stream.header.frame_count,
            stream.frames.len()
        )));
    }
    if frame_payload_crc(&stream.frames) != stream.payload_crc {
        return Err(Error::decode("frame payload checksum mismatch"));
    }
    let mut dec = StreamDecoder::new(stream.key_semantics.pose, stream.header.quant);
    let frames = stream
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            dec.decode_frame(f)
                .map_err(|e| Error::decode(format!("frame {i}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    SemanticTrace::new(stream.header.fps(), stream.key_semantics.clone(), frames)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameStat {
    pub index: usize,
    pub bit_len: u32,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamReport {
    pub header: StreamHeader,
    pub fps: f64,
    pub key_tag: String,
    pub key_payload_bytes: usize,
    pub semantic_payload_bytes: usize,
    pub container_bytes: usize,
    /// Semantic bitrate, key payload excluded.
    pub kbps: f64,
    pub frames: Vec<FrameStat>,
}

/// `8 * semantic payload bytes * fps / frame_count / 1000`.
pub fn semantic_kbps(payload_bytes: usize, fps: f64, frame_count: usize) -> f64 {
    if frame_count == 0 {
        return 0.0;
    }
    8.0 * payload_bytes as f64 * fps / frame_count as f64 / 1000.0
}

pub fn inspect_stream(stream: &CodedStream) -> Result<StreamReport> {
    if stream.frames.len() != stream.header.frame_count as usize {
        return Err(Error::container("frame count does not match header"));
    }
    let semantic = stream.semantic_payload_bytes();
    let fps = stream.header.fps();
    Ok(StreamReport {
        header: stream.header.clone(),
        fps,
        key_tag: String::from_utf8_lossy(&stream.key_tag).into_owned(),
        key_payload_bytes: stream.key_payload.len(),
        semantic_payload_bytes: semantic,
        container_bytes: stream.to_bytes().len(),
        kbps: semantic_kbps(semantic, fps, stream.frames.len()),
        frames: stream
            .frames
            .iter()
            .enumerate()
            .map(|(index, f)| FrameStat {
                index,
                bit_len: f.bit_len,
                bytes: f.bytes.len(),
            })
            .collect(),
    })
}

impl fmt::Display for StreamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.header;
        writeln!(f, "version        {}", h.version)?;
        writeln!(f, "fps            {}", self.fps)?;
        writeln!(f, "frames         {}", h.frame_count)?;
        writeln!(f, "size           {}x{}", h.width, h.height)?;
        writeln!(f, "model          {}", h.model_id)?;
        writeln!(f, "steps          {:?}", h.quant.steps())?;
        writeln!(
            f,
            "key            {} ({} bytes)",
            self.key_tag, self.key_payload_bytes
        )?;
        writeln!(f, "semantic bytes {}", self.semantic_payload_bytes)?;
        writeln!(f, "container      {} bytes", self.container_bytes)?;
        writeln!(f, "bitrate        {:.3} kbps (key excluded)", self.kbps)?;
        writeln!(f, "frame  bits  bytes")?;
        for s in &self.frames {
            writeln!(f, "{:5} {:5} {:6}", s.index, s.bit_len, s.bytes)?;
        }
        Ok(())
    }
}
