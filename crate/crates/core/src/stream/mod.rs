//! Closed-loop semantic coder and the `.ifvc` container.

pub mod codec;
pub mod container;

pub use codec::{
    decode_stream, encode_stream, encode_stream_traced, inspect_stream, semantic_kbps, CoderState,
    EncodeParams, StreamDecoder, StreamEncoder, StreamReport,
};
pub use container::{CodedStream, FramePayload, StreamHeader};
