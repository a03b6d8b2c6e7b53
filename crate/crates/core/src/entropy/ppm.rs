//! Prediction by partial matching over the bit alphabet, driving the range
//! coder.
//!
//! Each order-k context is the previous k bits. Coding starts at the longest
//! available context that has statistics. Escape frequencies follow method C
//! (escape count = number of distinct symbols seen). With two symbols and
//! exclusion, an escape from a context that has seen one symbol fully
//! determines the bit, and a context that has seen both never escapes, so at
//! most one binary decision is coded per bit. Contexts with no statistics
//! fall through; if all do, the bit is coded uniformly (order -1).

use crate::entropy::golomb::Bits;
use crate::entropy::range_coder::{RangeDecoder, RangeEncoder};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 8;
/// Counts are halved once any of them reaches this value.
pub const RESCALE_LIMIT: u32 = 1 << 16;
const MAX_SUPPORTED_ORDER: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpmModel {
    max_order: usize,
    counts: Vec<[u32; 2]>,
    history: u32,
    history_len: usize,
}

impl Default for PpmModel {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_ORDER)
    }
}

/// The single binary decision coded for one bit.
enum Decision {
    /// Both symbols seen: code the bit with frequencies `[c0, c1]`.
    Full([u32; 2]),
    /// Only `seen` has statistics (count `count`); escape has frequency 1.
    Single {
        seen: bool,
        count: u32,
    },
    Uniform,
}

impl PpmModel {
    pub fn new(max_order: usize) -> Self {
        assert!(
            max_order <= MAX_SUPPORTED_ORDER,
            "PPM order {max_order} exceeds {MAX_SUPPORTED_ORDER}"
        );
        Self {
            max_order,
            counts: vec![[0; 2]; (1usize << (max_order + 1)) - 1],
            history: 0,
            history_len: 0,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    fn slot(&self, order: usize) -> usize {
        let mask = (1u32 << order) - 1;
        (1usize << order) - 1 + (self.history & mask) as usize
    }

    fn decision(&self) -> Decision {
        for order in (0..=self.history_len).rev() {
            let [c0, c1] = self.counts[self.slot(order)];
            match (c0 > 0, c1 > 0) {
                (true, true) => return Decision::Full([c0, c1]),
                (true, false) => {
                    return Decision::Single {
                        seen: false,
                        count: c0,
                    }
                }
                (false, true) => {
                    return Decision::Single {
                        seen: true,
                        count: c1,
                    }
                }
                (false, false) => continue,
            }
        }
        Decision::Uniform
    }

    fn update(&mut self, bit: bool) {
        let b = usize::from(bit);
        for order in 0..=self.history_len {
            let slot = self.slot(order);
            let c = &mut self.counts[slot];
            c[b] += 1;
            if c[b] >= RESCALE_LIMIT {
                c[0] = c[0].div_ceil(2);
                c[1] = c[1].div_ceil(2);
            }
        }
        if self.max_order > 0 {
            let mask = (1u32 << self.max_order) - 1;
            self.history = ((self.history << 1) | u32::from(bit)) & mask;
        }
        self.history_len = (self.history_len + 1).min(self.max_order);
    }

    fn encode_bit(&mut self, enc: &mut RangeEncoder, bit: bool) {
        match self.decision() {
            Decision::Full([c0, c1]) => {
                if bit {
                    enc.encode(c0, c1, c0 + c1);
                } else {
                    enc.encode(0, c0, c0 + c1);
                }
            }
            Decision::Single { seen, count } => {
                // [seen symbol: count][escape: 1]
                if bit == seen {
                    enc.encode(0, count, count + 1);
                } else {
                    enc.encode(count, 1, count + 1);
                }
            }
            Decision::Uniform => enc.encode(u32::from(bit), 1, 2),
        }
        self.update(bit);
    }

    fn decode_bit(&mut self, dec: &mut RangeDecoder<'_>) -> Result<bool> {
        let bit = match self.decision() {
            Decision::Full([c0, c1]) => {
                let v = dec.decode_freq(c0 + c1)?;
                if v < c0 {
                    dec.consume(0, c0);
                    false
                } else {
                    dec.consume(c0, c1);
                    true
                }
            }
            Decision::Single { seen, count } => {
                let v = dec.decode_freq(count + 1)?;
                if v < count {
                    dec.consume(0, count);
                    seen
                } else {
                    dec.consume(count, 1);
                    !seen
                }
            }
            Decision::Uniform => {
                let v = dec.decode_freq(2)?;
                dec.consume(v, 1);
                v == 1
            }
        };
        self.update(bit);
        Ok(bit)
    }
}

/// Codes `bits` with a fresh range coder, adapting `model` as it goes.
pub fn ppm_encode(bits: &Bits, model: &mut PpmModel) -> Vec<u8> {
    let mut enc = RangeEncoder::new();
    for bit in bits.iter() {
        model.encode_bit(&mut enc, bit);
    }
    enc.finish()
}

/// Decodes exactly `n_bits` bits from `payload`, adapting `model` exactly as
/// the encoder did.
pub fn ppm_decode(payload: &[u8], n_bits: usize, model: &mut PpmModel) -> Result<Bits> {
    let mut dec = RangeDecoder::new(payload);
    let mut out = Bits::with_capacity(n_bits);
    for _ in 0..n_bits {
        out.push(model.decode_bit(&mut dec)?);
    }
    // An empty bit string always codes to an empty payload.
    if n_bits == 0 && !payload.is_empty() {
        return Err(Error::decode("non-empty payload for an empty bit string"));
    }
    Ok(out)
}
