//! Lossless coding of quantized semantic residuals: quantization, zigzag,
//! zero-order exp-Golomb binarization and PPM-driven range coding.

pub mod golomb;
pub mod ppm;
pub mod quant;
pub mod range_coder;

pub use golomb::{eg0_decode, eg0_encode, unzigzag, zigzag, Bits};
pub use ppm::{ppm_decode, ppm_encode, PpmModel};
pub use quant::{dequantize, quantize, QuantConfig, SymbolBlock};

use crate::error::{Error, Result};
use crate::semantics::SEMANTIC_DIM;

/// Binarizes one frame's symbols as fourteen concatenated codewords.
pub fn binarize(block: &SymbolBlock) -> Bits {
    let mut bits = Bits::with_capacity(SEMANTIC_DIM * 3);
    for s in block.0 {
        eg0_encode(zigzag(s), &mut bits);
    }
    bits
}

/// Inverse of [`binarize`]; the bit string must hold exactly fourteen
/// codewords and nothing else.
pub fn debinarize(bits: &Bits) -> Result<SymbolBlock> {
    let mut pos = 0;
    let mut out = [0i32; SEMANTIC_DIM];
    for o in out.iter_mut() {
        let u = eg0_decode(bits.as_slice(), &mut pos)?;
        *o = unzigzag(u);
        if *o == i32::MIN {
            return Err(Error::decode("symbol magnitude exceeds 2^31 - 1"));
        }
    }
    if pos != bits.len() {
        return Err(Error::decode(format!(
            "{} trailing bits after fourteen codewords",
            bits.len() - pos
        )));
    }
    Ok(SymbolBlock(out))
}

/// Codes one block: binarize, then PPM-code. Returns the bit length and payload.
pub fn encode_block(block: &SymbolBlock, model: &mut PpmModel) -> (usize, Vec<u8>) {
    let bits = binarize(block);
    let payload = ppm_encode(&bits, model);
    (bits.len(), payload)
}

pub fn decode_block(payload: &[u8], bit_len: usize, model: &mut PpmModel) -> Result<SymbolBlock> {
    // Fourteen codewords of at most 65 bits each.
    if !(SEMANTIC_DIM..=SEMANTIC_DIM * 65).contains(&bit_len) {
        return Err(Error::decode(format!("implausible frame bit length {bit_len}")));
    }
    let bits = ppm_decode(payload, bit_len, model)?;
    debinarize(&bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_block_is_fourteen_ones() {
        let bits = binarize(&SymbolBlock::default());
        assert_eq!(bits.to_string(), "1".repeat(14));
    }

    #[test]
    fn block_round_trip_and_trailing_bits() {
        let block = SymbolBlock([0, -1, 1, 5, -77, 1000, 0, 3, -3, i32::MAX, -i32::MAX, 0, 2, 9]);
        let bits = binarize(&block);
        assert_eq!(debinarize(&bits).unwrap(), block);
        let mut longer = bits.clone();
        longer.push(true);
        assert!(debinarize(&longer).is_err());
    }
}
