//! Signed-to-unsigned mapping and zero-order exp-Golomb binarization.

use std::fmt;

use crate::error::{Error, Result};

/// Interleaves signs: 0, -1, 1, -2, 2, ... map to 0, 1, 2, 3, 4, ...
#[inline]
pub fn zigzag(n: i32) -> u32 {
    ((n << 1) ^ (n >> 31)) as u32
}

#[inline]
pub fn unzigzag(u: u32) -> i32 {
    ((u >> 1) as i32) ^ -((u & 1) as i32)
}

/// A sequence of bits, most significant first within each codeword.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        Self(Vec::with_capacity(n))
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn extend_from(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Appends the codeword for `u`: `floor(log2(u+1))` zeros, then `u+1` in binary.
pub fn eg0_encode(u: u32, out: &mut Bits) {
    let v = u64::from(u) + 1;
    let width = 64 - v.leading_zeros() as usize;
    for _ in 1..width {
        out.push(false);
    }
    for i in (0..width).rev() {
        out.push((v >> i) & 1 == 1);
    }
}

/// Codeword length in bits for `u`.
pub fn eg0_len(u: u32) -> usize {
    let v = u64::from(u) + 1;
    2 * (63 - v.leading_zeros() as usize) + 1
}

/// Reads one codeword starting at `*pos`, advancing `*pos` past it.
pub fn eg0_decode(bits: &[bool], pos: &mut usize) -> Result<u32> {
    let mut zeros = 0usize;
    loop {
        match bits.get(*pos + zeros) {
            None => return Err(Error::decode("truncated exp-Golomb prefix")),
            Some(true) => break,
            Some(false) => {
                zeros += 1;
                if zeros > 32 {
                    return Err(Error::decode("exp-Golomb prefix longer than 32 bits"));
                }
            }
        }
    }
    let start = *pos + zeros;
    let end = start + zeros + 1;
    if end > bits.len() {
        return Err(Error::decode("truncated exp-Golomb suffix"));
    }
    let v = bits[start..end]
        .iter()
        .fold(0u64, |acc, b| (acc << 1) | u64::from(*b));
    let u = v - 1;
    if u > u64::from(u32::MAX) {
        return Err(Error::decode("exp-Golomb value exceeds 32 bits"));
    }
    *pos = end;
    Ok(u as u32)
}
