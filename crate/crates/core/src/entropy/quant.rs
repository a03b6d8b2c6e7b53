use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semantics::{EYE, LOC, MOUTH, ROT, SEMANTIC_DIM, TRANS};

/// Largest symbol magnitude a [`SymbolBlock`] may carry.
pub const MAX_SYMBOL: i64 = i32::MAX as i64;

/// Per-component quantization step sizes, in wire order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantConfig {
    steps: [f64; SEMANTIC_DIM],
}

impl Default for QuantConfig {
    /// 0.02 for mouth, 0.05 for eye, 0.005 rad for rotation, 0.01 for
    /// translation and location.
    fn default() -> Self {
        Self::from_groups(0.02, 0.05, 0.005, 0.01, 0.01).expect("default steps are valid")
    }
}

impl QuantConfig {
    pub fn new(steps: [f64; SEMANTIC_DIM]) -> Result<Self> {
        if let Some(i) = steps.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config(format!(
                "quantization step {i} must be positive and finite, got {}",
                steps[i]
            )));
        }
        Ok(Self { steps })
    }

    /// One step per semantic group.
    pub fn from_groups(mouth: f64, eye: f64, rot: f64, trans: f64, loc: f64) -> Result<Self> {
        let mut steps = [0.0; SEMANTIC_DIM];
        steps[MOUTH].fill(mouth);
        steps[EYE] = eye;
        steps[ROT].fill(rot);
        steps[TRANS].fill(trans);
        steps[LOC] = loc;
        Self::new(steps)
    }

    /// Parses a comma-separated list of either 5 group steps
    /// (mouth, eye, rot, trans, loc) or all 14 component steps.
    pub fn parse_list(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad step `{p}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        match values.len() {
            5 => Self::from_groups(values[0], values[1], values[2], values[3], values[4]),
            SEMANTIC_DIM => Self::new(values.try_into().expect("length checked")),
            n => Err(Error::Config(format!("expected 5 or 14 steps, got {n}"))),
        }
    }

    pub fn steps(&self) -> &[f64; SEMANTIC_DIM] {
        &self.steps
    }
}

/// Quantized residual of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SymbolBlock(pub [i32; SEMANTIC_DIM]);

impl SymbolBlock {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|s| *s == 0)
    }
}

/// `round(residual / step)` per component, ties away from zero.
pub fn quantize(residual: &[f64; SEMANTIC_DIM], cfg: &QuantConfig) -> Result<SymbolBlock> {
    let mut out = [0i32; SEMANTIC_DIM];
    for (i, (r, step)) in residual.iter().zip(cfg.steps.iter()).enumerate() {
        if !r.is_finite() {
            return Err(Error::Range(format!("residual component {i} is not finite")));
        }
        // f64::round rounds half away from zero.
        let q = (r / step).round();
        if q.abs() > MAX_SYMBOL as f64 {
            return Err(Error::Overflow {
                component: i,
                value: q,
            });
        }
        out[i] = q as i32;
    }
    Ok(SymbolBlock(out))
}

pub fn dequantize(block: &SymbolBlock, cfg: &QuantConfig) -> [f64; SEMANTIC_DIM] {
    let mut out = [0.0; SEMANTIC_DIM];
    for (o, (s, step)) in out.iter_mut().zip(block.0.iter().zip(cfg.steps.iter())) {
        *o = f64::from(*s) * step;
    }
    out
}
