//! IEEE 754 binary16 codec and the per-generation precision restriction.
//!
//! The codec is plain integer bit manipulation so results are identical on
//! every target. Rounding is always round-to-nearest, ties-to-even.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::{Network, Precision};

/// Largest finite binary16 value.
pub const F16_MAX: f32 = 65504.0;
/// Canonical quiet NaN produced by the encoder for every NaN input.
pub const CANONICAL_NAN: u16 = 0x7E00;

const SIGN_MASK: u16 = 0x8000;
const INFINITY: u16 = 0x7C00;
const MAX_FINITE: u16 = 0x7BFF;

/// A raw binary16 bit pattern: 1 sign, 5 exponent, 10 significand bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfCode(pub u16);

impl HalfCode {
    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn is_nan(self) -> bool {
        self.0 & 0x7C00 == 0x7C00 && self.0 & 0x03FF != 0
    }
}

/// What happens to finite values beyond ±65504.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overflow {
    /// Clamp to ±65504.
    #[default]
    Saturate,
    /// Round to ±infinity as IEEE does.
    ToInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionPolicy {
    #[serde(default)]
    pub overflow: Overflow,
}

impl PrecisionPolicy {
    pub const SATURATE: PrecisionPolicy = PrecisionPolicy {
        overflow: Overflow::Saturate,
    };
    pub const TO_INFINITY: PrecisionPolicy = PrecisionPolicy {
        overflow: Overflow::ToInfinity,
    };
}

/// Encodes `x` to the nearest binary16 value (ties to even).
///
/// Subnormal results are produced exactly, signed zero keeps its sign and
/// every NaN collapses to [`CANONICAL_NAN`]. Infinite inputs stay infinite
/// under both overflow policies; only finite values past the binary16 range
/// are subject to [`Overflow`].
pub fn encode_f16(x: f32, policy: PrecisionPolicy) -> HalfCode {
    let bits = x.to_bits();
    let sign = ((bits >> 16) as u16) & SIGN_MASK;
    let exp = ((bits >> 23) & 0xFF) as i32;
    let man = bits & 0x007F_FFFF;

    if exp == 0xFF {
        return if man != 0 {
            HalfCode(CANONICAL_NAN)
        } else {
            HalfCode(sign | INFINITY)
        };
    }
    // binary32 zeros and subnormals are far below half the smallest
    // binary16 subnormal.
    if exp == 0 {
        return HalfCode(sign);
    }

    let overflow = |sign: u16| match policy.overflow {
        Overflow::Saturate => HalfCode(sign | MAX_FINITE),
        Overflow::ToInfinity => HalfCode(sign | INFINITY),
    };

    let unbiased = exp - 127;
    if unbiased > 15 {
        return overflow(sign);
    }

    if unbiased >= -14 {
        let half_exp = (unbiased + 15) as u32;
        let half_man = man >> 13;
        let rem = man & 0x1FFF;
        let mut out = (half_exp << 10) | half_man;
        if rem > 0x1000 || (rem == 0x1000 && half_man & 1 == 1) {
            // a carry out of the significand bumps the exponent, which is
            // exactly the next representable value
            out += 1;
        }
        if out >= INFINITY as u32 {
            return overflow(sign);
        }
        return HalfCode(sign | out as u16);
    }

    // Subnormal range: value = significand * 2^(unbiased - 23), and one
    // binary16 subnormal step is 2^-24.
    let shift = (-(unbiased + 1)) as u32;
    if shift > 24 {
        return HalfCode(sign);
    }
    let significand = man | 0x0080_0000;
    let kept = significand >> shift;
    let rem = significand & ((1u32 << shift) - 1);
    let halfway = 1u32 << (shift - 1);
    let mut out = kept;
    if rem > halfway || (rem == halfway && kept & 1 == 1) {
        out += 1;
    }
    HalfCode(sign | out as u16)
}

/// Widens a binary16 pattern to binary32. Exact for every non-NaN code.
pub fn decode_f16(h: HalfCode) -> f32 {
    let h = h.0;
    let sign = ((h & SIGN_MASK) as u32) << 16;
    let exp = ((h >> 10) & 0x1F) as u32;
    let man = (h & 0x03FF) as u32;

    match exp {
        0 if man == 0 => f32::from_bits(sign),
        0 => {
            // normalise the subnormal: shift the leading one up to bit 10
            let lz = man.leading_zeros() - 21;
            let man = (man << lz) & 0x03FF;
            let exp = 127 - 14 - lz;
            f32::from_bits(sign | (exp << 23) | (man << 13))
        }
        0x1F if man == 0 => f32::from_bits(sign | 0x7F80_0000),
        0x1F => f32::from_bits(sign | 0x7FC0_0000 | (man << 13)),
        _ => f32::from_bits(sign | ((exp + 127 - 15) << 23) | (man << 13)),
    }
}

/// `decode_f16(encode_f16(x))`.
pub fn round_trip(x: f32, policy: PrecisionPolicy) -> f32 {
    decode_f16(encode_f16(x, policy))
}

/// Imposes binary16 precision on every weight and bias of `net`.
///
/// Masked weights are zero and stay zero. Fails on any non-finite parameter.
pub fn quantize_network(net: &Network, policy: PrecisionPolicy) -> Result<Network> {
    let mut out = net.clone();
    for (idx, layer) in out.layers.iter_mut().enumerate() {
        for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            if !v.is_finite() {
                return Err(Error::NumericFailure(format!(
                    "non-finite parameter {v} in layer {idx}"
                )));
            }
            *v = round_trip(*v, policy);
        }
    }
    out.precision = Precision::Half;
    Ok(out)
}

/// Maximum absolute and relative quantization error over unmasked weights.
///
/// Relative error is taken over nonzero weights only.
pub fn quantization_error(net: &Network, policy: PrecisionPolicy) -> (f64, f64) {
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    for layer in &net.layers {
        for (&w, &m) in layer.weights.iter().zip(&layer.mask) {
            if !m {
                continue;
            }
            let q = round_trip(w, policy) as f64;
            let err = (q - w as f64).abs();
            max_abs = max_abs.max(err);
            if w != 0.0 {
                max_rel = max_rel.max(err / (w as f64).abs());
            }
        }
    }
    (max_abs, max_rel)
}
