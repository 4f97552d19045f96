//! The 4-byte exponent/mantissa target encoding carried in block headers.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::target::Target256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CompactError {
    #[error("compact bits {0:#010x} have the sign bit set")]
    Negative(u32),
    #[error("compact bits {0:#010x} overflow 256 bits")]
    Overflow(u32),
}

/// Compact target: one size byte followed by a 23-bit mantissa and a sign bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompactBits(pub u32);

impl CompactBits {
    /// Largest target of the default chain.
    pub const POW_LIMIT: CompactBits = CompactBits(0x207f_ffff);

    pub fn expand(self) -> Result<Target256, CompactError> {
        expand_compact(self)
    }

    pub fn from_target(target: &Target256) -> Self {
        compress_compact(target)
    }
}

impl fmt::Debug for CompactBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CompactBits({:#010x})", self.0)
    }
}

impl fmt::Display for CompactBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#010x}", self.0)
    }
}

impl From<u32> for CompactBits {
    fn from(bits: u32) -> Self {
        CompactBits(bits)
    }
}

/// Decode compact bits into a full target.
///
/// ```
/// use powlab::consensus::{expand_compact, CompactBits};
/// let limit = expand_compact(CompactBits(0x207fffff)).unwrap();
/// assert_eq!(limit.to_hex(), format!("0x7fffff{}", "0".repeat(58)));
/// ```
pub fn expand_compact(bits: CompactBits) -> Result<Target256, CompactError> {
    let raw = bits.0;
    let size = raw >> 24;
    let mut word = raw & 0x007f_ffff;
    let value = if size <= 3 {
        word >>= 8 * (3 - size);
        Target256::from_u64(word as u64)
    } else if word == 0 {
        Target256::ZERO
    } else {
        let shift = 8 * (size - 3);
        Target256::from_u64(word as u64)
            .checked_shl(shift)
            .map_err(|_| CompactError::Overflow(raw))?
    };
    if word != 0 && raw & 0x0080_0000 != 0 {
        return Err(CompactError::Negative(raw));
    }
    if word != 0 && (size > 34 || (word > 0xff && size > 33) || (word > 0xffff && size > 32)) {
        return Err(CompactError::Overflow(raw));
    }
    Ok(value)
}

/// Encode a target, truncating the mantissa to its top 23 significant bits.
pub fn compress_compact(target: &Target256) -> CompactBits {
    let mut size = target.bits().div_ceil(8);
    let mut word = if size <= 3 {
        (target.low_u64() << (8 * (3 - size))) as u32
    } else {
        (*target >> (8 * (size - 3))).low_u64() as u32
    };
    if word & 0x0080_0000 != 0 {
        word >>= 8;
        size += 1;
    }
    CompactBits(word | (size << 24))
}
