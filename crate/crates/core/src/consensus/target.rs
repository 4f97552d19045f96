//! Fixed-width 256-bit proof-of-work targets.
//!
//! [`Target256`] stores four little-endian `u64` limbs. Every operation that
//! could leave 256 bits is checked; nothing wraps silently.

// Limb loops walk several arrays in lockstep with carries.
#![allow(clippy::needless_range_loop)]

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised by 256-bit target arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ArithmeticError {
    #[error("256-bit overflow")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
}

/// Failure to parse a target from hex.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid 256-bit hex value: {0}")]
pub struct ParseTargetError(pub String);

/// A 256-bit unsigned integer used as a proof-of-work threshold.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Target256([u64; 4]);

impl Target256 {
    pub const ZERO: Target256 = Target256([0; 4]);
    pub const ONE: Target256 = Target256([1, 0, 0, 0]);
    pub const MAX: Target256 = Target256([u64::MAX; 4]);

    pub const fn from_limbs(limbs: [u64; 4]) -> Self {
        Target256(limbs)
    }

    pub const fn limbs(&self) -> [u64; 4] {
        self.0
    }

    pub const fn from_u64(v: u64) -> Self {
        Target256([v, 0, 0, 0])
    }

    pub fn from_be_bytes(bytes: [u8; 32]) -> Self {
        let mut limbs = [0u64; 4];
        for (i, limb) in limbs.iter_mut().enumerate() {
            let start = 32 - 8 * (i + 1);
            let mut buf = [0u8; 8];
            buf.copy_from_slice(&bytes[start..start + 8]);
            *limb = u64::from_be_bytes(buf);
        }
        Target256(limbs)
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, limb) in self.0.iter().enumerate() {
            let start = 32 - 8 * (i + 1);
            out[start..start + 8].copy_from_slice(&limb.to_be_bytes());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    /// Number of significant bits (0 for zero).
    pub fn bits(&self) -> u32 {
        for i in (0..4).rev() {
            if self.0[i] != 0 {
                return 64 * i as u32 + (64 - self.0[i].leading_zeros());
            }
        }
        0
    }

    pub fn low_u64(&self) -> u64 {
        self.0[0]
    }

    /// Nearest `f64`; only for reporting and stochastic modelling.
    pub fn to_f64(&self) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, &limb| acc * 18_446_744_073_709_551_616.0 + limb as f64)
    }

    pub fn checked_add(&self, rhs: &Target256) -> Result<Target256, ArithmeticError> {
        let mut out = [0u64; 4];
        let mut carry = false;
        for i in 0..4 {
            let (s1, c1) = self.0[i].overflowing_add(rhs.0[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            out[i] = s2;
            carry = c1 || c2;
        }
        if carry {
            Err(ArithmeticError::Overflow)
        } else {
            Ok(Target256(out))
        }
    }

    pub fn checked_sub(&self, rhs: &Target256) -> Result<Target256, ArithmeticError> {
        let mut out = [0u64; 4];
        let mut borrow = false;
        for i in 0..4 {
            let (d1, b1) = self.0[i].overflowing_sub(rhs.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            out[i] = d2;
            borrow = b1 || b2;
        }
        if borrow {
            Err(ArithmeticError::Overflow)
        } else {
            Ok(Target256(out))
        }
    }

    pub fn checked_mul_u64(&self, rhs: u64) -> Result<Target256, ArithmeticError> {
        let mut out = [0u64; 4];
        let mut carry: u128 = 0;
        for i in 0..4 {
            let wide = self.0[i] as u128 * rhs as u128 + carry;
            out[i] = wide as u64;
            carry = wide >> 64;
        }
        if carry != 0 {
            Err(ArithmeticError::Overflow)
        } else {
            Ok(Target256(out))
        }
    }

    /// Quotient and remainder of division by a `u64`.
    pub fn div_rem_u64(&self, rhs: u64) -> Result<(Target256, u64), ArithmeticError> {
        if rhs == 0 {
            return Err(ArithmeticError::DivisionByZero);
        }
        let mut out = [0u64; 4];
        let mut rem: u128 = 0;
        for i in (0..4).rev() {
            let cur = (rem << 64) | self.0[i] as u128;
            out[i] = (cur / rhs as u128) as u64;
            rem = cur % rhs as u128;
        }
        Ok((Target256(out), rem as u64))
    }

    pub fn checked_div_u64(&self, rhs: u64) -> Result<Target256, ArithmeticError> {
        self.div_rem_u64(rhs).map(|(q, _)| q)
    }

    /// Full-width division by another 256-bit value (binary long division).
    pub fn checked_div(&self, rhs: &Target256) -> Result<Target256, ArithmeticError> {
        if rhs.is_zero() {
            return Err(ArithmeticError::DivisionByZero);
        }
        if self < rhs {
            return Ok(Target256::ZERO);
        }
        let shift = self.bits() - rhs.bits();
        let mut divisor = *rhs << shift;
        let mut rem = *self;
        let mut quotient = Target256::ZERO;
        for s in (0..=shift).rev() {
            if rem >= divisor {
                rem = rem.checked_sub(&divisor).expect("rem >= divisor");
                quotient.0[(s / 64) as usize] |= 1u64 << (s % 64);
            }
            divisor = divisor >> 1;
        }
        Ok(quotient)
    }

    /// Left shift that fails instead of discarding high bits.
    pub fn checked_shl(&self, bits: u32) -> Result<Target256, ArithmeticError> {
        if self.is_zero() {
            return Ok(*self);
        }
        if self.bits() + bits > 256 {
            return Err(ArithmeticError::Overflow);
        }
        Ok(*self << bits)
    }

    /// Bitwise complement.
    pub fn not(&self) -> Target256 {
        Target256([!self.0[0], !self.0[1], !self.0[2], !self.0[3]])
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(66);
        s.push_str("0x");
        for limb in self.0.iter().rev() {
            s.push_str(&format!("{limb:016x}"));
        }
        s
    }
}

impl std::ops::Shr<u32> for Target256 {
    type Output = Target256;

    fn shr(self, bits: u32) -> Target256 {
        if bits >= 256 {
            return Target256::ZERO;
        }
        let limb_shift = (bits / 64) as usize;
        let bit_shift = bits % 64;
        let mut out = [0u64; 4];
        for i in 0..4 - limb_shift {
            let src = i + limb_shift;
            out[i] = self.0[src] >> bit_shift;
            if bit_shift > 0 && src + 1 < 4 {
                out[i] |= self.0[src + 1] << (64 - bit_shift);
            }
        }
        Target256(out)
    }
}

/// Truncating left shift; see [`Target256::checked_shl`] for the checked form.
impl std::ops::Shl<u32> for Target256 {
    type Output = Target256;

    fn shl(self, bits: u32) -> Target256 {
        if bits >= 256 {
            return Target256::ZERO;
        }
        let limb_shift = (bits / 64) as usize;
        let bit_shift = bits % 64;
        let mut out = [0u64; 4];
        for i in limb_shift..4 {
            let src = i - limb_shift;
            out[i] = self.0[src] << bit_shift;
            if bit_shift > 0 && src >= 1 {
                out[i] |= self.0[src - 1] >> (64 - bit_shift);
            }
        }
        Target256(out)
    }
}

impl Ord for Target256 {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..4).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Target256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Target256 {
    fn from(v: u64) -> Self {
        Target256::from_u64(v)
    }
}

impl fmt::Debug for Target256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Target256({})", self.to_hex())
    }
}

impl fmt::Display for Target256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Target256 {
    type Err = ParseTargetError;

    /// Accepts up to 64 hex digits, with or without a `0x` prefix.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.trim();
        let digits = digits
            .strip_prefix("0x")
            .or_else(|| digits.strip_prefix("0X"))
            .unwrap_or(digits);
        if digits.is_empty() || digits.len() > 64 || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(ParseTargetError(s.to_string()));
        }
        let padded = format!("{digits:0>64}");
        let mut limbs = [0u64; 4];
        for (i, limb) in limbs.iter_mut().enumerate() {
            let start = 64 - 16 * (i + 1);
            *limb = u64::from_str_radix(&padded[start..start + 16], 16)
                .map_err(|_| ParseTargetError(s.to_string()))?;
        }
        Ok(Target256(limbs))
    }
}

impl serde::Serialize for Target256 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> serde::Deserialize<'de> for Target256 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
