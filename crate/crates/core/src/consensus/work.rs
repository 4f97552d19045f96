use num_bigint::BigUint;
use thiserror::Error;

use super::target::Target256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("target at index {index} is zero")]
pub struct ZeroTargetError {
    pub index: usize,
}

/// `floor(2^256 / target)` for a single block.
pub fn block_work(target: &Target256) -> Option<BigUint> {
    if target.is_zero() {
        return None;
    }
    if *target == Target256::ONE {
        return Some(BigUint::from(1u8) << 256u32);
    }
    // 2^256 / t == (2^256 - t) / t + 1, and 2^256 - t == !t + 1 fits in 256 bits
    let numerator = target.not().checked_add(&Target256::ONE).expect("t > 1");
    let q = numerator.checked_div(target).expect("non-zero divisor");
    Some(BigUint::from_bytes_be(&q.to_be_bytes()) + 1u32)
}

/// Cumulative work of a chain of targets, exact at any length.
///
/// ```
/// use powlab::consensus::{chain_work, Target256};
/// let w = chain_work(&[Target256::ONE << 255]).unwrap();
/// assert_eq!(w, 2u32.into());
/// ```
pub fn chain_work(targets: &[Target256]) -> Result<BigUint, ZeroTargetError> {
    targets.iter().enumerate().try_fold(BigUint::default(), |acc, (index, t)| {
        block_work(t).map(|w| acc + w).ok_or(ZeroTargetError { index })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_two() {
        assert_eq!(chain_work(&[Target256::ONE << 255]).unwrap(), BigUint::from(2u8));
        assert_eq!(chain_work(&[Target256::ONE]).unwrap(), BigUint::from(1u8) << 256u32);
        assert_eq!(chain_work(&[Target256::MAX]).unwrap(), BigUint::from(1u8));
        assert_eq!(chain_work(&[]).unwrap(), BigUint::default());
    }

    #[test]
    fn zero_target_reports_index() {
        let err = chain_work(&[Target256::ONE, Target256::ZERO]).unwrap_err();
        assert_eq!(err.index, 1);
    }
}
