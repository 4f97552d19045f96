use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

/// Shors per LAT.
pub const COIN: u64 = 100_000_000;

/// A monetary amount in shors (1 LAT = 10^8 shors).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Amount(pub u64);

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub const fn from_shors(shors: u64) -> Self {
        Amount(shors)
    }

    /// Whole LAT; panics in const context on overflow.
    pub const fn from_lat(lat: u64) -> Self {
        Amount(lat * COIN)
    }

    pub const fn shors(self) -> u64 {
        self.0
    }

    /// Lossy conversion for reporting.
    pub fn as_lat(self) -> f64 {
        self.0 as f64 / COIN as f64
    }

    pub fn checked_add(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_add(rhs.0).map(Amount)
    }

    pub fn checked_mul(self, n: u64) -> Option<Amount> {
        self.0.checked_mul(n).map(Amount)
    }
}

impl Add for Amount {
    type Output = Amount;

    fn add(self, rhs: Amount) -> Amount {
        Amount(self.0.checked_add(rhs.0).expect("amount overflow"))
    }
}

impl Sub for Amount {
    type Output = Amount;

    fn sub(self, rhs: Amount) -> Amount {
        Amount(self.0.checked_sub(rhs.0).expect("amount underflow"))
    }
}

impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        iter.fold(Amount::ZERO, |a, b| a + b)
    }
}

/// Always eight decimals: `25.00000000 LAT`.
impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:08} LAT", self.0 / COIN, self.0 % COIN)
    }
}
