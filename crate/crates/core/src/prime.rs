//! The prime modulus and scalar arithmetic helpers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A verified prime `p`, the modulus of the base field `Z/p`.
///
/// All matrix arithmetic in this crate works over `Z/p` or `Z/p^2`. Primes
/// are capped below `2^20` so that `p^2 < 2^40` and every product of two
/// residues mod `p^2` fits a `u128` intermediate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    /// Exclusive upper bound on supported primes.
    pub const MAX: u64 = 1 << 20;

    /// Verifies primality by trial division.
    pub fn new(p: u64) -> Result<Self> {
        if p >= Self::MAX {
            return Err(Error::PrimeTooLarge(p));
        }
        if p < 2 {
            return Err(Error::NotPrime(p));
        }
        let mut d = 2;
        while d * d <= p {
            if p.is_multiple_of(d) {
                return Err(Error::NotPrime(p));
            }
            d += 1;
        }
        Ok(Self(p))
    }

    /// The prime itself.
    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// The modulus `p^2` of the lifted ring.
    #[inline]
    pub fn squared(self) -> u64 {
        self.0 * self.0
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl std::fmt::Display for Prime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Multiplies two residues mod `modulus` through a `u128` intermediate.
#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, modulus: u64) -> u64 {
    ((a as u128 * b as u128) % modulus as u128) as u64
}

/// Additive inverse of a residue.
#[inline]
pub(crate) fn neg_mod(a: u64, modulus: u64) -> u64 {
    if a == 0 {
        0
    } else {
        modulus - a
    }
}

/// Multiplicative inverse mod `modulus` via the extended Euclidean algorithm.
///
/// Returns `None` when `a` and `modulus` are not coprime. Works for any
/// modulus, in particular both `p` and `p^2`.
pub(crate) fn inv_mod(a: u64, modulus: u64) -> Option<u64> {
    let (mut r0, mut r1) = (modulus as i128, (a % modulus) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(modulus as i128) as u64)
}
