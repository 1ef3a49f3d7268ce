//! Arithmetic in the prime field F_p and binomial coefficients mod p.
//!
//! The prime is carried as a runtime value; all functions take `p` explicitly
//! and scalars are residues in `0..p` stored as `u64`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    (a + b) % p
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    (a + p - b % p) % p
}

#[inline]
pub fn neg(a: u64, p: u64) -> u64 {
    (p - a % p) % p
}

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

pub fn pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    base %= p;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse mod p (p prime, a nonzero).
pub fn inv(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "division by zero mod {p}");
    pow(a, p - 2, p)
}

/// Reduce an arbitrary-precision integer to its residue in `0..p`.
pub fn reduce_bigint(n: &BigInt, p: u64) -> u64 {
    let m = n.mod_floor(&BigInt::from(p));
    m.to_u64().expect("residue fits in u64")
}

/// Generalized binomial coefficient `binom(m, n)` mod p in the
/// falling-factorial convention: `m (m-1) ... (m-n+1) / n!`, valid for
/// negative `m`.
pub fn binom_mod_p(m: i64, n: u64, p: u64) -> u64 {
    let mut num = BigInt::one();
    for i in 0..n {
        num *= BigInt::from(m) - BigInt::from(i);
    }
    let mut den = BigInt::one();
    for i in 1..=n {
        den *= BigInt::from(i);
    }
    let q = &num / &den;
    debug_assert!((&q * &den - &num).is_zero());
    reduce_bigint(&q, p)
}
