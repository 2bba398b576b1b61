use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{ArithError, RingElement};

/// Largest modulus accepted; keeps every product of two residues inside a `u64`.
pub const MAX_MODULUS: u64 = (1 << 31) - 1;

/// A prime modulus, checked once on construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(p: u64) -> Result<Self, ArithError> {
        if p > MAX_MODULUS || !is_prime(p) {
            return Err(ArithError::NotPrime(p));
        }
        Ok(Modulus(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Canonical residue of a signed integer.
    #[inline]
    pub fn reduce(self, v: i64) -> u64 {
        v.rem_euclid(self.0 as i64) as u64
    }

    /// `p^r`, or `None` on overflow.
    pub fn pow(self, r: u32) -> Option<u64> {
        self.0.checked_pow(r)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue by Fermat's little theorem.
pub(crate) fn inv_mod(a: u64, p: u64) -> Option<u64> {
    if a.is_multiple_of(p) {
        None
    } else {
        Some(pow_mod(a, p - 2, p))
    }
}

/// An element of the prime field `F_p`, stored as its canonical residue.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u64,
    modulus: u64,
}

impl Fp {
    pub fn new(value: i64, modulus: Modulus) -> Self {
        Fp {
            value: modulus.reduce(value),
            modulus: modulus.get(),
        }
    }

    pub(crate) fn from_residue(value: u64, modulus: u64) -> Self {
        debug_assert!(value < modulus);
        Fp { value, modulus }
    }

    pub fn zero(modulus: Modulus) -> Self {
        Fp::new(0, modulus)
    }

    pub fn one(modulus: Modulus) -> Self {
        Fp::new(1, modulus)
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> Modulus {
        Modulus(self.modulus)
    }

    pub fn inverse(self) -> Result<Fp, ArithError> {
        inv_mod(self.value, self.modulus)
            .map(|v| Fp::from_residue(v, self.modulus))
            .ok_or(ArithError::NotInvertible)
    }

    pub fn pow(self, e: u64) -> Fp {
        Fp::from_residue(pow_mod(self.value, e, self.modulus), self.modulus)
    }

    pub fn checked_add(self, other: Fp) -> Result<Fp, ArithError> {
        check(self.modulus, other.modulus)?;
        Ok(Fp::from_residue(
            add_mod(self.value, other.value, self.modulus),
            self.modulus,
        ))
    }

    pub fn checked_mul(self, other: Fp) -> Result<Fp, ArithError> {
        check(self.modulus, other.modulus)?;
        Ok(Fp::from_residue(
            mul_mod(self.value, other.value, self.modulus),
            self.modulus,
        ))
    }
}

pub(crate) fn check(a: u64, b: u64) -> Result<(), ArithError> {
    if a == b {
        Ok(())
    } else {
        Err(ArithError::ModulusMismatch { left: a, right: b })
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms panic on a modulus mismatch; the `checked_*` methods report it.
impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        self.checked_add(rhs).expect("modulus mismatch")
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        check(self.modulus, rhs.modulus).expect("modulus mismatch");
        Fp::from_residue(sub_mod(self.value, rhs.value, self.modulus), self.modulus)
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        self.checked_mul(rhs).expect("modulus mismatch")
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp::from_residue(sub_mod(0, self.value, self.modulus), self.modulus)
    }
}

impl RingElement for Fp {
    fn zero_like(&self) -> Self {
        Fp::from_residue(0, self.modulus)
    }
    fn one_like(&self) -> Self {
        Fp::from_residue(1, self.modulus)
    }
    fn constant_like(&self, c: u64) -> Self {
        Fp::from_residue(c % self.modulus, self.modulus)
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn sub(&self, other: &Self) -> Self {
        *self - *other
    }
    fn mul(&self, other: &Self) -> Self {
        *self * *other
    }
    fn neg(&self) -> Self {
        -*self
    }
}
