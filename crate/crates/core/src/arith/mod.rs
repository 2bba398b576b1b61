//! Exact arithmetic over prime fields: residues, dense univariate polynomials,
//! truncated polynomials `F_p[t]/(t^{p^r})`, sparse multivariate polynomials and
//! small dense matrices over any of these.
//!
//! The coalgebra structure on `F_p[t]` (where `t` is primitive) lives here too,
//! since every Hopf-algebra check in the crate bottoms out in [`Poly::comultiply`]
//! or [`TruncatedPoly::comultiply`].

mod fp;
mod matrix;
mod multipoly;
mod poly;
mod truncated;

use thiserror::Error;

pub use fp::{is_prime, Fp, Modulus, MAX_MODULUS};
pub use matrix::Mat;
pub use multipoly::{Monomial, MultiPoly, MultiRing};
pub use poly::{poly_mul, Poly};
pub use truncated::TruncatedPoly;

pub(crate) use fp::add_mod;
pub(crate) use matrix::{nullspace, rank, rref};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("{0} is not a supported prime modulus")]
    NotPrime(u64),
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("element is not invertible")]
    NotInvertible,
    #[error("height must be at least 1")]
    ZeroHeight,
    #[error("p^r overflows for p = {p}, r = {r}")]
    HeightTooLarge { p: u64, r: u32 },
    #[error("height mismatch: {left} vs {right}")]
    HeightMismatch { left: u32, right: u32 },
    #[error("polynomial has {len} coefficients but the truncation keeps only {cap}")]
    TooManyCoefficients { len: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable sets differ")]
    RingMismatch,
}

/// Commutative ring elements that know their own ring.
///
/// Every element carries enough context (modulus, height, variable set) to
/// produce the zero, one and integer constants of its ring, which is what lets
/// [`Mat`] and the exponential work uniformly over `F_p`, `F_p[t]`,
/// truncations of it, and multivariate polynomial rings.
pub trait RingElement: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    /// Image of the residue `c` under the structure map `F_p -> R`.
    fn constant_like(&self, c: u64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// Binomial coefficients mod `p` for `0 <= k <= n <= max_n`, as a Pascal triangle.
pub(crate) struct BinomialTable {
    rows: Vec<Vec<u64>>,
}

impl BinomialTable {
    pub(crate) fn new(max_n: usize, p: u64) -> Self {
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(max_n + 1);
        for n in 0..=max_n {
            let mut row = vec![1 % p; n + 1];
            for k in 1..n {
                let prev = &rows[n - 1];
                row[k] = add_mod(prev[k - 1], prev[k], p);
            }
            rows.push(row);
        }
        BinomialTable { rows }
    }

    #[inline]
    pub(crate) fn get(&self, n: usize, k: usize) -> u64 {
        self.rows[n][k]
    }
}
