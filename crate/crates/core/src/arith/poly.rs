use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::fp::{add_mod, check, mul_mod, sub_mod};
use super::{ArithError, BinomialTable, Modulus, MultiPoly, MultiRing, RingElement, TruncatedPoly};

/// Dense univariate polynomial over `F_p`, lowest degree first.
///
/// The coefficient vector never ends in a zero, so the zero polynomial is the
/// empty vector and `degree` is `coeffs.len() - 1`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct Poly {
    modulus: Modulus,
    coeffs: Vec<u64>,
}

/// Wire format shared by [`Poly`] and [`TruncatedPoly`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    pub coeffs: Vec<i64>,
}

impl TryFrom<PolyJson> for Poly {
    type Error = ArithError;
    fn try_from(json: PolyJson) -> Result<Self, Self::Error> {
        Ok(Poly::new(Modulus::new(json.p)?, &json.coeffs))
    }
}

impl From<Poly> for PolyJson {
    fn from(poly: Poly) -> Self {
        PolyJson {
            p: poly.modulus.get(),
            r: None,
            coeffs: poly.coeffs.iter().map(|&c| c as i64).collect(),
        }
    }
}

impl Poly {
    pub fn new(modulus: Modulus, coeffs: &[i64]) -> Self {
        Poly::from_residues(modulus, coeffs.iter().map(|&c| modulus.reduce(c)).collect())
    }

    /// Build from residues already in `[0, p)`.
    pub fn from_residues(modulus: Modulus, mut coeffs: Vec<u64>) -> Self {
        debug_assert!(coeffs.iter().all(|&c| c < modulus.get()));
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { modulus, coeffs }
    }

    pub fn zero(modulus: Modulus) -> Self {
        Poly {
            modulus,
            coeffs: Vec::new(),
        }
    }

    pub fn one(modulus: Modulus) -> Self {
        Poly::monomial(modulus, 1, 0)
    }

    /// The coordinate function `t`.
    pub fn t(modulus: Modulus) -> Self {
        Poly::monomial(modulus, 1, 1)
    }

    pub fn monomial(modulus: Modulus, c: u64, degree: usize) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = c % modulus.get();
        Poly::from_residues(modulus, coeffs)
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly, ArithError> {
        let p = self.check(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| add_mod(self.coeff(i), other.coeff(i), p))
            .collect();
        Ok(Poly::from_residues(self.modulus, coeffs))
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly, ArithError> {
        let p = self.check(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| sub_mod(self.coeff(i), other.coeff(i), p))
            .collect();
        Ok(Poly::from_residues(self.modulus, coeffs))
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly, ArithError> {
        let p = self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero(self.modulus));
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = add_mod(out[i + j], mul_mod(a, b, p), p);
            }
        }
        Ok(Poly::from_residues(self.modulus, out))
    }

    pub fn scale(&self, c: u64) -> Poly {
        let p = self.modulus.get();
        let c = c % p;
        Poly::from_residues(
            self.modulus,
            self.coeffs.iter().map(|&a| mul_mod(a, c, p)).collect(),
        )
    }

    /// The projection `F_p[t] -> F_p[t]/(t^{p^r})`.
    pub fn truncate(&self, r: u32) -> Result<TruncatedPoly, ArithError> {
        let len = TruncatedPoly::length(self.modulus, r)?;
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, 0);
        Ok(TruncatedPoly::from_dense(self.modulus, r, coeffs))
    }

    /// Replace `t` by `t^{p^i}`.
    pub fn substitute_frobenius(&self, i: u32) -> Poly {
        let step = self.modulus.pow(i).expect("Frobenius twist overflows") as usize;
        if step == 1 || self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0; (self.coeffs.len() - 1) * step + 1];
        for (d, &c) in self.coeffs.iter().enumerate() {
            coeffs[d * step] = c;
        }
        Poly::from_residues(self.modulus, coeffs)
    }

    /// Inverse of [`Self::substitute_frobenius`] with `i = 1`: returns `q` with
    /// `q(t^p) = self`, or the first degree that is not a multiple of `p`.
    pub fn frobenius_root(&self) -> Result<Poly, usize> {
        let p = self.modulus.get() as usize;
        if let Some(bad) = (0..self.coeffs.len()).find(|&d| d % p != 0 && self.coeffs[d] != 0) {
            return Err(bad);
        }
        let coeffs = self.coeffs.iter().step_by(p).copied().collect();
        Ok(Poly::from_residues(self.modulus, coeffs))
    }

    /// `Δ(f) = f(t' + t'')` in `F_p[t', t'']`.
    pub fn comultiply(&self) -> MultiPoly {
        let ring = MultiRing::tensor_square(self.modulus, None);
        comultiply_dense(&self.coeffs, self.modulus, ring)
    }

    /// `f` written in the variable `var` of `ring`; terms beyond the ring's cap on
    /// that variable vanish.
    pub fn embed(&self, ring: &Arc<MultiRing>, var: usize) -> MultiPoly {
        let nvars = ring.num_vars();
        let cap = ring.cap(var);
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|&(d, &c)| c != 0 && cap.is_none_or(|cap| (d as u32) < cap))
            .map(|(d, &c)| {
                let mut exps = vec![0u32; nvars];
                exps[var] = d as u32;
                (exps, c)
            });
        MultiPoly::from_residue_terms(ring.clone(), terms)
    }

    /// Evaluate at a point of `F_p`.
    pub fn eval(&self, x: u64) -> u64 {
        let p = self.modulus.get();
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| add_mod(mul_mod(acc, x % p, p), c, p))
    }

    fn check(&self, other: &Poly) -> Result<u64, ArithError> {
        check(self.modulus.get(), other.modulus.get())?;
        Ok(self.modulus.get())
    }
}

/// Shared by the truncated and untruncated comultiplication: coefficient of
/// `t'^a t''^b` is `c_{a+b} * binom(a+b, a)`; the ring's caps drop whatever the
/// truncation kills.
pub(crate) fn comultiply_dense(
    coeffs: &[u64],
    modulus: Modulus,
    ring: Arc<MultiRing>,
) -> MultiPoly {
    let p = modulus.get();
    let top = coeffs.len().saturating_sub(1);
    let binom = BinomialTable::new(top, p);
    let (cap_a, cap_b) = (ring.cap(0), ring.cap(1));
    let mut terms = Vec::new();
    for (m, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for a in 0..=m {
            let b = m - a;
            if cap_a.is_some_and(|cap| a as u32 >= cap) || cap_b.is_some_and(|cap| b as u32 >= cap)
            {
                continue;
            }
            let coeff = mul_mod(c, binom.get(m, a), p);
            if coeff != 0 {
                terms.push((vec![a as u32, b as u32], coeff));
            }
        }
    }
    MultiPoly::from_residue_terms(ring, terms)
}

/// Checked product; fails on a modulus mismatch.
pub fn poly_mul(a: &Poly, b: &Poly) -> Result<Poly, ArithError> {
    a.try_mul(b)
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self, self.modulus)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_univariate(f, &self.coeffs, "t")
    }
}

pub(crate) fn write_univariate(
    f: &mut fmt::Formatter<'_>,
    coeffs: &[u64],
    var: &str,
) -> fmt::Result {
    let mut first = true;
    for (d, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        match (d, c) {
            (0, _) => write!(f, "{c}")?,
            (1, 1) => write!(f, "{var}")?,
            (1, _) => write!(f, "{c}{var}")?,
            (_, 1) => write!(f, "{var}^{d}")?,
            _ => write!(f, "{c}{var}^{d}")?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.try_add(rhs).expect("modulus mismatch")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.try_sub(rhs).expect("modulus mismatch")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.try_mul(rhs).expect("modulus mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(self.modulus.get() - 1)
    }
}

impl RingElement for Poly {
    fn zero_like(&self) -> Self {
        Poly::zero(self.modulus)
    }
    fn one_like(&self) -> Self {
        Poly::one(self.modulus)
    }
    fn constant_like(&self, c: u64) -> Self {
        Poly::monomial(self.modulus, c, 0)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u64) -> Modulus {
        Modulus::new(p).unwrap()
    }

    #[test]
    fn products() {
        let p5 = m(5);
        let t = Poly::t(p5);
        assert_eq!(&t * &t, Poly::monomial(p5, 1, 2));

        let p2 = m(2);
        let a = Poly::new(p2, &[1, 1]);
        assert_eq!(&a * &a, Poly::new(p2, &[1, 0, 1]));

        // (2 + 3t)(4 + t) = 8 + 14t + 3t^2 = 3 + 4t + 3t^2 mod 5
        let a = Poly::new(p5, &[2, 3]);
        let b = Poly::new(p5, &[4, 1]);
        assert_eq!(poly_mul(&a, &b).unwrap(), Poly::new(p5, &[3, 4, 3]));
    }

    #[test]
    fn mixed_modulus_product_is_an_error() {
        let a = Poly::t(m(5));
        let b = Poly::t(m(7));
        assert_eq!(
            poly_mul(&a, &b),
            Err(ArithError::ModulusMismatch { left: 5, right: 7 })
        );
    }

    #[test]
    fn truncation() {
        let p5 = m(5);
        assert!(Poly::monomial(p5, 1, 25).truncate(2).unwrap().is_zero());
        let f = Poly::new(p5, &[0, 1, 0, 0, 0, 1]);
        assert_eq!(f.truncate(2).unwrap().canonical_lift(), f);
        let mut c = vec![0i64; 26];
        c[1] = 1;
        c[5] = 1;
        c[25] = 1;
        let g = Poly::new(p5, &c);
        assert_eq!(g.truncate(2).unwrap().canonical_lift(), f);
        assert_eq!(f.truncate(0), Err(ArithError::ZeroHeight));
    }

    #[test]
    fn comultiplication_of_small_powers() {
        let p5 = m(5);
        let d = Poly::t(p5).comultiply();
        assert_eq!(d.to_string(), "t' + t''");

        let d = Poly::monomial(p5, 1, 5).comultiply();
        assert_eq!(d.to_string(), "t'^5 + t''^5");

        let d = Poly::monomial(p5, 1, 2).comultiply();
        assert_eq!(d.to_string(), "t'^2 + 2*t'*t'' + t''^2");
    }

    #[test]
    fn frobenius_substitution() {
        let p3 = m(3);
        let f = Poly::new(p3, &[0, 1, 1]);
        assert_eq!(
            f.substitute_frobenius(1),
            Poly::new(p3, &[0, 0, 0, 1, 0, 0, 1])
        );
        assert_eq!(f.substitute_frobenius(0), f);
        assert_eq!(
            Poly::t(p3).substitute_frobenius(1),
            Poly::monomial(p3, 1, 3)
        );
        assert_eq!(f.substitute_frobenius(1).frobenius_root(), Ok(f.clone()));
        assert_eq!(f.frobenius_root(), Err(1));
    }

    #[test]
    fn json_shape() {
        let f = Poly::new(m(5), &[0, 1, -1]);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"p":5,"coeffs":[0,1,4]}"#);
        let back: Poly = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<Poly>(r#"{"p":6,"coeffs":[1]}"#).is_err());
    }
}
