use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::fp::{add_mod, check, mul_mod, sub_mod};
use super::poly::{comultiply_dense, write_univariate, PolyJson};
use super::{ArithError, Modulus, MultiPoly, MultiRing, Poly, RingElement};

/// Largest truncation length `p^r` we are willing to allocate densely.
const MAX_LENGTH: u64 = 1 << 22;

/// An element of `F_p[t]/(t^{p^r})`, stored as its degree `< p^r` representative.
///
/// The coefficient vector always has length exactly `p^r`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct TruncatedPoly {
    modulus: Modulus,
    height: u32,
    coeffs: Vec<u64>,
}

impl TryFrom<PolyJson> for TruncatedPoly {
    type Error = ArithError;
    fn try_from(json: PolyJson) -> Result<Self, Self::Error> {
        let modulus = Modulus::new(json.p)?;
        let r = json.r.ok_or(ArithError::ZeroHeight)?;
        TruncatedPoly::new(modulus, r, &json.coeffs)
    }
}

impl From<TruncatedPoly> for PolyJson {
    fn from(poly: TruncatedPoly) -> Self {
        let lift = poly.canonical_lift();
        PolyJson {
            p: poly.modulus.get(),
            r: Some(poly.height),
            coeffs: lift.coeffs().iter().map(|&c| c as i64).collect(),
        }
    }
}

impl TruncatedPoly {
    /// `p^r`, validated.
    pub fn length(modulus: Modulus, r: u32) -> Result<usize, ArithError> {
        if r == 0 {
            return Err(ArithError::ZeroHeight);
        }
        match modulus.pow(r) {
            Some(len) if len <= MAX_LENGTH => Ok(len as usize),
            _ => Err(ArithError::HeightTooLarge {
                p: modulus.get(),
                r,
            }),
        }
    }

    /// Reject (rather than silently truncate) inputs with more than `p^r` coefficients.
    pub fn new(modulus: Modulus, r: u32, coeffs: &[i64]) -> Result<Self, ArithError> {
        let len = Self::length(modulus, r)?;
        let mut dense: Vec<u64> = coeffs.iter().map(|&c| modulus.reduce(c)).collect();
        while dense.len() > len && dense.last() == Some(&0) {
            dense.pop();
        }
        if dense.len() > len {
            return Err(ArithError::TooManyCoefficients {
                len: dense.len(),
                cap: len,
            });
        }
        dense.resize(len, 0);
        Ok(TruncatedPoly::from_dense(modulus, r, dense))
    }

    pub(crate) fn from_dense(modulus: Modulus, height: u32, coeffs: Vec<u64>) -> Self {
        debug_assert_eq!(Some(coeffs.len() as u64), modulus.pow(height));
        TruncatedPoly {
            modulus,
            height,
            coeffs,
        }
    }

    pub fn zero(modulus: Modulus, r: u32) -> Result<Self, ArithError> {
        let len = Self::length(modulus, r)?;
        Ok(TruncatedPoly::from_dense(modulus, r, vec![0; len]))
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// `p^r`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Index of the top nonzero coefficient.
    pub fn top_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0)
    }

    /// The unique preimage of degree `< p^r` under the truncation map.
    pub fn canonical_lift(&self) -> Poly {
        Poly::from_residues(self.modulus, self.coeffs.clone())
    }

    /// Comultiplication with each tensor leg truncated at `p^r`.
    pub fn comultiply(&self) -> MultiPoly {
        let cap = self.coeffs.len() as u32;
        let ring = MultiRing::tensor_square(self.modulus, Some(cap));
        comultiply_dense(&self.coeffs, self.modulus, ring)
    }

    /// Same element viewed at a smaller height.
    pub fn restrict(&self, r: u32) -> Result<TruncatedPoly, ArithError> {
        if r > self.height {
            return Err(ArithError::HeightMismatch {
                left: self.height,
                right: r,
            });
        }
        self.canonical_lift().truncate(r)
    }

    /// See [`Poly::embed`].
    pub fn embed(&self, ring: &Arc<MultiRing>, var: usize) -> MultiPoly {
        self.canonical_lift().embed(ring, var)
    }

    pub fn scale(&self, c: u64) -> TruncatedPoly {
        let p = self.modulus.get();
        let c = c % p;
        let coeffs = self.coeffs.iter().map(|&a| mul_mod(a, c, p)).collect();
        TruncatedPoly::from_dense(self.modulus, self.height, coeffs)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ArithError> {
        let p = self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| add_mod(a, b, p))
            .collect();
        Ok(TruncatedPoly::from_dense(self.modulus, self.height, coeffs))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ArithError> {
        let p = self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| sub_mod(a, b, p))
            .collect();
        Ok(TruncatedPoly::from_dense(self.modulus, self.height, coeffs))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ArithError> {
        let p = self.check(other)?;
        let n = self.coeffs.len();
        let mut out = vec![0u64; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs[..n - i].iter().enumerate() {
                out[i + j] = add_mod(out[i + j], mul_mod(a, b, p), p);
            }
        }
        Ok(TruncatedPoly::from_dense(self.modulus, self.height, out))
    }

    fn check(&self, other: &Self) -> Result<u64, ArithError> {
        check(self.modulus.get(), other.modulus.get())?;
        if self.height != other.height {
            return Err(ArithError::HeightMismatch {
                left: self.height,
                right: other.height,
            });
        }
        Ok(self.modulus.get())
    }
}

impl fmt::Debug for TruncatedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (mod {}, t^{})",
            self,
            self.modulus,
            self.coeffs.len()
        )
    }
}

impl fmt::Display for TruncatedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_univariate(f, &self.coeffs, "t")
    }
}

impl RingElement for TruncatedPoly {
    fn zero_like(&self) -> Self {
        TruncatedPoly::from_dense(self.modulus, self.height, vec![0; self.coeffs.len()])
    }
    fn one_like(&self) -> Self {
        self.constant_like(1)
    }
    fn constant_like(&self, c: u64) -> Self {
        let mut coeffs = vec![0; self.coeffs.len()];
        coeffs[0] = c % self.modulus.get();
        TruncatedPoly::from_dense(self.modulus, self.height, coeffs)
    }
    fn is_zero(&self) -> bool {
        TruncatedPoly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other)
            .expect("incompatible truncated polynomials")
    }
    fn sub(&self, other: &Self) -> Self {
        self.try_sub(other)
            .expect("incompatible truncated polynomials")
    }
    fn mul(&self, other: &Self) -> Self {
        self.try_mul(other)
            .expect("incompatible truncated polynomials")
    }
    fn neg(&self) -> Self {
        self.scale(self.modulus.get() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_is_identity_on_representatives() {
        let p5 = Modulus::new(5).unwrap();
        let a = TruncatedPoly::new(p5, 1, &[0, 1, 0, 2]).unwrap();
        assert_eq!(a.canonical_lift(), Poly::new(p5, &[0, 1, 0, 2]));
        let z = TruncatedPoly::zero(p5, 1).unwrap();
        assert!(z.canonical_lift().is_zero());
    }

    #[test]
    fn product_wraps_to_zero() {
        let p3 = Modulus::new(3).unwrap();
        let a = TruncatedPoly::new(p3, 1, &[0, 1]).unwrap();
        let sq = a.try_mul(&a).unwrap();
        assert_eq!(sq.coeffs(), &[0, 0, 1]);
        assert!(sq.try_mul(&a).unwrap().is_zero());
    }

    #[test]
    fn overlong_input_rejected() {
        let p3 = Modulus::new(3).unwrap();
        assert!(TruncatedPoly::new(p3, 1, &[0, 1, 1, 1]).is_err());
        assert!(TruncatedPoly::new(p3, 1, &[0, 1, 1, 0, 0]).is_ok());
    }

    #[test]
    fn comultiply_truncates_each_leg() {
        let p3 = Modulus::new(3).unwrap();
        // t^2 in F_3[t]/(t^3): t'^2 + 2*t'*t'' + t''^2, nothing dropped.
        let a = TruncatedPoly::new(p3, 1, &[0, 0, 1]).unwrap();
        assert_eq!(a.comultiply().to_string(), "t'^2 + 2*t'*t'' + t''^2");
    }

    #[test]
    fn json_round_trip() {
        let p5 = Modulus::new(5).unwrap();
        let a = TruncatedPoly::new(p5, 2, &[0, 1, 0, 0, 0, 3]).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"p":5,"r":2,"coeffs":[0,1,0,0,0,3]}"#);
        assert_eq!(serde_json::from_str::<TruncatedPoly>(&json).unwrap(), a);
    }
}
