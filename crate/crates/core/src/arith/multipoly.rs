use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::fp::{add_mod, mul_mod, sub_mod};
use super::{ArithError, Modulus, RingElement};

/// Exponent vector, one entry per ring variable.
pub type Monomial = Vec<u32>;

/// A polynomial ring `F_p[x_1, ..., x_k]`, optionally modulo the monomial ideal
/// `(x_1^{c_1}, ..., x_k^{c_k})` given by per-variable caps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiRing {
    modulus: Modulus,
    vars: Vec<String>,
    caps: Option<Vec<u32>>,
}

impl MultiRing {
    pub fn new(modulus: Modulus, vars: Vec<String>) -> Arc<Self> {
        Arc::new(MultiRing {
            modulus,
            vars,
            caps: None,
        })
    }

    /// Exponents `>= caps[i]` in variable `i` are zero.
    pub fn truncated(modulus: Modulus, vars: Vec<String>, caps: Vec<u32>) -> Arc<Self> {
        assert_eq!(vars.len(), caps.len(), "one cap per variable");
        Arc::new(MultiRing {
            modulus,
            vars,
            caps: Some(caps),
        })
    }

    /// `F_p[t'] ⊗ F_p[t'']`, each leg optionally truncated at `cap`.
    pub fn tensor_square(modulus: Modulus, cap: Option<u32>) -> Arc<Self> {
        let vars = vec!["t'".to_string(), "t''".to_string()];
        match cap {
            Some(c) => MultiRing::truncated(modulus, vars, vec![c, c]),
            None => MultiRing::new(modulus, vars),
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn cap(&self, var: usize) -> Option<u32> {
        self.caps.as_ref().map(|c| c[var])
    }

    #[inline]
    fn survives(&self, exps: &[u32]) -> bool {
        match &self.caps {
            None => true,
            Some(caps) => exps.iter().zip(caps).all(|(e, c)| e < c),
        }
    }
}

/// Sparse polynomial in a [`MultiRing`]. No stored coefficient is zero.
#[derive(Clone)]
pub struct MultiPoly {
    ring: Arc<MultiRing>,
    terms: BTreeMap<Monomial, u64>,
}

fn same_ring(a: &Arc<MultiRing>, b: &Arc<MultiRing>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl MultiPoly {
    pub fn zero(ring: Arc<MultiRing>) -> Self {
        MultiPoly {
            ring,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: Arc<MultiRing>, c: u64) -> Self {
        let n = ring.num_vars();
        MultiPoly::from_residue_terms(ring, [(vec![0; n], c)])
    }

    pub fn one(ring: Arc<MultiRing>) -> Self {
        MultiPoly::constant(ring, 1)
    }

    pub fn var(ring: Arc<MultiRing>, i: usize) -> Self {
        let mut exps = vec![0; ring.num_vars()];
        exps[i] = 1;
        MultiPoly::from_residue_terms(ring, [(exps, 1)])
    }

    /// Sum of the given terms; repeated monomials are merged, coefficients reduced
    /// mod `p`, capped monomials dropped.
    pub fn from_residue_terms<I>(ring: Arc<MultiRing>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, u64)>,
    {
        let p = ring.modulus.get();
        let mut map = BTreeMap::new();
        for (exps, c) in terms {
            assert_eq!(exps.len(), ring.num_vars(), "exponent vector length");
            if !ring.survives(&exps) {
                continue;
            }
            accumulate(&mut map, exps, c % p, p);
        }
        MultiPoly { ring, terms: map }
    }

    pub fn ring(&self) -> &Arc<MultiRing> {
        &self.ring
    }

    pub fn modulus(&self) -> Modulus {
        self.ring.modulus
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> u64 {
        self.terms.get(exps).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> u64 {
        self.coeff(&vec![0; self.ring.num_vars()])
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    /// The component spanned by monomials of the given total degree.
    pub fn homogeneous_part(&self, degree: u32) -> MultiPoly {
        self.filter_terms(|m| m.iter().sum::<u32>() == degree)
    }

    pub fn filter_terms(&self, mut keep: impl FnMut(&[u32]) -> bool) -> MultiPoly {
        MultiPoly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ArithError> {
        self.combine(other, add_mod)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ArithError> {
        self.combine(other, sub_mod)
    }

    fn combine(&self, other: &Self, op: fn(u64, u64, u64) -> u64) -> Result<Self, ArithError> {
        if !same_ring(&self.ring, &other.ring) {
            return Err(ArithError::RingMismatch);
        }
        let p = self.ring.modulus.get();
        let mut terms = self.terms.clone();
        for (m, &c) in &other.terms {
            let entry = terms.entry(m.clone()).or_insert(0);
            *entry = op(*entry, c, p);
            if *entry == 0 {
                terms.remove(m);
            }
        }
        Ok(MultiPoly {
            ring: self.ring.clone(),
            terms,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ArithError> {
        if !same_ring(&self.ring, &other.ring) {
            return Err(ArithError::RingMismatch);
        }
        let p = self.ring.modulus.get();
        let mut out = BTreeMap::new();
        let mut buf = vec![0u32; self.ring.num_vars()];
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                for (slot, (x, y)) in buf.iter_mut().zip(ma.iter().zip(mb)) {
                    *slot = x + y;
                }
                if !self.ring.survives(&buf) {
                    continue;
                }
                accumulate(&mut out, buf.clone(), mul_mod(ca, cb, p), p);
            }
        }
        Ok(MultiPoly {
            ring: self.ring.clone(),
            terms: out,
        })
    }

    pub fn scale(&self, c: u64) -> Self {
        let p = self.ring.modulus.get();
        let c = c % p;
        if c == 0 {
            return MultiPoly::zero(self.ring.clone());
        }
        MultiPoly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &a)| (m.clone(), mul_mod(a, c, p)))
                .collect(),
        }
    }

    /// The algebra map sending variable `i` to `images[i]`, all in `target`.
    pub fn substitute(
        &self,
        images: &[MultiPoly],
        target: &Arc<MultiRing>,
    ) -> Result<MultiPoly, ArithError> {
        if images.len() != self.ring.num_vars() {
            return Err(ArithError::Dimension(format!(
                "{} images for {} variables",
                images.len(),
                self.ring.num_vars()
            )));
        }
        if images.iter().any(|img| !same_ring(&img.ring, target)) {
            return Err(ArithError::RingMismatch);
        }
        if self.ring.modulus != target.modulus {
            return Err(ArithError::ModulusMismatch {
                left: self.ring.modulus.get(),
                right: target.modulus.get(),
            });
        }
        // powers[i][e] = images[i]^e, filled lazily
        let mut powers: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|img| vec![MultiPoly::one(target.clone()), img.clone()])
            .collect();
        let mut acc = MultiPoly::zero(target.clone());
        for (m, &c) in &self.terms {
            let mut term = MultiPoly::constant(target.clone(), c);
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().try_mul(&images[i])?;
                    powers[i].push(next);
                }
                term = term.try_mul(&powers[i][e as usize])?;
                if term.is_zero() {
                    break;
                }
            }
            acc = acc.try_add(&term)?;
        }
        Ok(acc)
    }

    /// Rename variables: variable `i` of this ring becomes variable `map[i]` of `target`.
    pub fn relabel(&self, target: &Arc<MultiRing>, map: &[usize]) -> MultiPoly {
        assert_eq!(map.len(), self.ring.num_vars(), "one target per variable");
        let n = target.num_vars();
        let terms = self.terms.iter().map(|(m, &c)| {
            let mut exps = vec![0u32; n];
            for (i, &e) in m.iter().enumerate() {
                exps[map[i]] += e;
            }
            (exps, c)
        });
        MultiPoly::from_residue_terms(target.clone(), terms)
    }

    /// Evaluate at a point of `F_p^k`.
    pub fn eval(&self, point: &[u64]) -> u64 {
        let p = self.ring.modulus.get();
        self.terms.iter().fold(0, |acc, (m, &c)| {
            let v = m.iter().zip(point).fold(c, |v, (&e, &x)| {
                mul_mod(v, super::fp::pow_mod(x % p, e as u64, p), p)
            });
            add_mod(acc, v, p)
        })
    }
}

fn accumulate(map: &mut BTreeMap<Monomial, u64>, exps: Monomial, c: u64, p: u64) {
    if c == 0 {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(exps) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            let s = add_mod(*o.get(), c, p);
            if s == 0 {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self, self.ring.modulus)
    }
}

/// Terms in graded lexicographic order: ascending total degree, and within a
/// degree, larger exponents on earlier variables first.
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        for (k, (m, &c)) in terms.into_iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let factors: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    let v = &self.ring.vars[i];
                    if e == 1 {
                        v.clone()
                    } else {
                        format!("{v}^{e}")
                    }
                })
                .collect();
            match (factors.is_empty(), c) {
                (true, _) => write!(f, "{c}")?,
                (false, 1) => write!(f, "{}", factors.join("*"))?,
                (false, _) => write!(f, "{c}*{}", factors.join("*"))?,
            }
        }
        Ok(())
    }
}

impl RingElement for MultiPoly {
    fn zero_like(&self) -> Self {
        MultiPoly::zero(self.ring.clone())
    }
    fn one_like(&self) -> Self {
        MultiPoly::one(self.ring.clone())
    }
    fn constant_like(&self, c: u64) -> Self {
        MultiPoly::constant(self.ring.clone(), c)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("ring mismatch")
    }
    fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("ring mismatch")
    }
    fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("ring mismatch")
    }
    fn neg(&self) -> Self {
        self.scale(self.ring.modulus.get() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring3(p: u64) -> Arc<MultiRing> {
        MultiRing::new(
            Modulus::new(p).unwrap(),
            vec!["x".into(), "y".into(), "z".into()],
        )
    }

    #[test]
    fn arithmetic_and_printing() {
        let r = ring3(5);
        let x = MultiPoly::var(r.clone(), 0);
        let y = MultiPoly::var(r.clone(), 1);
        let s = x.add(&y);
        assert_eq!(s.mul(&s).to_string(), "x^2 + 2*x*y + y^2");
        assert!(s.sub(&s).is_zero());
        assert_eq!(s.pow(5).to_string(), "x^5 + y^5");
    }

    #[test]
    fn caps_kill_monomials() {
        let ring = MultiRing::truncated(Modulus::new(3).unwrap(), vec!["a".into()], vec![3]);
        let a = MultiPoly::var(ring.clone(), 0);
        assert!(a.pow(3).is_zero());
        assert_eq!(a.pow(2).to_string(), "a^2");
    }

    #[test]
    fn substitution_is_an_algebra_map() {
        let r = ring3(7);
        let x = MultiPoly::var(r.clone(), 0);
        let y = MultiPoly::var(r.clone(), 1);
        let z = MultiPoly::var(r.clone(), 2);
        let f = x.mul(&y).add(&z.scale(3));
        // x -> y, y -> x + z, z -> 1
        let images = vec![y.clone(), x.add(&z), MultiPoly::one(r.clone())];
        let g = f.substitute(&images, &r).unwrap();
        assert_eq!(g, y.mul(&x.add(&z)).add(&MultiPoly::constant(r.clone(), 3)));
    }

    #[test]
    fn relabel_and_eval() {
        let r = ring3(5);
        let target = MultiRing::new(Modulus::new(5).unwrap(), vec!["u".into(), "v".into()]);
        let x = MultiPoly::var(r.clone(), 0);
        let z = MultiPoly::var(r.clone(), 2);
        let f = x.mul(&z).add(&x);
        let g = f.relabel(&target, &[1, 0, 1]);
        assert_eq!(g.to_string(), "v + v^2");
        assert_eq!(f.eval(&[2, 0, 3]), (2 * 3 + 2) % 5);
    }

    #[test]
    fn mismatched_rings_rejected() {
        let a = MultiPoly::var(ring3(5), 0);
        let b = MultiPoly::var(ring3(7), 0);
        assert_eq!(a.try_add(&b), Err(ArithError::RingMismatch));
    }
}
