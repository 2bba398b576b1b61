//! Truncated exponentials and the correspondence between commuting tuples of
//! nilpotent matrices and one-parameter subgroups.
//!
//! A tuple `(x_0, ..., x_{r-1})` of pairwise commuting elements of `Lie(U)` gives
//! the one-parameter subgroup `t -> exp(t x_0) exp(t^p x_1) ... exp(t^{p^{r-1}} x_{r-1})`.
//! [`extract_tuple`] inverts this by peeling off one factor at a time.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{nullspace, rank, rref, ArithError, Fp, Mat, Modulus, Poly, RingElement};
use crate::morphisms::{InfinitesimalSubgroup, MorphismError, OneParamSubgroup};
use crate::unipotent::{BlockUnipotentGroup, UnipotentError};

/// Peeling a global subgroup of degree `d` takes at most `log_p d + 1` steps.
const MAX_PEELS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Unipotent(#[from] UnipotentError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error("matrix {index} is not nilpotent of order at most {bound}")]
    NotNilpotent { index: usize, bound: usize },
    #[error("matrices {i} and {j} do not commute")]
    NotCommuting { i: usize, j: usize },
    #[error("not in the image of the tuple map: entry ({row}, {col}) keeps a t^{degree} term after peeling {peeled} factor(s)")]
    NotInImage {
        row: usize,
        col: usize,
        degree: usize,
        peeled: usize,
    },
    #[error("tuple has {got} entries, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("matrix has size {got}, expected {expected}")]
    SizeMismatch { got: usize, expected: usize },
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

/// An element of `Lie(U)`: zero on and below the block diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct NilpotentMatrix {
    matrix: Mat<Fp>,
}

impl NilpotentMatrix {
    pub fn new(group: &BlockUnipotentGroup, matrix: Mat<Fp>) -> Result<Self, ExpError> {
        group.check_lie_element(&matrix)?;
        Ok(NilpotentMatrix { matrix })
    }

    /// `Σ c_g E_g` over the generator positions.
    pub fn from_coords(group: &BlockUnipotentGroup, coords: &[u64]) -> Self {
        assert_eq!(
            coords.len(),
            group.num_generators(),
            "one coordinate per generator"
        );
        let mut m = Mat::zeros_mod(group.modulus(), group.n());
        for (g, &c) in group.generators().iter().zip(coords) {
            m.set(g.row, g.col, Fp::new(c as i64, group.modulus()));
        }
        NilpotentMatrix { matrix: m }
    }

    pub fn matrix(&self) -> &Mat<Fp> {
        &self.matrix
    }

    pub fn coords(&self, group: &BlockUnipotentGroup) -> Vec<u64> {
        group
            .generators()
            .iter()
            .map(|g| self.matrix.get(g.row, g.col).value())
            .collect()
    }

    /// `exp(s x)`.
    pub fn exp<T: RingElement>(&self, s: &T) -> Mat<T> {
        exp_matrix(&self.matrix, s).expect("elements of Lie(U) satisfy x^p = 0")
    }
}

/// `exp(s x) = Σ_{n<p} s^n x^n / n!`, requiring `x^p = 0`.
pub fn exp_matrix<T: RingElement>(x: &Mat<Fp>, s: &T) -> Result<Mat<T>, ExpError> {
    let modulus = x.modulus();
    let p = modulus.get();
    let mut terms = Vec::with_capacity(p as usize);
    let mut power = Mat::identity_mod(modulus, x.n());
    let mut inv_factorial = Fp::one(modulus);
    for n in 0..p {
        if n > 0 {
            power = power.mul(x);
            inv_factorial = inv_factorial * Fp::new(n as i64, modulus).inverse()?;
        }
        if power.is_zero() {
            break;
        }
        terms.push(power.map(|c| *c * inv_factorial));
    }
    if !power.mul(x).is_zero() {
        return Err(ExpError::NotNilpotent {
            index: 0,
            bound: p as usize,
        });
    }
    let mut acc = Mat::zeros(x.n(), &s.zero_like());
    let mut s_power = s.one_like();
    for term in &terms {
        let lifted = term.map(|c| s.constant_like(c.value()).mul(&s_power));
        acc = acc.add(&lifted);
        s_power = s_power.mul(s);
    }
    Ok(acc)
}

/// Pairwise commuting elements `(x_0, ..., x_{r-1})` of `Lie(U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingTuple {
    group: Arc<BlockUnipotentGroup>,
    entries: Vec<Mat<Fp>>,
}

impl CommutingTuple {
    pub fn new(group: &Arc<BlockUnipotentGroup>, entries: Vec<Mat<Fp>>) -> Result<Self, ExpError> {
        for m in &entries {
            group.check_lie_element(m)?;
        }
        check_commuting(&entries)?;
        Ok(CommutingTuple {
            group: group.clone(),
            entries,
        })
    }

    /// From generator coordinates, one vector per entry.
    pub fn from_coords(
        group: &Arc<BlockUnipotentGroup>,
        coords: &[Vec<u64>],
    ) -> Result<Self, ExpError> {
        let entries = coords
            .iter()
            .map(|c| NilpotentMatrix::from_coords(group, c).matrix)
            .collect();
        Self::new(group, entries)
    }

    pub fn zero(group: &Arc<BlockUnipotentGroup>, r: usize) -> Self {
        CommutingTuple {
            group: group.clone(),
            entries: vec![Mat::zeros_mod(group.modulus(), group.n()); r],
        }
    }

    pub fn group(&self) -> &Arc<BlockUnipotentGroup> {
        &self.group
    }

    pub fn entries(&self) -> &[Mat<Fp>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Append zero entries up to length `r`.
    pub fn padded(&self, r: usize) -> Self {
        let mut entries = self.entries.clone();
        if entries.len() < r {
            entries.resize(r, Mat::zeros_mod(self.group.modulus(), self.group.n()));
        }
        CommutingTuple {
            group: self.group.clone(),
            entries,
        }
    }

    /// Drop trailing zero entries.
    pub fn trimmed(&self) -> Self {
        let keep = self
            .entries
            .iter()
            .rposition(|m| !m.is_zero())
            .map_or(0, |i| i + 1);
        CommutingTuple {
            group: self.group.clone(),
            entries: self.entries[..keep].to_vec(),
        }
    }

    /// Generator coordinates of each entry.
    pub fn coords(&self) -> Vec<Vec<u64>> {
        self.entries
            .iter()
            .map(|m| {
                self.group
                    .generators()
                    .iter()
                    .map(|g| m.get(g.row, g.col).value())
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> TupleJson {
        TupleJson::from_matrices(self.group.p(), self.group.n(), &self.entries)
    }
}

fn check_commuting(entries: &[Mat<Fp>]) -> Result<(), ExpError> {
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            if !entries[i].commutes_with(&entries[j]) {
                return Err(ExpError::NotCommuting { i, j });
            }
        }
    }
    Ok(())
}

/// `t -> exp(t x_0) exp(t^p x_1) ... exp(t^{p^{r-1}} x_{r-1})`.
pub fn one_param_from_tuple(tuple: &CommutingTuple) -> Result<OneParamSubgroup, ExpError> {
    let group = &tuple.group;
    let modulus = group.modulus();
    let mut acc = Mat::identity(group.n(), &Poly::zero(modulus));
    let mut degree = 1usize;
    for x in &tuple.entries {
        if !x.is_zero() {
            acc = acc.mul(&exp_matrix(x, &Poly::monomial(modulus, 1, degree))?);
        }
        degree *= modulus.get() as usize;
    }
    Ok(OneParamSubgroup::from_matrix(group, &acc)?)
}

/// The restriction of [`one_param_from_tuple`] to `G_{a(r)}`, for a tuple of length `r`.
pub fn tuple_to_infinitesimal(
    tuple: &CommutingTuple,
    r: u32,
) -> Result<InfinitesimalSubgroup, ExpError> {
    if tuple.len() != r as usize {
        return Err(ExpError::LengthMismatch {
            got: tuple.len(),
            expected: r as usize,
        });
    }
    Ok(one_param_from_tuple(tuple)?.restrict(r)?)
}

/// Recover the tuple with `one_param_from_tuple(tuple) = ψ`. The result has no
/// trailing zero entries; use [`CommutingTuple::padded`] to fix a length.
pub fn extract_tuple(psi: &OneParamSubgroup) -> Result<CommutingTuple, ExpError> {
    let group = psi.group();
    let modulus = group.modulus();
    let minus_t = Poly::monomial(modulus, modulus.get() - 1, 1);
    let mut current = psi.to_matrix();
    let mut entries = Vec::new();
    while !current.is_identity() {
        if entries.len() == MAX_PEELS {
            return Err(ExpError::InternalInvariant(
                "peeling did not terminate".into(),
            ));
        }
        let x = current.map(|f| Fp::new(f.coeff(1) as i64, modulus));
        let peeled = exp_matrix(&x, &minus_t)?.mul(&current);
        let mut next = Vec::with_capacity(group.n() * group.n());
        for i in 0..group.n() {
            for j in 0..group.n() {
                match peeled.get(i, j).frobenius_root() {
                    Ok(root) => next.push(root),
                    Err(degree) => {
                        return Err(ExpError::NotInImage {
                            row: i,
                            col: j,
                            degree,
                            peeled: entries.len(),
                        });
                    }
                }
            }
        }
        current = Mat::from_vec(group.n(), next)?;
        entries.push(x);
    }
    CommutingTuple::new(group, entries)
}

/// An invertible `g` with `g x g^{-1}` strictly upper triangular for every `x` in `xs`.
///
/// Builds a flag `v_1, v_2, ...` with `x v_k ∈ span(v_1, ..., v_{k-1})`. At each
/// step the candidates form the subspace `{v : x_i v ∈ W}`, and we take the last
/// row of its reduced echelon basis that is not already in `W`; at the first step
/// this is the lexicographically smallest nonzero common-kernel vector.
pub fn engel_flag(modulus: Modulus, n: usize, xs: &[Mat<Fp>]) -> Result<Mat<Fp>, ExpError> {
    let p = modulus.get();
    for (index, x) in xs.iter().enumerate() {
        if x.n() != n {
            return Err(ExpError::SizeMismatch {
                got: x.n(),
                expected: n,
            });
        }
        if x.modulus() != modulus {
            return Err(ArithError::ModulusMismatch {
                left: p,
                right: x.modulus().get(),
            }
            .into());
        }
        if !x.is_nilpotent() {
            return Err(ExpError::NotNilpotent { index, bound: n });
        }
    }
    check_commuting(xs)?;

    let residues: Vec<Vec<u64>> = xs.iter().map(Mat::to_residues).collect();
    let mut flag: Vec<Vec<u64>> = Vec::with_capacity(n);
    while flag.len() < n {
        // Rows of `annihilator` cut out span(flag).
        let annihilator = nullspace(flag.clone(), n, p);
        let mut conditions = Vec::new();
        for x in &residues {
            for q in &annihilator {
                let row: Vec<u64> = (0..n)
                    .map(|c| (0..n).fold(0, |acc, k| (acc + q[k] * x[k * n + c]) % p))
                    .collect();
                conditions.push(row);
            }
        }
        let candidates = nullspace(conditions, n, p);
        let (basis, _) = rref(candidates, p);
        let base_rank = flag.len();
        let next = basis.into_iter().rev().find(|v| {
            let mut with = flag.clone();
            with.push(v.clone());
            rank(with, p) > base_rank
        });
        match next {
            Some(v) => flag.push(v),
            None => {
                return Err(ExpError::InternalInvariant(
                    "no flag extension for commuting nilpotents".into(),
                ))
            }
        }
    }
    let basis_change = Mat::from_fn(n, |i, j| Fp::new(flag[j][i] as i64, modulus));
    let g = basis_change.inverse()?;
    for x in xs {
        if !g.mul(x).mul(&basis_change).is_strictly_upper() {
            return Err(ExpError::InternalInvariant(
                "flag does not triangularize".into(),
            ));
        }
    }
    Ok(g)
}

/// `{"p": 5, "n": 3, "entries": [[row-major ints], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleJson {
    pub p: u64,
    pub n: usize,
    pub entries: Vec<Vec<i64>>,
}

impl TupleJson {
    pub fn from_matrices(p: u64, n: usize, matrices: &[Mat<Fp>]) -> Self {
        let entries = matrices
            .iter()
            .map(|m| m.to_residues().into_iter().map(|v| v as i64).collect())
            .collect();
        TupleJson { p, n, entries }
    }

    pub fn matrices(&self) -> Result<Vec<Mat<Fp>>, ExpError> {
        let modulus = Modulus::new(self.p)?;
        Ok(self
            .entries
            .iter()
            .map(|e| Mat::from_ints(modulus, self.n, e))
            .collect::<Result<Vec<_>, _>>()?)
    }

    pub fn to_tuple(&self, group: &Arc<BlockUnipotentGroup>) -> Result<CommutingTuple, ExpError> {
        if self.p != group.p() {
            return Err(ArithError::ModulusMismatch {
                left: group.p(),
                right: self.p,
            }
            .into());
        }
        if self.n != group.n() {
            return Err(ExpError::SizeMismatch {
                got: self.n,
                expected: group.n(),
            });
        }
        CommutingTuple::new(group, self.matrices()?)
    }
}
