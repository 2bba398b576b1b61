//! Block-unitriangular matrix groups and their coordinate Hopf algebras.
//!
//! For block sizes `(b_1, ..., b_k)` summing to `n`, `U` is the group of `n x n`
//! matrices equal to the identity on and below the block diagonal. This is the
//! unipotent radical of the standard parabolic of `GL_n` with those Levi blocks,
//! i.e. type `A_{n-1}` with `J` the simple roots inside a block. The coordinate
//! ring is the polynomial ring on the entries above the block diagonal, and the
//! comultiplication, counit and antipode all come from matrix multiplication,
//! the identity, and matrix inversion.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{ArithError, Fp, Mat, Modulus, MultiPoly, MultiRing, RingElement};
use crate::rootsys::{build_root_system, Family, ParabolicDatum, Root};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnipotentError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("invalid block structure: {0}")]
    InvalidBlocks(String),
    #[error(
        "unsupported regime: {blocks} blocks give nilpotence class {class}, which is not less than p = {p}"
    )]
    UnsupportedRegime { blocks: usize, class: usize, p: u64 },
    #[error("conjugation does not preserve U: entry ({row}, {col}) of x^-1 u x is {entry}")]
    NotNormalizing {
        row: usize,
        col: usize,
        entry: String,
    },
    #[error("matrix is not in U: entry ({row}, {col}) is {value}")]
    NotInGroup { row: usize, col: usize, value: u64 },
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("matrix size {got} does not match group size {expected}")]
    SizeMismatch { got: usize, expected: usize },
}

/// A coordinate function `Y_{ij}` on `U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    /// 0-based matrix position.
    pub row: usize,
    pub col: usize,
    /// `ht_J` of the corresponding root: block index of `col` minus block index of `row`.
    pub grade: u32,
    /// `epsilon_row - epsilon_col` in simple-root coordinates; `Y` has weight `-root`.
    pub root: Root,
}

impl Generator {
    /// `Y_i_j` with 1-based indices.
    pub fn name(&self) -> String {
        format!("Y_{}_{}", self.row + 1, self.col + 1)
    }

    pub fn weight(&self) -> Root {
        self.root.neg()
    }
}

#[derive(Debug)]
pub struct BlockUnipotentGroup {
    modulus: Modulus,
    blocks: Vec<usize>,
    n: usize,
    block_of: Vec<usize>,
    generators: Vec<Generator>,
    position: Vec<Option<usize>>,
    datum: ParabolicDatum,
    ring: Arc<MultiRing>,
    doubled: Arc<MultiRing>,
    coproducts: Vec<MultiPoly>,
    antipodes: Vec<MultiPoly>,
}

/// Groups are determined by `p` and the block sizes.
impl PartialEq for BlockUnipotentGroup {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.blocks == other.blocks
    }
}

impl Eq for BlockUnipotentGroup {}

/// JSON group descriptor `{"p": 5, "blocks": [1, 1, 1]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupJson {
    pub p: u64,
    pub blocks: Vec<usize>,
}

impl GroupJson {
    pub fn build(&self) -> Result<Arc<BlockUnipotentGroup>, UnipotentError> {
        make_group(&self.blocks, self.p)
    }
}

/// Build the block-unitriangular group, refusing `#blocks > p` (class `>= p`).
pub fn make_group(blocks: &[usize], p: u64) -> Result<Arc<BlockUnipotentGroup>, UnipotentError> {
    BlockUnipotentGroup::new(blocks, p)
}

impl BlockUnipotentGroup {
    pub fn new(blocks: &[usize], p: u64) -> Result<Arc<Self>, UnipotentError> {
        let modulus = Modulus::new(p)?;
        if blocks.len() < 2 {
            return Err(UnipotentError::InvalidBlocks(
                "need at least two blocks".into(),
            ));
        }
        if blocks.contains(&0) {
            return Err(UnipotentError::InvalidBlocks(
                "block sizes must be positive".into(),
            ));
        }
        if blocks.len() as u64 > p {
            return Err(UnipotentError::UnsupportedRegime {
                blocks: blocks.len(),
                class: blocks.len() - 1,
                p,
            });
        }
        let n: usize = blocks.iter().sum();
        let block_of: Vec<usize> = blocks
            .iter()
            .enumerate()
            .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
            .collect();

        let j: Vec<usize> = (0..n - 1)
            .filter(|&i| block_of[i] == block_of[i + 1])
            .collect();
        let rs = build_root_system(Family::A, n - 1).expect("A_{n-1} with n >= 2");
        let datum = ParabolicDatum::new(rs, &j).expect("indices below n - 1");

        let mut position = vec![None; n * n];
        let generators: Vec<Generator> = datum
            .radical_roots()
            .into_iter()
            .enumerate()
            .map(|(idx, root)| {
                let row = root.coords().iter().position(|&c| c != 0).unwrap();
                let col = root.coords().iter().rposition(|&c| c != 0).unwrap() + 1;
                let grade = (block_of[col] - block_of[row]) as u32;
                debug_assert_eq!(Ok(grade as i64), datum.ht_j(&root));
                position[row * n + col] = Some(idx);
                Generator {
                    row,
                    col,
                    grade,
                    root,
                }
            })
            .collect();

        let names: Vec<String> = generators.iter().map(Generator::name).collect();
        let ring = MultiRing::new(modulus, names.clone());
        let doubled_names = names
            .iter()
            .map(|v| v.replacen('Y', "Y'", 1))
            .chain(names.iter().map(|v| v.replacen('Y', "Y''", 1)))
            .collect();
        let doubled = MultiRing::new(modulus, doubled_names);

        let mut group = BlockUnipotentGroup {
            modulus,
            blocks: blocks.to_vec(),
            n,
            block_of,
            generators,
            position,
            datum,
            ring,
            doubled,
            coproducts: Vec::new(),
            antipodes: Vec::new(),
        };
        let ngen = group.generators.len();
        let left = group.generic_element(&group.doubled, 0);
        let right = group.generic_element(&group.doubled, ngen);
        let product = left.mul(&right);
        group.coproducts = group
            .generators
            .iter()
            .map(|g| product.get(g.row, g.col).clone())
            .collect();

        // (I + N)^{-1} = sum_k (-N)^k, and N^{#blocks} = 0.
        let generic = group.generic_element(&group.ring, 0);
        let identity = Mat::identity(n, &MultiPoly::zero(group.ring.clone()));
        let minus_n = identity.sub(&generic);
        let mut inverse = identity.clone();
        let mut power = identity;
        for _ in 1..group.blocks.len() {
            power = power.mul(&minus_n);
            inverse = inverse.add(&power);
        }
        group.antipodes = group
            .generators
            .iter()
            .map(|g| inverse.get(g.row, g.col).clone())
            .collect();
        Ok(Arc::new(group))
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn p(&self) -> u64 {
        self.modulus.get()
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Matrix size.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// Number of blocks minus one.
    pub fn nilpotence_class(&self) -> u32 {
        (self.blocks.len() - 1) as u32
    }

    pub fn is_abelian(&self) -> bool {
        self.blocks.len() == 2
    }

    pub fn datum(&self) -> &ParabolicDatum {
        &self.datum
    }

    /// Generator index of matrix position `(row, col)`, if that entry is a coordinate.
    pub fn generator_at(&self, row: usize, col: usize) -> Option<usize> {
        self.position.get(row * self.n + col).copied().flatten()
    }

    pub fn generator_index(&self, name: &str) -> Result<usize, UnipotentError> {
        self.generators
            .iter()
            .position(|g| g.name() == name)
            .ok_or_else(|| UnipotentError::UnknownGenerator(name.to_string()))
    }

    /// `F_p[U]` on the generators `Y_i_j`.
    pub fn coordinate_ring(&self) -> &Arc<MultiRing> {
        &self.ring
    }

    /// `F_p[U] ⊗ F_p[U]` on `Y'_i_j` (first copy) and `Y''_i_j` (second copy).
    pub fn tensor_ring(&self) -> &Arc<MultiRing> {
        &self.doubled
    }

    /// Matrix with identity on and below the block diagonal and variable
    /// `offset + g` of `ring` at the position of generator `g`.
    pub fn generic_element(&self, ring: &Arc<MultiRing>, offset: usize) -> Mat<MultiPoly> {
        let zero = MultiPoly::zero(ring.clone());
        let mut m = Mat::identity(self.n, &zero);
        for (idx, g) in self.generators.iter().enumerate() {
            m.set(g.row, g.col, MultiPoly::var(ring.clone(), offset + idx));
        }
        m
    }

    /// `Δ(Y_g)`: entry `g` of the product of two generic elements.
    pub fn comultiplication(&self, g: usize) -> &MultiPoly {
        &self.coproducts[g]
    }

    /// Every generator lies in the augmentation ideal.
    pub fn counit(&self, _g: usize) -> Fp {
        Fp::zero(self.modulus)
    }

    /// `S(Y_g)`: entry `g` of the inverse of the generic element.
    pub fn antipode(&self, g: usize) -> &MultiPoly {
        &self.antipodes[g]
    }

    /// Sum of generator grades over a monomial in `F_p[U]`, i.e. `|ht_J|` of its weight.
    pub fn monomial_grade(&self, exps: &[u32]) -> u32 {
        let ngen = self.generators.len();
        exps.iter()
            .enumerate()
            .map(|(i, &e)| e * self.generators[i % ngen].grade)
            .sum()
    }

    /// Weight of a monomial of `F_p[U]` or of `F_p[U] ⊗ F_p[U]`.
    pub fn monomial_weight(&self, exps: &[u32]) -> Root {
        let ngen = self.generators.len();
        let mut w = vec![0i64; self.n - 1];
        for (i, &e) in exps.iter().enumerate() {
            for (slot, c) in w.iter_mut().zip(self.generators[i % ngen].root.coords()) {
                *slot -= e as i64 * c;
            }
        }
        Root(w)
    }

    /// Membership in `F_p[U]_{<p}`: every monomial has total grade at most `p - 1`.
    pub fn in_low_grade(&self, f: &MultiPoly) -> bool {
        f.terms()
            .all(|(m, _)| (self.monomial_grade(m) as u64) < self.p())
    }

    /// Whether `x` is invertible and block upper triangular, i.e. a rational point of
    /// the parabolic `P`.
    pub fn is_in_parabolic(&self, x: &Mat<Fp>) -> bool {
        x.n() == self.n
            && x.inverse().is_ok()
            && (0..self.n).all(|i| {
                (0..self.n).all(|j| self.block_of[j] >= self.block_of[i] || x.get(i, j).is_zero())
            })
    }

    /// Comorphism of `u -> x^{-1} u x` on the generators, or an error when the
    /// conjugate of the generic element leaves `U`.
    pub fn conjugation_comorphism(&self, x: &Mat<Fp>) -> Result<Vec<MultiPoly>, UnipotentError> {
        if x.n() != self.n {
            return Err(UnipotentError::SizeMismatch {
                got: x.n(),
                expected: self.n,
            });
        }
        let inv = x.inverse()?;
        let lift = |m: &Mat<Fp>| m.map(|c| MultiPoly::constant(self.ring.clone(), c.value()));
        let generic = self.generic_element(&self.ring, 0);
        let conj = lift(&inv).mul(&generic).mul(&lift(x));
        for i in 0..self.n {
            for j in 0..self.n {
                if self.generator_at(i, j).is_some() {
                    continue;
                }
                let entry = conj.get(i, j);
                let expected = if i == j {
                    entry.one_like()
                } else {
                    entry.zero_like()
                };
                if *entry != expected {
                    return Err(UnipotentError::NotNormalizing {
                        row: i,
                        col: j,
                        entry: entry.to_string(),
                    });
                }
            }
        }
        Ok(self
            .generators
            .iter()
            .map(|g| conj.get(g.row, g.col).clone())
            .collect())
    }

    /// `x^*(f)`, where `x^*(f)(u) = f(x^{-1} u x)`.
    pub fn act_by_conjugation(
        &self,
        x: &Mat<Fp>,
        f: &MultiPoly,
    ) -> Result<MultiPoly, UnipotentError> {
        let images = self.conjugation_comorphism(x)?;
        Ok(f.substitute(&images, &self.ring)?)
    }

    /// The group element with the given generator coordinates.
    pub fn element(&self, coords: &[u64]) -> UnipotentElement {
        assert_eq!(
            coords.len(),
            self.generators.len(),
            "one coordinate per generator"
        );
        let mut m = Mat::identity_mod(self.modulus, self.n);
        for (g, &c) in self.generators.iter().zip(coords) {
            m.set(g.row, g.col, Fp::new(c as i64, self.modulus));
        }
        UnipotentElement { matrix: m }
    }

    /// Check that `m` is identity on and below the block diagonal.
    pub fn check_element(&self, m: &Mat<Fp>) -> Result<(), UnipotentError> {
        self.check_pattern(m, true)
    }

    /// Check that `m` is zero on and below the block diagonal (an element of Lie(U)).
    pub fn check_lie_element(&self, m: &Mat<Fp>) -> Result<(), UnipotentError> {
        self.check_pattern(m, false)
    }

    fn check_pattern(&self, m: &Mat<Fp>, unitriangular: bool) -> Result<(), UnipotentError> {
        if m.n() != self.n {
            return Err(UnipotentError::SizeMismatch {
                got: m.n(),
                expected: self.n,
            });
        }
        for i in 0..self.n {
            for j in 0..self.n {
                if self.generator_at(i, j).is_some() {
                    continue;
                }
                let want = u64::from(unitriangular && i == j);
                let value = m.get(i, j).value();
                if value != want {
                    return Err(UnipotentError::NotInGroup {
                        row: i,
                        col: j,
                        value,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn descriptor(&self) -> GroupJson {
        GroupJson {
            p: self.p(),
            blocks: self.blocks.clone(),
        }
    }
}

/// A rational point of `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnipotentElement {
    matrix: Mat<Fp>,
}

impl UnipotentElement {
    pub fn new(group: &BlockUnipotentGroup, matrix: Mat<Fp>) -> Result<Self, UnipotentError> {
        group.check_element(&matrix)?;
        Ok(UnipotentElement { matrix })
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
}
