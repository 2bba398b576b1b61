//! Infinitesimal and global one-parameter subgroups of a block-unitriangular group,
//! stored as comorphisms on the generators `Y_i_j`.
//!
//! A height-`r` infinitesimal subgroup sends each generator to an element of
//! `F_p[t]/(t^{p^r})` with zero constant term so that comultiplication is
//! preserved; a global one does the same with `F_p[t]`. Both are validated
//! eagerly on construction. The canonical lift replaces each image by its
//! degree `< p^r` representative.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{
    ArithError, BinomialTable, Fp, Mat, Modulus, MultiPoly, MultiRing, Poly, RingElement,
    TruncatedPoly,
};
use crate::unipotent::{BlockUnipotentGroup, GroupJson, UnipotentError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Unipotent(#[from] UnipotentError),
    #[error("expected {expected} generator images, got {got}")]
    ImageCount { got: usize, expected: usize },
    #[error("missing image for generator {0}")]
    MissingGenerator(String),
    #[error("image of {generator} has nonzero constant term {value}")]
    NonzeroConstant { generator: String, value: u64 },
    #[error("comultiplication not preserved on {generator}: difference {difference}")]
    HopfFailure {
        generator: String,
        difference: String,
    },
    #[error("morphisms are defined on different groups")]
    GroupMismatch,
    #[error("height mismatch: {left} vs {right}")]
    HeightMismatch { left: u32, right: u32 },
    #[error("conjugate leaves U at entry ({row}, {col}): {entry}")]
    LeavesGroup {
        row: usize,
        col: usize,
        entry: String,
    },
    #[error("invalid generator change: {0}")]
    InvalidChange(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

/// A homomorphism `G_{a(r)} -> U`.
#[derive(Debug, Clone)]
pub struct InfinitesimalSubgroup {
    group: Arc<BlockUnipotentGroup>,
    height: u32,
    images: Vec<TruncatedPoly>,
}

/// A homomorphism `G_a -> U`.
#[derive(Debug, Clone)]
pub struct OneParamSubgroup {
    group: Arc<BlockUnipotentGroup>,
    images: Vec<Poly>,
}

impl PartialEq for InfinitesimalSubgroup {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.group, &other.group)
            && self.height == other.height
            && self.images == other.images
    }
}

impl Eq for InfinitesimalSubgroup {}

impl std::hash::Hash for InfinitesimalSubgroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.height.hash(state);
        self.images.hash(state);
    }
}

impl PartialEq for OneParamSubgroup {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.group, &other.group) && self.images == other.images
    }
}

fn same_group(a: &Arc<BlockUnipotentGroup>, b: &Arc<BlockUnipotentGroup>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Validate candidate images as a height-`r` infinitesimal subgroup.
pub fn validate(
    group: &Arc<BlockUnipotentGroup>,
    r: u32,
    images: Vec<TruncatedPoly>,
) -> Result<InfinitesimalSubgroup, MorphismError> {
    InfinitesimalSubgroup::new(group, r, images)
}

impl InfinitesimalSubgroup {
    pub fn new(
        group: &Arc<BlockUnipotentGroup>,
        r: u32,
        images: Vec<TruncatedPoly>,
    ) -> Result<Self, MorphismError> {
        check_count(group, images.len())?;
        let len = TruncatedPoly::length(group.modulus(), r)?;
        for img in &images {
            if img.modulus() != group.modulus() {
                return Err(ArithError::ModulusMismatch {
                    left: group.p(),
                    right: img.modulus().get(),
                }
                .into());
            }
            if img.height() != r {
                return Err(MorphismError::HeightMismatch {
                    left: r,
                    right: img.height(),
                });
            }
        }
        let coeffs: Vec<&[u64]> = images.iter().map(TruncatedPoly::coeffs).collect();
        check_hopf(group, &coeffs, Some(len))?;
        // Top degree of a grade-h image is at most h * p^(r-1).
        let unit = len as u64 / group.p();
        for (g, img) in group.generators().iter().zip(&images) {
            if let Some(m) = img.top_degree() {
                if m as u64 > g.grade as u64 * unit {
                    return Err(MorphismError::InternalInvariant(format!(
                        "valid morphism has image of {} with degree {m} > {}",
                        g.name(),
                        g.grade as u64 * unit
                    )));
                }
            }
        }
        Ok(InfinitesimalSubgroup {
            group: group.clone(),
            height: r,
            images,
        })
    }

    /// From integer coefficient lists, one per generator.
    pub fn from_coeffs(
        group: &Arc<BlockUnipotentGroup>,
        r: u32,
        coeffs: &[Vec<i64>],
    ) -> Result<Self, MorphismError> {
        let images = coeffs
            .iter()
            .map(|c| TruncatedPoly::new(group.modulus(), r, c))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(group, r, images)
    }

    pub fn trivial(group: &Arc<BlockUnipotentGroup>, r: u32) -> Result<Self, MorphismError> {
        let zero = TruncatedPoly::zero(group.modulus(), r)?;
        Self::new(group, r, vec![zero; group.num_generators()])
    }

    pub fn group(&self) -> &Arc<BlockUnipotentGroup> {
        &self.group
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn images(&self) -> &[TruncatedPoly] {
        &self.images
    }

    pub fn image(&self, g: usize) -> &TruncatedPoly {
        &self.images[g]
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(TruncatedPoly::is_zero)
    }

    /// The canonical lift: every image replaced by its degree `< p^r` representative.
    pub fn lift(&self) -> Result<OneParamSubgroup, MorphismError> {
        let images: Vec<Poly> = self
            .images
            .iter()
            .map(TruncatedPoly::canonical_lift)
            .collect();
        let lifted = OneParamSubgroup::new(&self.group, images).map_err(|e| {
            MorphismError::InternalInvariant(format!("canonical lift is not a Hopf morphism: {e}"))
        })?;
        Ok(lifted)
    }

    /// Restrict to `G_{a(s)}` for `s <= r`.
    pub fn restrict(&self, s: u32) -> Result<InfinitesimalSubgroup, MorphismError> {
        if s > self.height {
            return Err(MorphismError::HeightMismatch {
                left: self.height,
                right: s,
            });
        }
        let images = self
            .images
            .iter()
            .map(|img| img.restrict(s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(&self.group, s, images)
    }

    /// The algebra map `F_p[U] -> F_p[t]/(t^{p^r})` applied to an arbitrary `f`.
    pub fn apply(&self, f: &MultiPoly) -> Result<TruncatedPoly, MorphismError> {
        let len = self.images[0].len();
        let ring = MultiRing::truncated(self.group.modulus(), vec!["t".into()], vec![len as u32]);
        let subs: Vec<MultiPoly> = self.images.iter().map(|img| img.embed(&ring, 0)).collect();
        let value = f.substitute(&subs, &ring)?;
        let mut coeffs = vec![0u64; len];
        for (m, c) in value.terms() {
            coeffs[m[0] as usize] = c;
        }
        Ok(TruncatedPoly::from_dense(
            self.group.modulus(),
            self.height,
            coeffs,
        ))
    }

    /// The generic point `φ(t)`: identity plus the images at the generator positions.
    pub fn to_matrix(&self) -> Mat<TruncatedPoly> {
        generic_point(&self.group, &self.images, &self.images[0].zero_like())
    }

    /// Read images off a matrix over `F_p[t]/(t^{p^r})`, which must lie in `U`.
    pub fn from_matrix(
        group: &Arc<BlockUnipotentGroup>,
        m: &Mat<TruncatedPoly>,
    ) -> Result<Self, MorphismError> {
        let images = read_point(group, m)?;
        let r = images.first().map_or(1, TruncatedPoly::height);
        Self::new(group, r, images)
    }

    /// Def. of commuting: `(a, b) -> φ(a) ψ(b)` is a homomorphism `G_{a(r)}^2 -> U`.
    pub fn commutes_with(&self, other: &Self) -> Result<bool, MorphismError> {
        if !same_group(&self.group, &other.group) {
            return Err(MorphismError::GroupMismatch);
        }
        if self.height != other.height {
            return Err(MorphismError::HeightMismatch {
                left: self.height,
                right: other.height,
            });
        }
        let left: Vec<&[u64]> = self.images.iter().map(TruncatedPoly::coeffs).collect();
        let right: Vec<&[u64]> = other.images.iter().map(TruncatedPoly::coeffs).collect();
        commute_check(
            &self.group,
            &left,
            &right,
            Some(self.images[0].len() as u32),
        )
    }

    /// `t -> x^{-1} φ(t) x`, i.e. the comorphism `φ^* ∘ x^*`. Errors if the result leaves `U`.
    pub fn conjugate(&self, x: &Mat<Fp>) -> Result<InfinitesimalSubgroup, MorphismError> {
        let zero = self.images[0].zero_like();
        let conj = conjugate_matrix(&self.to_matrix(), x, &zero)?;
        let images = read_point(&self.group, &conj)?;
        Self::new(&self.group, self.height, images).map_err(invariant("conjugate of a morphism"))
    }

    pub fn to_json(&self) -> MorphismJson {
        MorphismJson::new(
            &self.group,
            Some(self.height),
            self.images.iter().map(TruncatedPoly::canonical_lift),
        )
    }
}

impl OneParamSubgroup {
    pub fn new(group: &Arc<BlockUnipotentGroup>, images: Vec<Poly>) -> Result<Self, MorphismError> {
        check_count(group, images.len())?;
        for img in &images {
            if img.modulus() != group.modulus() {
                return Err(ArithError::ModulusMismatch {
                    left: group.p(),
                    right: img.modulus().get(),
                }
                .into());
            }
        }
        let coeffs: Vec<&[u64]> = images.iter().map(Poly::coeffs).collect();
        check_hopf(group, &coeffs, None)?;
        Ok(OneParamSubgroup {
            group: group.clone(),
            images,
        })
    }

    pub fn from_coeffs(
        group: &Arc<BlockUnipotentGroup>,
        coeffs: &[Vec<i64>],
    ) -> Result<Self, MorphismError> {
        let images = coeffs
            .iter()
            .map(|c| Poly::new(group.modulus(), c))
            .collect();
        Self::new(group, images)
    }

    pub fn trivial(group: &Arc<BlockUnipotentGroup>) -> Self {
        OneParamSubgroup {
            group: group.clone(),
            images: vec![Poly::zero(group.modulus()); group.num_generators()],
        }
    }

    pub fn group(&self) -> &Arc<BlockUnipotentGroup> {
        &self.group
    }

    pub fn images(&self) -> &[Poly] {
        &self.images
    }

    pub fn image(&self, g: usize) -> &Poly {
        &self.images[g]
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(Poly::is_zero)
    }

    /// Restrict to the Frobenius kernel `G_{a(r)}`.
    pub fn restrict(&self, r: u32) -> Result<InfinitesimalSubgroup, MorphismError> {
        let images = self
            .images
            .iter()
            .map(|img| img.truncate(r))
            .collect::<Result<Vec<_>, _>>()?;
        InfinitesimalSubgroup::new(&self.group, r, images)
    }

    pub fn apply(&self, f: &MultiPoly) -> Result<Poly, MorphismError> {
        let ring = MultiRing::new(self.group.modulus(), vec!["t".into()]);
        let subs: Vec<MultiPoly> = self.images.iter().map(|img| img.embed(&ring, 0)).collect();
        let value = f.substitute(&subs, &ring)?;
        let top = value
            .terms()
            .map(|(m, _)| m[0] as usize)
            .max()
            .map_or(0, |d| d + 1);
        let mut coeffs = vec![0u64; top];
        for (m, c) in value.terms() {
            coeffs[m[0] as usize] = c;
        }
        Ok(Poly::from_residues(self.group.modulus(), coeffs))
    }

    pub fn to_matrix(&self) -> Mat<Poly> {
        generic_point(&self.group, &self.images, &Poly::zero(self.group.modulus()))
    }

    pub fn from_matrix(
        group: &Arc<BlockUnipotentGroup>,
        m: &Mat<Poly>,
    ) -> Result<Self, MorphismError> {
        let images = read_point(group, m)?;
        Self::new(group, images)
    }

    /// Untruncated commutation test.
    pub fn commutes_with(&self, other: &Self) -> Result<bool, MorphismError> {
        if !same_group(&self.group, &other.group) {
            return Err(MorphismError::GroupMismatch);
        }
        let left: Vec<&[u64]> = self.images.iter().map(Poly::coeffs).collect();
        let right: Vec<&[u64]> = other.images.iter().map(Poly::coeffs).collect();
        commute_check(&self.group, &left, &right, None)
    }

    pub fn conjugate(&self, x: &Mat<Fp>) -> Result<OneParamSubgroup, MorphismError> {
        let zero = Poly::zero(self.group.modulus());
        let conj = conjugate_matrix(&self.to_matrix(), x, &zero)?;
        let images = read_point(&self.group, &conj)?;
        Self::new(&self.group, images).map_err(invariant("conjugate of a morphism"))
    }

    /// Largest `deg φ(Y_g)`, or `None` for the trivial subgroup.
    pub fn max_degree(&self) -> Option<usize> {
        self.images.iter().filter_map(Poly::degree).max()
    }

    pub fn to_json(&self) -> MorphismJson {
        MorphismJson::new(&self.group, None, self.images.iter().cloned())
    }
}

/// Restrict `ψ` to height `r`.
pub fn restrict(psi: &OneParamSubgroup, r: u32) -> Result<InfinitesimalSubgroup, MorphismError> {
    psi.restrict(r)
}

/// The canonical lift of `φ`.
pub fn lift(phi: &InfinitesimalSubgroup) -> Result<OneParamSubgroup, MorphismError> {
    phi.lift()
}

fn invariant(what: &'static str) -> impl Fn(MorphismError) -> MorphismError {
    move |e| MorphismError::InternalInvariant(format!("{what} failed validation: {e}"))
}

fn check_count(group: &BlockUnipotentGroup, got: usize) -> Result<(), MorphismError> {
    if got != group.num_generators() {
        return Err(MorphismError::ImageCount {
            got,
            expected: group.num_generators(),
        });
    }
    Ok(())
}

/// Counit and comultiplication on every generator. `cap` is `p^r` for
/// infinitesimal morphisms and `None` over `F_p[t]`.
fn check_hopf(
    group: &BlockUnipotentGroup,
    images: &[&[u64]],
    cap: Option<usize>,
) -> Result<(), MorphismError> {
    for (g, img) in images.iter().enumerate() {
        if let Some(&c) = img.first().filter(|&&c| c != 0) {
            return Err(MorphismError::NonzeroConstant {
                generator: group.generators()[g].name(),
                value: c,
            });
        }
    }
    for g in 0..images.len() {
        let diff = hopf_difference(group, images, g, cap);
        if !diff.is_empty() {
            let ring = MultiRing::tensor_square(group.modulus(), cap.map(|c| c as u32));
            let terms = diff
                .into_iter()
                .map(|((a, b), c)| (vec![a as u32, b as u32], c));
            return Err(MorphismError::HopfFailure {
                generator: group.generators()[g].name(),
                difference: MultiPoly::from_residue_terms(ring, terms).to_string(),
            });
        }
    }
    Ok(())
}

/// Nonzero coefficients of `Δ(φ(Y_g)) - (φ ⊗ φ)(Δ(Y_g))` over `t'^a t''^b`.
fn hopf_difference(
    group: &BlockUnipotentGroup,
    images: &[&[u64]],
    g: usize,
    cap: Option<usize>,
) -> Vec<((usize, usize), u64)> {
    let p = group.p();
    let ngen = group.num_generators();
    let products: Vec<(Vec<u64>, Vec<u64>, u64)> = group
        .comultiplication(g)
        .terms()
        .map(|(m, c)| {
            (
                monomial_image(&m[..ngen], images, p, cap),
                monomial_image(&m[ngen..], images, p, cap),
                c,
            )
        })
        .collect();
    let own = images[g];
    let size = cap.unwrap_or_else(|| {
        products
            .iter()
            .map(|(l, r, _)| l.len().max(r.len()))
            .chain([own.len()])
            .max()
            .unwrap_or(0)
    });
    let mut grid = vec![0u64; size * size];
    let binom = BinomialTable::new(own.len().saturating_sub(1), p);
    for (m, &c) in own.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for a in m.saturating_sub(size - 1)..=m.min(size - 1) {
            let cell = &mut grid[a * size + (m - a)];
            *cell = (*cell + c * binom.get(m, a)) % p;
        }
    }
    for (left, right, c) in &products {
        for (a, &x) in left.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let xc = x * c % p;
            for (b, &y) in right.iter().enumerate() {
                let cell = &mut grid[a * size + b];
                *cell = (*cell + p - xc * y % p) % p;
            }
        }
    }
    grid.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| ((i / size, i % size), c))
        .collect()
}

/// `Π images[h]^{exps[h]}` as a dense coefficient vector, truncated at `cap`.
pub(crate) fn monomial_image(
    exps: &[u32],
    images: &[&[u64]],
    p: u64,
    cap: Option<usize>,
) -> Vec<u64> {
    let mut acc = vec![1u64];
    for (h, &e) in exps.iter().enumerate() {
        for _ in 0..e {
            acc = mul_coeffs(&acc, images[h], p, cap);
        }
    }
    acc
}

pub(crate) fn mul_coeffs(a: &[u64], b: &[u64], p: u64, cap: Option<usize>) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let full = a.len() + b.len() - 1;
    let len = cap.map_or(full, |c| c.min(full));
    let mut out = vec![0u64; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

/// Hopf check for `μ = (φ^* ⊗ ψ^*) ∘ Δ : F_p[U] -> F_p[a, b]` in `F_p[a', b', a'', b'']`.
fn commute_check(
    group: &BlockUnipotentGroup,
    left: &[&[u64]],
    right: &[&[u64]],
    cap: Option<u32>,
) -> Result<bool, MorphismError> {
    let modulus = group.modulus();
    let ring2 = ring_with_caps(modulus, &["a", "b"], cap);
    let ring4 = ring_with_caps(modulus, &["a'", "b'", "a''", "b''"], cap);
    let embed = |coeffs: &[u64], ring: &Arc<MultiRing>, var: usize| {
        Poly::from_residues(modulus, coeffs.to_vec()).embed(ring, var)
    };
    let subs: Vec<MultiPoly> = left
        .iter()
        .map(|c| embed(c, &ring2, 0))
        .chain(right.iter().map(|c| embed(c, &ring2, 1)))
        .collect();
    let mu = (0..group.num_generators())
        .map(|g| group.comultiplication(g).substitute(&subs, &ring2))
        .collect::<Result<Vec<_>, _>>()?;

    let var = |i| MultiPoly::var(ring4.clone(), i);
    let coproduct_ab = [var(0).add(&var(2)), var(1).add(&var(3))];
    let doubled: Vec<MultiPoly> = mu
        .iter()
        .map(|m| m.relabel(&ring4, &[0, 1]))
        .chain(mu.iter().map(|m| m.relabel(&ring4, &[2, 3])))
        .collect();
    for (g, m) in mu.iter().enumerate() {
        let lhs = m.substitute(&coproduct_ab, &ring4)?;
        let rhs = group.comultiplication(g).substitute(&doubled, &ring4)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

fn ring_with_caps(modulus: Modulus, names: &[&str], cap: Option<u32>) -> Arc<MultiRing> {
    let vars = names.iter().map(|s| s.to_string()).collect();
    match cap {
        Some(c) => MultiRing::truncated(modulus, vars, vec![c; names.len()]),
        None => MultiRing::new(modulus, vars),
    }
}

fn generic_point<T: RingElement>(group: &BlockUnipotentGroup, images: &[T], zero: &T) -> Mat<T> {
    let mut m = Mat::identity(group.n(), zero);
    for (g, img) in group.generators().iter().zip(images) {
        m.set(g.row, g.col, img.clone());
    }
    m
}

fn read_point<T: RingElement + std::fmt::Display>(
    group: &BlockUnipotentGroup,
    m: &Mat<T>,
) -> Result<Vec<T>, MorphismError> {
    if m.n() != group.n() {
        return Err(UnipotentError::SizeMismatch {
            got: m.n(),
            expected: group.n(),
        }
        .into());
    }
    for i in 0..m.n() {
        for j in 0..m.n() {
            if group.generator_at(i, j).is_some() {
                continue;
            }
            let entry = m.get(i, j);
            let expected = if i == j {
                entry.one_like()
            } else {
                entry.zero_like()
            };
            if *entry != expected {
                return Err(MorphismError::LeavesGroup {
                    row: i,
                    col: j,
                    entry: entry.to_string(),
                });
            }
        }
    }
    Ok(group
        .generators()
        .iter()
        .map(|g| m.get(g.row, g.col).clone())
        .collect())
}

fn conjugate_matrix<T: RingElement>(
    point: &Mat<T>,
    x: &Mat<Fp>,
    zero: &T,
) -> Result<Mat<T>, MorphismError> {
    if x.n() != point.n() {
        return Err(UnipotentError::SizeMismatch {
            got: x.n(),
            expected: point.n(),
        }
        .into());
    }
    let inv = x.inverse()?;
    let lift = |m: &Mat<Fp>| m.map(|c| zero.constant_like(c.value()));
    Ok(lift(&inv).mul(point).mul(&lift(x)))
}

/// Alternative generators `X_g = c_g Y_g + h_g`, where `h_g` only involves earlier
/// generators and lies in `F_p[U]_{<p}`. Triangularity makes `F_p[U]` free on `X`.
#[derive(Debug, Clone)]
pub struct GeneratorChange {
    group: Arc<BlockUnipotentGroup>,
    forward: Vec<MultiPoly>,
    inverse: Vec<MultiPoly>,
}

impl GeneratorChange {
    pub fn new(
        group: &Arc<BlockUnipotentGroup>,
        scalars: &[u64],
        shifts: Vec<MultiPoly>,
    ) -> Result<Self, MorphismError> {
        let ngen = group.num_generators();
        check_count(group, scalars.len())?;
        check_count(group, shifts.len())?;
        let ring = group.coordinate_ring();
        let p = group.p();
        let mut forward = Vec::with_capacity(ngen);
        let mut inverse: Vec<MultiPoly> = Vec::with_capacity(ngen);
        for (g, (&c, h)) in scalars.iter().zip(&shifts).enumerate() {
            let name = group.generators()[g].name();
            if c % p == 0 {
                return Err(MorphismError::InvalidChange(format!(
                    "zero leading scalar for {name}"
                )));
            }
            if h.terms().any(|(m, _)| m[g..].iter().any(|&e| e != 0)) {
                return Err(MorphismError::InvalidChange(format!(
                    "shift for {name} uses a later generator"
                )));
            }
            if !group.in_low_grade(h) {
                return Err(MorphismError::InvalidChange(format!(
                    "shift for {name} leaves F_p[U]_<p"
                )));
            }
            let y = MultiPoly::var(ring.clone(), g);
            forward.push(y.scale(c).add(h));
            // Y_g = c^{-1} (X_g - h(Y_0, ..., Y_{g-1})) with earlier Y already in X.
            let mut subs = inverse.clone();
            subs.resize(ngen, MultiPoly::zero(ring.clone()));
            let h_in_x = h.substitute(&subs, ring)?;
            let c_inv = Fp::new(c as i64, group.modulus()).inverse()?.value();
            inverse.push(y.sub(&h_in_x).scale(c_inv));
        }
        Ok(GeneratorChange {
            group: group.clone(),
            forward,
            inverse,
        })
    }

    /// `X_g` as a polynomial in the `Y`.
    pub fn forward(&self) -> &[MultiPoly] {
        &self.forward
    }

    /// `Y_g` as a polynomial in the `X` (variable `h` of the coordinate ring read as `X_h`).
    pub fn inverse(&self) -> &[MultiPoly] {
        &self.inverse
    }

    /// The lift of `φ` computed with respect to `X`, then expressed on the `Y`.
    pub fn lift(&self, phi: &InfinitesimalSubgroup) -> Result<Vec<Poly>, MorphismError> {
        if !same_group(&self.group, phi.group()) {
            return Err(MorphismError::GroupMismatch);
        }
        let ring = MultiRing::new(self.group.modulus(), vec!["t".into()]);
        let x_images = self
            .forward
            .iter()
            .map(|x| Ok(phi.apply(x)?.canonical_lift().embed(&ring, 0)))
            .collect::<Result<Vec<_>, MorphismError>>()?;
        self.inverse
            .iter()
            .map(|y| {
                let value = y.substitute(&x_images, &ring)?;
                let top = value
                    .terms()
                    .map(|(m, _)| m[0] as usize + 1)
                    .max()
                    .unwrap_or(0);
                let mut coeffs = vec![0u64; top];
                for (m, c) in value.terms() {
                    coeffs[m[0] as usize] = c;
                }
                Ok(Poly::from_residues(self.group.modulus(), coeffs))
            })
            .collect()
    }
}

/// `{"group": {...}, "r": 2, "images": {"Y_1_2": [0, 1], ...}}`; `r` is absent
/// for a global one-parameter subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismJson {
    pub group: GroupJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    pub images: Images,
}

/// Generator name to coefficient list, serialized in generator order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Images(pub Vec<(String, Vec<i64>)>);

impl Serialize for Images {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Images {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, Vec<i64>>::deserialize(deserializer)?;
        Ok(Images(map.into_iter().collect()))
    }
}

/// A parsed morphism of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMorphism {
    Infinitesimal(InfinitesimalSubgroup),
    Global(OneParamSubgroup),
}

impl MorphismJson {
    fn new(
        group: &BlockUnipotentGroup,
        r: Option<u32>,
        images: impl Iterator<Item = Poly>,
    ) -> Self {
        let images = group
            .generators()
            .iter()
            .zip(images)
            .map(|(g, img)| (g.name(), img.coeffs().iter().map(|&c| c as i64).collect()))
            .collect();
        MorphismJson {
            group: group.descriptor(),
            r,
            images: Images(images),
        }
    }

    /// Coefficient lists in generator order; unknown or missing names are errors.
    fn coeffs(&self, group: &BlockUnipotentGroup) -> Result<Vec<Vec<i64>>, MorphismError> {
        let mut out: Vec<Option<Vec<i64>>> = vec![None; group.num_generators()];
        for (name, coeffs) in &self.images.0 {
            out[group.generator_index(name)?] = Some(coeffs.clone());
        }
        out.into_iter()
            .enumerate()
            .map(|(g, c)| {
                c.ok_or_else(|| MorphismError::MissingGenerator(group.generators()[g].name()))
            })
            .collect()
    }

    pub fn build(&self) -> Result<AnyMorphism, MorphismError> {
        let group = self.group.build()?;
        let coeffs = self.coeffs(&group)?;
        Ok(match self.r {
            Some(r) => {
                AnyMorphism::Infinitesimal(InfinitesimalSubgroup::from_coeffs(&group, r, &coeffs)?)
            }
            None => AnyMorphism::Global(OneParamSubgroup::from_coeffs(&group, &coeffs)?),
        })
    }
}

impl AnyMorphism {
    pub fn to_json(&self) -> MorphismJson {
        match self {
            AnyMorphism::Infinitesimal(m) => m.to_json(),
            AnyMorphism::Global(m) => m.to_json(),
        }
    }

    pub fn group(&self) -> &Arc<BlockUnipotentGroup> {
        match self {
            AnyMorphism::Infinitesimal(m) => m.group(),
            AnyMorphism::Global(m) => m.group(),
        }
    }
}
