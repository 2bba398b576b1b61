//! Root-system combinatorics for the irreducible families A–G.
//!
//! Roots are kept only as integer vectors in the simple-root basis. The Cartan
//! matrix is used once, to generate the positive roots by root strings; after
//! that every query (`ht_J`, nilpotence class, good primes, Coxeter number) is
//! pure coordinate arithmetic.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootSystemError {
    #[error("type {family}{rank} does not exist")]
    InvalidRank { family: Family, rank: usize },
    #[error("unknown root-system family {0:?}")]
    UnknownFamily(String),
    #[error("simple root index {index} out of range 1..={rank}")]
    BadSimpleRoot { index: usize, rank: usize },
    #[error("root has {got} coordinates, expected {expected}")]
    CoordinateLength { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Family {
    type Err = RootSystemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "E" => Ok(Family::E),
            "F" => Ok(Family::F),
            "G" => Ok(Family::G),
            _ => Err(RootSystemError::UnknownFamily(s.to_string())),
        }
    }
}

/// A root (or any element of the root lattice) in simple-root coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Root(pub Vec<i64>);

impl Root {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn height(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> Root {
        Root(self.0.iter().map(|a| -a).collect())
    }
}

/// An irreducible root system with its positive roots, sorted by height and then
/// by coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSystem {
    family: Family,
    rank: usize,
    positive_roots: Vec<Root>,
}

/// Cartan matrix entries `a_ij = <alpha_i^vee, alpha_j>`, Bourbaki numbering.
fn cartan_matrix(family: Family, rank: usize) -> Vec<Vec<i64>> {
    let n = rank;
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize, aij: i64, aji: i64| {
        a[i][j] = aij;
        a[j][i] = aji;
    };
    match family {
        Family::A => (0..n - 1).for_each(|i| link(i, i + 1, -1, -1)),
        Family::B => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            // alpha_n short
            link(n - 2, n - 1, -1, -2);
        }
        Family::C => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            // alpha_n long
            link(n - 2, n - 1, -2, -1);
        }
        Family::D => {
            (0..n - 2).for_each(|i| link(i, i + 1, -1, -1));
            link(n - 3, n - 1, -1, -1);
        }
        Family::E => {
            // 1-3-4-5-...-n with 2 attached to 4
            link(0, 2, -1, -1);
            link(1, 3, -1, -1);
            (2..n - 1).for_each(|i| link(i, i + 1, -1, -1));
        }
        Family::F => {
            link(0, 1, -1, -1);
            link(1, 2, -1, -2);
            link(2, 3, -1, -1);
        }
        Family::G => link(0, 1, -3, -1),
    }
    a
}

fn valid_rank(family: Family, rank: usize) -> bool {
    match family {
        Family::A => rank >= 1,
        Family::B | Family::C => rank >= 2,
        Family::D => rank >= 4,
        Family::E => (6..=8).contains(&rank),
        Family::F => rank == 4,
        Family::G => rank == 2,
    }
}

/// Build the positive roots of an irreducible root system.
pub fn build_root_system(family: Family, rank: usize) -> Result<RootSystem, RootSystemError> {
    if !valid_rank(family, rank) {
        return Err(RootSystemError::InvalidRank { family, rank });
    }
    let cartan = cartan_matrix(family, rank);
    let simple = |i: usize| {
        let mut v = vec![0i64; rank];
        v[i] = 1;
        v
    };
    let mut known: BTreeSet<Vec<i64>> = (0..rank).map(simple).collect();
    let mut layer: Vec<Vec<i64>> = known.iter().cloned().collect();
    // Root strings: for beta positive and alpha_i simple, beta + alpha_i is a root
    // iff q > 0 where q = p - <beta, alpha_i^vee> and p is the length of the
    // downward string beta - alpha_i, beta - 2 alpha_i, ... (all already known).
    while !layer.is_empty() {
        let mut next = BTreeSet::new();
        for beta in &layer {
            for i in 0..rank {
                let pairing: i64 = (0..rank).map(|j| beta[j] * cartan[i][j]).sum();
                let mut down = 0i64;
                let mut probe = beta.clone();
                loop {
                    probe[i] -= 1;
                    if known.contains(&probe) {
                        down += 1;
                    } else {
                        break;
                    }
                }
                if down - pairing > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if !known.contains(&up) {
                        next.insert(up);
                    }
                }
            }
        }
        known.extend(next.iter().cloned());
        layer = next.into_iter().collect();
    }
    let mut positive_roots: Vec<Root> = known.into_iter().map(Root).collect();
    positive_roots.sort_by(|a, b| a.height().cmp(&b.height()).then_with(|| b.0.cmp(&a.0)));
    Ok(RootSystem {
        family,
        rank,
        positive_roots,
    })
}

impl RootSystem {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn positive_roots(&self) -> &[Root] {
        &self.positive_roots
    }

    pub fn simple_roots(&self) -> Vec<Root> {
        (0..self.rank)
            .map(|i| {
                let mut v = vec![0; self.rank];
                v[i] = 1;
                Root(v)
            })
            .collect()
    }

    pub fn highest_root(&self) -> &Root {
        self.positive_roots
            .last()
            .expect("root systems are nonempty")
    }

    /// Height of the highest root plus one.
    pub fn coxeter_number(&self) -> i64 {
        self.highest_root().height() + 1
    }

    pub fn contains(&self, beta: &Root) -> bool {
        self.positive_roots.contains(beta) || self.positive_roots.contains(&beta.neg())
    }

    /// Whether `p` is a good prime for this (irreducible) root system.
    pub fn is_good_prime(&self, p: u64) -> bool {
        match (self.family, self.rank) {
            (Family::A, _) => true,
            (Family::B | Family::C | Family::D, _) => p > 2,
            (Family::E, 6 | 7) | (Family::F, _) | (Family::G, _) => p > 3,
            (Family::E, _) => p > 5,
        }
    }

    /// Name such as `E8`.
    pub fn label(&self) -> String {
        format!("{}{}", self.family, self.rank)
    }
}

/// `p` is good for a reductive group iff it is good for every simple component.
pub fn is_good_prime(components: &[RootSystem], p: u64) -> bool {
    components.iter().all(|rs| rs.is_good_prime(p))
}

/// A root system together with a subset `J` of the simple roots, describing the
/// standard parabolic `P_J` and its unipotent radical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParabolicDatum {
    root_system: RootSystem,
    /// 0-based indices of the simple roots in `J`, sorted.
    j: Vec<usize>,
}

impl ParabolicDatum {
    /// `j` holds 0-based simple-root indices.
    pub fn new(root_system: RootSystem, j: &[usize]) -> Result<Self, RootSystemError> {
        let rank = root_system.rank;
        if let Some(&bad) = j.iter().find(|&&i| i >= rank) {
            return Err(RootSystemError::BadSimpleRoot {
                index: bad + 1,
                rank,
            });
        }
        let j: BTreeSet<usize> = j.iter().copied().collect();
        Ok(ParabolicDatum {
            root_system,
            j: j.into_iter().collect(),
        })
    }

    /// `J` given by 1-based simple-root indices, as on the command line.
    pub fn from_one_based(root_system: RootSystem, j: &[usize]) -> Result<Self, RootSystemError> {
        let rank = root_system.rank;
        let zero_based = j
            .iter()
            .map(|&i| {
                if i == 0 || i > rank {
                    Err(RootSystemError::BadSimpleRoot { index: i, rank })
                } else {
                    Ok(i - 1)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        ParabolicDatum::new(root_system, &zero_based)
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.root_system
    }

    pub fn j(&self) -> &[usize] {
        &self.j
    }

    /// `ht_J(beta)`: the sum of the coordinates of `beta` on simple roots outside `J`.
    pub fn ht_j(&self, beta: &Root) -> Result<i64, RootSystemError> {
        if beta.0.len() != self.root_system.rank {
            return Err(RootSystemError::CoordinateLength {
                got: beta.0.len(),
                expected: self.root_system.rank,
            });
        }
        Ok(beta
            .0
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.j.contains(i))
            .map(|(_, c)| c)
            .sum())
    }

    fn ht(&self, beta: &Root) -> i64 {
        self.ht_j(beta).expect("root from this system")
    }

    /// Positive roots of the Levi factor, `Phi_J^+`.
    pub fn levi_positive_roots(&self) -> Vec<Root> {
        self.root_system
            .positive_roots
            .iter()
            .filter(|r| self.ht(r) == 0)
            .cloned()
            .collect()
    }

    /// `Phi^+ \ Phi_J^+`, ordered by `ht_J`, then by height, then by coordinates
    /// with earlier simple roots first (so `alpha_1` precedes `alpha_2`).
    pub fn radical_roots(&self) -> Vec<Root> {
        let mut roots: Vec<Root> = self
            .root_system
            .positive_roots
            .iter()
            .filter(|r| self.ht(r) > 0)
            .cloned()
            .collect();
        roots.sort_by(|a, b| {
            self.ht(a)
                .cmp(&self.ht(b))
                .then_with(|| a.height().cmp(&b.height()))
                .then_with(|| b.0.cmp(&a.0))
        });
        roots
    }

    /// Maximum of `ht_J` over the positive roots.
    pub fn nilpotence_class(&self) -> i64 {
        self.root_system
            .positive_roots
            .iter()
            .map(|r| self.ht(r))
            .max()
            .unwrap_or(0)
    }
}

/// CLI-facing description `{"family": "A", "rank": 3, "J": [2]}` (1-based `J`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatumJson {
    pub family: Family,
    pub rank: usize,
    #[serde(rename = "J", default)]
    pub j: Vec<usize>,
}

impl DatumJson {
    pub fn build(&self) -> Result<ParabolicDatum, RootSystemError> {
        ParabolicDatum::from_one_based(build_root_system(self.family, self.rank)?, &self.j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(f: Family, n: usize) -> RootSystem {
        build_root_system(f, n).unwrap()
    }

    #[test]
    fn a2_roots() {
        let a2 = rs(Family::A, 2);
        assert_eq!(
            a2.positive_roots(),
            &[Root(vec![1, 0]), Root(vec![0, 1]), Root(vec![1, 1])]
        );
    }

    #[test]
    fn classical_counts() {
        for n in 1..=7 {
            assert_eq!(rs(Family::A, n).positive_roots().len(), n * (n + 1) / 2);
        }
        for n in 2..=6 {
            assert_eq!(rs(Family::B, n).positive_roots().len(), n * n);
            assert_eq!(rs(Family::C, n).positive_roots().len(), n * n);
        }
        for n in 4..=7 {
            assert_eq!(rs(Family::D, n).positive_roots().len(), n * (n - 1));
        }
        assert_eq!(rs(Family::G, 2).positive_roots().len(), 6);
        assert_eq!(rs(Family::F, 4).positive_roots().len(), 24);
        assert_eq!(rs(Family::E, 6).positive_roots().len(), 36);
        assert_eq!(rs(Family::E, 7).positive_roots().len(), 63);
        assert_eq!(rs(Family::E, 8).positive_roots().len(), 120);
    }

    #[test]
    fn highest_roots() {
        assert_eq!(rs(Family::G, 2).highest_root(), &Root(vec![3, 2]));
        assert_eq!(rs(Family::B, 3).highest_root(), &Root(vec![1, 2, 2]));
        assert_eq!(rs(Family::C, 3).highest_root(), &Root(vec![2, 2, 1]));
        assert_eq!(rs(Family::F, 4).highest_root(), &Root(vec![2, 3, 4, 2]));
        assert_eq!(
            rs(Family::E, 8).highest_root(),
            &Root(vec![2, 3, 4, 6, 5, 4, 3, 2])
        );
    }

    #[test]
    fn coxeter_numbers() {
        assert_eq!(rs(Family::A, 2).coxeter_number(), 3);
        assert_eq!(rs(Family::G, 2).coxeter_number(), 6);
        assert_eq!(rs(Family::D, 4).coxeter_number(), 6);
        assert_eq!(rs(Family::B, 4).coxeter_number(), 8);
        assert_eq!(rs(Family::C, 4).coxeter_number(), 8);
        assert_eq!(rs(Family::E, 6).coxeter_number(), 12);
        assert_eq!(rs(Family::E, 7).coxeter_number(), 18);
        assert_eq!(rs(Family::E, 8).coxeter_number(), 30);
        assert_eq!(rs(Family::F, 4).coxeter_number(), 12);
    }

    #[test]
    fn invalid_ranks() {
        assert!(build_root_system(Family::D, 3).is_err());
        assert!(build_root_system(Family::E, 5).is_err());
        assert!(build_root_system(Family::A, 0).is_err());
        assert!(build_root_system(Family::G, 3).is_err());
        assert!("X".parse::<Family>().is_err());
    }

    #[test]
    fn good_primes() {
        assert!(!rs(Family::B, 2).is_good_prime(2));
        assert!(rs(Family::A, 3).is_good_prime(2));
        assert!(!rs(Family::E, 8).is_good_prime(5));
        assert!(rs(Family::E, 8).is_good_prime(7));
        assert!(!rs(Family::G, 2).is_good_prime(3));
        assert!(rs(Family::G, 2).is_good_prime(5));
        assert!(!is_good_prime(&[rs(Family::A, 2), rs(Family::C, 3)], 2));
    }

    #[test]
    fn ht_j_examples() {
        let a2 = rs(Family::A, 2);
        let beta = Root(vec![1, 1]);
        let d = ParabolicDatum::new(a2.clone(), &[]).unwrap();
        assert_eq!(d.ht_j(&beta).unwrap(), 2);
        let d = ParabolicDatum::new(a2, &[0]).unwrap();
        assert_eq!(d.ht_j(&beta).unwrap(), 1);
        assert_eq!(d.ht_j(&Root(vec![1, 0])).unwrap(), 0);
        assert!(d.ht_j(&Root(vec![1])).is_err());
    }

    #[test]
    fn nilpotence_classes() {
        let d = ParabolicDatum::new(rs(Family::A, 2), &[]).unwrap();
        assert_eq!(d.nilpotence_class(), 2);
        let d = ParabolicDatum::from_one_based(rs(Family::A, 3), &[2]).unwrap();
        assert_eq!(d.nilpotence_class(), 2);
        // Maximal parabolics of type A have abelian radicals: every positive root
        // has coefficient at most one on any simple root.
        for n in 1..=5 {
            for k in 0..n {
                let j: Vec<usize> = (0..n).filter(|&i| i != k).collect();
                let d = ParabolicDatum::new(rs(Family::A, n), &j).unwrap();
                assert_eq!(d.nilpotence_class(), 1, "A{n}, k={}", k + 1);
            }
        }
    }

    #[test]
    fn radical_roots_order() {
        let d = ParabolicDatum::new(rs(Family::A, 2), &[]).unwrap();
        assert_eq!(
            d.radical_roots(),
            vec![Root(vec![1, 0]), Root(vec![0, 1]), Root(vec![1, 1])]
        );
        let d = ParabolicDatum::from_one_based(rs(Family::A, 2), &[1]).unwrap();
        assert_eq!(d.radical_roots(), vec![Root(vec![0, 1]), Root(vec![1, 1])]);
        assert!(ParabolicDatum::from_one_based(rs(Family::A, 2), &[3]).is_err());
    }

    #[test]
    fn datum_json() {
        let json: DatumJson = serde_json::from_str(r#"{"family":"A","rank":3,"J":[2]}"#).unwrap();
        assert_eq!(json.build().unwrap().nilpotence_class(), 2);
    }
}
