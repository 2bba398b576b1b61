use std::fmt;

use super::fp::{inv_mod, mul_mod, sub_mod};
use super::{ArithError, Fp, Modulus, RingElement};

/// Square matrix over a commutative ring, row-major.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: RingElement> Mat<T> {
    pub fn from_vec(n: usize, data: Vec<T>) -> Result<Self, ArithError> {
        if data.len() != n * n || n == 0 {
            return Err(ArithError::Dimension(format!(
                "{} entries for a {n}x{n} matrix",
                data.len()
            )));
        }
        Ok(Mat { n, data })
    }

    /// Identity matrix in the ring of `template`.
    pub fn identity(n: usize, template: &T) -> Self {
        Mat::from_fn(n, |i, j| {
            if i == j {
                template.one_like()
            } else {
                template.zero_like()
            }
        })
    }

    pub fn zeros(n: usize, template: &T) -> Self {
        Mat::from_fn(n, |_, _| template.zero_like())
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Mat { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: RingElement>(&self, f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matrix size mismatch");
        let n = self.n;
        Mat::from_fn(n, |i, j| {
            let mut acc = self.get(i, 0).zero_like();
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let b = other.get(k, j);
                if b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(b));
            }
            acc
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matrix size mismatch");
        Mat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "matrix size mismatch");
        Mat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        Mat {
            n: self.n,
            data: self.data.iter().map(|a| a.mul(c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Mat::identity(self.n, &self.data[0]);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `xy - yx`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.mul(other) == other.mul(self)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(T::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat::identity(self.n, &self.data[0])
    }

    pub fn is_strictly_upper(&self) -> bool {
        (0..self.n).all(|i| (0..=i).all(|j| self.get(i, j).is_zero()))
    }

    /// `x^k = 0` for some `k <= n`.
    pub fn is_nilpotent(&self) -> bool {
        self.pow(self.n as u32).is_zero()
    }
}

impl Mat<Fp> {
    /// Row-major integers reduced mod `p`.
    pub fn from_ints(modulus: Modulus, n: usize, entries: &[i64]) -> Result<Self, ArithError> {
        Mat::from_vec(n, entries.iter().map(|&v| Fp::new(v, modulus)).collect())
    }

    pub fn identity_mod(modulus: Modulus, n: usize) -> Self {
        Mat::identity(n, &Fp::zero(modulus))
    }

    pub fn zeros_mod(modulus: Modulus, n: usize) -> Self {
        Mat::zeros(n, &Fp::zero(modulus))
    }

    /// `E_{ij}`.
    pub fn unit(modulus: Modulus, n: usize, i: usize, j: usize) -> Self {
        let mut m = Mat::zeros_mod(modulus, n);
        m.set(i, j, Fp::one(modulus));
        m
    }

    pub fn modulus(&self) -> Modulus {
        self.data[0].modulus()
    }

    pub fn to_residues(&self) -> Vec<u64> {
        self.data.iter().map(|x| x.value()).collect()
    }

    pub fn inverse(&self) -> Result<Self, ArithError> {
        let n = self.n;
        let p = self.modulus().get();
        let mut a: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                let mut row: Vec<u64> = (0..n).map(|j| self.get(i, j).value()).collect();
                row.extend((0..n).map(|j| u64::from(i == j)));
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a[r][col] != 0)
                .ok_or(ArithError::NotInvertible)?;
            a.swap(col, pivot);
            let inv = inv_mod(a[col][col], p).unwrap();
            for v in a[col].iter_mut() {
                *v = mul_mod(*v, inv, p);
            }
            for r in 0..n {
                if r != col && a[r][col] != 0 {
                    let f = a[r][col];
                    for c in 0..2 * n {
                        let sub = mul_mod(f, a[col][c], p);
                        a[r][c] = sub_mod(a[r][c], sub, p);
                    }
                }
            }
        }
        let modulus = self.modulus();
        Ok(Mat::from_fn(n, |i, j| {
            Fp::from_residue(a[i][n + j], modulus.get())
        }))
    }

    /// Matrix-vector product over `F_p`.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        let p = self.modulus().get();
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(0, |acc, j| {
                    (acc + mul_mod(self.get(i, j).value(), v[j], p)) % p
                })
            })
            .collect()
    }
}

/// Reduced row echelon form of `rows` (each of the same length) over `F_p`.
/// Returns the nonzero rows together with their pivot columns.
pub(crate) fn rref(mut rows: Vec<Vec<u64>>, p: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let width = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = inv_mod(rows[r][col], p).unwrap();
        for v in rows[r].iter_mut() {
            *v = mul_mod(*v, inv, p);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let f = rows[i][col];
                for c in 0..width {
                    let sub = mul_mod(f, rows[r][c], p);
                    rows[i][c] = sub_mod(rows[i][c], sub, p);
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Basis of `{v : row . v = 0 for every row}` in `F_p^width`, one vector per
/// free column, in increasing free-column order.
pub(crate) fn nullspace(rows: Vec<Vec<u64>>, width: usize, p: u64) -> Vec<Vec<u64>> {
    let (reduced, pivots) = if rows.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        rref(rows, p)
    };
    (0..width)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0u64; width];
            v[free] = 1;
            for (row, &pc) in reduced.iter().zip(&pivots) {
                v[pc] = sub_mod(0, row[free], p);
            }
            v
        })
        .collect()
}

pub(crate) fn rank(rows: Vec<Vec<u64>>, p: u64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    rref(rows, p).0.len()
}

impl<T: RingElement + fmt::Display> fmt::Display for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mat")
            .field("n", &self.n)
            .field("data", &self.data)
            .finish()
    }
}
