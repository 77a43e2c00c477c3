//! Dense integer matrices and the small amount of exact linear algebra the
//! invariants need: ranks and solves over the rationals, and lattice
//! membership through an echelon basis over the integers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bigint_serde;

/// A dense matrix of arbitrary-precision integers, row major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; `None` if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .expect("ragged literal matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Matrix product `self * rhs`; `None` on a dimension mismatch.
    pub fn mul(&self, rhs: &IntMatrix) -> Option<IntMatrix> {
        if self.cols != rhs.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Some(out)
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols, "vector length does not match columns");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect()
    }

    pub fn pow(&self, k: usize) -> IntMatrix {
        assert_eq!(self.rows, self.cols, "power of a non-square matrix");
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base).unwrap();
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).unwrap();
            }
        }
        result
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.data.iter().all(|x| x.is_positive())
    }

    /// First zero entry in row-major order.
    pub fn first_zero(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(Zero::is_zero)
            .map(|p| (p / self.cols, p % self.cols))
    }

    pub fn rank(&self) -> usize {
        rank_q(&to_rational_rows(&self.to_rows()))
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows().iter().map(|r| {
            r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        })).finish()
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        bigint_serde::matrix::serialize(&self.to_rows(), s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = bigint_serde::matrix::deserialize(d)?;
        Ok(IntMatrix::from_rows(rows).expect("ragged rows rejected by the decoder"))
    }
}

pub fn to_rational_rows(rows: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect()
}

/// Reduces `m` in place to row echelon form and returns the pivot columns.
fn echelon_q(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_q(rows: &[Vec<BigRational>]) -> usize {
    let mut m = rows.to_vec();
    echelon_q(&mut m).len()
}

/// Solves `sum_j c_j * columns[j] = target` over the rationals.
///
/// Returns one solution (free variables set to zero) or `None` when the
/// target is outside the span.
pub fn solve_q(columns: &[Vec<BigRational>], target: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = target.len();
    let k = columns.len();
    let mut aug: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let pivots = echelon_q(&mut aug);
    if pivots.last() == Some(&k) {
        return None;
    }
    let mut sol = vec![BigRational::zero(); k];
    for (r, &c) in pivots.iter().enumerate() {
        sol[c] = aug[r][k].clone();
    }
    Some(sol)
}

/// An echelon basis (over the integers) of the lattice spanned by `gens`.
pub fn lattice_basis(gens: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = gens.iter().filter(|g| g.iter().any(|x| !x.is_zero())).cloned().collect();
    let cols = gens.first().map_or(0, Vec::len);
    let mut basis = Vec::new();
    for c in 0..cols {
        // Euclid on column c across the remaining rows.
        loop {
            let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by(|&a, &b| rows[a][c].abs().cmp(&rows[b][c].abs()));
            let p = nz[0];
            let pivot_row = rows[p].clone();
            for &i in &nz[1..] {
                let q = rows[i][c].div_floor(&pivot_row[c]);
                for j in 0..cols {
                    let d = &q * &pivot_row[j];
                    rows[i][j] -= d;
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| !rows[i][c].is_zero()) {
            let mut row = rows.swap_remove(i);
            if row[c].is_negative() {
                row.iter_mut().for_each(|x| *x = -&*x);
            }
            basis.push(row);
        }
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    }
    basis
}

/// Membership of `v` in the lattice with echelon basis `basis`.
pub fn lattice_contains(basis: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let mut v = v.to_vec();
    for row in basis {
        let Some(c) = row.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        let (q, r) = v[c].div_rem(&row[c]);
        if !r.is_zero() {
            return false;
        }
        if !q.is_zero() {
            for j in 0..v.len() {
                v[j] -= &q * &row[j];
            }
        }
    }
    v.iter().all(Zero::is_zero)
}

pub fn gcd_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn product_and_power() {
        let a = IntMatrix::from_i64(&[&[1, 1], &[1, 0]]);
        assert_eq!(a.pow(2), IntMatrix::from_i64(&[&[2, 1], &[1, 1]]));
        assert_eq!(a.mul_vec(&v(&[1, -1])), v(&[0, 1]));
        assert_eq!(a.pow(0), IntMatrix::identity(2));
    }

    #[test]
    fn rank_of_singular() {
        assert_eq!(IntMatrix::from_i64(&[&[1, 1], &[1, 1]]).rank(), 1);
        assert_eq!(IntMatrix::from_i64(&[&[2, 1], &[1, 2]]).rank(), 2);
    }

    #[test]
    fn lattice_membership() {
        let b = lattice_basis(&[v(&[2, 0]), v(&[1, 1]), v(&[0, 2])]);
        assert!(lattice_contains(&b, &v(&[1, 1])));
        assert!(lattice_contains(&b, &v(&[3, 1])));
        assert!(!lattice_contains(&b, &v(&[1, 0])));
    }

    #[test]
    fn solve_in_span() {
        let cols = to_rational_rows(&[v(&[1, 0]), v(&[1, 1])]);
        let t = to_rational_rows(&[v(&[3, 2])]).remove(0);
        let s = solve_q(&cols, &t).unwrap();
        assert_eq!(s, to_rational_rows(&[v(&[1, 2])])[0]);
        let cols = to_rational_rows(&[v(&[1, 1])]);
        assert!(solve_q(&cols, &to_rational_rows(&[v(&[1, 0])])[0]).is_none());
    }
}
