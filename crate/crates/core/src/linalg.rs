//! Exact integer and rational linear algebra.
//!
//! Everything here is arbitrary precision. Determinants and solves use
//! fraction-free (Bareiss) elimination with row pivoting.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInstance("matrix must have at least one row and column".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows; every row must have the same length.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend(row.iter().cloned().map(Into::into));
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1; n])
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn diagonal<T: Into<BigInt> + Clone>(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = d.clone().into();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
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

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect())
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|i| {
                self.row(i)
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
            }))
            .finish()
    }
}

/// Vector of exact rationals. `BigRational` keeps every entry in lowest
/// terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalVector(pub Vec<BigRational>);

impl RationalVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn floor(&self) -> Vec<BigInt> {
        self.0.iter().map(|c| c.floor().to_integer()).collect()
    }

    /// Rounds each entry to the nearest integer, halves rounding up.
    pub fn round_half_up(&self) -> Vec<BigInt> {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        self.0.iter().map(|c| (c + &half).floor().to_integer()).collect()
    }

    pub fn fract(&self) -> RationalVector {
        RationalVector(self.0.iter().map(|c| c - c.floor()).collect())
    }
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x * x).sum()
}

fn require_square(m: &IntMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        })
    }
}

/// Runs Bareiss elimination in place on `rows` (each row may carry extra
/// augmented columns beyond the first `n`). Returns the sign of the row
/// permutation, or `None` if a zero pivot column was met.
fn bareiss(rows: &mut [Vec<BigInt>], n: usize) -> Option<i8> {
    let width = rows.first().map_or(0, Vec::len);
    let mut sign = 1i8;
    let mut prev = BigInt::one();
    for k in 0..n {
        if rows[k][k].is_zero() {
            let pivot = (k + 1..n).find(|&i| !rows[i][k].is_zero())?;
            rows.swap(k, pivot);
            sign = -sign;
        }
        let (head, tail) = rows.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for row in tail.iter_mut() {
            for j in k + 1..width {
                let v = &row[j] * &pivot_row[k] - &row[k] * &pivot_row[j];
                // Exact by Sylvester's identity.
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = pivot_row[k].clone();
    }
    Some(sign)
}

/// Exact determinant.
pub fn det_exact(m: &IntMatrix) -> Result<BigInt> {
    require_square(m)?;
    let n = m.rows;
    let mut rows = m.to_rows();
    Ok(match bareiss(&mut rows, n) {
        None => BigInt::zero(),
        Some(sign) => {
            let d = rows[n - 1][n - 1].clone();
            if sign < 0 {
                -d
            } else {
                d
            }
        }
    })
}

/// Gram matrix `AᵀA`.
pub fn gram(a: &IntMatrix) -> IntMatrix {
    let n = a.cols;
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let s: BigInt = (0..a.rows).map(|t| a.get(t, i) * a.get(t, k)).sum();
            g.set(k, i, s.clone());
            g.set(i, k, s);
        }
    }
    g
}

pub fn frobenius_sq(a: &IntMatrix) -> BigInt {
    norm_sq(&a.data)
}

/// Solves `A c = x` exactly over the rationals.
pub fn solve_exact(a: &IntMatrix, x: &[BigInt]) -> Result<RationalVector> {
    require_square(a)?;
    let n = a.rows;
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let mut rows: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(x[i].clone());
            r
        })
        .collect();
    bareiss(&mut rows, n).ok_or(Error::Singular)?;
    if rows[n - 1][n - 1].is_zero() {
        return Err(Error::Singular);
    }
    let mut c = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from_integer(rows[i][n].clone());
        for j in i + 1..n {
            acc -= BigRational::from_integer(rows[i][j].clone()) * &c[j];
        }
        c[i] = acc / BigRational::from_integer(rows[i][i].clone());
    }
    Ok(RationalVector(c))
}

/// Rows of `A⁻¹` as rational vectors.
pub fn inverse_rows(a: &IntMatrix) -> Result<Vec<RationalVector>> {
    require_square(a)?;
    let n = a.rows;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![BigInt::zero(); n];
        e[j] = BigInt::one();
        cols.push(solve_exact(a, &e)?);
    }
    Ok((0..n)
        .map(|i| RationalVector((0..n).map(|j| cols[j].0[i].clone()).collect()))
        .collect())
}

/// Smallest integer `s` with `s² ≥ r` for a nonnegative rational `r`.
pub fn ceil_sqrt(r: &BigRational) -> BigInt {
    if !r.is_positive() {
        return BigInt::zero();
    }
    let c = r.ceil().to_integer();
    let s = c.sqrt();
    if &s * &s >= c {
        s
    } else {
        s + 1
    }
}
