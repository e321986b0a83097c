//! Small square integer matrices (`n <= 4`).

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::{Error, Result};

pub const MAX_DIM: usize = 4;

/// An `n x n` integer matrix, stored row-major with stride `n`.
///
/// Unused tail entries are always zero, so derived equality and hashing
/// are well-defined.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: u8,
    entries: [i64; MAX_DIM * MAX_DIM],
}

impl IntMatrix {
    pub fn zero(n: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidArgument(alloc::format!("dimension {n} not in 1..=4")));
        }
        Ok(IntMatrix { n: n as u8, entries: [0; MAX_DIM * MAX_DIM] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zero(n)?;
        for i in 0..n {
            m.set(i, i, 1);
        }
        Ok(m)
    }

    pub fn diag(d: &[i64]) -> Result<Self> {
        let mut m = Self::zero(d.len())?;
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        Ok(m)
    }

    /// Builds from a slice of rows; every row must have length `rows.len()`.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zero(n)?;
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::InvalidArgument(alloc::format!("row {i} has length {}, expected {n}", r.len())));
            }
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    /// Builds from `n*n` row-major entries.
    pub fn from_flat(n: usize, flat: &[i64]) -> Result<Self> {
        if flat.len() != n * n {
            return Err(Error::InvalidArgument(alloc::format!("{} entries given for a {n}x{n} matrix", flat.len())));
        }
        let mut m = Self::zero(n)?;
        m.entries[..n * n].copy_from_slice(flat);
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n as usize + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.entries[i * self.n as usize + j] = v;
    }

    /// Row-major entries.
    #[inline]
    pub fn flat(&self) -> &[i64] {
        &self.entries[..self.n() * self.n()]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.n()).map(|i| (0..self.n()).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn max_abs_entry(&self) -> u64 {
        self.flat().iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn frobenius_sq(&self) -> u128 {
        self.flat().iter().map(|&v| (v as i128 * v as i128) as u128).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        for i in 0..self.n() {
            for j in 0..self.n() {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Exact determinant.
    ///
    /// Panics only if the determinant itself does not fit in `i128`.
    pub fn det(&self) -> i128 {
        self.checked_det().unwrap_or_else(|| self.det_big().to_i128().expect("determinant exceeds i128"))
    }

    /// Laplace expansion along the top row in checked `i128` arithmetic.
    pub fn checked_det(&self) -> Option<i128> {
        let n = self.n();
        let a = |i: usize, j: usize| self.get(i, j) as i128;
        let det2 = |r0: usize, r1: usize, c0: usize, c1: usize| -> Option<i128> {
            a(r0, c0).checked_mul(a(r1, c1))?.checked_sub(a(r0, c1).checked_mul(a(r1, c0))?)
        };
        let det3 = |r: [usize; 3], c: [usize; 3]| -> Option<i128> {
            let t0 = a(r[0], c[0]).checked_mul(det2(r[1], r[2], c[1], c[2])?)?;
            let t1 = a(r[0], c[1]).checked_mul(det2(r[1], r[2], c[0], c[2])?)?;
            let t2 = a(r[0], c[2]).checked_mul(det2(r[1], r[2], c[0], c[1])?)?;
            t0.checked_sub(t1)?.checked_add(t2)
        };
        match n {
            1 => Some(a(0, 0)),
            2 => det2(0, 1, 0, 1),
            3 => det3([0, 1, 2], [0, 1, 2]),
            _ => {
                let mut total: i128 = 0;
                for j in 0..4 {
                    let cols: Vec<usize> = (0..4).filter(|&k| k != j).collect();
                    let term = a(0, j).checked_mul(det3([1, 2, 3], [cols[0], cols[1], cols[2]])?)?;
                    total = if j % 2 == 0 { total.checked_add(term)? } else { total.checked_sub(term)? };
                }
                Some(total)
            }
        }
    }

    /// Determinant over arbitrary-precision integers.
    pub fn det_big(&self) -> BigInt {
        fn expand(rows: &[Vec<BigInt>]) -> BigInt {
            if rows.len() == 1 {
                return rows[0][0].clone();
            }
            let mut total = BigInt::zero();
            for j in 0..rows.len() {
                let minor: Vec<Vec<BigInt>> = rows[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = &rows[0][j] * expand(&minor);
                if j % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            total
        }
        let rows: Vec<Vec<BigInt>> =
            (0..self.n()).map(|i| (0..self.n()).map(|j| BigInt::from(self.get(i, j))).collect()).collect();
        expand(&rows)
    }

    /// Matrix product; `None` on overflow or dimension mismatch.
    pub fn checked_mul(&self, rhs: &IntMatrix) -> Option<IntMatrix> {
        if self.n != rhs.n {
            return None;
        }
        let n = self.n();
        let mut out = IntMatrix { n: self.n, entries: [0; 16] };
        for i in 0..n {
            for j in 0..n {
                let mut s: i128 = 0;
                for k in 0..n {
                    s += self.get(i, k) as i128 * rhs.get(k, j) as i128;
                }
                out.set(i, j, i64::try_from(s).ok()?);
            }
        }
        Some(out)
    }

    /// Entrywise reduction into `[0, d)`.
    pub fn reduce_mod(&self, d: u64) -> IntMatrix {
        let mut out = *self;
        for v in out.entries[..self.n() * self.n()].iter_mut() {
            *v = v.rem_euclid(d as i64);
        }
        out
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.n() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Fraction-free Gaussian elimination on a square matrix.
///
/// Works for any size; `None` if an intermediate overflows `i128`.
pub fn bareiss_det(mut m: Vec<Vec<i128>>) -> Option<i128> {
    let n = m.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return Some(0);
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].checked_mul(m[k][k])?.checked_sub(m[i][k].checked_mul(m[k][j])?)?;
                m[i][j] = v / prev;
            }
        }
        prev = m[k][k];
    }
    Some(sign * m[n - 1][n - 1])
}
