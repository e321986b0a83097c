//! Integer polynomials in the `n^2` entries of a matrix, with a declared
//! normalizer `N` (so the sifted function is `f = g / N`) and a declared
//! number of irreducible factors `t`.

use alloc::vec::Vec;

use crate::matrix::{IntMatrix, MAX_DIM};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: i64,
    /// Exponent of entry `(i, j)` at index `i * n + j`.
    pub exps: [u8; MAX_DIM * MAX_DIM],
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialOnV {
    n: usize,
    monomials: Vec<Monomial>,
    normalizer: u64,
    factor_count: u32,
}

impl PolynomialOnV {
    /// `coeff * prod x^exps` terms; exponent vectors have length `n*n`.
    pub fn from_terms(n: usize, terms: &[(i64, Vec<u8>)], normalizer: u64, factor_count: u32) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidArgument(alloc::format!("dimension {n} not in 1..=4")));
        }
        if normalizer == 0 {
            return Err(Error::InvalidArgument("normalizer N must be positive".into()));
        }
        let mut monomials: Vec<Monomial> = Vec::new();
        for (coeff, e) in terms {
            if e.len() != n * n {
                return Err(Error::InvalidArgument(alloc::format!(
                    "exponent vector of length {}, expected {}",
                    e.len(),
                    n * n
                )));
            }
            let mut exps = [0u8; MAX_DIM * MAX_DIM];
            exps[..n * n].copy_from_slice(e);
            match monomials.iter_mut().find(|m| m.exps == exps) {
                Some(m) => m.coeff = m.coeff.checked_add(*coeff).ok_or(Error::Overflow("polynomial"))?,
                None => monomials.push(Monomial { coeff: *coeff, exps }),
            }
        }
        monomials.retain(|m| m.coeff != 0);
        monomials.sort_by_key(|m| core::cmp::Reverse(m.exps));
        Ok(PolynomialOnV { n, monomials, normalizer, factor_count })
    }

    pub fn constant(n: usize, c: i64) -> Result<Self> {
        Self::from_terms(n, &[(c, alloc::vec![0; n * n])], 1, 0)
    }

    /// The coordinate function `x_{ij}` (0-based indices).
    pub fn entry(n: usize, i: usize, j: usize) -> Result<Self> {
        let mut e = alloc::vec![0u8; n * n];
        if i >= n || j >= n {
            return Err(Error::InvalidArgument("entry index out of range".into()));
        }
        e[i * n + j] = 1;
        Self::from_terms(n, &[(1, e)], 1, 1)
    }

    /// `prod_{i,j} x_{ij}` with `t = n^2`.
    pub fn product_of_entries(n: usize) -> Result<Self> {
        Self::from_terms(n, &[(1, alloc::vec![1; n * n])], 1, (n * n) as u32)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let terms: Vec<(i64, Vec<u8>)> = self
            .monomials
            .iter()
            .chain(other.monomials.iter())
            .map(|m| (m.coeff, m.exps[..self.n * self.n].to_vec()))
            .collect();
        Self::from_terms(self.n, &terms, 1, 1)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = Vec::new();
        for a in &self.monomials {
            for b in &other.monomials {
                let c = a.coeff.checked_mul(b.coeff).ok_or(Error::Overflow("polynomial"))?;
                let e: Vec<u8> = (0..self.n * self.n).map(|k| a.exps[k] + b.exps[k]).collect();
                terms.push((c, e));
            }
        }
        Self::from_terms(self.n, &terms, 1, self.factor_count + other.factor_count)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::InvalidArgument("polynomials on different dimensions".into()));
        }
        Ok(())
    }

    pub fn with_normalizer(mut self, normalizer: u64) -> Result<Self> {
        if normalizer == 0 {
            return Err(Error::InvalidArgument("normalizer N must be positive".into()));
        }
        self.normalizer = normalizer;
        Ok(self)
    }

    pub fn with_factor_count(mut self, t: u32) -> Self {
        self.factor_count = t;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    /// Declared normalizer `N`.
    pub fn normalizer(&self) -> u64 {
        self.normalizer
    }

    /// Declared number of irreducible factors `t(f)`.
    pub fn factor_count(&self) -> u32 {
        self.factor_count
    }

    pub fn degree(&self) -> u32 {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// True when `g` has no monomial of positive degree.
    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    /// `g(x)` over the integers; `None` on overflow.
    pub fn eval_g(&self, x: &IntMatrix) -> Option<i128> {
        let xs = x.flat();
        let mut total: i128 = 0;
        for m in &self.monomials {
            let mut term = m.coeff as i128;
            for (k, &e) in m.exps[..self.n * self.n].iter().enumerate() {
                for _ in 0..e {
                    term = term.checked_mul(xs[k] as i128)?;
                }
            }
            total = total.checked_add(term)?;
        }
        Some(total)
    }

    /// `f(x) = g(x) / N`; errors if `N` does not divide `g(x)`.
    pub fn eval(&self, x: &IntMatrix) -> Result<i128> {
        let g = self.eval_g(x).ok_or(Error::Overflow("polynomial evaluation"))?;
        if g % self.normalizer as i128 != 0 {
            return Err(Error::NormalizerMismatch { value: g, normalizer: self.normalizer });
        }
        Ok(g / self.normalizer as i128)
    }

    /// `g(x) mod d` for entries given as residues (any representatives).
    pub fn eval_g_mod(&self, xs: &[i64], d: u64) -> u64 {
        let d = d as u128;
        let mut total: u128 = 0;
        for m in &self.monomials {
            let mut term = (m.coeff as i128).rem_euclid(d as i128) as u128;
            for (k, &e) in m.exps[..self.n * self.n].iter().enumerate() {
                let v = (xs[k] as i128).rem_euclid(d as i128) as u128;
                for _ in 0..e {
                    term = term * v % d;
                }
            }
            total = (total + term) % d;
        }
        total as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_and_evaluation() {
        let x = IntMatrix::from_rows(&[[2, 3], [5, 8]]).unwrap();
        let x11 = PolynomialOnV::entry(2, 0, 0).unwrap();
        let x22 = PolynomialOnV::entry(2, 1, 1).unwrap();
        assert_eq!(x11.eval(&x).unwrap(), 2);
        assert_eq!(x11.add(&x22).unwrap().eval(&x).unwrap(), 10);
        let prod = x11.mul(&x22).unwrap();
        assert_eq!(prod.eval(&x).unwrap(), 16);
        assert_eq!(prod.factor_count(), 2);
        assert_eq!(prod.degree(), 2);
        assert_eq!(PolynomialOnV::product_of_entries(2).unwrap().eval(&x).unwrap(), 240);
        assert!(PolynomialOnV::constant(2, 1).unwrap().is_constant());
    }

    #[test]
    fn normalizer_must_divide() {
        let g = PolynomialOnV::entry(2, 0, 0).unwrap().with_normalizer(2).unwrap();
        let x = IntMatrix::from_rows(&[[3, 1], [2, 1]]).unwrap();
        assert!(matches!(g.eval(&x), Err(Error::NormalizerMismatch { .. })));
        let y = IntMatrix::from_rows(&[[4, 1], [3, 1]]).unwrap();
        assert_eq!(g.eval(&y).unwrap(), 2);
    }

    #[test]
    fn modular_evaluation_matches_integer() {
        let f = PolynomialOnV::from_terms(
            2,
            &[(3, alloc::vec![2, 0, 0, 1]), (-7, alloc::vec![0, 1, 1, 0]), (5, alloc::vec![0; 4])],
            1,
            1,
        )
        .unwrap();
        let x = IntMatrix::from_rows(&[[-4, 9], [11, -2]]).unwrap();
        let g = f.eval_g(&x).unwrap();
        for d in [2u64, 3, 7, 30, 101] {
            assert_eq!(f.eval_g_mod(x.flat(), d) as i128, g.rem_euclid(d as i128));
        }
    }
}
