//! Decomposition of `V_{m,n}(Z)` into left `SL_n(Z)`-orbits via Hermite
//! normal forms.
//!
//! Normal form: upper triangular, positive diagonal, and each entry above
//! the diagonal reduced into `[0, d_j)` where `d_j` is the diagonal entry
//! of its column.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::arithmetic::ext_gcd;
use crate::matrix::IntMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitDecomposition {
    pub m: i64,
    pub n: usize,
    pub reps: Vec<IntMatrix>,
    index: BTreeMap<IntMatrix, usize>,
}

impl OrbitDecomposition {
    /// Number of orbits `k(m)`.
    pub fn k_m(&self) -> usize {
        self.reps.len()
    }

    pub fn index_of_rep(&self, h: &IntMatrix) -> Option<usize> {
        self.index.get(h).copied()
    }
}

fn ordered_factorizations(m: i64, parts: usize, out: &mut Vec<Vec<i64>>, prefix: &mut Vec<i64>) {
    if parts == 1 {
        prefix.push(m);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for d in 1..=m {
        if m % d == 0 {
            prefix.push(d);
            ordered_factorizations(m / d, parts - 1, out, prefix);
            prefix.pop();
        }
    }
}

/// Every Hermite normal form of determinant `m`, diagonals in lexicographic
/// order, then above-diagonal entries in lexicographic order.
pub fn hnf_orbit_reps(m: i64, n: usize) -> Result<OrbitDecomposition> {
    if m < 1 {
        return Err(Error::InvalidArgument("orbit decomposition needs m >= 1".into()));
    }
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidArgument(alloc::format!("orbit decomposition supports n = 2, 3 (got {n})")));
    }
    let mut diagonals = Vec::new();
    ordered_factorizations(m, n, &mut diagonals, &mut Vec::new());
    let mut reps = Vec::new();
    for diag in diagonals {
        // free slots (i, j), i < j, each ranging over [0, diag[j])
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        let mut counter = alloc::vec![0i64; slots.len()];
        loop {
            let mut h = IntMatrix::diag(&diag)?;
            for (&(i, j), &v) in slots.iter().zip(&counter) {
                h.set(i, j, v);
            }
            reps.push(h);
            // odometer, last slot fastest
            let mut pos = slots.len();
            let exhausted = loop {
                if pos == 0 {
                    break true;
                }
                pos -= 1;
                counter[pos] += 1;
                if counter[pos] < diag[slots[pos].1] {
                    break false;
                }
                counter[pos] = 0;
            };
            if exhausted {
                break;
            }
        }
    }
    let index = reps.iter().enumerate().map(|(i, h)| (*h, i)).collect();
    Ok(OrbitDecomposition { m, n, reps, index })
}

/// Row-reduces a nonsingular `x` to Hermite normal form.
///
/// Returns `(H, U)` with `U` in `SL_n(Z)` and `U x = H`. Requires
/// `det x > 0` so that all diagonal signs can be fixed by pairs of row
/// negations.
pub fn hermite_reduce(x: &IntMatrix) -> Result<(IntMatrix, IntMatrix)> {
    let n = x.n();
    let det = x.det();
    if det <= 0 {
        return Err(Error::InvalidArgument("Hermite reduction under SL_n needs det > 0".into()));
    }
    let mut a: Vec<Vec<i128>> = x.rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();

    fn combine(mat: &mut [Vec<i128>], r: usize, s: usize, c: [i128; 4]) {
        // (row_r, row_s) <- (c0 row_r + c1 row_s, c2 row_r + c3 row_s)
        for k in 0..mat[r].len() {
            let (x, y) = (mat[r][k], mat[s][k]);
            mat[r][k] = c[0] * x + c[1] * y;
            mat[s][k] = c[2] * x + c[3] * y;
        }
    }

    for col in 0..n {
        for i in col + 1..n {
            let b = a[i][col];
            if b == 0 {
                continue;
            }
            let p = a[col][col];
            let (g, s, t) = ext_gcd(p, b);
            let c = [s, t, -b / g, p / g];
            combine(&mut a, col, i, c);
            combine(&mut u, col, i, c);
        }
    }
    for i in 0..n - 1 {
        if a[i][i] < 0 {
            for mat in [&mut a, &mut u] {
                for row in &mut mat[i..i + 2] {
                    row.iter_mut().for_each(|v| *v = -*v);
                }
            }
        }
    }
    for j in 1..n {
        let d = a[j][j];
        for i in 0..j {
            let q = a[i][j].div_euclid(d);
            if q != 0 {
                for k in 0..n {
                    a[i][k] -= q * a[j][k];
                    u[i][k] -= q * u[j][k];
                }
            }
        }
    }
    let to_matrix = |rows: &Vec<Vec<i128>>| -> Result<IntMatrix> {
        let flat: Option<Vec<i64>> = rows.iter().flatten().map(|&v| i64::try_from(v).ok()).collect();
        IntMatrix::from_flat(n, &flat.ok_or(Error::Overflow("Hermite reduction"))?)
    };
    Ok((to_matrix(&a)?, to_matrix(&u)?))
}

/// Index of the orbit containing `x`, plus the transformation `U` with
/// `U x = reps[index]`.
pub fn orbit_of_with_transform(x: &IntMatrix, decomp: &OrbitDecomposition) -> Result<(usize, IntMatrix)> {
    if x.n() != decomp.n {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let det = x.det();
    if det != decomp.m as i128 {
        return Err(Error::DeterminantMismatch { expected: decomp.m as i128, found: det });
    }
    let (h, u) = hermite_reduce(x)?;
    let idx = decomp
        .index_of_rep(&h)
        .ok_or_else(|| Error::Internal(alloc::format!("Hermite form {h} missing from decomposition")))?;
    Ok((idx, u))
}

pub fn orbit_of(x: &IntMatrix, decomp: &OrbitDecomposition) -> Result<usize> {
    orbit_of_with_transform(x, decomp).map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma1(m: i64) -> usize {
        (1..=m).filter(|d| m % d == 0).map(|d| d as usize).sum()
    }

    #[test]
    fn rep_counts() {
        assert_eq!(hnf_orbit_reps(1, 2).unwrap().reps, [IntMatrix::identity(2).unwrap()]);
        let d2 = hnf_orbit_reps(2, 2).unwrap();
        assert_eq!(
            d2.reps,
            [
                IntMatrix::from_rows(&[[1, 0], [0, 2]]).unwrap(),
                IntMatrix::from_rows(&[[1, 1], [0, 2]]).unwrap(),
                IntMatrix::from_rows(&[[2, 0], [0, 1]]).unwrap(),
            ]
        );
        assert_eq!(hnf_orbit_reps(4, 2).unwrap().k_m(), 7);
        for m in 1..=30 {
            assert_eq!(hnf_orbit_reps(m, 2).unwrap().k_m(), sigma1(m));
        }
        // n = 3: number of sublattices of index m in Z^3 is sum_{d1 d2 d3 = m} d2 d3^2
        assert_eq!(hnf_orbit_reps(2, 3).unwrap().k_m(), 7);
        assert_eq!(hnf_orbit_reps(4, 3).unwrap().k_m(), 35);
    }

    #[test]
    fn orbit_of_examples() {
        let d1 = hnf_orbit_reps(1, 2).unwrap();
        assert_eq!(orbit_of(&IntMatrix::identity(2).unwrap(), &d1).unwrap(), 0);
        let d2 = hnf_orbit_reps(2, 2).unwrap();
        assert_eq!(orbit_of(&IntMatrix::diag(&[1, 2]).unwrap(), &d2).unwrap(), 0);
        let x = IntMatrix::from_rows(&[[0, -1], [2, 0]]).unwrap();
        let (idx, u) = orbit_of_with_transform(&x, &d2).unwrap();
        assert_eq!(u.det(), 1);
        assert_eq!(u.checked_mul(&x).unwrap(), d2.reps[idx]);
        assert!(matches!(orbit_of(&IntMatrix::identity(2).unwrap(), &d2), Err(Error::DeterminantMismatch { .. })));
    }

    #[test]
    fn reduction_of_random_matrices() {
        let mut seed = 99u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 19) as i64 - 9
        };
        for n in [2usize, 3] {
            for _ in 0..400 {
                let flat: Vec<i64> = (0..n * n).map(|_| next()).collect();
                let x = IntMatrix::from_flat(n, &flat).unwrap();
                if x.det() <= 0 {
                    continue;
                }
                let (h, u) = hermite_reduce(&x).unwrap();
                assert_eq!(u.det(), 1);
                assert_eq!(u.checked_mul(&x).unwrap(), h);
                for j in 0..n {
                    assert!(h.get(j, j) > 0);
                    for i in j + 1..n {
                        assert_eq!(h.get(i, j), 0);
                    }
                    for i in 0..j {
                        assert!((0..h.get(j, j)).contains(&h.get(i, j)));
                    }
                }
            }
        }
    }
}
