//! Exact enumeration of `{x in Mat_n(Z) : det x = m, |x| <= T}` for `n = 2, 3`.
//!
//! `n = 2`: each admissible first row `(a, b)` determines the second row up
//! to an arithmetic progression `(c0, d0) + k (a, b) / gcd(a, b)`, whose
//! intersection with the box is an interval of `k`.
//!
//! `n = 3`: the first two rows fix the cofactor vector `A = r1 x r2`, and
//! the third row runs over the solutions of `A . z = m` in the box, one
//! coordinate at a time.

use alloc::vec::Vec;

use super::NormSpec;
use crate::arithmetic::{ext_gcd, gcd_i128};
use crate::matrix::IntMatrix;
use crate::{par, Error, Result};

/// Integer form of a norm ball: box half-width plus optional `Σx² <= t2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ball {
    pub bound: i64,
    pub frob_sq: Option<u128>,
}

impl Ball {
    pub fn from_norm(norm: &NormSpec) -> Result<Ball> {
        norm.validate()?;
        Ok(match norm.kind {
            super::NormKind::MaxEntry => Ball { bound: libm::floor(norm.threshold) as i64, frob_sq: None },
            super::NormKind::Frobenius => {
                let t2 = libm::floor(norm.threshold * norm.threshold) as u128;
                Ball { bound: isqrt(t2) as i64, frob_sq: Some(t2) }
            }
        })
    }

    #[inline]
    fn admits(&self, x: &IntMatrix) -> bool {
        match self.frob_sq {
            None => true,
            Some(t2) => x.frobenius_sq() <= t2,
        }
    }
}

fn isqrt(v: u128) -> u128 {
    let mut r = libm::sqrt(v as f64) as u128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

fn check_args(m: i64, n: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::ZeroInput);
    }
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidArgument(alloc::format!("enumeration supports n = 2, 3 (got {n})")));
    }
    Ok(())
}

/// Predicted number of candidate visits for the chosen strategy.
pub fn predicted_visits(n: usize, bound: i64) -> u128 {
    let side = (2 * bound.max(0) as u128) + 1;
    match n {
        2 => side * side,
        _ => side.pow(7),
    }
}

pub(crate) fn check_budget(n: usize, ball: &Ball, budget: u64) -> Result<()> {
    let needed = predicted_visits(n, ball.bound);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { what: "enumeration candidate visits", needed, cap: budget as u128 });
    }
    Ok(())
}

/// Values of `k` with `lo <= c0 + k * step <= hi`; `None` if empty.
/// `step == 0` yields the unbounded range when `c0` itself fits.
fn k_interval(c0: i128, step: i128, lo: i128, hi: i128) -> Option<(i128, i128)> {
    if step == 0 {
        return if (lo..=hi).contains(&c0) { Some((i128::MIN, i128::MAX)) } else { None };
    }
    let (a, b) = (lo - c0, hi - c0);
    let (kmin, kmax) =
        if step > 0 { (div_ceil(a, step), b.div_euclid(step)) } else { (div_ceil(-b, -step), (-a).div_euclid(-step)) };
    (kmin <= kmax).then_some((kmin, kmax))
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

fn intersect(a: Option<(i128, i128)>, b: Option<(i128, i128)>) -> Option<(i128, i128)> {
    let (a, b) = (a?, b?);
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    (lo <= hi).then_some((lo, hi))
}

/// Visits all `(u, v)` in `[-bound, bound]^2` with `p*u + q*v = c`.
fn solve_two_in_box(p: i128, q: i128, c: i128, bound: i128, mut f: impl FnMut(i128, i128)) {
    if p == 0 && q == 0 {
        if c == 0 {
            for u in -bound..=bound {
                for v in -bound..=bound {
                    f(u, v);
                }
            }
        }
        return;
    }
    let (g, s, t) = ext_gcd(p, q);
    if c % g != 0 {
        return;
    }
    let (u0, v0) = (s * (c / g), t * (c / g));
    let (du, dv) = (q / g, -p / g);
    if let Some((k0, k1)) = intersect(k_interval(u0, du, -bound, bound), k_interval(v0, dv, -bound, bound)) {
        // both steps zero is impossible here, so the range is finite
        for k in k0..=k1 {
            f(u0 + k * du, v0 + k * dv);
        }
    }
}

fn visit_slab_2(m: i64, ball: &Ball, a: i64, f: &mut impl FnMut(&IntMatrix)) {
    let bound = ball.bound as i128;
    let m = m as i128;
    let mut x = IntMatrix::zero(2).expect("n = 2");
    x.set(0, 0, a);
    for b in -ball.bound..=ball.bound {
        if let Some(t2) = ball.frob_sq {
            if (a as i128 * a as i128 + b as i128 * b as i128) as u128 > t2 {
                continue;
            }
        }
        let (a1, b1) = (a as i128, b as i128);
        if a1 == 0 && b1 == 0 {
            continue;
        }
        // a d - b c = m
        let (g, s, t) = ext_gcd(a1, b1);
        if m % g != 0 {
            continue;
        }
        let (d0, c0) = (s * (m / g), -t * (m / g));
        let (dc, dd) = (a1 / g, b1 / g);
        let Some((k0, k1)) = intersect(k_interval(c0, dc, -bound, bound), k_interval(d0, dd, -bound, bound)) else {
            continue;
        };
        x.set(0, 1, b);
        for k in k0..=k1 {
            x.set(1, 0, (c0 + k * dc) as i64);
            x.set(1, 1, (d0 + k * dd) as i64);
            if ball.admits(&x) {
                f(&x);
            }
        }
    }
}

fn visit_slab_3(m: i64, ball: &Ball, a: i64, f: &mut impl FnMut(&IntMatrix)) {
    let bd = ball.bound;
    let bound = bd as i128;
    let m = m as i128;
    let mut x = IntMatrix::zero(3).expect("n = 3");
    x.set(0, 0, a);
    let partial_sq = |vals: &[i64]| vals.iter().map(|&v| (v as i128 * v as i128) as u128).sum::<u128>();
    for r01 in -bd..=bd {
        for r02 in -bd..=bd {
            if let Some(t2) = ball.frob_sq {
                if partial_sq(&[a, r01, r02]) > t2 {
                    continue;
                }
            }
            for r10 in -bd..=bd {
                for r11 in -bd..=bd {
                    for r12 in -bd..=bd {
                        let r1 = [a as i128, r01 as i128, r02 as i128];
                        let r2 = [r10 as i128, r11 as i128, r12 as i128];
                        let cof = [
                            r1[1] * r2[2] - r1[2] * r2[1],
                            r1[2] * r2[0] - r1[0] * r2[2],
                            r1[0] * r2[1] - r1[1] * r2[0],
                        ];
                        let g = gcd_i128(gcd_i128(cof[0], cof[1]), cof[2]);
                        // all-zero cofactors: rows dependent, det is 0 for every z
                        if g == 0 || m % g != 0 {
                            continue;
                        }
                        x.set(0, 1, r01);
                        x.set(0, 2, r02);
                        x.set(1, 0, r10);
                        x.set(1, 1, r11);
                        x.set(1, 2, r12);
                        for z0 in -bound..=bound {
                            solve_two_in_box(cof[1], cof[2], m - cof[0] * z0, bound, |z1, z2| {
                                x.set(2, 0, z0 as i64);
                                x.set(2, 1, z1 as i64);
                                x.set(2, 2, z2 as i64);
                                if ball.admits(&x) {
                                    f(&x);
                                }
                            });
                        }
                    }
                }
            }
        }
    }
}

fn visit_slab(m: i64, n: usize, ball: &Ball, a: i64, f: &mut impl FnMut(&IntMatrix)) {
    match n {
        2 => visit_slab_2(m, ball, a, f),
        _ => visit_slab_3(m, ball, a, f),
    }
}

/// Sequentially visits every point of the ball, in a fixed order
/// (top-left entry ascending, then the remaining free entries ascending).
pub fn for_each_point(m: i64, n: usize, norm: &NormSpec, budget: u64, mut f: impl FnMut(&IntMatrix)) -> Result<()> {
    check_args(m, n)?;
    let ball = Ball::from_norm(norm)?;
    check_budget(n, &ball, budget)?;
    for a in -ball.bound..=ball.bound {
        visit_slab(m, n, &ball, a, &mut f);
    }
    Ok(())
}

/// Folds over the points of the ball, slab by slab (one slab per value of
/// the top-left entry), then merges slab results in ascending order.
///
/// Slabs run in parallel under the `parallel` feature; the merge order is
/// fixed so the result does not depend on the worker count.
pub fn fold_points<A, I, F, M>(m: i64, n: usize, norm: &NormSpec, budget: u64, init: I, fold: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &IntMatrix) + Sync + Send,
    M: Fn(A, A) -> A,
{
    check_args(m, n)?;
    let ball = Ball::from_norm(norm)?;
    check_budget(n, &ball, budget)?;
    let slabs = par::map_range(-ball.bound, ball.bound, |a| {
        let mut acc = init();
        visit_slab(m, n, &ball, a, &mut |x| fold(&mut acc, x));
        acc
    });
    Ok(slabs.into_iter().fold(init(), merge))
}

/// [`fold_points`] with a fallible step. A slab stops folding at its first
/// error; the error from the lowest slab is returned.
pub fn try_fold_points<A, I, F, M>(
    m: i64,
    n: usize,
    norm: &NormSpec,
    budget: u64,
    init: I,
    fold: F,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &IntMatrix) -> Result<()> + Sync + Send,
    M: Fn(A, A) -> A,
{
    fold_points(
        m,
        n,
        norm,
        budget,
        || Ok(init()),
        |acc: &mut Result<A>, x| {
            if let Ok(a) = acc {
                if let Err(e) = fold(a, x) {
                    *acc = Err(e);
                }
            }
        },
        |a, b| Ok(merge(a?, b?)),
    )?
}

/// All points `x` with `det x = m` and `|x| <= T`, in deterministic order.
pub fn enumerate_points(m: i64, n: usize, norm: &NormSpec, budget: u64) -> Result<Vec<IntMatrix>> {
    fold_points(
        m,
        n,
        norm,
        budget,
        Vec::new,
        |acc, x| acc.push(*x),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )
}

/// `N_{m,n}(T)`.
pub fn count_points(m: i64, n: usize, norm: &NormSpec, budget: u64) -> Result<u64> {
    fold_points(m, n, norm, budget, || 0u64, |c, _| *c += 1, |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{NormKind, NormSpec};
    use crate::DEFAULT_BUDGET;
    use alloc::collections::BTreeSet;

    fn naive2(m: i64, bound: i64, frob: Option<i64>) -> BTreeSet<IntMatrix> {
        let mut out = BTreeSet::new();
        let r = -bound..=bound;
        for a in r.clone() {
            for b in r.clone() {
                for c in r.clone() {
                    for d in r.clone() {
                        let x = IntMatrix::from_flat(2, &[a, b, c, d]).unwrap();
                        if x.det() == m as i128 && frob.is_none_or(|t2| x.frobenius_sq() <= t2 as u128) {
                            out.insert(x);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn unimodular_unit_ball_has_twenty_points() {
        let pts = enumerate_points(1, 2, &NormSpec::max_entry(1.0), DEFAULT_BUDGET).unwrap();
        assert_eq!(pts.len(), 20);
        assert_eq!(pts.iter().copied().collect::<BTreeSet<_>>(), naive2(1, 1, None));
        assert!(enumerate_points(1, 2, &NormSpec::max_entry(0.5), DEFAULT_BUDGET).unwrap().is_empty());
    }

    #[test]
    fn determinant_two_unit_ball() {
        let pts: BTreeSet<_> =
            enumerate_points(2, 2, &NormSpec::max_entry(1.0), DEFAULT_BUDGET).unwrap().into_iter().collect();
        assert_eq!(pts, naive2(2, 1, None));
        assert!(pts.contains(&IntMatrix::from_rows(&[[1, -1], [1, 1]]).unwrap()));
    }

    #[test]
    fn frobenius_ball_matches_naive() {
        let norm = NormSpec { kind: NormKind::Frobenius, threshold: 2.0 };
        let pts: BTreeSet<_> = enumerate_points(1, 2, &norm, DEFAULT_BUDGET).unwrap().into_iter().collect();
        assert_eq!(pts, naive2(1, 2, Some(4)));
        assert_eq!(count_points(1, 2, &norm, DEFAULT_BUDGET).unwrap(), pts.len() as u64);
    }

    #[test]
    fn three_by_three_matches_naive() {
        for m in [1i64, -2, 4] {
            let pts: BTreeSet<_> =
                enumerate_points(m, 3, &NormSpec::max_entry(1.0), DEFAULT_BUDGET).unwrap().into_iter().collect();
            let mut naive = BTreeSet::new();
            for code in 0..3u32.pow(9) {
                let mut c = code;
                let mut flat = [0i64; 9];
                for v in flat.iter_mut() {
                    *v = (c % 3) as i64 - 1;
                    c /= 3;
                }
                let x = IntMatrix::from_flat(3, &flat).unwrap();
                if x.det() == m as i128 {
                    naive.insert(x);
                }
            }
            assert_eq!(pts, naive, "m = {m}");
        }
    }

    #[test]
    fn errors() {
        assert_eq!(count_points(0, 2, &NormSpec::max_entry(3.0), DEFAULT_BUDGET), Err(Error::ZeroInput));
        assert!(matches!(count_points(1, 2, &NormSpec::max_entry(100.0), 1000), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(
            count_points(1, 4, &NormSpec::max_entry(1.0), DEFAULT_BUDGET),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn k_interval_cases() {
        assert_eq!(k_interval(0, 1, -2, 2), Some((-2, 2)));
        assert_eq!(k_interval(1, -2, -3, 3), Some((-1, 2)));
        assert_eq!(k_interval(5, 0, -3, 3), None);
        assert_eq!(k_interval(1, 3, 2, 3), None);
    }
}
