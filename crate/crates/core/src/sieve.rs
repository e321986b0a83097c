//! Sift sequences `a_k(T)`, exact Legendre sifting, remainders and prime
//! counts over norm balls.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arithmetic::{factor, is_prime, is_squarefree, moebius, primes_up_to};
use crate::densities::DensityTable;
use crate::matrix::IntMatrix;
use crate::orbit::{hermite_reduce, try_fold_points, NormSpec};
use crate::polynomial::PolynomialOnV;
use crate::{Error, Rational, Result};

/// `k -> a_k(T)` for `k >= 1`, with `a_0` kept apart.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SiftSequence {
    pub threshold: f64,
    pub a0: u64,
    pub counts: BTreeMap<u128, u64>,
    /// `X = Σ_{k>=1} a_k`.
    pub x: u64,
}

impl SiftSequence {
    /// Sequence from explicit `(k, a_k)` pairs; `k = 0` goes into `a_0`.
    pub fn from_counts(threshold: f64, pairs: &[(u128, u64)]) -> Self {
        let mut s = SiftSequence { threshold, ..Default::default() };
        for &(k, a) in pairs {
            s.push(k, a);
        }
        s
    }

    fn push(&mut self, k: u128, a: u64) {
        if a == 0 {
            return;
        }
        if k == 0 {
            self.a0 += a;
        } else {
            *self.counts.entry(k).or_insert(0) += a;
            self.x += a;
        }
    }

    fn merge(mut self, other: SiftSequence) -> SiftSequence {
        self.a0 += other.a0;
        for (k, a) in other.counts {
            self.push(k, a);
        }
        self
    }

    pub fn total_points(&self) -> u64 {
        self.a0 + self.x
    }

    pub fn max_k(&self) -> u128 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// `Σ_{k>=1, d|k} a_k`. No positive `k` is divisible by 0.
    pub fn progression_sum(&self, d: u128) -> u64 {
        if d == 0 {
            return 0;
        }
        if d == 1 {
            return self.x;
        }
        let max = self.max_k();
        if max / d < self.counts.len() as u128 {
            let mut k = d;
            let mut total = 0;
            while k <= max {
                total += self.counts.get(&k).copied().unwrap_or(0);
                k += d;
            }
            total
        } else {
            self.counts.iter().filter(|(k, _)| *k % d == 0).map(|(_, a)| a).sum()
        }
    }
}

fn sequence_fold(
    m: i64,
    n: usize,
    f: &PolynomialOnV,
    norm: &NormSpec,
    budget: u64,
    orbit: Option<IntMatrix>,
) -> Result<SiftSequence> {
    if f.n() != n {
        return Err(Error::InvalidArgument("polynomial dimension differs from matrix dimension".into()));
    }
    let threshold = norm.threshold;
    try_fold_points(
        m,
        n,
        norm,
        budget,
        || SiftSequence { threshold, ..Default::default() },
        |s: &mut SiftSequence, x: &IntMatrix| {
            if let Some(h) = &orbit {
                if hermite_reduce(x)?.0 != *h {
                    return Ok(());
                }
            }
            s.push(f.eval(x)?.unsigned_abs(), 1);
            Ok(())
        },
        SiftSequence::merge,
    )
}

/// `a_k(T)` over the points of `SL_n(Z) v` in the ball.
pub fn build_sequence(v: &IntMatrix, f: &PolynomialOnV, norm: &NormSpec, budget: u64) -> Result<SiftSequence> {
    let det = v.det();
    let m = i64::try_from(det).map_err(|_| Error::Overflow("determinant"))?;
    if m == 1 {
        return sequence_fold(1, v.n(), f, norm, budget, None);
    }
    if m <= 0 {
        return Err(Error::InvalidArgument("orbit sequences need det v > 0".into()));
    }
    let (h, _) = hermite_reduce(v)?;
    sequence_fold(m, v.n(), f, norm, budget, Some(h))
}

/// `a_k(T)` over all of `V_{m,n}(Z)` in the ball.
pub fn build_sequence_variety(
    m: i64,
    n: usize,
    f: &PolynomialOnV,
    norm: &NormSpec,
    budget: u64,
) -> Result<SiftSequence> {
    sequence_fold(m, n, f, norm, budget, None)
}

/// `R(A,d) = Σ_{d|k} a_k - ρ(d) X / d`.
pub fn remainder(seq: &SiftSequence, d: u64, rho: &DensityTable) -> Result<Rational> {
    if d == 0 {
        return Err(Error::ZeroInput);
    }
    let r = rho.get(d).ok_or(Error::MissingDensity(d))?;
    let main = r * Rational::new(BigInt::from(seq.x), BigInt::from(d));
    Ok(Rational::from_integer(BigInt::from(seq.progression_sum(d as u128))) - main)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiftMethod {
    Moebius,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiftOutcome {
    /// `S(A,P)`.
    pub value: u64,
    /// Sifting primes: `p <= z`, `p` not in the ramified set.
    pub primes: Vec<u64>,
    pub method: SiftMethod,
}

/// Primes `p <= z` outside `ramified`.
pub fn sifting_primes(z: f64, ramified: &[u64]) -> Vec<u64> {
    if z.is_nan() || z < 2.0 {
        return Vec::new();
    }
    primes_up_to(libm::floor(z) as u64).into_iter().filter(|p| !ramified.contains(p)).collect()
}

/// `Σ_{gcd(k,P)=1} a_k` straight from the definition.
pub fn legendre_sift_direct(seq: &SiftSequence, primes: &[u64]) -> u64 {
    seq.counts.iter().filter(|(k, _)| primes.iter().all(|&p| *k % p as u128 != 0)).map(|(_, a)| a).sum()
}

/// `Σ_{d|P} μ(d) Σ_{d|k} a_k`, or `None` once more than `budget` divisors
/// would be visited.
pub fn legendre_sift_moebius(seq: &SiftSequence, primes: &[u64], budget: u64) -> Option<u64> {
    let max = seq.max_k();
    let mut visited = 0u64;
    let mut total: i128 = 0;
    // divisors larger than every k contribute nothing, nor do their multiples
    #[allow(clippy::too_many_arguments)]
    fn walk(
        seq: &SiftSequence,
        primes: &[u64],
        start: usize,
        d: u128,
        sign: i128,
        max: u128,
        visited: &mut u64,
        budget: u64,
        total: &mut i128,
    ) -> bool {
        *visited += 1;
        if *visited > budget {
            return false;
        }
        *total += sign * seq.progression_sum(d) as i128;
        for (i, &p) in primes.iter().enumerate().skip(start) {
            let next = d * p as u128;
            if next > max {
                break;
            }
            if !walk(seq, primes, i + 1, next, -sign, max, visited, budget, total) {
                return false;
            }
        }
        true
    }
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    if !walk(seq, &sorted, 0, 1, 1, max, &mut visited, budget, &mut total) {
        return None;
    }
    u64::try_from(total).ok()
}

/// Exact `S(A, P_z)` with the Möbius expansion, falling back to the direct
/// count when the divisor walk exceeds `budget`.
pub fn legendre_sift(seq: &SiftSequence, z: f64, ramified: &[u64], budget: u64) -> SiftOutcome {
    let primes = sifting_primes(z, ramified);
    match legendre_sift_moebius(seq, &primes, budget) {
        Some(value) => SiftOutcome { value, primes, method: SiftMethod::Moebius },
        None => SiftOutcome { value: legendre_sift_direct(seq, &primes), primes, method: SiftMethod::Direct },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub level: u64,
    /// `Σ_{d<=D, d squarefree} |R(A,d)|`.
    pub remainder_sum: f64,
    pub ratio_to_x: f64,
}

pub fn level_scan(seq: &SiftSequence, rho: &DensityTable, levels: &[u64]) -> Result<Vec<LevelRow>> {
    let top = levels.iter().copied().max().unwrap_or(0);
    let mut partial: Vec<(u64, Rational)> = Vec::new();
    let mut acc = Rational::zero();
    for d in 1..=top {
        if !is_squarefree(d) {
            continue;
        }
        acc += remainder(seq, d, rho)?.abs();
        partial.push((d, acc.clone()));
    }
    Ok(levels
        .iter()
        .map(|&level| {
            let sum =
                partial.iter().take_while(|(d, _)| *d <= level).last().map(|(_, s)| rational_to_f64(s)).unwrap_or(0.0);
            LevelRow { level, remainder_sum: sum, ratio_to_x: if seq.x == 0 { 0.0 } else { sum / seq.x as f64 } }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SieveReport {
    pub z: f64,
    pub primes: Vec<u64>,
    pub sifted: SiftOutcome,
    /// `(d, R(A,d))` for squarefree `d` up to the largest level.
    pub remainders: Vec<(u64, Rational)>,
    pub level_scan: Vec<LevelRow>,
}

pub fn sieve_report(
    seq: &SiftSequence,
    rho: &DensityTable,
    z: f64,
    ramified: &[u64],
    levels: &[u64],
    budget: u64,
) -> Result<SieveReport> {
    let sifted = legendre_sift(seq, z, ramified, budget);
    let top = levels.iter().copied().max().unwrap_or(0);
    let remainders = (1..=top)
        .filter(|&d| is_squarefree(d))
        .map(|d| remainder(seq, d, rho).map(|r| (d, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SieveReport { z, primes: sifted.primes.clone(), sifted, remainders, level_scan: level_scan(seq, rho, levels)? })
}

fn check_factors(factors: &[PolynomialOnV], n: usize) -> Result<()> {
    for f in factors {
        if f.n() != n {
            return Err(Error::InvalidArgument("factor dimension differs from matrix dimension".into()));
        }
        if f.is_constant() {
            return Err(Error::Degenerate("constant factor has no prime values to count".into()));
        }
    }
    Ok(())
}

fn count_where(
    m: i64,
    n: usize,
    norm: &NormSpec,
    budget: u64,
    pred: impl Fn(&IntMatrix) -> Result<bool> + Sync + Send,
) -> Result<u64> {
    try_fold_points(
        m,
        n,
        norm,
        budget,
        || 0u64,
        |acc: &mut u64, x: &IntMatrix| {
            *acc += pred(x)? as u64;
            Ok(())
        },
        |a, b| a + b,
    )
}

fn all_prime(factors: &[PolynomialOnV], x: &IntMatrix) -> Result<bool> {
    for f in factors {
        let v = f.eval(x)?;
        if v <= 0 || !is_prime(i64::try_from(v).map_err(|_| Error::Overflow("factor value"))?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Points of `V_{m,n}(Z)` in the ball at which every factor takes a positive
/// prime value.
pub fn pi_count(m: i64, n: usize, factors: &[PolynomialOnV], norm: &NormSpec, budget: u64) -> Result<u64> {
    check_factors(factors, n)?;
    count_where(m, n, norm, budget, |x| all_prime(factors, x))
}

/// The points counted by [`pi_count`], in enumeration order.
pub fn pi_witnesses(
    m: i64,
    n: usize,
    factors: &[PolynomialOnV],
    norm: &NormSpec,
    budget: u64,
) -> Result<Vec<IntMatrix>> {
    check_factors(factors, n)?;
    let mut out = Vec::new();
    let mut failure = None;
    crate::orbit::for_each_point(m, n, norm, budget, |x| {
        if failure.is_none() {
            match all_prime(factors, x) {
                Ok(true) => out.push(*x),
                Ok(false) => {}
                Err(e) => failure = Some(e),
            }
        }
    })?;
    failure.map_or(Ok(out), Err)
}

fn omega_abs(v: i128) -> Result<u32> {
    let k = i64::try_from(v).map_err(|_| Error::Overflow("polynomial value"))?;
    Ok(factor(k)?.big_omega())
}

/// Points with `f(x) ≠ 0` and `Ω(|f(x)|) <= r`.
pub fn almost_prime_count(m: i64, n: usize, f: &PolynomialOnV, norm: &NormSpec, r: u32, budget: u64) -> Result<u64> {
    if f.n() != n {
        return Err(Error::InvalidArgument("polynomial dimension differs from matrix dimension".into()));
    }
    count_where(m, n, norm, budget, |x| {
        let v = f.eval(x)?;
        Ok(v != 0 && omega_abs(v)? <= r)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeRow {
    pub threshold: f64,
    pub prime_points: u64,
    pub all_points: u64,
    /// `π (log T)^t / N(T)`.
    pub ratio: f64,
}

/// The normalized prime-point ratio over a grid of thresholds, with
/// `t = factors.len()`.
pub fn conjecture_shape(
    m: i64,
    n: usize,
    factors: &[PolynomialOnV],
    norm: &NormSpec,
    grid: &[f64],
    budget: u64,
) -> Result<Vec<ShapeRow>> {
    if grid.len() < 3 {
        return Err(Error::InvalidArgument(alloc::format!("need at least 3 grid points, got {}", grid.len())));
    }
    check_factors(factors, n)?;
    let t = factors.len() as i32;
    let mut rows = Vec::with_capacity(grid.len());
    for &threshold in grid {
        let ball = norm.with_threshold(threshold);
        let (all, primes) = try_fold_points(
            m,
            n,
            &ball,
            budget,
            || (0u64, 0u64),
            |acc: &mut (u64, u64), x: &IntMatrix| {
                acc.0 += 1;
                acc.1 += all_prime(factors, x)? as u64;
                Ok(())
            },
            |a, b| (a.0 + b.0, a.1 + b.1),
        )?;
        let ratio = if all == 0 { 0.0 } else { primes as f64 * libm::pow(libm::log(threshold), t as f64) / all as f64 };
        rows.push(ShapeRow { threshold, prime_points: primes, all_points: all, ratio });
    }
    Ok(rows)
}

/// `μ(d)`-weighted main terms `Σ_{d|P} μ(d) ρ(d) X / d`.
pub fn sift_main_term(x: u64, primes: &[u64], rho: &DensityTable) -> Result<Rational> {
    let mut total = Rational::zero();
    let count = primes.len();
    if count > 24 {
        return Err(Error::BudgetExceeded { what: "sifting-prime subsets", needed: 1u128 << count, cap: 1 << 24 });
    }
    for mask in 0u32..(1 << count) {
        let d: u64 = (0..count).filter(|i| mask >> i & 1 == 1).map(|i| primes[i]).product();
        let r = rho.get(d).ok_or(Error::MissingDensity(d))?;
        let term = r * Rational::new(BigInt::from(x), BigInt::from(d));
        if moebius(d) > 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{density_table, squarefree_up_to, DensityEngine, OrbitLimits};
    use crate::DEFAULT_BUDGET;

    fn x11() -> PolynomialOnV {
        PolynomialOnV::entry(2, 0, 0).unwrap()
    }

    fn id() -> IntMatrix {
        IntMatrix::identity(2).unwrap()
    }

    #[test]
    fn sequence_examples() {
        let s = build_sequence(&id(), &x11(), &NormSpec::max_entry(1.0), DEFAULT_BUDGET).unwrap();
        assert_eq!((s.a0, s.x, s.counts.get(&1).copied()), (6, 14, Some(14)));

        let one = PolynomialOnV::constant(2, 1).unwrap();
        let s = build_sequence(&id(), &one, &NormSpec::max_entry(4.0), DEFAULT_BUDGET).unwrap();
        let total = crate::orbit::count_points(1, 2, &NormSpec::max_entry(4.0), DEFAULT_BUDGET).unwrap();
        assert_eq!(s.counts.len(), 1);
        assert_eq!(s.counts[&1], total);

        let top = x11().mul(&PolynomialOnV::entry(2, 0, 1).unwrap()).unwrap();
        let s = build_sequence(&id(), &top, &NormSpec::max_entry(1.0), DEFAULT_BUDGET).unwrap();
        let pts = crate::orbit::enumerate_points(1, 2, &NormSpec::max_entry(1.0), DEFAULT_BUDGET).unwrap();
        let zero_top = pts.iter().filter(|x| x.get(0, 0) == 0 || x.get(0, 1) == 0).count() as u64;
        assert_eq!(s.a0, zero_top);
        assert_eq!(s.counts[&1], 20 - zero_top);
    }

    #[test]
    fn orbit_sequence_filters_by_orbit() {
        let norm = NormSpec::max_entry(6.0);
        let decomp = crate::orbit::hnf_orbit_reps(2, 2).unwrap();
        let all = build_sequence_variety(2, 2, &x11(), &norm, DEFAULT_BUDGET).unwrap();
        let mut total = 0;
        for rep in &decomp.reps {
            let s = build_sequence(rep, &x11(), &norm, DEFAULT_BUDGET).unwrap();
            total += s.total_points();
        }
        assert_eq!(total, all.total_points());
    }

    #[test]
    fn progression_sum_examples() {
        let s = SiftSequence::from_counts(0.0, &[(2, 3), (4, 1), (5, 2)]);
        assert_eq!(s.progression_sum(1), s.x);
        assert_eq!(s.progression_sum(2), 4);
        assert_eq!(s.progression_sum(6), 0);
        assert_eq!(s.progression_sum(1000), 0);
    }

    #[test]
    fn remainder_examples() {
        let s = SiftSequence::from_counts(0.0, &(1..=12).map(|k| (k, 1)).collect::<Vec<_>>());
        let table = DensityTable { entries: alloc::vec![(2, Rational::from_integer(1.into()))] };
        assert!(remainder(&s, 2, &table).unwrap().is_zero());
        assert!(remainder(&s, 1, &DensityTable::default()).unwrap().is_zero());
        assert_eq!(remainder(&s, 3, &table), Err(Error::MissingDensity(3)));
    }

    #[test]
    fn sift_examples() {
        let s = SiftSequence::from_counts(0.0, &[(1, 1), (2, 1), (3, 1)]);
        assert_eq!(legendre_sift(&s, 3.0, &[], 1000).value, 1);
        assert_eq!(legendre_sift(&s, 1.5, &[], 1000).value, s.x);
        let big = build_sequence(&id(), &x11(), &NormSpec::max_entry(30.0), DEFAULT_BUDGET).unwrap();
        let primes = sifting_primes(10.0, &[]);
        assert_eq!(legendre_sift_moebius(&big, &primes, 1 << 20).unwrap(), legendre_sift_direct(&big, &primes));
        // exhausting the divisor budget switches to the direct count
        let out = legendre_sift(&big, 10.0, &[], 2);
        assert_eq!(out.method, SiftMethod::Direct);
        assert_eq!(out.value, legendre_sift_direct(&big, &primes));
    }

    #[test]
    fn constant_polynomial_has_zero_remainders() {
        let mut e = DensityEngine::new(id(), OrbitLimits::default());
        let one = PolynomialOnV::constant(2, 1).unwrap();
        let table = density_table(&mut e, &one, &squarefree_up_to(15)).unwrap();
        let s = build_sequence(&id(), &one, &NormSpec::max_entry(5.0), DEFAULT_BUDGET).unwrap();
        let scan = level_scan(&s, &table, &[5, 15]).unwrap();
        assert!(scan.iter().all(|r| r.remainder_sum == 0.0));
    }

    #[test]
    fn exact_density_sequence_has_no_remainder() {
        // a_k = 1 for k = 1..=30: ρ(d) = 1 for d | 30 matches exactly
        let s = SiftSequence::from_counts(0.0, &(1..=30).map(|k| (k, 1)).collect::<Vec<_>>());
        let divisors: Vec<u64> = (1..=30).filter(|d| 30 % d == 0 && is_squarefree(*d)).collect();
        let table = DensityTable { entries: divisors.iter().map(|&d| (d, Rational::from_integer(1.into()))).collect() };
        for &d in &divisors {
            assert!(remainder(&s, d, &table).unwrap().is_zero());
        }
        let main = sift_main_term(s.x, &[2, 3, 5], &table).unwrap();
        assert_eq!(main, Rational::from_integer(legendre_sift(&s, 5.0, &[], 1000).value.into()));
    }

    #[test]
    fn prime_counts() {
        let f = [x11()];
        assert_eq!(pi_count(1, 2, &f, &NormSpec::max_entry(1.0), DEFAULT_BUDGET).unwrap(), 0);
        let w = pi_witnesses(1, 2, &f, &NormSpec::max_entry(3.0), DEFAULT_BUDGET).unwrap();
        assert_eq!(w.len() as u64, pi_count(1, 2, &f, &NormSpec::max_entry(3.0), DEFAULT_BUDGET).unwrap());
        assert!(w.iter().all(|x| is_prime(x.get(0, 0)) && x.get(0, 0) > 0));
        assert!(!w.is_empty());
        assert!(pi_count(1, 2, &[PolynomialOnV::constant(2, 1).unwrap()], &NormSpec::max_entry(3.0), DEFAULT_BUDGET)
            .is_err());

        let t1 = NormSpec::max_entry(1.0);
        assert_eq!(almost_prime_count(1, 2, &x11(), &t1, 0, DEFAULT_BUDGET).unwrap(), 14);
        let t5 = NormSpec::max_entry(5.0);
        let nonzero = build_sequence_variety(1, 2, &x11(), &t5, DEFAULT_BUDGET).unwrap().x;
        assert_eq!(almost_prime_count(1, 2, &x11(), &t5, 1_000_000, DEFAULT_BUDGET).unwrap(), nonzero);
    }

    #[test]
    fn conjecture_shape_trivial_case() {
        let rows = conjecture_shape(1, 2, &[], &NormSpec::max_entry(1.0), &[3.0, 5.0, 8.0], DEFAULT_BUDGET).unwrap();
        assert!(rows.iter().all(|r| r.ratio == 1.0));
        assert!(conjecture_shape(1, 2, &[], &NormSpec::max_entry(1.0), &[], DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn sandwich() {
        let norm = NormSpec::max_entry(40.0);
        let z = 7.0;
        let pi = pi_count(1, 2, &[x11()], &norm, DEFAULT_BUDGET).unwrap();
        let ap = almost_prime_count(1, 2, &x11(), &norm, 1, DEFAULT_BUDGET).unwrap();
        let seq = build_sequence(&id(), &x11(), &norm, DEFAULT_BUDGET).unwrap();
        let sifted = legendre_sift(&seq, z, &[], DEFAULT_BUDGET).value;
        let small: u64 = seq.counts.iter().filter(|(k, _)| **k <= 7 && is_prime(**k as i64)).map(|(_, a)| a).sum();
        assert!(pi <= ap);
        assert!(pi <= sifted + small);
    }
}
