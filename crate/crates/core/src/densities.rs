//! Reductions of orbits modulo `d` and the local densities built on them.
//!
//! The orbit `O_d` of `v` mod `d` is computed as the closure of `v` under
//! the elementary transvections `row_i += ±row_j`, which generate
//! `SL_n(Z/dZ)` for every `d`. By strong approximation this equals the
//! reduction of the integral orbit `SL_n(Z) v`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use hashbrown::HashSet;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::arithmetic::{gcd, is_prime_u, is_squarefree, primes_up_to};
use crate::matrix::IntMatrix;
use crate::orbit::{for_each_point, hermite_reduce, NormSpec};
use crate::polynomial::PolynomialOnV;
use crate::{Error, Rational, Result};

/// Limits for residue-orbit closures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrbitLimits {
    /// Refuse orbits larger than this.
    pub state_cap: u64,
    /// Keep the element list only when the orbit has at most this many points.
    pub retain_cap: u64,
}

impl Default for OrbitLimits {
    fn default() -> Self {
        OrbitLimits { state_cap: 5_000_000, retain_cap: 5_000_000 }
    }
}

/// The reduction `O_d` of an orbit modulo `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueOrbit {
    pub modulus: u64,
    pub base: IntMatrix,
    pub size: u64,
    /// Sorted element list, when retained.
    pub elements: Option<Vec<IntMatrix>>,
}

fn encode(x: &IntMatrix, d: u64) -> u128 {
    x.flat().iter().fold(0u128, |acc, &v| acc * d as u128 + v as u128)
}

fn decode(mut key: u128, n: usize, d: u64) -> IntMatrix {
    let mut flat = [0i64; 16];
    for k in (0..n * n).rev() {
        flat[k] = (key % d as u128) as i64;
        key /= d as u128;
    }
    IntMatrix::from_flat(n, &flat[..n * n]).expect("valid dimension")
}

/// Orbit of `v` mod `d` under left multiplication by `SL_n(Z/dZ)`.
pub fn reduce_orbit_mod(v: &IntMatrix, d: u64, limits: OrbitLimits) -> Result<ResidueOrbit> {
    if d == 0 {
        return Err(Error::ZeroInput);
    }
    let n = v.n();
    let bits_per_entry = 64 - (d.max(2) - 1).leading_zeros();
    if bits_per_entry as usize * n * n > 128 {
        return Err(Error::InvalidArgument(alloc::format!("modulus {d} too large for n = {n}")));
    }
    let base = v.reduce_mod(d);
    let mut seen: HashSet<u128> = HashSet::new();
    let mut frontier = alloc::vec![encode(&base, d)];
    seen.insert(frontier[0]);
    let dd = d as i64;
    while let Some(key) = frontier.pop() {
        let x = decode(key, n, d);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for sign in [1i64, dd - 1] {
                    let mut y = x;
                    for k in 0..n {
                        y.set(i, k, (x.get(i, k) + sign * x.get(j, k)) % dd);
                    }
                    let ky = encode(&y, d);
                    if seen.insert(ky) {
                        if seen.len() as u64 > limits.state_cap {
                            return Err(Error::BudgetExceeded {
                                what: "residue orbit states",
                                needed: seen.len() as u128,
                                cap: limits.state_cap as u128,
                            });
                        }
                        frontier.push(ky);
                    }
                }
            }
        }
    }
    let size = seen.len() as u64;
    let elements = (size <= limits.retain_cap).then(|| {
        let mut keys: Vec<u128> = seen.into_iter().collect();
        keys.sort_unstable();
        keys.into_iter().map(|k| decode(k, n, d)).collect()
    });
    Ok(ResidueOrbit { modulus: d, base, size, elements })
}

/// `|O^g_d| = #{x in O_d : g(x) ≡ 0 (mod d)}`.
pub fn vanishing_count(orbit: &ResidueOrbit, g: &PolynomialOnV) -> Result<u64> {
    let elements = orbit.elements.as_ref().ok_or(Error::OrbitSetNotRetained(orbit.size))?;
    if g.n() != orbit.base.n() {
        return Err(Error::InvalidArgument("polynomial dimension differs from orbit dimension".into()));
    }
    Ok(elements.iter().filter(|x| g.eval_g_mod(x.flat(), orbit.modulus) == 0).count() as u64)
}

fn require_squarefree(d: u64) -> Result<()> {
    if !is_squarefree(d) {
        return Err(Error::InvalidArgument(alloc::format!("d = {d} is not squarefree")));
    }
    Ok(())
}

/// Caches residue orbits of one base point across moduli.
#[derive(Debug, Clone)]
pub struct DensityEngine {
    base: IntMatrix,
    limits: OrbitLimits,
    cache: BTreeMap<u64, ResidueOrbit>,
}

impl DensityEngine {
    pub fn new(base: IntMatrix, limits: OrbitLimits) -> Self {
        DensityEngine { base, limits, cache: BTreeMap::new() }
    }

    pub fn base(&self) -> &IntMatrix {
        &self.base
    }

    pub fn orbit(&mut self, d: u64) -> Result<&ResidueOrbit> {
        if !self.cache.contains_key(&d) {
            let o = reduce_orbit_mod(&self.base, d, self.limits)?;
            self.cache.insert(d, o);
        }
        Ok(&self.cache[&d])
    }

    /// `(|O^g_d|, |O_d|)`.
    pub fn counts(&mut self, d: u64, g: &PolynomialOnV) -> Result<(u64, u64)> {
        let o = self.orbit(d)?;
        Ok((vanishing_count(o, g)?, o.size))
    }

    /// `ρ_f(d) = d |O^g_{dN}| / |O_{dN}|` for squarefree `d`.
    pub fn rho(&mut self, d: u64, f: &PolynomialOnV) -> Result<Rational> {
        require_squarefree(d)?;
        let dn = d.checked_mul(f.normalizer()).ok_or(Error::Overflow("d * N"))?;
        let (vanish, size) = self.counts(dn, f)?;
        Ok(Rational::new(BigInt::from(d) * BigInt::from(vanish), BigInt::from(size)))
    }
}

pub fn rho_f(d: u64, v: &IntMatrix, f: &PolynomialOnV, limits: OrbitLimits) -> Result<Rational> {
    DensityEngine::new(*v, limits).rho(d, f)
}

/// Exact check of `ρ_f(d1 d2) = ρ_f(d1) ρ_f(d2)`.
pub fn check_multiplicativity(d1: u64, d2: u64, v: &IntMatrix, f: &PolynomialOnV, limits: OrbitLimits) -> Result<bool> {
    if gcd(d1, d2) != 1 {
        return Err(Error::ModuliNotCoprime(d1, d2));
    }
    let mut e = DensityEngine::new(*v, limits);
    let whole = e.rho(d1 * d2, f)?;
    Ok(whole == e.rho(d1, f)? * e.rho(d2, f)?)
}

/// `(d, ρ_f(d))` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DensityTable {
    pub entries: Vec<(u64, Rational)>,
}

impl DensityTable {
    /// `ρ(d)`; `ρ(1) = 1` even when absent from the table.
    pub fn get(&self, d: u64) -> Option<Rational> {
        match self.entries.iter().find(|(k, _)| *k == d) {
            Some((_, r)) => Some(r.clone()),
            None if d == 1 => Some(Rational::one()),
            None => None,
        }
    }

    pub fn moduli(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|(d, _)| *d)
    }

    /// Checks `0 <= ρ(p) < p` for every prime in the table.
    pub fn prime_bound_holds(&self) -> bool {
        self.entries
            .iter()
            .all(|(d, r)| !is_prime_u(*d) || (*r >= Rational::zero() && *r < Rational::from_integer(BigInt::from(*d))))
    }
}

pub fn density_table(engine: &mut DensityEngine, f: &PolynomialOnV, moduli: &[u64]) -> Result<DensityTable> {
    let mut entries = Vec::with_capacity(moduli.len());
    for &d in moduli {
        entries.push((d, engine.rho(d, f)?));
    }
    Ok(DensityTable { entries })
}

/// Squarefree integers in `[1, bound]`.
pub fn squarefree_up_to(bound: u64) -> Vec<u64> {
    (1..=bound).filter(|&d| is_squarefree(d)).collect()
}

/// Result of probing `gcd f(O)` over a finite piece of the orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakPrimitivity {
    /// gcd of `g` over the probed orbit points (0 if all values vanish).
    pub probed_gcd: u128,
    pub declared_normalizer: u64,
    pub points_probed: u64,
    /// For each prime `p <= prime_bound`: a probed point with `f(x) ≢ 0 (p)`,
    /// or `None` when `p` divides every probed value of `f`.
    pub witnesses: BTreeMap<u64, Option<IntMatrix>>,
    /// `gcd f(probed points) = 1`.
    pub weakly_primitive: bool,
}

/// Probes weak primitivity of `f = g/N` on `SL_n(Z) v` using the orbit
/// points in the ball `probe`.
pub fn weak_primitivity(
    v: &IntMatrix,
    f: &PolynomialOnV,
    probe: &NormSpec,
    prime_bound: u64,
    budget: u64,
) -> Result<WeakPrimitivity> {
    let m = v.det();
    if m <= 0 {
        return Err(Error::InvalidArgument("orbit probing needs det v > 0".into()));
    }
    let m = i64::try_from(m).map_err(|_| Error::Overflow("determinant"))?;
    let (target, _) = hermite_reduce(v)?;
    let primes = primes_up_to(prime_bound);
    let mut witnesses: BTreeMap<u64, Option<IntMatrix>> = primes.iter().map(|&p| (p, None)).collect();
    let mut gcd_acc: u128 = 0;
    let mut count = 0u64;
    let mut failure: Option<Error> = None;
    for_each_point(m, v.n(), probe, budget, |x| {
        if failure.is_some() {
            return;
        }
        match hermite_reduce(x) {
            Ok((h, _)) if h == target => {}
            Ok(_) => return,
            Err(e) => {
                failure = Some(e);
                return;
            }
        }
        count += 1;
        let val = match f.eval(x) {
            Ok(val) => val,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        let g = f.eval_g(x).unwrap_or(0);
        gcd_acc = crate::arithmetic::gcd_i128(gcd_acc as i128, g) as u128;
        for (&p, w) in witnesses.iter_mut() {
            if w.is_none() && val.rem_euclid(p as i128) != 0 {
                *w = Some(*x);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if count == 0 {
        return Err(Error::Degenerate("probe ball contains no orbit points".into()));
    }
    Ok(WeakPrimitivity {
        probed_gcd: gcd_acc,
        declared_normalizer: f.normalizer(),
        points_probed: count,
        witnesses,
        weakly_primitive: gcd_acc == f.normalizer() as u128,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionRow {
    pub p: u64,
    pub rho: Rational,
    /// `|ρ_f(p) - t| √p`.
    pub scaled_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionScan {
    pub t: u32,
    pub rows: Vec<DimensionRow>,
    /// `f` constant or every `ρ_f(p)` zero: no sieve dimension.
    pub degenerate: bool,
    pub max_rho_over_p: f64,
}

pub fn sieve_dimension_scan(engine: &mut DensityEngine, f: &PolynomialOnV, prime_bound: u64) -> Result<DimensionScan> {
    let t = f.factor_count();
    let mut rows = Vec::new();
    let mut max_ratio = 0.0f64;
    for p in primes_up_to(prime_bound) {
        let rho = engine.rho(p, f)?;
        let dev = &rho - Rational::from_integer(BigInt::from(t));
        let dev = dev.numer().to_f64().unwrap_or(f64::INFINITY) / dev.denom().to_f64().unwrap_or(1.0);
        let rho_f = rho.numer().to_f64().unwrap_or(f64::INFINITY) / rho.denom().to_f64().unwrap_or(1.0);
        max_ratio = max_ratio.max(rho_f / p as f64);
        rows.push(DimensionRow { p, rho, scaled_deviation: libm::fabs(dev) * libm::sqrt(p as f64) });
    }
    let degenerate = f.is_constant() || rows.iter().all(|r| r.rho.is_zero());
    Ok(DimensionScan { t, rows, degenerate, max_rho_over_p: max_ratio })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularSeries {
    /// `∏ (1 - |O^f_p|/|O_p|)(1 + t/p)` over included primes.
    pub product: Rational,
    /// Per-prime factors, ascending in `p`.
    pub factors: Vec<(u64, Rational)>,
    /// Primes `p <= P` dividing `N`, left out of the product.
    pub excluded: Vec<u64>,
}

/// Partial product of the local-density singular series up to `prime_bound`.
pub fn singular_series_partial(
    engine: &mut DensityEngine,
    f: &PolynomialOnV,
    prime_bound: u64,
) -> Result<SingularSeries> {
    let t = BigInt::from(f.factor_count());
    let mut product = Rational::one();
    let mut factors = Vec::new();
    let mut excluded = Vec::new();
    for p in primes_up_to(prime_bound) {
        if f.normalizer().is_multiple_of(p) {
            excluded.push(p);
            continue;
        }
        let (vanish, size) = engine.counts(p, f)?;
        let local = Rational::one() - Rational::new(BigInt::from(vanish), BigInt::from(size));
        let correction = Rational::one() + Rational::new(t.clone(), BigInt::from(p));
        let factor = local * correction;
        product *= factor.clone();
        factors.push((p, factor));
    }
    Ok(SingularSeries { product, factors, excluded })
}

/// `|GL_n(F_p)| = ∏_{i<n} (p^n - p^i)`.
pub fn gl_order(n: u32, p: u64) -> Option<u128> {
    let pn = (p as u128).checked_pow(n)?;
    (0..n).try_fold(1u128, |acc, i| acc.checked_mul(pn - (p as u128).pow(i)))
}

/// `#{x in Mat_n(F_p) : det x ≡ m}` from the row-by-row count of
/// invertible matrices.
pub fn variety_count_closed_form(m: i64, n: u32, p: u64) -> Result<u128> {
    if !is_prime_u(p) {
        return Err(Error::InvalidArgument(alloc::format!("{p} is not prime")));
    }
    let gl = gl_order(n, p).ok_or(Error::Overflow("|GL_n(F_p)|"))?;
    if m.rem_euclid(p as i64) != 0 {
        Ok(gl / (p as u128 - 1))
    } else {
        let all = (p as u128).checked_pow(n * n).ok_or(Error::Overflow("p^(n^2)"))?;
        Ok(all - gl)
    }
}

/// Exhaustive scan of `Mat_n(F_p)`.
pub fn variety_count_exhaustive(m: i64, n: usize, p: u64, budget: u64) -> Result<u64> {
    let total = (p as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded { what: "residue matrix scan", needed: total, cap: budget as u128 });
    }
    let target = m.rem_euclid(p as i64) as i128;
    let mut flat = alloc::vec![0i64; n * n];
    let mut count = 0u64;
    for code in 0..total as u64 {
        let mut c = code;
        for v in flat.iter_mut() {
            *v = (c % p) as i64;
            c /= p;
        }
        let x = IntMatrix::from_flat(n, &flat)?;
        if x.det().rem_euclid(p as i128) == target {
            count += 1;
        }
    }
    Ok(count)
}

/// `|V_{m,n}(F_p)|`: exhaustive when `p^(n²) <= scan_budget`, otherwise
/// the closed form.
pub fn variety_count_mod_p(m: i64, n: usize, p: u64, scan_budget: u64) -> Result<u128> {
    if !is_prime_u(p) {
        return Err(Error::InvalidArgument(alloc::format!("{p} is not prime")));
    }
    match variety_count_exhaustive(m, n, p, scan_budget) {
        Ok(c) => Ok(c as u128),
        Err(Error::BudgetExceeded { .. }) => variety_count_closed_form(m, n as u32, p),
        Err(e) => Err(e),
    }
}
