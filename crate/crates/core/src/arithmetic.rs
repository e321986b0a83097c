//! Exact integer number theory shared by the rest of the crate.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Prime factorization of `|k|`, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactorMultiset {
    pub prime_powers: Vec<(u64, u32)>,
}

impl FactorMultiset {
    /// Number of prime factors counted with multiplicity.
    pub fn big_omega(&self) -> u32 {
        self.prime_powers.iter().map(|&(_, e)| e).sum()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.prime_powers.iter().map(|&(p, _)| p)
    }

    /// Product of all prime powers. `None` on `u64` overflow.
    pub fn value(&self) -> Option<u64> {
        self.prime_powers.iter().try_fold(1u64, |acc, &(p, e)| acc.checked_mul(p.checked_pow(e)?))
    }

    pub fn is_squarefree(&self) -> bool {
        self.prime_powers.iter().all(|&(_, e)| e == 1)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a as i128
}

/// Extended Euclid: returns `(g, x, y)` with `a*x + b*y = g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// The first twelve primes: a strong-pseudoprime witness set for every
/// `n < 3.18e23`, which covers all of `u64`.
pub const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Deterministic primality of `|k|`.
pub fn is_prime(k: i64) -> bool {
    is_prime_u64(k.unsigned_abs())
}

/// Primality of a value known to be nonnegative.
pub fn is_prime_u(k: u64) -> bool {
    is_prime_u64(k)
}

// Brent's variant of Pollard rho; `n` odd composite.
fn pollard_brent(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut ys) = (2u64, 2u64, 2u64);
        let mut q = 1u64;
        let mut g = 1u64;
        let mut r = 1u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn collect_factors(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    collect_factors(d, out);
    collect_factors(n / d, out);
}

/// Complete factorization of `|k|`.
pub fn factor(k: i64) -> Result<FactorMultiset> {
    if k == 0 {
        return Err(Error::ZeroInput);
    }
    factor_u64(k.unsigned_abs())
}

pub fn factor_u64(k: u64) -> Result<FactorMultiset> {
    if k == 0 {
        return Err(Error::ZeroInput);
    }
    let mut n = k;
    let mut raw = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while n.is_multiple_of(p) {
            raw.push(p);
            n /= p;
        }
    }
    collect_factors(n, &mut raw);
    raw.sort_unstable();
    let mut prime_powers: Vec<(u64, u32)> = Vec::new();
    for p in raw {
        match prime_powers.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => prime_powers.push((p, 1)),
        }
    }
    Ok(FactorMultiset { prime_powers })
}

/// Ω(|k|): prime factors with multiplicity. `omega_count(±1) = 0`.
pub fn omega_count(k: i64) -> Result<u32> {
    Ok(factor(k)?.big_omega())
}

/// All primes `p <= bound` with `p ≡ a (mod q)`, ascending.
pub fn primes_in_ap(a: i64, q: u64, bound: u64) -> Result<Vec<u64>> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let r = a.rem_euclid(q as i64) as u64;
    if gcd(r, q) != 1 {
        return Err(Error::NotCoprime { residue: a, modulus: q });
    }
    let mut out = Vec::new();
    let mut k = r;
    while k <= bound {
        if is_prime_u64(k) {
            out.push(k);
        }
        k = match k.checked_add(q) {
            Some(v) => v,
            None => break,
        };
    }
    Ok(out)
}

/// Chinese remainder theorem for pairwise coprime moduli.
///
/// Returns `(r, M)` with `0 <= r < M = ∏ q_i`.
pub fn crt(congruences: &[(i64, u64)]) -> Result<(u64, u64)> {
    let mut res: u128 = 0;
    let mut modulus: u128 = 1;
    for &(a, q) in congruences {
        if q == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        let g = gcd_i128(modulus as i128, q as i128);
        if g != 1 {
            return Err(Error::ModuliNotCoprime(modulus as u64, q));
        }
        let a = a.rem_euclid(q as i64) as i128;
        // res + modulus * k ≡ a (mod q)
        let (_, inv, _) = ext_gcd((modulus % q as u128) as i128, q as i128);
        let diff = (a - (res % q as u128) as i128).rem_euclid(q as i128);
        let k = (diff * inv.rem_euclid(q as i128)).rem_euclid(q as i128) as u128;
        let new_mod = modulus.checked_mul(q as u128).ok_or(Error::Overflow("crt"))?;
        if new_mod > u64::MAX as u128 {
            return Err(Error::Overflow("crt"));
        }
        res += modulus * k;
        modulus = new_mod;
    }
    Ok((res as u64, modulus as u64))
}

/// Möbius function.
pub fn moebius(d: u64) -> i8 {
    if d == 0 {
        return 0;
    }
    let f = factor_u64(d).expect("nonzero");
    if !f.is_squarefree() {
        0
    } else if f.prime_powers.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn is_squarefree(d: u64) -> bool {
    d != 0 && factor_u64(d).map(|f| f.is_squarefree()).unwrap_or(false)
}

/// Primes up to `bound` by the sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = alloc::vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}
