//! Integral matrices with all entries prime and determinant `2^(n-1)`.
//!
//! The bottom `n-1` rows (the frame `y`) are built recursively: a frame for
//! `n-1`, transposed, supplies the last `n-2` columns, then a column `ξ` of
//! primes fixes the first minor mod `2^(n-1)` and a column `z` of primes is
//! placed by the Chinese remainder theorem. The top row solves the linear
//! equation in primes `Σ (-1)^(j+1) A_j s_j = 2^(n-1)` whose coefficients are
//! the frame minors.

use alloc::string::String;
use alloc::vec::Vec;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arithmetic::{crt, factor, gcd_i128, is_prime, is_prime_u, primes_up_to};
use crate::matrix::{bareiss_det, IntMatrix};
use crate::{Error, Result};

/// `n-1` rows of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialFrame {
    pub n: usize,
    pub rows: Vec<Vec<i64>>,
}

impl PartialFrame {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len() + 1;
        if !(2..=4).contains(&n) || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("a frame has n-1 rows of length n, 2 <= n <= 4".into()));
        }
        Ok(PartialFrame { n, rows })
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    /// The `n × (n-1)` transpose as plain rows.
    pub fn transpose_rows(&self) -> Vec<Vec<i64>> {
        (0..self.n).map(|j| self.rows.iter().map(|r| r[j]).collect()).collect()
    }
}

/// `A_j`: determinant of the frame with column `j` struck out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorVector(pub Vec<i128>);

impl MinorVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn gcd(&self) -> i128 {
        self.0.iter().fold(0, |g, &a| gcd_i128(g, a))
    }

    pub fn sum(&self) -> i128 {
        self.0.iter().sum()
    }
}

fn det_i128(rows: Vec<Vec<i128>>) -> Result<i128> {
    if rows.is_empty() {
        return Ok(1);
    }
    bareiss_det(rows).ok_or(Error::Overflow("minor"))
}

pub fn minors(y: &PartialFrame) -> Result<MinorVector> {
    let mut out = Vec::with_capacity(y.n);
    for j in 0..y.n {
        let sub: Vec<Vec<i128>> = y
            .rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, &v)| v as i128).collect())
            .collect();
        out.push(det_i128(sub)?);
    }
    Ok(MinorVector(out))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameCheck {
    pub minors: MinorVector,
    /// `gcd(A_1..A_n) = 2^(n-2)`.
    pub gcd_ok: bool,
    /// `A_1 ⋯ A_n ≠ 0`.
    pub nonzero: bool,
    /// `A_1 + ⋯ + A_n ≡ 0 (mod 2^(n-1))`.
    pub sum_ok: bool,
}

impl FrameCheck {
    pub fn passes(&self) -> bool {
        self.gcd_ok && self.nonzero && self.sum_ok
    }
}

/// Checks the frame conditions. Every entry must be a positive prime.
pub fn check_frame(y: &PartialFrame) -> Result<FrameCheck> {
    for (row, r) in y.rows.iter().enumerate() {
        for (col, &value) in r.iter().enumerate() {
            if value <= 0 || !is_prime(value) {
                return Err(Error::NonPrimeEntry { row, col, value });
            }
        }
    }
    let a = minors(y)?;
    let pow = 1i128 << (y.n - 2);
    Ok(FrameCheck {
        gcd_ok: a.gcd() == pow,
        nonzero: a.0.iter().all(|&v| v != 0),
        sum_ok: a.sum().rem_euclid(2 * pow) == 0,
        minors: a,
    })
}

/// Limits for the prime searches. The bound doubles after each failed
/// round until it passes `max_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub initial_bound: u64,
    pub max_bound: u64,
    /// Random draws per round.
    pub draws: u32,
    /// Place the `z` column modulo every odd prime of the first minor as
    /// well. When off, `z` is only fixed mod `2^(n-1)` and the auxiliary
    /// primes, and `gcd(A_1, A_2) = 2^(n-2)` is enforced by redrawing; this
    /// keeps entries small enough for `n = 4`.
    pub odd_prime_residues: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { initial_bound: 1000, max_bound: 1 << 40, draws: 400, odd_prime_residues: true }
    }
}

impl SearchLimits {
    /// Small entries with redrawing, for `n = 4`.
    pub fn compact() -> Self {
        SearchLimits { initial_bound: 40, odd_prime_residues: false, ..Self::default() }
    }
}

/// A prime `≡ r (mod modulus)`, drawn at random below a doubling bound.
fn random_prime_in_class(rng: &mut ChaCha8Rng, r: u64, modulus: u64, limits: &SearchLimits, what: &str) -> Result<u64> {
    let r = r % modulus;
    let mut bound = limits.initial_bound.max(2);
    loop {
        if bound >= r {
            let steps = (bound - r) / modulus + 1;
            if steps <= limits.draws as u64 {
                let candidates: Vec<u64> = (0..steps).map(|k| r + k * modulus).filter(|&c| is_prime_u(c)).collect();
                if !candidates.is_empty() {
                    return Ok(candidates[rng.gen_range(0..candidates.len())]);
                }
            } else {
                for _ in 0..limits.draws {
                    let c = r + rng.gen_range(0..steps) * modulus;
                    if is_prime_u(c) {
                        return Ok(c);
                    }
                }
            }
        }
        if bound >= limits.max_bound {
            return Err(Error::SearchExhausted(alloc::format!(
                "no prime ≡ {r} (mod {modulus}) found for {what} below {bound}"
            )));
        }
        bound = bound.saturating_mul(2).min(limits.max_bound);
    }
}

/// Sign pattern `+, -, +, …` applied to a column of values.
fn alternating_dot(values: &[i128], weights: &[i128]) -> i128 {
    values.iter().zip(weights).enumerate().map(|(k, (v, w))| if k % 2 == 0 { v * w } else { -v * w }).sum()
}

/// Residues of the `ξ` column mod 4, given the row-struck minors `C` of `w`
/// (with `gcd C = 2^(n-3)`).
pub fn xi_residues(c: &[i128], n: usize) -> Result<Vec<i64>> {
    let scale = 1i128 << (n - 3);
    // u_k ≡ ±C'_k with the alternating sign folded in
    let u: Vec<i64> = c
        .iter()
        .enumerate()
        .map(|(k, &ck)| {
            let cp = ck / scale;
            let signed = if k % 2 == 0 { cp } else { -cp };
            signed.rem_euclid(4) as i64
        })
        .collect();
    let odd: Vec<usize> = (0..u.len()).filter(|&k| u[k] % 2 == 1).collect();
    if odd.is_empty() || !odd.len().is_multiple_of(2) {
        return Err(Error::Internal("reduced minors have an odd or zero count of odd entries".into()));
    }
    let mut xi = alloc::vec![1i64; u.len()];
    let fixed: i64 = (0..u.len()).filter(|k| u[*k] % 2 == 0).map(|k| u[k]).sum();
    let b = (2 - fixed).rem_euclid(4);
    for (pos, &k) in odd.iter().enumerate() {
        let eta = if (b == 2 && pos < 2) || pos % 2 == 0 { 1 } else { -1 };
        // u_k^2 ≡ 1 (mod 4), so ξ_k u_k ≡ η
        xi[k] = (u[k] * eta).rem_euclid(4);
    }
    let total: i64 = xi.iter().zip(&u).map(|(x, v)| x * v).sum();
    if total.rem_euclid(4) != 2 {
        return Err(Error::Internal("ξ residues do not reach 2 mod 4".into()));
    }
    Ok(xi)
}

/// Builds a frame passing [`check_frame`], for `n` in `2..=4`.
pub fn build_frame(n: usize, seed: u64, limits: &SearchLimits) -> Result<PartialFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_frame_with(n, &mut rng, limits)
}

fn build_frame_with(n: usize, rng: &mut ChaCha8Rng, limits: &SearchLimits) -> Result<PartialFrame> {
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidArgument(alloc::format!("frames are built for 2 <= n <= 4 (got {n})")));
    }
    if n == 2 {
        let p = random_prime_in_class(rng, 1, 2, limits, "first base entry")?;
        let mut q = p;
        let mut tries = 0;
        while q == p {
            q = random_prime_in_class(rng, 1, 2, limits, "second base entry")?;
            tries += 1;
            if tries > 64 {
                return Err(Error::SearchExhausted(alloc::format!(
                    "only one odd prime available below {}",
                    limits.max_bound
                )));
            }
        }
        let y = PartialFrame::new(alloc::vec![alloc::vec![p as i64, q as i64]])?;
        return verified(y);
    }

    let inner = build_frame_with(n - 1, rng, limits)?;
    let w = inner.transpose_rows(); // (n-1) × (n-2)
    let rows = n - 1;
    // C_k: minor of w striking row k
    let c: Vec<i128> = (0..rows)
        .map(|k| {
            det_i128(
                w.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != k)
                    .map(|(_, r)| r.iter().map(|&v| v as i128).collect())
                    .collect(),
            )
        })
        .collect::<Result<_>>()?;
    let pow2 = 1u64 << (n - 1);

    let xi_res = xi_residues(&c, n)?;
    let xi: Vec<u64> =
        xi_res.iter().map(|&r| random_prime_in_class(rng, r as u64, 4, limits, "ξ entry")).collect::<Result<_>>()?;
    let xi_i: Vec<i128> = xi.iter().map(|&v| v as i128).collect();
    let a1 = alternating_dot(&xi_i, &c);
    if a1.rem_euclid(pow2 as i128) != (pow2 / 2) as i128 {
        return Err(Error::Internal("first minor misses 2^(n-2) mod 2^(n-1)".into()));
    }

    let a1_i64 = i64::try_from(a1).map_err(|_| Error::Overflow("first minor"))?;
    let odd_primes: Vec<u64> = factor(a1_i64)?.primes().filter(|&p| p != 2).collect();

    let mut congruences: Vec<Vec<(i64, u64)>> = alloc::vec![Vec::new(); rows];
    if limits.odd_prime_residues {
        for &p in &odd_primes {
            let t = unit_tuple_avoiding(&c, p, rows)?;
            for i in 0..rows {
                congruences[i].push((t[i], p));
            }
        }
    }

    let w_entries: Vec<u64> = w.iter().flatten().map(|&v| v as u64).collect();
    let mut q_primes: Vec<u64> = Vec::new();
    let mut cand = 3u64;
    while q_primes.len() < n - 2 {
        if is_prime_u(cand) && a1 % cand as i128 != 0 && !w_entries.contains(&cand) {
            q_primes.push(cand);
        }
        cand += 2;
    }
    for (idx, &q) in q_primes.iter().enumerate() {
        // y column j = idx + 2 is column idx of w
        for i in 0..rows {
            congruences[i].push((w[i][idx], q));
        }
    }
    for i in 0..rows {
        congruences[i].push((xi[i] as i64, pow2));
    }
    let classes: Vec<(u64, u64)> = congruences
        .iter()
        .map(|cong| crt(cong).map_err(|e| Error::Internal(alloc::format!("residue system infeasible: {e}"))))
        .collect::<Result<_>>()?;

    let target = (pow2 / 2) as i128;
    let mut local = *limits;
    let mut z = Vec::with_capacity(rows);
    for attempt in 1.. {
        z.clear();
        for &(r, m) in &classes {
            z.push(random_prime_in_class(rng, r, m, &local, "z entry")?);
        }
        let z_i: Vec<i128> = z.iter().map(|&v| v as i128).collect();
        if gcd_i128(a1, alternating_dot(&z_i, &c)) == target {
            break;
        }
        if limits.odd_prime_residues {
            return Err(Error::Internal("z column fails to separate the first two minors".into()));
        }
        if attempt % 16 == 0 {
            if local.initial_bound >= local.max_bound {
                return Err(Error::SearchExhausted("no z column separates the first two minors".into()));
            }
            local.initial_bound = local.initial_bound.saturating_mul(2).min(local.max_bound);
        }
    }

    let y_rows: Vec<Vec<i64>> = (0..rows)
        .map(|i| {
            let mut r = alloc::vec![z[i] as i64, xi[i] as i64];
            r.extend_from_slice(&w[i]);
            r
        })
        .collect();
    let y = PartialFrame::new(y_rows)?;
    for (i, cong) in congruences.iter().enumerate() {
        for &(r, m) in cong {
            if (y.get(i, 0) - r).rem_euclid(m as i64) != 0 {
                return Err(Error::Internal("z column misses a prescribed residue".into()));
            }
        }
    }
    verified(y)
}

fn verified(y: PartialFrame) -> Result<PartialFrame> {
    if !check_frame(&y)?.passes() {
        return Err(Error::Internal(alloc::format!("constructed frame fails its conditions: {:?}", y.rows)));
    }
    Ok(y)
}

/// First tuple in `((Z/p)^*)^rows` (lexicographic) with
/// `Σ (-1)^k t_k C_k ≢ 0 (mod p)`.
fn unit_tuple_avoiding(c: &[i128], p: u64, rows: usize) -> Result<Vec<i64>> {
    let mut t = alloc::vec![1i64; rows];
    loop {
        let tt: Vec<i128> = t.iter().map(|&v| v as i128).collect();
        if alternating_dot(&tt, c).rem_euclid(p as i128) != 0 {
            return Ok(t);
        }
        let mut pos = rows;
        loop {
            if pos == 0 {
                return Err(Error::Internal(alloc::format!("no unit tuple mod {p} avoids the minors")));
            }
            pos -= 1;
            t[pos] += 1;
            if (t[pos] as u64) < p {
                break;
            }
            t[pos] = 1;
        }
    }
}

/// The named congruences satisfied by a constructed frame.
pub fn frame_congruences(y: &PartialFrame) -> Result<Vec<(String, bool)>> {
    let a = minors(y)?;
    let n = y.n;
    if n < 3 {
        return Ok(Vec::new());
    }
    let pow = 1i128 << (n - 2);
    let (a1, a2) = (a.0[0], a.0[1]);
    Ok(alloc::vec![
        (alloc::format!("A1 ≡ {pow} (mod {})", 2 * pow), a1.rem_euclid(2 * pow) == pow),
        (alloc::format!("A2 ≡ A1 (mod {pow})"), (a2 - a1).rem_euclid(pow) == 0),
        (alloc::format!("gcd(A1, A2) = {pow}"), gcd_i128(a1, a2) == pow),
        (alloc::format!("A1 + … + A{n} ≡ 0 (mod {})", 2 * pow), a.sum().rem_euclid(2 * pow) == 0),
        (alloc::format!("gcd(A1, …, A{n}) = {pow}"), a.gcd() == pow),
    ])
}

/// `A_1 s_1 - A_2 s_2 + ⋯ + (-1)^(n+1) A_n s_n = A_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearPrimeEquation {
    pub a0: i128,
    pub minors: MinorVector,
}

impl LinearPrimeEquation {
    pub fn new(a0: i128, minors: Vec<i128>) -> Self {
        LinearPrimeEquation { a0, minors: MinorVector(minors) }
    }

    pub fn n(&self) -> usize {
        self.minors.len()
    }

    /// Signed coefficient of `s_j` (0-based).
    pub fn coefficient(&self, j: usize) -> i128 {
        if j.is_multiple_of(2) {
            self.minors.0[j]
        } else {
            -self.minors.0[j]
        }
    }

    pub fn evaluate(&self, s: &[i64]) -> i128 {
        s.iter().enumerate().map(|(j, &v)| self.coefficient(j) * v as i128).sum()
    }

    pub fn is_solution(&self, s: &[i64]) -> bool {
        s.len() == self.n() && self.evaluate(s) == self.a0
    }
}

/// Local solubility conditions for the linear equation in primes: the four
/// gcds `(A_0..A_{n-1})`, `(A_0..A_{n-2}, A_n)`, `(A_1..A_n)`, `(A_0..A_n)`
/// agree, and `A_0 + ⋯ + A_n ≡ 0 (mod 2 (A_0..A_n))`.
pub fn vinogradov_local_check(a0: i128, a: &MinorVector) -> Result<bool> {
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two coefficients".into()));
    }
    if let Some(j) = a.0.iter().position(|&v| v == 0) {
        return Err(Error::InvalidArgument(alloc::format!("coefficient A{} is zero", j + 1)));
    }
    let g = |vals: &mut dyn Iterator<Item = i128>| vals.fold(0, gcd_i128);
    let all = g(&mut core::iter::once(a0).chain(a.0.iter().copied()));
    let drop_last = g(&mut core::iter::once(a0).chain(a.0[..n - 1].iter().copied()));
    let drop_second_last =
        g(&mut core::iter::once(a0).chain(a.0[..n - 2].iter().copied()).chain(core::iter::once(a.0[n - 1])));
    let no_a0 = a.gcd();
    let chain = drop_last == drop_second_last && drop_second_last == no_a0 && no_a0 == all;
    let parity = (a0 + a.sum()).rem_euclid(2 * all) == 0;
    Ok(chain && parity)
}

fn check_solver_input(eq: &LinearPrimeEquation) -> Result<()> {
    if !(3..=4).contains(&eq.n()) {
        return Err(Error::InvalidArgument(alloc::format!("prime equations are solved for n = 3, 4 (got {})", eq.n())));
    }
    if eq.minors.0.contains(&0) {
        return Err(Error::InvalidArgument("zero coefficient".into()));
    }
    Ok(())
}

/// Every tuple of positive primes `<= T` solving the equation, ascending.
pub fn solve_prime_equation(eq: &LinearPrimeEquation, bound: u64, budget: u64) -> Result<Vec<Vec<i64>>> {
    check_solver_input(eq)?;
    let primes: Vec<i64> = primes_up_to(bound).into_iter().map(|p| p as i64).collect();
    let n = eq.n();
    let visits = (primes.len() as u128).pow(n as u32 - 1);
    if visits > budget as u128 {
        return Err(Error::BudgetExceeded { what: "prime tuples", needed: visits, cap: budget as u128 });
    }
    let last = eq.coefficient(n - 1);
    let solve_last = |prefix: &[i64]| -> Option<i64> {
        let rest = eq.a0 - prefix.iter().enumerate().map(|(j, &v)| eq.coefficient(j) * v as i128).sum::<i128>();
        if rest % last != 0 {
            return None;
        }
        let s = rest / last;
        (s >= 2 && s <= bound as i128 && is_prime(s as i64)).then_some(s as i64)
    };
    let per_leading = crate::par::map_slice(&primes, |&p1| {
        let mut out: Vec<Vec<i64>> = Vec::new();
        let mut prefix = alloc::vec![p1];
        fill(&primes, n - 1, &mut prefix, &solve_last, &mut out);
        out
    });
    let mut all: Vec<Vec<i64>> = per_leading.into_iter().flatten().collect();
    all.sort();
    Ok(all)
}

fn fill(
    primes: &[i64],
    free: usize,
    prefix: &mut Vec<i64>,
    solve_last: &dyn Fn(&[i64]) -> Option<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if prefix.len() == free {
        if let Some(s) = solve_last(prefix) {
            let mut t = prefix.clone();
            t.push(s);
            out.push(t);
        }
        return;
    }
    for &p in primes {
        prefix.push(p);
        fill(primes, free, prefix, solve_last, out);
        prefix.pop();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionCountRow {
    pub bound: u64,
    pub count: u64,
    /// `R(T) (log T)^n / T^(n-1)`.
    pub normalized: f64,
}

pub fn count_solutions_series(eq: &LinearPrimeEquation, grid: &[u64], budget: u64) -> Result<Vec<SolutionCountRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty T grid".into()));
    }
    let n = eq.n() as f64;
    grid.iter()
        .map(|&t| {
            let count = solve_prime_equation(eq, t, budget)?.len() as u64;
            let tf = t as f64;
            let normalized = count as f64 * libm::pow(libm::log(tf), n) / libm::pow(tf, n - 1.0);
            Ok(SolutionCountRow { bound: t, count, normalized })
        })
        .collect()
}

/// Options for [`build_prime_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstructOptions {
    pub limits: SearchLimits,
    /// Allow `n = 4`.
    pub allow_n4: bool,
    /// Random draws of the leading prime(s) before the bound doubles.
    pub leading_draws: u32,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions { limits: SearchLimits::default(), allow_n4: false, leading_draws: 200 }
    }
}

impl ConstructOptions {
    /// Defaults for `n`; `n = 4` is enabled with compact frames.
    pub fn for_dimension(n: usize) -> Self {
        if n == 4 {
            ConstructOptions { limits: SearchLimits::compact(), allow_n4: true, ..Self::default() }
        } else {
            Self::default()
        }
    }
}

/// Everything needed to re-verify a constructed matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeMatrixCertificate {
    pub n: usize,
    pub seed: u64,
    pub matrix: IntMatrix,
    pub det: i128,
    pub frame: PartialFrame,
    pub frame_check: FrameCheck,
    pub congruences: Vec<(String, bool)>,
    pub equation: LinearPrimeEquation,
    pub local_conditions: bool,
    pub solution: Vec<i64>,
    /// True when two frame rows were exchanged to fix the determinant sign.
    pub rows_swapped: bool,
}

impl PrimeMatrixCertificate {
    /// Independent re-check: entries prime, determinant exact, frame valid.
    pub fn verify(&self) -> bool {
        let n = self.n;
        let entries_prime = self.matrix.flat().iter().all(|&v| v > 0 && is_prime(v));
        let rows: Vec<Vec<i128>> =
            self.matrix.rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
        let det_ok = bareiss_det(rows) == Some(1i128 << (n - 1)) && self.matrix.det() == 1i128 << (n - 1);
        let frame_ok = check_frame(&self.frame).map(|c| c.passes()).unwrap_or(false);
        entries_prime && det_ok && frame_ok && self.equation.is_solution(&self.solution)
    }
}

/// An `n × n` matrix of primes with determinant `2^(n-1)`, for `n = 3`
/// (and `n = 4` when enabled).
pub fn build_prime_matrix(n: usize, seed: u64, opts: &ConstructOptions) -> Result<PrimeMatrixCertificate> {
    match n {
        2 => {
            return Err(Error::InvalidArgument(
                "n = 2 is the binary case: one linear equation in two primes is out of reach of these methods".into(),
            ))
        }
        3 => {}
        4 if opts.allow_n4 => {}
        4 => return Err(Error::InvalidArgument("n = 4 is best-effort and must be enabled explicitly".into())),
        _ => return Err(Error::InvalidArgument(alloc::format!("prime matrices are built for n = 3, 4 (got {n})"))),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frame = build_frame_with(n, &mut rng, &opts.limits)?;
    let a0 = 1i128 << (n - 1);
    let equation = LinearPrimeEquation { a0, minors: minors(&frame)? };
    let local_conditions = vinogradov_local_check(a0, &equation.minors)?;
    if !local_conditions {
        return Err(Error::Internal("frame minors violate the local conditions".into()));
    }
    let solution = find_prime_solution(&equation, &mut rng, opts)?;
    let mut rows_swapped = false;
    let build = |frame: &PartialFrame| -> Result<IntMatrix> {
        let mut rows = alloc::vec![solution.clone()];
        rows.extend(frame.rows.iter().cloned());
        IntMatrix::from_rows(&rows)
    };
    let mut matrix = build(&frame)?;
    if matrix.det() == -a0 {
        frame.rows.swap(0, 1);
        matrix = build(&frame)?;
        rows_swapped = true;
    }
    let det = matrix.det();
    let cert = PrimeMatrixCertificate {
        n,
        seed,
        matrix,
        det,
        frame_check: check_frame(&frame)?,
        congruences: frame_congruences(&frame)?,
        frame,
        equation,
        local_conditions,
        solution,
        rows_swapped,
    };
    if !cert.verify() || cert.congruences.iter().any(|(_, ok)| !ok) {
        return Err(Error::Internal(alloc::format!("certificate failed re-verification for seed {seed}")));
    }
    Ok(cert)
}

/// Terms of the final progression tried per draw.
const PAIR_SCAN: i128 = 2000;

/// How one draw splits the variables: `free` ones are small random primes,
/// `pinned` is a prime in the class that makes the pair `(a, b)` solvable.
struct SolvePlan {
    a: usize,
    b: usize,
    pinned: usize,
    free: Vec<usize>,
}

/// Random primes for all but three variables, a prime in the residue class
/// that makes the remaining pair solvable, then a scan along the pair's
/// solution line. Draws cycle through every choice of pair, preferring pairs
/// with opposite signs and small gcd.
fn find_prime_solution(eq: &LinearPrimeEquation, rng: &mut ChaCha8Rng, opts: &ConstructOptions) -> Result<Vec<i64>> {
    let n = eq.n();
    let c: Vec<i128> = (0..n).map(|j| eq.coefficient(j)).collect();
    let mut plans = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for pinned in (0..n).filter(|&j| j != a && j != b) {
                let free = (0..n).filter(|&j| j != a && j != b && j != pinned).collect();
                plans.push(SolvePlan { a, b, pinned, free });
            }
        }
    }
    // opposite signs give an unbounded solution line
    plans.sort_by_key(|p| ((c[p.a] > 0) == (c[p.b] > 0), gcd_i128(c[p.a], c[p.b])));

    let mut limits = opts.limits;
    limits.initial_bound = limits.initial_bound.max(16);
    let pool_all: Vec<u64> = primes_up_to(1 << 16);
    loop {
        let bound = limits.initial_bound;
        let pool: Vec<u64> = pool_all.iter().copied().take_while(|&p| p <= bound).collect();
        for draw in 0..(opts.leading_draws as usize).max(plans.len()) {
            let plan = &plans[draw % plans.len()];
            if let Some(sol) = try_plan(eq, &c, plan, &pool, bound, &limits, rng) {
                debug_assert!(eq.is_solution(&sol));
                return Ok(sol);
            }
        }
        if bound >= limits.max_bound {
            return Err(Error::SearchExhausted(alloc::format!("no prime solution with variables below {bound}")));
        }
        limits.initial_bound = bound.saturating_mul(2).min(limits.max_bound);
    }
}

fn try_plan(
    eq: &LinearPrimeEquation,
    c: &[i128],
    plan: &SolvePlan,
    pool: &[u64],
    bound: u64,
    limits: &SearchLimits,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<i64>> {
    let SolvePlan { a: ia, b: ib, pinned, ref free } = *plan;
    let g = gcd_i128(c[ia], c[ib]);
    let (ca, cb) = (c[ia] / g, c[ib] / g);
    let step = cb.abs();
    let mut sol = alloc::vec![0i64; c.len()];
    for &j in free {
        sol[j] = pool[rng.gen_range(0..pool.len())] as i64;
    }
    let r0 = eq.a0 - free.iter().map(|&j| c[j] * sol[j] as i128).sum::<i128>();
    // c_pinned s ≡ r0 (mod g)
    let h = gcd_i128(c[pinned], g);
    if r0 % h != 0 {
        return None;
    }
    let gp = g / h;
    let inv = modular_inverse((c[pinned] / h).rem_euclid(gp), gp)?;
    let sigma = ((r0 / h).rem_euclid(gp) * inv).rem_euclid(gp);
    let sp = if gp > 1 && gcd_i128(sigma, gp) != 1 {
        // only sigma itself can be a prime in this class
        if sigma >= 2 && is_prime(sigma as i64) {
            sigma as u64
        } else {
            return None;
        }
    } else {
        // keep the pinned prime small so the pair's window stays wide
        let small = SearchLimits { initial_bound: (gp as u64).saturating_mul(64).max(1000), ..*limits };
        random_prime_in_class(rng, sigma as u64, gp.max(1) as u64, &small, "pinned variable").ok()?
    };
    sol[pinned] = sp as i64;
    let r = (r0 - c[pinned] * sp as i128) / g;
    // ca s_a + cb s_b = r
    let inv = modular_inverse(ca.rem_euclid(step), step)?;
    let start = (r.rem_euclid(step) * inv).rem_euclid(step);
    let (lo, hi) = pair_window(ca, cb, r, bound as i128)?;
    let k0 = ceil_div(lo - start, step);
    let terms = Integer::div_floor(&(hi - start), &step) - k0 + 1;
    if terms <= 0 {
        return None;
    }
    let offset = if terms > PAIR_SCAN { rng.gen_range(0..(terms - PAIR_SCAN) as u64) as i128 } else { 0 };
    let mut sa = start + (k0 + offset) * step;
    for _ in 0..PAIR_SCAN.min(terms) {
        if sa <= i64::MAX as i128 && is_prime(sa as i64) {
            let sb = (r - ca * sa) / cb;
            if sb <= i64::MAX as i128 && is_prime(sb as i64) {
                sol[ia] = sa as i64;
                sol[ib] = sb as i64;
                return Some(sol);
            }
        }
        sa += step;
    }
    None
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -Integer::div_floor(&-a, &b)
}

/// Range of `s_a` in `[2, B]` for which `s_b = (r - ca s_a) / cb` also lies
/// in `[2, B]`, ignoring integrality.
fn pair_window(ca: i128, cb: i128, r: i128, bound: i128) -> Option<(i128, i128)> {
    let (e1, e2) = (r.checked_sub(cb.checked_mul(2)?)?, r.checked_sub(cb.checked_mul(bound)?)?);
    let (l, u) = (e1.min(e2), e1.max(e2));
    let (lo, hi) = if ca > 0 {
        (ceil_div(l, ca), Integer::div_floor(&u, &ca))
    } else {
        (ceil_div(u, ca), Integer::div_floor(&l, &ca))
    };
    let (lo, hi) = (lo.max(2), hi.min(bound));
    (lo <= hi).then_some((lo, hi))
}

fn modular_inverse(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = crate::arithmetic::ext_gcd(a, m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// `true` unless every entry is odd and `det x ≢ 0 (mod 2^(n-1))`.
pub fn necessity_check(x: &IntMatrix) -> bool {
    if x.flat().iter().any(|v| v % 2 == 0) {
        return true;
    }
    x.det().rem_euclid(1i128 << (x.n() - 1)) == 0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NecessityScan {
    pub candidates: u64,
    pub violations: u64,
    pub first_violation: Option<IntMatrix>,
}

/// Every 3×3 matrix with odd entries in `[-max_odd, max_odd]`.
pub fn necessity_scan_3(max_odd: i64) -> Result<NecessityScan> {
    if max_odd < 1 || max_odd % 2 == 0 {
        return Err(Error::InvalidArgument("max_odd must be a positive odd integer".into()));
    }
    let vals: Vec<i64> = (-max_odd..=max_odd).filter(|v| v % 2 != 0).collect();
    let k = vals.len();
    let rows: Vec<[i64; 3]> = (0..k * k * k).map(|c| [vals[c / (k * k)], vals[c / k % k], vals[c % k]]).collect();
    // det = r1 · (r2 × r3), checked mod 4
    let per_first = crate::par::map_slice(&rows, |r2| {
        let mut violations = 0u64;
        let mut first: Option<[[i64; 3]; 3]> = None;
        for r3 in &rows {
            let cross = [r2[1] * r3[2] - r2[2] * r3[1], r2[2] * r3[0] - r2[0] * r3[2], r2[0] * r3[1] - r2[1] * r3[0]];
            for r1 in &rows {
                let d = r1[0] * cross[0] + r1[1] * cross[1] + r1[2] * cross[2];
                if d & 3 != 0 {
                    violations += 1;
                    if first.is_none() {
                        first = Some([*r1, *r2, *r3]);
                    }
                }
            }
        }
        (violations, first)
    });
    let mut violations = 0;
    let mut first_violation = None;
    for (v, f) in per_first {
        violations += v;
        if first_violation.is_none() {
            if let Some(rows) = f {
                first_violation = Some(IntMatrix::from_rows(&rows)?);
            }
        }
    }
    Ok(NecessityScan { candidates: (rows.len() as u64).pow(3), violations, first_violation })
}
