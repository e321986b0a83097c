//! Closed-form saturation numbers, sieve levels and exponents.
//!
//! Rational inputs are kept exact; terms with a logarithm (natural base)
//! are evaluated in double precision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arithmetic::is_prime_u;
use crate::sieve::rational_to_f64;
use crate::{Error, Rational, Result};

fn q(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

fn int(a: i64) -> Rational {
    Rational::from_integer(BigInt::from(a))
}

/// Least even integer `>= x`, and at least 2.
pub fn least_even_at_least(x: &Rational) -> u32 {
    let c = x.ceil().to_integer().to_u32().unwrap_or(u32::MAX - 1).max(2);
    if c.is_even() {
        c
    } else {
        c + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupData {
    pub dim: u32,
    /// Volume growth exponent.
    pub a: Rational,
    /// Power of `log T` in the volume growth.
    pub b: u32,
    /// Even integer with matrix coefficients in `L^{2 n_e}`.
    pub n_e: u32,
    /// Integrability exponent.
    pub p: Rational,
}

impl GroupData {
    /// Group data with `n_e` derived from `p`.
    pub fn new(dim: u32, a: Rational, b: u32, p: Rational) -> Result<Self> {
        if dim == 0 || a <= Rational::zero() || p <= Rational::zero() {
            return Err(Error::InvalidArgument("group data needs dim >= 1, a > 0, p > 0".into()));
        }
        let n_e = least_even_at_least(&(&p / int(2)));
        Ok(GroupData { dim, a, b, n_e, p })
    }

    pub fn with_n_e(mut self, n_e: u32) -> Result<Self> {
        if n_e == 0 || !n_e.is_multiple_of(2) {
            return Err(Error::InvalidArgument(alloc::format!("n_e = {n_e} must be a positive even integer")));
        }
        self.n_e = n_e;
        Ok(self)
    }
}

/// Data for `SL_n(R)` with the lattice `SL_n(Z)`.
pub fn sl_n_group_data(n: u32) -> Result<GroupData> {
    if n < 2 {
        return Err(Error::InvalidArgument("n must be at least 2".into()));
    }
    let n64 = n as i64;
    let p = if n == 2 { q(64, 25) } else { int(2 * (n64 - 1)) };
    GroupData::new(n * n - 1, int(n64 * n64 - n64), 0, p)
}

/// `a / (2 n_e)`.
pub fn theta(gd: &GroupData) -> Rational {
    &gd.a / int(2 * gd.n_e as i64)
}

/// `1 / (2 n_e (1 + dim)^2)`.
pub fn level_tau(gd: &GroupData) -> Rational {
    let s = 1 + gd.dim as i64;
    q(1, 2 * gd.n_e as i64 * s * s)
}

/// `1 / (9 t (1 + dim)^2 2 n_e)`.
pub fn alpha_exponent(gd: &GroupData, t: u32) -> Result<Rational> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let s = 1 + gd.dim as i64;
    Ok(q(1, 9 * t as i64 * s * s * 2 * gd.n_e as i64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SieveParams {
    /// Number of irreducible factors.
    pub t: u32,
    pub deg: u32,
    /// Weighted-sieve shape parameter in `(0, 4t)`.
    pub rho_w: Option<f64>,
}

impl SieveParams {
    pub fn new(t: u32, deg: u32) -> Result<Self> {
        let sp = SieveParams { t, deg, rho_w: None };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::InvalidArgument("t must be positive".into()));
        }
        if self.deg == 0 {
            return Err(Error::InvalidArgument("deg f must be positive".into()));
        }
        if let Some(r) = self.rho_w {
            if !(r > 0.0 && r < self.nu_t()) {
                return Err(Error::InvalidArgument(alloc::format!("rho_w = {r} outside (0, {})", self.nu_t())));
            }
        }
        Ok(())
    }

    /// Sieve limit majorant `ν_t = 4t`.
    pub fn nu_t(&self) -> f64 {
        4.0 * self.t as f64
    }

    fn log_tail(&self) -> f64 {
        // (t+1) log(4t) - t
        let t = self.t as f64;
        (t + 1.0) * libm::log(4.0 * t) - t
    }
}

/// Strict lower threshold for `r` with the least admissible integer and the
/// `threshold + 1` saturation bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationBound {
    pub threshold: Rational,
    /// Least integer strictly above the threshold.
    pub least_admissible_r: i64,
    pub saturation_upper: Rational,
}

impl SaturationBound {
    fn from_threshold(threshold: Rational) -> Self {
        let least = threshold.floor().to_integer().to_i64().unwrap_or(i64::MAX - 1) + 1;
        let saturation_upper = &threshold + Rational::one();
        SaturationBound { threshold, least_admissible_r: least, saturation_upper }
    }

    pub fn threshold_f64(&self) -> f64 {
        rational_to_f64(&self.threshold)
    }
}

/// `9 t (1 + dim)^2 2 n_e deg / a`.
pub fn r_bound_general(gd: &GroupData, sp: &SieveParams) -> Result<SaturationBound> {
    sp.validate()?;
    let s = 1 + gd.dim as i64;
    let num = int(9 * sp.t as i64 * s * s * 2 * gd.n_e as i64 * sp.deg as i64);
    Ok(SaturationBound::from_threshold(num / &gd.a))
}

/// `18 t n_e^3 deg`, the cubic-in-`n_e` statement for `SL_n`.
pub fn r_bound_cubic_ne(n: u32, sp: &SieveParams) -> Result<SaturationBound> {
    sp.validate()?;
    let ne = sl_n_group_data(n)?.n_e as i64;
    Ok(SaturationBound::from_threshold(int(18 * sp.t as i64 * ne * ne * ne * sp.deg as i64)))
}

/// `9 t p dim deg / a`.
pub fn r_bound_smooth(gd: &GroupData, sp: &SieveParams) -> Result<SaturationBound> {
    sp.validate()?;
    let num = &gd.p * int(9 * sp.t as i64 * gd.dim as i64 * sp.deg as i64);
    Ok(SaturationBound::from_threshold(num / &gd.a))
}

/// `μ = p dim deg / a`.
pub fn weighted_mu(p: &Rational, dim: u32, a: &Rational, deg: u32) -> Rational {
    p * int(dim as i64 * deg as i64) / a
}

/// `(1 + ρ - ρ/ν) μ - 1 + (t + ρ) log(ν/ρ) - t + ρ t / ν` with `ν = 4t`.
pub fn r_bound_weighted_general(mu: f64, sp: &SieveParams) -> Result<f64> {
    let rho = sp.rho_w.unwrap_or(1.0);
    SieveParams { rho_w: Some(rho), ..*sp }.validate()?;
    let nu = sp.nu_t();
    let t = sp.t as f64;
    Ok((1.0 + rho - rho / nu) * mu - 1.0 + (t + rho) * libm::log(nu / rho) - t + rho * t / nu)
}

/// `2 p dim deg / a - 1 + (t+1) log(4t) - t + 1/4`.
pub fn r_bound_weighted(p: &Rational, dim: u32, a: &Rational, sp: &SieveParams) -> Result<f64> {
    sp.validate()?;
    let lead = rational_to_f64(&(weighted_mu(p, dim, a, sp.deg) * int(2)));
    Ok(lead - 1.0 + sp.log_tail() + 0.25)
}

/// `4 n deg - 1 + (t+1) log(4t) - t + 1/4` for `SL_n`, `n > 2`.
pub fn r_bound_weighted_sln(n: u32, sp: &SieveParams) -> Result<f64> {
    sp.validate()?;
    if n <= 2 {
        return Err(Error::InvalidArgument("the SL_n weighted form needs n > 2".into()));
    }
    Ok(4.0 * n as f64 * sp.deg as f64 - 1.0 + sp.log_tail() + 0.25)
}

/// Integrability exponent `p_n` for lattices in division algebras of degree `n`.
pub fn ramanujan_p(n: u32) -> Result<Rational> {
    let n64 = n as i64;
    match n {
        0 | 1 => Err(Error::InvalidArgument("n must be at least 2".into())),
        2 => Ok(q(64, 25)),
        3 => Ok(q(28, 9)),
        _ if n.is_multiple_of(2) => Ok(q(2 * n64, n64 - 2)),
        _ => Ok(q(2 * (n64 + 1), n64 - 1)),
    }
}

/// `2 p_n (n+1)/n deg + (t+1) log(4t) - t` and its floor.
pub fn r0_division_algebra(n: u32, sp: &SieveParams) -> Result<(f64, i64)> {
    sp.validate()?;
    if !is_prime_u(n as u64) {
        return Err(Error::InvalidArgument(alloc::format!("degree {n} is not prime")));
    }
    let lead = ramanujan_p(n)? * q(2 * (n as i64 + 1), n as i64) * int(sp.deg as i64);
    let value = rational_to_f64(&lead) + sp.log_tail();
    Ok((value, libm::floor(value) as i64))
}

/// `6 deg + t log t`.
pub fn r0_uniform_shape(sp: &SieveParams) -> Result<f64> {
    sp.validate()?;
    let t = sp.t as f64;
    Ok(6.0 * sp.deg as f64 + t * libm::log(t))
}

/// Every bound for `SL_n(Z)` at once.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsSummary {
    pub n: u32,
    pub params: SieveParams,
    pub group: GroupData,
    pub theta: Rational,
    pub level_tau: Rational,
    pub alpha: Rational,
    pub general: SaturationBound,
    pub cubic_ne: Option<SaturationBound>,
    pub smooth: SaturationBound,
    pub mu: Rational,
    pub weighted: f64,
    pub weighted_general: f64,
    pub weighted_sln: Option<f64>,
    pub uniform_shape: f64,
    pub division_algebra: Option<(f64, i64)>,
}

pub fn bounds_summary(n: u32, sp: &SieveParams, include_cubic_ne: bool) -> Result<BoundsSummary> {
    sp.validate()?;
    let gd = sl_n_group_data(n)?;
    let mu = weighted_mu(&gd.p, gd.dim, &gd.a, sp.deg);
    Ok(BoundsSummary {
        n,
        params: *sp,
        theta: theta(&gd),
        level_tau: level_tau(&gd),
        alpha: alpha_exponent(&gd, sp.t)?,
        general: r_bound_general(&gd, sp)?,
        cubic_ne: if include_cubic_ne { Some(r_bound_cubic_ne(n, sp)?) } else { None },
        smooth: r_bound_smooth(&gd, sp)?,
        weighted: r_bound_weighted(&gd.p, gd.dim, &gd.a, sp)?,
        weighted_general: r_bound_weighted_general(rational_to_f64(&mu), sp)?,
        weighted_sln: if n > 2 { Some(r_bound_weighted_sln(n, sp)?) } else { None },
        uniform_shape: r0_uniform_shape(sp)?,
        division_algebra: if is_prime_u(n as u64) { Some(r0_division_algebra(n, sp)?) } else { None },
        mu,
        group: gd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(t: u32, deg: u32) -> SieveParams {
        SieveParams::new(t, deg).unwrap()
    }

    #[test]
    fn group_data_examples() {
        let g2 = sl_n_group_data(2).unwrap();
        assert_eq!((g2.dim, g2.a.clone(), g2.n_e), (3, int(2), 2));
        let g3 = sl_n_group_data(3).unwrap();
        assert_eq!((g3.dim, g3.a.clone(), g3.n_e, g3.p.clone()), (8, int(6), 2, int(4)));
        let g4 = sl_n_group_data(4).unwrap();
        assert_eq!((g4.dim, g4.a.clone(), g4.n_e, g4.p.clone()), (15, int(12), 4, int(6)));
        assert_eq!(sl_n_group_data(5).unwrap().n_e, 4);
        assert_eq!(sl_n_group_data(6).unwrap().n_e, 6);
    }

    #[test]
    fn exponents() {
        let g2 = sl_n_group_data(2).unwrap();
        let g3 = sl_n_group_data(3).unwrap();
        assert_eq!(theta(&g2), q(1, 2));
        assert_eq!(theta(&g3), q(3, 2));
        assert_eq!(level_tau(&g2), q(1, 64));
        assert_eq!(level_tau(&g3), q(1, 324));
        assert_eq!(level_tau(&g3.clone().with_n_e(4).unwrap()) * int(2), level_tau(&g3));
        assert_eq!(alpha_exponent(&g2, 1).unwrap(), q(1, 576));
        assert_eq!(alpha_exponent(&g2, 2).unwrap() * int(2), q(1, 576));
        assert_eq!(alpha_exponent(&g3, 1).unwrap(), q(1, 2916));
        let mut prev = theta(&g3);
        for ne in [4, 8, 16, 64] {
            let th = theta(&g3.clone().with_n_e(ne).unwrap());
            assert!(th < prev);
            prev = th;
        }
    }

    #[test]
    fn general_bounds() {
        let b = r_bound_general(&sl_n_group_data(3).unwrap(), &sp(1, 1)).unwrap();
        assert_eq!(b.threshold, int(486));
        assert_eq!(b.least_admissible_r, 487);
        assert_eq!(b.saturation_upper, int(487));
        // even n: 18 n^3 scaled by n/(n-1)
        let b4 = r_bound_general(&sl_n_group_data(4).unwrap(), &sp(1, 1)).unwrap();
        assert_eq!(b4.threshold, int(18 * 64) * q(4, 3));
        let toy = GroupData { dim: 1, a: int(4), b: 0, n_e: 2, p: int(4) };
        assert_eq!(r_bound_general(&toy, &sp(1, 1)).unwrap().threshold, int(36));
        assert_eq!(r_bound_cubic_ne(3, &sp(1, 1)).unwrap().threshold, int(144));
    }

    #[test]
    fn smooth_bounds() {
        let div2 = GroupData { dim: 3, a: int(2), b: 0, n_e: 2, p: q(64, 25) };
        assert_eq!(r_bound_smooth(&div2, &sp(1, 1)).unwrap().threshold, q(3456, 100));
        let tempered = GroupData { p: int(2), ..div2.clone() };
        assert_eq!(r_bound_smooth(&tempered, &sp(1, 1)).unwrap().threshold, int(27));
        assert_eq!(r_bound_smooth(&div2, &sp(1, 3)).unwrap().threshold, q(3456 * 3, 100));
    }

    #[test]
    fn weighted_bounds() {
        let g3 = sl_n_group_data(3).unwrap();
        let sln = r_bound_weighted_sln(3, &sp(1, 1)).unwrap();
        assert!((sln - 13.0226).abs() < 5e-5);
        let w = r_bound_weighted(&g3.p, g3.dim, &g3.a, &sp(1, 1)).unwrap();
        let expect = 2.0 * 4.0 * 8.0 / 6.0 - 1.0 + 2.0 * libm::log(4.0) - 1.0 + 0.25;
        assert!((w - expect).abs() < 1e-12);
        assert!(w <= sln);
        let w2 = r_bound_weighted(&g3.p, g3.dim, &g3.a, &sp(1, 2)).unwrap();
        assert!((w2 - w - 2.0 * 4.0 * 8.0 / 6.0).abs() < 1e-12);
        assert!(SieveParams::new(1, 0).is_err());
        // the general form at ρ = 1 carries the extra -μ/(4t)
        let mu = rational_to_f64(&weighted_mu(&g3.p, g3.dim, &g3.a, 1));
        let general = r_bound_weighted_general(mu, &sp(1, 1)).unwrap();
        assert!((w - general - mu / 4.0).abs() < 1e-12);
        assert!(r_bound_weighted_general(mu, &SieveParams { rho_w: Some(4.0), ..sp(1, 1) }).is_err());
    }

    #[test]
    fn division_algebra_bounds() {
        let (v2, r2) = r0_division_algebra(2, &sp(1, 1)).unwrap();
        assert!((v2 - 9.4526).abs() < 5e-5);
        assert_eq!(r2, 9);
        let (v3, r3) = r0_division_algebra(3, &sp(1, 1)).unwrap();
        assert!((v3 - 10.0689).abs() < 5e-5);
        assert_eq!(r3, 10);
        assert!(r0_division_algebra(4, &sp(1, 1)).is_err());
        for n in (5u32..40).step_by(2) {
            let even_rule = q(2 * n as i64, n as i64 - 2);
            assert!(ramanujan_p(n).unwrap() < even_rule);
        }
        assert_eq!(ramanujan_p(4).unwrap(), int(4));
    }

    #[test]
    fn uniform_shape() {
        assert_eq!(r0_uniform_shape(&sp(1, 1)).unwrap(), 6.0);
        assert!((r0_uniform_shape(&sp(2, 2)).unwrap() - 13.386).abs() < 5e-4);
        assert_eq!(r0_uniform_shape(&sp(1, 7)).unwrap(), 42.0);
    }

    #[test]
    fn summary_is_consistent() {
        let s = bounds_summary(3, &sp(1, 1), true).unwrap();
        assert_eq!(&s.theta * int(2 * s.group.n_e as i64), s.group.a);
        assert_eq!(s.general.threshold, int(486));
        assert!(s.weighted_general <= s.weighted);
        assert!(bounds_summary(4, &sp(1, 1), false).unwrap().division_algebra.is_none());
    }

    proptest! {
        #[test]
        fn bounds_are_monotone(t in 1u32..6, deg in 1u32..6, dim in 1u32..30, ne in 1u32..6, pn in 1i64..40, a in 1i64..40) {
            let gd = GroupData { dim, a: int(a), b: 0, n_e: 2 * ne, p: q(pn, 4) };
            let base = sp(t, deg);
            let general = |g: &GroupData, s: &SieveParams| r_bound_general(g, s).unwrap().threshold;
            let smooth = |g: &GroupData, s: &SieveParams| r_bound_smooth(g, s).unwrap().threshold;
            let weighted = |g: &GroupData, s: &SieveParams| r_bound_weighted(&g.p, g.dim, &g.a, s).unwrap();
            prop_assert!(general(&gd, &base) > Rational::zero());
            prop_assert!(smooth(&gd, &base) > Rational::zero());
            prop_assert!(weighted(&gd, &base) > 0.0);

            let more_t = sp(t + 1, deg);
            let more_deg = sp(t, deg + 1);
            let wider = GroupData { dim: dim + 1, ..gd.clone() };
            let higher_ne = GroupData { n_e: gd.n_e + 2, ..gd.clone() };
            let higher_p = GroupData { p: &gd.p + q(1, 4), ..gd.clone() };
            let bigger_a = GroupData { a: int(a + 1), ..gd.clone() };
            for (g, s) in [(&gd, &more_t), (&gd, &more_deg), (&wider, &base), (&higher_ne, &base), (&higher_p, &base)] {
                prop_assert!(general(g, s) >= general(&gd, &base));
                prop_assert!(smooth(g, s) >= smooth(&gd, &base));
                prop_assert!(weighted(g, s) >= weighted(&gd, &base));
            }
            prop_assert!(general(&bigger_a, &base) <= general(&gd, &base));
            prop_assert!(smooth(&bigger_a, &base) <= smooth(&gd, &base));
            prop_assert!(weighted(&bigger_a, &base) <= weighted(&gd, &base));
            prop_assert!(r0_uniform_shape(&more_t).unwrap() >= r0_uniform_shape(&base).unwrap());
            prop_assert!(r0_uniform_shape(&more_deg).unwrap() >= r0_uniform_shape(&base).unwrap());
        }
    }
}
