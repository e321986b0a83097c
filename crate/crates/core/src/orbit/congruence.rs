//! Equidistribution of `SL_2(Z)` points among cosets of principal
//! congruence subgroups `Γ(q)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{fold_points, NormKind, NormSpec};
use crate::densities::{reduce_orbit_mod, OrbitLimits};
use crate::matrix::IntMatrix;
use crate::{Error, Result};

/// `[SL_n(Z) : Γ(q)] = |SL_n(Z/qZ)|` by closure over elementary generators.
pub fn congruence_index(n: usize, q: u64, state_cap: u64) -> Result<u64> {
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidArgument(alloc::format!("congruence index supports n = 2, 3 (got {n})")));
    }
    let limits = OrbitLimits { state_cap, retain_cap: 0 };
    Ok(reduce_orbit_mod(&IntMatrix::identity(n)?, q, limits)?.size)
}

fn check_q(q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::ZeroInput);
    }
    Ok(())
}

/// Points of `SL_2(Z)` in the ball, bucketed by their reduction mod `q`.
pub fn coset_histogram(q: u64, norm: &NormSpec, budget: u64) -> Result<BTreeMap<IntMatrix, u64>> {
    check_q(q)?;
    fold_points(
        1,
        2,
        norm,
        budget,
        BTreeMap::new,
        |acc: &mut BTreeMap<IntMatrix, u64>, x: &IntMatrix| {
            *acc.entry(x.reduce_mod(q)).or_insert(0) += 1;
        },
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        },
    )
}

fn check_coset_rep(y: &IntMatrix) -> Result<()> {
    if y.n() != 2 {
        return Err(Error::InvalidArgument("congruence cosets are supported for n = 2 only".into()));
    }
    if y.det() != 1 {
        return Err(Error::DeterminantMismatch { expected: 1, found: y.det() });
    }
    Ok(())
}

/// `#{w in Γ(q) y : |w| <= T}`, i.e. the points congruent to `y` mod `q`.
pub fn congruence_coset_count(q: u64, y: &IntMatrix, norm: &NormSpec, budget: u64) -> Result<u64> {
    check_coset_rep(y)?;
    let hist = coset_histogram(q, norm, budget)?;
    Ok(hist.get(&y.reduce_mod(q)).copied().unwrap_or(0))
}

/// One integral lift for each element of `SL_2(Z/qZ)`, smallest-norm lifts
/// first found in enumeration order.
pub fn coset_representatives(q: u64, budget: u64) -> Result<Vec<IntMatrix>> {
    check_q(q)?;
    let index = congruence_index(2, q, budget)?;
    let mut bound = 1.0f64;
    loop {
        let mut found: BTreeMap<IntMatrix, IntMatrix> = BTreeMap::new();
        super::for_each_point(1, 2, &NormSpec::max_entry(bound), budget, |x| {
            found.entry(x.reduce_mod(q)).or_insert(*x);
        })?;
        if found.len() as u64 == index {
            return Ok(found.into_values().collect());
        }
        bound *= 2.0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityRow {
    pub threshold: f64,
    pub total: u64,
    /// Count in each sampled coset, in the order of `UniformityReport::cosets`.
    pub counts: Vec<u64>,
    /// `|[Γ:Γ(q)] count / total - 1|` per coset.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityReport {
    pub q: u64,
    pub index: u64,
    pub norm: NormKind,
    pub cosets: Vec<IntMatrix>,
    pub rows: Vec<UniformityRow>,
}

/// Per-threshold deviation from uniform distribution over the cosets.
/// With `cosets = None` every coset is sampled.
pub fn uniformity_report(
    q: u64,
    grid: &[f64],
    cosets: Option<&[IntMatrix]>,
    kind: NormKind,
    budget: u64,
) -> Result<UniformityReport> {
    check_q(q)?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty T grid".into()));
    }
    let index = congruence_index(2, q, budget)?;
    let cosets: Vec<IntMatrix> = match cosets {
        Some(c) => {
            for y in c {
                check_coset_rep(y)?;
            }
            c.to_vec()
        }
        None => coset_representatives(q, budget)?,
    };
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        let hist = coset_histogram(q, &NormSpec { kind, threshold: t }, budget)?;
        let total: u64 = hist.values().sum();
        let counts: Vec<u64> = cosets.iter().map(|y| hist.get(&y.reduce_mod(q)).copied().unwrap_or(0)).collect();
        let deviations: Vec<f64> = counts
            .iter()
            .map(|&c| if total == 0 { f64::INFINITY } else { libm::fabs(index as f64 * c as f64 / total as f64 - 1.0) })
            .collect();
        let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
        rows.push(UniformityRow { threshold: t, total, counts, deviations, max_deviation });
    }
    Ok(UniformityReport { q, index, norm: kind, cosets, rows })
}
