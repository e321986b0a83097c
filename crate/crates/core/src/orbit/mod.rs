//! Lattice points of `V_{m,n}(Z)` in norm balls.

mod congruence;
mod enumerate;
mod hnf;

use alloc::vec::Vec;

pub use congruence::{
    congruence_coset_count, congruence_index, coset_histogram, coset_representatives, uniformity_report,
    UniformityReport, UniformityRow,
};
pub use enumerate::{count_points, enumerate_points, fold_points, for_each_point, predicted_visits, try_fold_points};
pub use hnf::{hermite_reduce, hnf_orbit_reps, orbit_of, orbit_of_with_transform, OrbitDecomposition};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// `max |x_ij|`; the default.
    MaxEntry,
    /// `sqrt(Σ x_ij²)`, compared exactly as `Σ x_ij² <= floor(T²)`.
    Frobenius,
}

impl NormKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormKind::MaxEntry => "max",
            NormKind::Frobenius => "frobenius",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub kind: NormKind,
    pub threshold: f64,
}

impl NormSpec {
    pub fn max_entry(threshold: f64) -> Self {
        NormSpec { kind: NormKind::MaxEntry, threshold }
    }

    pub fn frobenius(threshold: f64) -> Self {
        NormSpec { kind: NormKind::Frobenius, threshold }
    }

    pub fn with_threshold(&self, threshold: f64) -> Self {
        NormSpec { kind: self.kind, threshold }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!("norm threshold {} must be positive", self.threshold)));
        }
        if self.threshold > 1e9 {
            return Err(Error::InvalidArgument("norm threshold too large".into()));
        }
        Ok(())
    }
}

/// `N_{m,n}(T)` sampled on a grid of thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pub m: i64,
    pub n: usize,
    pub norm: NormKind,
    pub points: Vec<(f64, u64)>,
}

pub fn count_series(m: i64, n: usize, norm: NormKind, grid: &[f64], budget: u64) -> Result<CountSeries> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty T grid".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let c = count_points(m, n, &NormSpec { kind: norm, threshold: t }, budget)?;
        points.push((t, c));
    }
    Ok(CountSeries { m, n, norm, points })
}

/// Least-squares fit of `log N = log c + a log T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub exponent: f64,
    pub constant: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
}

pub fn fit_growth_exponent(series: &CountSeries) -> Result<GrowthFit> {
    let pts = &series.points;
    if pts.len() < 4 {
        return Err(Error::Degenerate(alloc::format!("need at least 4 grid points, got {}", pts.len())));
    }
    if pts.iter().any(|&(t, c)| c == 0 || t.is_nan() || t <= 0.0) {
        return Err(Error::Degenerate("grid contains a zero count or nonpositive T".into()));
    }
    let xs: Vec<f64> = pts.iter().map(|&(t, _)| libm::log(t)).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, c)| libm::log(c as f64)).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx < 1e-12 {
        return Err(Error::Degenerate("all grid thresholds coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| libm::fabs(y - intercept - slope * x)).fold(0.0, f64::max);
    Ok(GrowthFit { exponent: slope, constant: libm::exp(intercept), max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(c: f64, a: f64) -> CountSeries {
        let points = [2.0f64, 5.0, 10.0, 40.0].iter().map(|&t| (t, (c * libm::pow(t, a)) as u64)).collect();
        CountSeries { m: 1, n: 2, norm: NormKind::MaxEntry, points }
    }

    #[test]
    fn exact_power_laws() {
        let fit = fit_growth_exponent(&synthetic(7.0, 2.0)).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-6);
        assert!((fit.constant - 7.0).abs() < 1e-6);
        let fit = fit_growth_exponent(&synthetic(5.0, 3.0)).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_grids() {
        let mut s = synthetic(7.0, 2.0);
        s.points.truncate(3);
        assert!(matches!(fit_growth_exponent(&s), Err(Error::Degenerate(_))));
        let s = CountSeries { m: 1, n: 2, norm: NormKind::MaxEntry, points: alloc::vec![(3.0, 5); 4] };
        assert!(matches!(fit_growth_exponent(&s), Err(Error::Degenerate(_))));
        let mut s = synthetic(7.0, 2.0);
        s.points[0].1 = 0;
        assert!(matches!(fit_growth_exponent(&s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(count_series(1, 2, NormKind::MaxEntry, &[], 1000).is_err());
    }
}
