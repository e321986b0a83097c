//! One runner per subcommand. Each returns the report body and an optional
//! CSV table (header first).

use affsieve_core::arithmetic::{gcd, is_prime, MR_WITNESSES};
use affsieve_core::bounds::{bounds_summary, r0_division_algebra, SaturationBound, SieveParams};
use affsieve_core::densities::{
    density_table, sieve_dimension_scan, singular_series_partial, squarefree_up_to, weak_primitivity, DensityEngine,
    OrbitLimits,
};
use affsieve_core::orbit::{congruence_index, count_series, fit_growth_exponent, uniformity_report};
use affsieve_core::prime_matrix::{build_prime_matrix, ConstructOptions, PrimeMatrixCertificate};
use affsieve_core::sieve::{build_sequence, sieve_report, SiftMethod};
use affsieve_core::{IntMatrix, NormKind, NormSpec, PolynomialOnV, DEFAULT_BUDGET};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::poly::{parse_matrix, parse_polynomial};
use crate::report::{bigint, float, float_text, int128, matrix, rational};
use crate::CliError;

pub type Table = Vec<Vec<String>>;

pub struct CommandOutput {
    pub result: Value,
    pub csv: Option<Table>,
}

const DEFAULT_STATE_CAP: u64 = 5_000_000;

fn norm_kind(cfg: &RunConfig) -> Result<NormKind, CliError> {
    match cfg.raw("norm").unwrap_or("max") {
        "max" => Ok(NormKind::MaxEntry),
        "frobenius" | "frob" => Ok(NormKind::Frobenius),
        other => Err(CliError::Validation(format!("unknown norm '{other}' (max or frobenius)"))),
    }
}

fn budget(cfg: &RunConfig) -> Result<u64, CliError> {
    cfg.get_or("budget", DEFAULT_BUDGET)
}

fn grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let g: Vec<f64> = cfg.list("grid")?.ok_or_else(|| CliError::Validation("missing required key 'grid'".into()))?;
    if g.is_empty() {
        return Err(CliError::Validation("empty T grid".into()));
    }
    Ok(g)
}

/// `v` if given, otherwise `diag(1, .., 1, m)`.
fn base_matrix(cfg: &RunConfig) -> Result<IntMatrix, CliError> {
    if let Some(v) = cfg.raw("v") {
        return parse_matrix(v);
    }
    let m: i64 = cfg.get_or("m", 1)?;
    let n: usize = cfg.get_or("n", 2)?;
    if n == 0 {
        return Err(CliError::Validation("n must be positive".into()));
    }
    let mut d = vec![1; n];
    d[n - 1] = m;
    Ok(IntMatrix::diag(&d)?)
}

fn polynomial(cfg: &RunConfig, n: usize) -> Result<PolynomialOnV, CliError> {
    parse_polynomial(n, cfg.raw("f").unwrap_or("x11"), cfg.get("normalizer")?, cfg.get("factors")?)
}

fn engine(cfg: &RunConfig, v: &IntMatrix) -> Result<DensityEngine, CliError> {
    let cap = cfg.get_or("state-cap", DEFAULT_STATE_CAP)?;
    Ok(DensityEngine::new(*v, OrbitLimits { state_cap: cap, retain_cap: cap }))
}

pub fn count(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let m: i64 = cfg.require("m")?;
    let n: usize = cfg.get_or("n", 2)?;
    let kind = norm_kind(cfg)?;
    let series = count_series(m, n, kind, &grid(cfg)?, budget(cfg)?)?;
    let fit = match fit_growth_exponent(&series) {
        Ok(f) => {
            json!({"a_est": float(f.exponent), "c_est": float(f.constant), "max_log_residual": float(f.max_residual)})
        }
        Err(e) => json!({"error": e.to_string()}),
    };
    let rows: Vec<Value> = series.points.iter().map(|&(t, c)| json!({"T": float(t), "count": c})).collect();
    let mut csv = vec![vec!["T".to_string(), "count".to_string()]];
    csv.extend(series.points.iter().map(|&(t, c)| vec![float_text(t), c.to_string()]));
    Ok(CommandOutput {
        result: json!({"m": m, "n": n, "norm": kind.as_str(), "series": rows, "fit": fit}),
        csv: Some(csv),
    })
}

pub fn densities(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let v = base_matrix(cfg)?;
    let f = polynomial(cfg, v.n())?;
    let dmax: u64 = cfg.get_or("dmax", 30)?;
    let pmax: u64 = cfg.get_or("pmax", 13)?;
    if dmax == 0 {
        return Err(CliError::Validation("dmax must be positive".into()));
    }
    let mut eng = engine(cfg, &v)?;
    let moduli = squarefree_up_to(dmax);
    let table = density_table(&mut eng, &f, &moduli)?;

    let rows: Vec<Value> = table
        .entries
        .iter()
        .map(|(d, r)| json!({"d": d, "numerator": bigint(r.numer()), "denominator": bigint(r.denom())}))
        .collect();
    let mut mult = Vec::new();
    for &d1 in moduli.iter().filter(|&&d| d > 1) {
        for &d2 in moduli.iter().filter(|&&d| d > d1) {
            if d1 * d2 <= dmax && gcd(d1, d2) == 1 {
                let lhs = table.get(d1 * d2);
                let rhs = table.get(d1).zip(table.get(d2)).map(|(a, b)| a * b);
                mult.push(json!({"d1": d1, "d2": d2, "holds": lhs.is_some() && lhs == rhs}));
            }
        }
    }
    let scan = sieve_dimension_scan(&mut eng, &f, pmax)?;
    let series = singular_series_partial(&mut eng, &f, pmax)?;
    let weak = if v.det() > 0 {
        let probe: f64 = cfg.get_or("probe", 10.0)?;
        let w = weak_primitivity(&v, &f, &NormSpec::max_entry(probe), pmax, budget(cfg)?)?;
        let witnesses: serde_json::Map<String, Value> =
            w.witnesses.iter().map(|(p, x)| (p.to_string(), x.as_ref().map_or(Value::Null, matrix))).collect();
        json!({
            "probed_gcd": w.probed_gcd.to_string(),
            "declared_normalizer": w.declared_normalizer,
            "points_probed": w.points_probed,
            "weakly_primitive": w.weakly_primitive,
            "witnesses": witnesses,
        })
    } else {
        Value::Null
    };

    let mut csv = vec![vec!["d".into(), "numerator".into(), "denominator".into(), "rho".into()]];
    for (d, r) in &table.entries {
        csv.push(vec![
            d.to_string(),
            r.numer().to_string(),
            r.denom().to_string(),
            float_text(affsieve_core::sieve::rational_to_f64(r)),
        ]);
    }
    Ok(CommandOutput {
        result: json!({
            "base": matrix(&v),
            "normalizer": f.normalizer(),
            "factors": f.factor_count(),
            "table": rows,
            "prime_bound_holds": table.prime_bound_holds(),
            "multiplicativity": mult,
            "dimension_scan": {
                "t": scan.t,
                "degenerate": scan.degenerate,
                "max_rho_over_p": float(scan.max_rho_over_p),
                "rows": scan.rows.iter().map(|r| json!({
                    "p": r.p, "rho": rational(&r.rho), "scaled_deviation": float(r.scaled_deviation)
                })).collect::<Vec<_>>(),
            },
            "singular_series": {
                "product": rational(&series.product),
                "factors": series.factors.iter().map(|(p, r)| json!({"p": p, "factor": rational(r)})).collect::<Vec<_>>(),
                "excluded": series.excluded,
            },
            "weak_primitivity": weak,
        }),
        csv: Some(csv),
    })
}

pub fn sieve(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let v = base_matrix(cfg)?;
    let f = polynomial(cfg, v.n())?;
    let t: f64 = cfg.require("T")?;
    let z: f64 = cfg.get_or("z", 10.0)?;
    let ramified: Vec<u64> = cfg.list("ramified")?.unwrap_or_default();
    let levels: Vec<u64> = cfg.list("levels")?.unwrap_or_else(|| vec![10, 30]);
    if levels.is_empty() || levels.contains(&0) {
        return Err(CliError::Validation("levels must be a nonempty list of positive integers".into()));
    }
    let rho_dmax: u64 = cfg.get_or("rho-dmax", levels.iter().copied().max().unwrap_or(1))?;
    let budget = budget(cfg)?;
    let seq = build_sequence(&v, &f, &NormSpec { kind: norm_kind(cfg)?, threshold: t }, budget)?;
    let mut eng = engine(cfg, &v)?;
    let table = density_table(&mut eng, &f, &squarefree_up_to(rho_dmax.max(1)))?;
    let rep = sieve_report(&seq, &table, z, &ramified, &levels, budget)?;
    let p: BigInt = rep.primes.iter().map(|&p| BigInt::from(p)).product();

    let mut csv = vec![vec!["D".into(), "remainder_sum".into(), "ratio_to_X".into()]];
    csv.extend(
        rep.level_scan.iter().map(|r| vec![r.level.to_string(), float_text(r.remainder_sum), float_text(r.ratio_to_x)]),
    );
    Ok(CommandOutput {
        result: json!({
            "base": matrix(&v),
            "T": float(t),
            "X": seq.x,
            "a0": seq.a0,
            "z": float(z),
            "ramified": ramified,
            "primes": rep.primes,
            "P": bigint(&p),
            "sifted": rep.sifted.value,
            "method": match rep.sifted.method { SiftMethod::Moebius => "moebius", SiftMethod::Direct => "direct" },
            "remainders": rep.remainders.iter().map(|(d, r)| json!({"d": d, "R": rational(r)})).collect::<Vec<_>>(),
            "level_scan": rep.level_scan.iter().map(|r| json!({
                "D": r.level, "remainder_sum": float(r.remainder_sum), "ratio_to_X": float(r.ratio_to_x)
            })).collect::<Vec<_>>(),
        }),
        csv: Some(csv),
    })
}

fn certificate(c: &PrimeMatrixCertificate) -> Value {
    let entries: Vec<Value> = c
        .matrix
        .flat()
        .iter()
        .map(|&p| {
            let bases: Vec<u64> = MR_WITNESSES.iter().copied().filter(|&a| a < p as u64).collect();
            json!({"value": p, "prime": is_prime(p), "miller_rabin_bases": bases})
        })
        .collect();
    json!({
        "seed": c.seed,
        "n": c.n,
        "matrix": matrix(&c.matrix),
        "det": int128(c.det),
        "entries": entries,
        "frame": c.frame.rows,
        "frame_minors": c.frame_check.minors.0.iter().map(|&a| int128(a)).collect::<Vec<_>>(),
        "frame_checks": {
            "gcd": c.frame_check.gcd_ok,
            "nonzero": c.frame_check.nonzero,
            "sum": c.frame_check.sum_ok,
        },
        "congruences": c.congruences.iter().map(|(name, ok)| json!({"name": name, "holds": ok})).collect::<Vec<_>>(),
        "equation": {
            "a0": int128(c.equation.a0),
            "coefficients": (0..c.equation.n()).map(|j| int128(c.equation.coefficient(j))).collect::<Vec<_>>(),
        },
        "local_conditions": c.local_conditions,
        "solution": c.solution,
        "rows_swapped": c.rows_swapped,
        "verified": c.verify(),
    })
}

pub fn construct(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let n: usize = cfg.get_or("n", 3)?;
    let seed: u64 = cfg.get_or("seed", 0)?;
    let count: u64 = cfg.get_or("count", 1)?;
    if count == 0 {
        return Err(CliError::Validation("count must be positive".into()));
    }
    let last = seed.checked_add(count - 1).ok_or_else(|| CliError::Validation("seed range overflows".into()))?;
    let opts = ConstructOptions::for_dimension(n);
    let certs: Vec<PrimeMatrixCertificate> =
        (seed..=last).into_par_iter().map(|s| build_prime_matrix(n, s, &opts)).collect::<Result<_, _>>()?;
    let mut distinct: Vec<&IntMatrix> = certs.iter().map(|c| &c.matrix).collect();
    distinct.sort();
    distinct.dedup();
    Ok(CommandOutput {
        result: json!({
            "n": n,
            "target_det": int128(1i128 << (n - 1)),
            "solution_convention": "positive primes",
            "distinct_matrices": distinct.len(),
            "certificates": certs.iter().map(certificate).collect::<Vec<_>>(),
        }),
        csv: None,
    })
}

fn saturation(b: &SaturationBound) -> Value {
    json!({
        "threshold": rational(&b.threshold),
        "threshold_approx": float(b.threshold_f64()),
        "least_admissible_r": b.least_admissible_r,
        "saturation_upper": rational(&b.saturation_upper),
    })
}

pub fn bounds(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut sp = SieveParams::new(cfg.get_or("t", 1)?, cfg.get_or("deg", 1)?)?;
    sp.rho_w = cfg.get("rho-w")?;
    sp.validate()?;
    let sln: Option<u32> = cfg.get("sln")?;
    let division: Option<u32> = cfg.get("division")?;
    if sln.is_none() && division.is_none() {
        return Err(CliError::Validation("give sln and/or division".into()));
    }
    let summary = match sln {
        Some(n) => {
            let s = bounds_summary(n, &sp, cfg.get_or("cubic-ne", false)?)?;
            json!({
                "n": s.n,
                "group": {
                    "dim": s.group.dim, "a": rational(&s.group.a), "b": s.group.b,
                    "n_e": s.group.n_e, "p": rational(&s.group.p),
                },
                "theta": rational(&s.theta),
                "level_tau": rational(&s.level_tau),
                "alpha": rational(&s.alpha),
                "general": saturation(&s.general),
                "cubic_ne": s.cubic_ne.as_ref().map(saturation),
                "smooth": saturation(&s.smooth),
                "mu": rational(&s.mu),
                "weighted": float(s.weighted),
                "weighted_general": float(s.weighted_general),
                "weighted_sln": s.weighted_sln.map(float),
                "uniform_shape": float(s.uniform_shape),
            })
        }
        None => Value::Null,
    };
    let div = match division {
        Some(n) => {
            let (v, r) = r0_division_algebra(n, &sp)?;
            json!({"n": n, "threshold": float(v), "r0_upper": r})
        }
        None => Value::Null,
    };
    Ok(CommandOutput {
        result: json!({
            "params": {"t": sp.t, "deg": sp.deg, "rho_w": sp.rho_w.map(float)},
            "sln": summary,
            "division_algebra": div,
        }),
        csv: None,
    })
}

pub fn uniformity(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let q: u64 = cfg.require("q")?;
    let cap: u64 = cfg.get_or("state-cap", DEFAULT_STATE_CAP)?;
    if q == 0 {
        return Err(CliError::Validation("q must be positive".into()));
    }
    // size check before any enumeration
    congruence_index(2, q, cap)?;
    let r = uniformity_report(q, &grid(cfg)?, None, norm_kind(cfg)?, budget(cfg)?)?;
    let mut header = vec!["T".to_string(), "total".into(), "max_deviation".into()];
    header.extend((0..r.cosets.len()).map(|i| format!("coset_{i}")));
    let mut csv = vec![header];
    for row in &r.rows {
        let mut line = vec![float_text(row.threshold), row.total.to_string(), float_text(row.max_deviation)];
        line.extend(row.counts.iter().map(|c| c.to_string()));
        csv.push(line);
    }
    Ok(CommandOutput {
        result: json!({
            "q": r.q,
            "index": r.index,
            "norm": r.norm.as_str(),
            "cosets": r.cosets.iter().map(matrix).collect::<Vec<_>>(),
            "rows": r.rows.iter().map(|row| json!({
                "T": float(row.threshold),
                "total": row.total,
                "counts": row.counts,
                "counts_sum_to_total": row.counts.iter().sum::<u64>() == row.total,
                "deviations": row.deviations.iter().map(|&d| float(d)).collect::<Vec<_>>(),
                "max_deviation": float(row.max_deviation),
            })).collect::<Vec<_>>(),
        }),
        csv: Some(csv),
    })
}
