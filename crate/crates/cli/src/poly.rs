//! Polynomial and matrix input formats.
//!
//! Text form: `2*x11^2 - x12*x21 + 3`, indices 1-based. JSON form:
//! `{"monomials": [{"coeff": 1, "exps": [1,0,0,0]}], "normalizer": 1, "factors": 1}`.

use affsieve_core::{IntMatrix, PolynomialOnV};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
struct MonomialSpec {
    coeff: i64,
    exps: Vec<u8>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolySpec {
    monomials: Vec<MonomialSpec>,
    normalizer: Option<u64>,
    factors: Option<u32>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

type Terms = Vec<(i64, Vec<u8>)>;

fn parse_text(n: usize, src: &str) -> Result<Terms, CliError> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad("empty polynomial"));
    }
    // split into signed terms
    let mut terms = Vec::new();
    let mut cur = String::new();
    for (i, ch) in s.char_indices() {
        if (ch == '+' || ch == '-') && i > 0 && !s[..i].ends_with('^') {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);

    let mut out = Vec::new();
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1, term.strip_prefix('+').unwrap_or(&term)),
        };
        if body.is_empty() {
            return Err(bad(format!("dangling sign in '{src}'")));
        }
        let mut coeff = sign;
        let mut exps = vec![0u8; n * n];
        for factor in body.split('*') {
            if let Ok(c) = factor.parse::<i64>() {
                coeff = coeff.checked_mul(c).ok_or_else(|| bad("coefficient overflow"))?;
                continue;
            }
            let (var, pow) = match factor.split_once('^') {
                Some((v, p)) => (v, p.parse::<u8>().map_err(|_| bad(format!("bad exponent in '{factor}'")))?),
                None => (factor, 1),
            };
            let idx: Vec<usize> = var
                .strip_prefix('x')
                .filter(|d| d.len() == 2)
                .map(|d| d.chars().filter_map(|c| c.to_digit(10)).map(|v| v as usize).collect())
                .unwrap_or_default();
            if idx.len() != 2 || !(1..=n).contains(&idx[0]) || !(1..=n).contains(&idx[1]) {
                return Err(bad(format!("unknown factor '{factor}' (expected x<i><j> with 1 <= i, j <= {n})")));
            }
            let slot = &mut exps[(idx[0] - 1) * n + idx[1] - 1];
            *slot = slot.checked_add(pow).ok_or_else(|| bad("exponent overflow"))?;
        }
        out.push((coeff, exps));
    }
    Ok(out)
}

/// Parses `f` for `n × n` matrices. Explicit `normalizer` and `factors`
/// override values from a JSON spec. When `t` is given nowhere, a single
/// monomial counts its degree and anything else counts 1.
pub fn parse_polynomial(
    n: usize,
    src: &str,
    normalizer: Option<u64>,
    factors: Option<u32>,
) -> Result<PolynomialOnV, CliError> {
    let src = src.trim();
    let (terms, json_n, json_t) = if src.starts_with('{') {
        let spec: PolySpec = serde_json::from_str(src).map_err(|e| bad(format!("polynomial JSON: {e}")))?;
        (spec.monomials.into_iter().map(|m| (m.coeff, m.exps)).collect(), spec.normalizer, spec.factors)
    } else {
        (parse_text(n, src)?, None, None)
    };
    let p = PolynomialOnV::from_terms(n, &terms, normalizer.or(json_n).unwrap_or(1), 0)?;
    let t = factors.or(json_t).unwrap_or_else(|| match p.monomials() {
        [single] if single.degree() > 0 => single.degree(),
        _ => 1,
    });
    Ok(p.with_factor_count(t))
}

/// `"a,b;c,d"` with rows separated by `;`.
pub fn parse_matrix(src: &str) -> Result<IntMatrix, CliError> {
    let rows: Vec<Vec<i64>> = src
        .split(';')
        .map(|r| {
            r.split(',').map(|v| v.trim().parse::<i64>().map_err(|_| bad(format!("bad matrix entry '{v}'")))).collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(IntMatrix::from_rows(&rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[[i64; 2]]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn text_polynomials_evaluate() {
        let x = m(&[[2, 3], [5, 7]]);
        let p = parse_polynomial(2, "x11", None, None).unwrap();
        assert_eq!((p.eval(&x).unwrap(), p.factor_count()), (2, 1));
        let p = parse_polynomial(2, "x11*x22", None, None).unwrap();
        assert_eq!((p.eval(&x).unwrap(), p.factor_count()), (14, 2));
        let p = parse_polynomial(2, "2*x11^2 - x12*x21 + 3", None, None).unwrap();
        assert_eq!((p.eval(&x).unwrap(), p.factor_count()), (8 - 15 + 3, 1));
        let p = parse_polynomial(2, " -x22 + x11 ", None, Some(1)).unwrap();
        assert_eq!(p.eval(&x).unwrap(), -5);
    }

    #[test]
    fn json_polynomials() {
        let src = r#"{"monomials": [{"coeff": 1, "exps": [1,0,0,1]}], "normalizer": 1, "factors": 2}"#;
        let p = parse_polynomial(2, src, None, None).unwrap();
        assert_eq!(p.factor_count(), 2);
        assert_eq!(p.eval(&m(&[[3, 1], [2, 5]])).unwrap(), 15);
        assert_eq!(parse_polynomial(2, src, Some(3), Some(1)).unwrap().normalizer(), 3);
    }

    #[test]
    fn malformed_input_is_rejected() {
        for bad in ["", "x13", "x1", "y11", "x11+", "x11^a", "x11**x22"] {
            assert!(parse_polynomial(2, bad, None, None).is_err(), "{bad}");
        }
        assert!(parse_polynomial(2, "{\"monomials\": 3}", None, None).is_err());
        assert!(parse_matrix("1,2;3").is_err());
        assert_eq!(parse_matrix("1,0;0,2").unwrap(), m(&[[1, 0], [0, 2]]));
    }
}
