//! Run configuration: a flat key/value map shared by config files and flags.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;

use crate::CliError;

/// `(key, help)`.
pub type KeyHelp = (&'static str, &'static str);

/// Subcommand names with their accepted keys and help strings.
pub const COMMANDS: &[(&str, &str, &[KeyHelp])] = &[
    (
        "count",
        "Count integer matrices of fixed determinant in a norm ball over a grid of thresholds",
        &[
            ("m", "determinant (nonzero)"),
            ("n", "dimension, 2 or 3 [default 2]"),
            ("norm", "max or frobenius [default max]"),
            ("grid", "comma-separated thresholds T"),
            ("budget", "candidate visit cap"),
            ("out", "JSON report path [default stdout]"),
            ("csv", "CSV table path"),
        ],
    ),
    (
        "densities",
        "Exact local densities of a polynomial on a residue orbit",
        &[
            ("v", "base matrix, rows separated by ';' [default diag(1,..,m)]"),
            ("m", "determinant when v is absent [default 1]"),
            ("n", "dimension when v is absent [default 2]"),
            ("f", "polynomial, e.g. x11*x22 or a JSON object [default x11]"),
            ("normalizer", "declared normalizer N [default 1]"),
            ("factors", "declared irreducible factor count t"),
            ("dmax", "largest squarefree modulus in the table [default 30]"),
            ("pmax", "prime bound for the dimension scan and local factors [default 13]"),
            ("probe", "max-entry radius for the weak primitivity probe [default 10]"),
            ("state-cap", "residue orbit size cap [default 5000000]"),
            ("budget", "candidate visit cap"),
            ("out", "JSON report path [default stdout]"),
            ("csv", "CSV table path"),
        ],
    ),
    (
        "sieve",
        "Exact Legendre sift, remainders and level scan on one orbit",
        &[
            ("v", "base matrix, rows separated by ';' [default diag(1,..,m)]"),
            ("m", "determinant when v is absent [default 1]"),
            ("n", "dimension when v is absent [default 2]"),
            ("f", "polynomial [default x11]"),
            ("normalizer", "declared normalizer N [default 1]"),
            ("factors", "declared irreducible factor count t"),
            ("norm", "max or frobenius [default max]"),
            ("T", "ball radius"),
            ("z", "sifting limit [default 10]"),
            ("ramified", "comma-separated primes excluded from the sift"),
            ("levels", "comma-separated levels D [default 10,30]"),
            ("rho-dmax", "largest modulus with a computed density [default max level]"),
            ("state-cap", "residue orbit size cap [default 5000000]"),
            ("budget", "candidate visit cap"),
            ("out", "JSON report path [default stdout]"),
            ("csv", "CSV level-scan path"),
        ],
    ),
    (
        "construct",
        "Build matrices with prime entries and determinant 2^(n-1), with certificates",
        &[
            ("n", "dimension, 3 or 4 [default 3]"),
            ("seed", "first seed [default 0]"),
            ("count", "number of consecutive seeds [default 1]"),
            ("out", "JSON certificate path [default stdout]"),
        ],
    ),
    (
        "bounds",
        "Saturation bounds from group and sieve data",
        &[
            ("sln", "n for SL_n(Z), at least 2"),
            ("division", "prime n for the division-algebra bound"),
            ("t", "irreducible factor count [default 1]"),
            ("deg", "degree of f [default 1]"),
            ("rho-w", "weighted-sieve parameter in (0, 4t)"),
            ("cubic-ne", "also report the cubic n_e form (true/false) [default false]"),
            ("out", "JSON report path [default stdout]"),
        ],
    ),
    (
        "uniformity",
        "Distribution of SL_2(Z) points over cosets of a principal congruence subgroup",
        &[
            ("q", "level (positive)"),
            ("grid", "comma-separated thresholds T"),
            ("norm", "max or frobenius [default max]"),
            ("state-cap", "cap on |SL_2(Z/qZ)| [default 5000000]"),
            ("budget", "candidate visit cap"),
            ("out", "JSON report path [default stdout]"),
            ("csv", "CSV table path"),
        ],
    ),
];

pub fn keys_for(command: &str) -> Option<&'static [KeyHelp]> {
    COMMANDS.iter().find(|(c, _, _)| *c == command).map(|(_, _, k)| *k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
}

/// `key=value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// File entries first, then flags on top. Unknown keys are rejected.
    pub fn merge(
        command: &str,
        file: BTreeMap<String, String>,
        flags: BTreeMap<String, String>,
    ) -> Result<RunConfig, CliError> {
        let keys = keys_for(command).ok_or_else(|| CliError::Validation(format!("unknown command {command}")))?;
        let mut params = file;
        params.extend(flags);
        for k in params.keys() {
            if !keys.iter().any(|(name, _)| name == k) {
                return Err(CliError::Validation(format!("unknown key '{k}' for {command}")));
            }
        }
        Ok(RunConfig { command: command.to_string(), params })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => {
                s.trim().parse().map(Some).map_err(|_| CliError::Validation(format!("cannot parse {key} = '{s}'")))
            }
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?.ok_or_else(|| CliError::Validation(format!("missing required key '{key}'")))
    }

    /// Comma-separated list; an empty value is an empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        let Some(s) = self.raw(key) else { return Ok(None) };
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse().map_err(|_| CliError::Validation(format!("cannot parse '{x}' in {key}"))))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = parse_config_file("m = 2 # comment\n\ngrid=1,2\n").unwrap();
        let flags = BTreeMap::from([("m".to_string(), "3".to_string())]);
        let cfg = RunConfig::merge("count", file, flags).unwrap();
        assert_eq!(cfg.require::<i64>("m").unwrap(), 3);
        assert_eq!(cfg.list::<f64>("grid").unwrap(), Some(vec![1.0, 2.0]));
    }

    #[test]
    fn unknown_keys_and_bad_lines_fail() {
        assert!(parse_config_file("novalue").is_err());
        let file = BTreeMap::from([("q".to_string(), "2".to_string())]);
        assert!(RunConfig::merge("count", file, BTreeMap::new()).is_err());
        assert!(RunConfig::merge("nope", BTreeMap::new(), BTreeMap::new()).is_err());
    }

    #[test]
    fn typed_getters() {
        let cfg = RunConfig::merge(
            "count",
            BTreeMap::new(),
            BTreeMap::from([("m".into(), "x".into()), ("grid".into(), "".into())]),
        )
        .unwrap();
        assert!(cfg.get::<i64>("m").is_err());
        assert_eq!(cfg.list::<f64>("grid").unwrap(), Some(vec![]));
        assert_eq!(cfg.get_or("n", 2usize).unwrap(), 2);
        assert!(cfg.require::<String>("norm").is_err());
    }
}
