use std::collections::BTreeSet;

use affsieve_core::arithmetic::{crt, factor, is_prime, moebius, primes_up_to};
use affsieve_core::densities::{check_multiplicativity, OrbitLimits};
use affsieve_core::orbit::{count_points, enumerate_points, hnf_orbit_reps, orbit_of_with_transform};
use affsieve_core::prime_matrix::{build_prime_matrix, necessity_check, ConstructOptions};
use affsieve_core::sieve::{build_sequence_variety, legendre_sift_direct, legendre_sift_moebius, sifting_primes};
use affsieve_core::{IntMatrix, NormSpec, PolynomialOnV, DEFAULT_BUDGET};
use proptest::prelude::*;

fn naive_points(m: i64, t: i64) -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    for a in -t..=t {
        for b in -t..=t {
            for c in -t..=t {
                for d in -t..=t {
                    if a * d - b * c == m {
                        out.insert(vec![a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

#[test]
fn frobenius_ball_matches_scan() {
    for m in [1i64, -3, 6] {
        let t = 7.5f64;
        let got: BTreeSet<Vec<i64>> = enumerate_points(m, 2, &NormSpec::frobenius(t), DEFAULT_BUDGET)
            .unwrap()
            .into_iter()
            .map(|x| x.flat().to_vec())
            .collect();
        let want: BTreeSet<Vec<i64>> =
            naive_points(m, 7).into_iter().filter(|x| x.iter().map(|v| (v * v) as f64).sum::<f64>() <= t * t).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn three_by_three_counts_match_scan() {
    // det 1 with entries in [-1, 1]
    let mut want = 0u64;
    for code in 0..3i64.pow(9) {
        let mut c = code;
        let mut e = [0i64; 9];
        for v in e.iter_mut() {
            *v = c % 3 - 1;
            c /= 3;
        }
        if IntMatrix::from_flat(3, &e).unwrap().det() == 1 {
            want += 1;
        }
    }
    assert_eq!(count_points(1, 3, &NormSpec::max_entry(1.0), DEFAULT_BUDGET).unwrap(), want);
}

#[test]
fn orbit_transforms_are_unimodular() {
    let dec = hnf_orbit_reps(6, 2).unwrap();
    for x in enumerate_points(6, 2, &NormSpec::max_entry(6.0), DEFAULT_BUDGET).unwrap() {
        let (k, g) = orbit_of_with_transform(&x, &dec).unwrap();
        assert_eq!(g.det(), 1);
        assert_eq!(g.checked_mul(&x).unwrap(), dec.reps[k]);
    }
}

#[test]
fn built_matrices_are_deterministic_per_seed() {
    let opts = ConstructOptions::for_dimension(3);
    for seed in [3u64, 41] {
        assert_eq!(build_prime_matrix(3, seed, &opts).unwrap(), build_prime_matrix(3, seed, &opts).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negation_preserves_the_ball(m in -6i64..=6, t in 1u32..10) {
        prop_assume!(m != 0);
        let pts: BTreeSet<Vec<i64>> = enumerate_points(m, 2, &NormSpec::max_entry(t as f64), DEFAULT_BUDGET)
            .unwrap().into_iter().map(|x| x.flat().to_vec()).collect();
        for x in &pts {
            let neg: Vec<i64> = x.iter().map(|v| -v).collect();
            prop_assert!(pts.contains(&neg));
        }
    }

    #[test]
    fn count_is_monotone_in_threshold(m in 1i64..=6, t in 1u32..15) {
        let a = count_points(m, 2, &NormSpec::max_entry(t as f64), DEFAULT_BUDGET).unwrap();
        let b = count_points(m, 2, &NormSpec::max_entry(t as f64 + 1.0), DEFAULT_BUDGET).unwrap();
        prop_assert!(a <= b);
    }

    #[test]
    fn factorization_recomposes(k in 2i64..2_000_000) {
        let f = factor(k).unwrap();
        prop_assert_eq!(f.value(), Some(k as u64));
        prop_assert!(f.primes().all(|p| is_prime(p as i64)));
    }

    #[test]
    fn moebius_is_multiplicative(a in 1u64..500, b in 1u64..500) {
        prop_assume!(num_integer::gcd(a, b) == 1);
        prop_assert_eq!(moebius(a * b), moebius(a) * moebius(b));
    }

    #[test]
    fn crt_solution_satisfies_inputs(r1 in -50i64..50, r2 in -50i64..50, i in 0usize..6, j in 0usize..6) {
        let ps = primes_up_to(20);
        prop_assume!(i != j);
        let (m1, m2) = (ps[i], ps[j]);
        let (x, m) = crt(&[(r1, m1), (r2, m2)]).unwrap();
        prop_assert_eq!(m, m1 * m2);
        prop_assert_eq!(x % m1, r1.rem_euclid(m1 as i64) as u64);
        prop_assert_eq!(x % m2, r2.rem_euclid(m2 as i64) as u64);
    }

    #[test]
    fn sift_methods_agree(m in prop::sample::select(vec![1i64, 2, 3, 5]), t in 3u32..40, z in 0.0f64..25.0) {
        let f = PolynomialOnV::entry(2, 0, 1).unwrap();
        let seq = build_sequence_variety(m, 2, &f, &NormSpec::max_entry(t as f64), DEFAULT_BUDGET).unwrap();
        let primes = sifting_primes(z, &[]);
        prop_assert_eq!(Some(legendre_sift_direct(&seq, &primes)), legendre_sift_moebius(&seq, &primes, u64::MAX));
    }

    #[test]
    fn density_multiplicativity_on_diagonal_orbits(k in 1i64..=3, pair in prop::sample::select(vec![(2u64, 3u64), (2, 5), (3, 5), (2, 7), (3, 7)])) {
        let v = IntMatrix::diag(&[1, k]).unwrap();
        let f = PolynomialOnV::entry(2, 1, 0).unwrap();
        prop_assert!(check_multiplicativity(pair.0, pair.1, &v, &f, OrbitLimits::default()).unwrap());
    }

    #[test]
    fn odd_matrices_have_determinant_divisible_by_four(e in prop::array::uniform9(0i64..8)) {
        let odd: Vec<i64> = e.iter().map(|v| 2 * v - 7).collect();
        let x = IntMatrix::from_flat(3, &odd).unwrap();
        prop_assert!(necessity_check(&x));
        prop_assert_eq!(x.det().rem_euclid(4), 0);
    }
}
