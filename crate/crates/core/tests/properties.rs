use std::sync::OnceLock;

use num::{BigInt, BigRational, One, Zero};
use proptest::prelude::*;

use primemean::multfunc::{builtin, value_at, BUILTIN_NAMES};
use primemean::primesums::cache::{decode, encode, model_hash};
use primemean::primesums::{log_geomean_bruteforce, log_geomean_identity, sums_stream, CheckpointGrid, StreamOptions};
use primemean::series::{fit_coefficients, s2_coeffs_from_d, series_exp};
use primemean::sieve::{primes_up_to, spf_build, stream_segmented, SieveConfig, SpfTable};

fn table() -> &'static SpfTable {
    static T: OnceLock<SpfTable> = OnceLock::new();
    T.get_or_init(|| spf_build(10_000_000).unwrap())
}

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-40i64..=40, 1i64..=9).prop_map(|(a, b)| rat(a, b))
}

fn model_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(BUILTIN_NAMES.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exp_inverts_formal_log(e in prop::collection::vec(rational(), 0..=12)) {
        let g = series_exp(&e).unwrap();
        // Formal log: k l_k = k g_k − Σ_{j<k} j l_j g_(k−j).
        let mut l = vec![BigRational::zero(); g.len()];
        for k in 1..g.len() {
            let mut acc = rat(k as i64, 1) * &g[k];
            for j in 1..k {
                acc -= rat(j as i64, 1) * &l[j] * &g[k - j];
            }
            l[k] = acc / rat(k as i64, 1);
        }
        prop_assert_eq!(&g[0], &BigRational::one());
        prop_assert_eq!(&l[1..], &e[..]);
    }

    #[test]
    fn s2_transform_matches_term_collection(d in prop::collection::vec(rational(), 2..=7)) {
        // Collect 1/log^i n in Σ d_(j+1)/log^j n − Σ d_j Σ_{i≥j} (i−1)!/(j−1)!/log^i n.
        let r = d.len() - 1;
        let mut want = vec![BigRational::zero(); r + 1];
        for i in 1..=r {
            want[i] += &d[i];
            for j in 1..=i {
                let ratio: i64 = (j..i).map(|m| m as i64).product();
                want[i] -= &d[j - 1] * rat(ratio, 1);
            }
        }
        prop_assert_eq!(s2_coeffs_from_d(&d).unwrap(), want.split_off(1));
    }

    #[test]
    fn fit_recovers_basis_combinations(
        coef in prop::collection::vec(-10.0f64..10.0, 1..=4),
        constant in prop::option::of(-10.0f64..10.0),
    ) {
        let order = coef.len();
        // A wide window keeps the data's own rounding below the tolerance.
        let ns: Vec<u64> = (0..12).map(|i| (1e2 * 10f64.powf(i as f64 * 13.0 / 11.0)) as u64).collect();
        let samples: Vec<(u64, f64)> = ns
            .iter()
            .map(|&n| {
                let x = 1.0 / (n as f64).ln();
                let v: f64 = coef.iter().enumerate().map(|(j, c)| c * x.powi(j as i32 + 1)).sum();
                (n, v + constant.unwrap_or(0.0))
            })
            .collect();
        let fit = fit_coefficients(&samples, order, constant.is_some()).unwrap();
        for (a, b) in fit.coefficients.iter().zip(&coef) {
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
        if let Some(c) = constant {
            prop_assert!((fit.constant.unwrap() - c).abs() <= 1e-9);
        }
        prop_assert!(fit.condition_estimate >= 1.0);
    }

    #[test]
    fn identity_matches_oracle(name in model_name(), n in 1u64..200_000) {
        let m = builtin(name).unwrap();
        let id = log_geomean_identity(&m, n, &SieveConfig::default()).unwrap();
        let bf = log_geomean_bruteforce(&m, n, table()).unwrap();
        prop_assert!((id.value - bf.value).abs() <= 1e-9 * n as f64, "{} vs {}", id.value, bf.value);
    }

    #[test]
    fn multiplicative_on_coprime_pairs(name in model_name(), a in 1u64..3_000, b in 1u64..3_000) {
        prop_assume!(num::integer::gcd(a, b) == 1);
        let m = builtin(name).unwrap();
        let t = table();
        let ab = value_at(&m, a * b, t).value;
        let prod = value_at(&m, a, t).value * value_at(&m, b, t).value;
        prop_assert!((ab / prod - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn segmented_stream_equals_sieve(hi in 2u64..50_000, seg in 2u64..3000) {
        let cfg = SieveConfig::default();
        let got: Vec<u64> = stream_segmented(2, hi, seg, &cfg).unwrap().collect();
        prop_assert_eq!(got, primes_up_to(hi));
    }

    #[test]
    fn stream_rows_match_identity_and_survive_cache(
        name in model_name(),
        pts in prop::collection::btree_set(2u64..300_000, 1..6),
    ) {
        let points: Vec<u64> = pts.into_iter().collect();
        let m = builtin(name).unwrap();
        let grid = CheckpointGrid::new(points).unwrap();
        let opts = StreamOptions { with_u: false, ..StreamOptions::default() };
        let r = sums_stream(&m, &grid, &opts).unwrap();
        for row in &r.rows {
            let id = log_geomean_identity(&m, row.n, &SieveConfig::default()).unwrap().value;
            prop_assert!((row.n_log_g.get() - id).abs() <= 1e-12 * row.n as f64);
        }
        let bytes = encode(&r, model_hash(&m)).unwrap();
        prop_assert_eq!(decode(&bytes, &m).unwrap(), r);
    }
}
