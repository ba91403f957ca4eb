use std::sync::OnceLock;

use super::*;
use crate::multfunc::{builtin, BUILTIN_NAMES};
use crate::sieve::spf_build;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn table() -> &'static SpfTable {
    static T: OnceLock<SpfTable> = OnceLock::new();
    T.get_or_init(|| spf_build(100_000).unwrap())
}

fn stream_at(name: &str, points: Vec<u64>) -> SumsReport {
    let m = builtin(name).unwrap();
    sums_stream(&m, &CheckpointGrid::new(points).unwrap(), &StreamOptions::default()).unwrap()
}

#[test]
fn kappa_at_ten() {
    let r = stream_at("kappa", vec![10]);
    let row = &r.rows[0];
    assert_eq!(row.s1, 11);
    assert!(close(row.s2.get(), 151_200f64.ln(), 1e-12));
    assert_eq!(row.s3.get(), 0.0);
    assert!(close(row.f1.get(), 1.0 / 3.0 + 3.0 / 7.0, 1e-15));
    assert!(close(
        row.f2.get(),
        1.0 / 3.0 + 3.0 / 7.0 + 0.5 + 0.25 + 1.0 / 9.0,
        1e-15
    ));
    assert!(close(row.r_sum.get(), 3f64.ln() / 3.0 + 3.0 * 7f64.ln() / 7.0, 1e-14));
    assert!(close(row.m_of_x.get(), 1.312652, 1e-6));
    assert!(close(row.u_of_x.unwrap().get(), 22.0 / 3.0, 1e-14));
    assert!(close(row.n_log_g.get(), 151_200f64.ln(), 1e-12));
}

#[test]
fn identity_examples() {
    let cfg = SieveConfig::default();
    let k = builtin("kappa").unwrap();
    assert!(close(
        log_geomean_identity(&k, 10, &cfg).unwrap().value,
        151_200f64.ln(),
        1e-12
    ));
    let phi = builtin("euler_phi").unwrap();
    assert!(close(
        log_geomean_identity(&phi, 4, &cfg).unwrap().value,
        4f64.ln(),
        1e-15
    ));
    for name in BUILTIN_NAMES {
        let m = builtin(name).unwrap();
        assert_eq!(log_geomean_identity(&m, 1, &cfg).unwrap().value, 0.0);
    }
    assert!(log_geomean_identity(&k, 0, &cfg).is_err());
}

#[test]
fn bruteforce_examples() {
    let t = table();
    let f = |name: &str, n| log_geomean_bruteforce(&builtin(name).unwrap(), n, t).unwrap().value;
    assert!(close(f("kappa", 10), 151_200f64.ln(), 1e-12));
    assert!(close(f("divisor_d", 4), 12f64.ln(), 1e-15));
    // 2^ω(k) for k = 1..6 is 1,2,2,2,2,4, product 2^6.
    assert!(close(f("two_omega", 6), 6.0 * 2f64.ln(), 1e-15));
    let small = spf_build(50).unwrap();
    assert!(matches!(
        log_geomean_bruteforce(&builtin("kappa").unwrap(), 51, &small),
        Err(Error::SpfCap { .. })
    ));
}

#[test]
fn small_sum_examples() {
    let t = table();
    assert_eq!(omega_summatory(10, t).unwrap(), 11);
    assert_eq!(omega_summatory(1, t).unwrap(), 0);
    assert!(close(u_of_x(10, t).unwrap().value, 22.0 / 3.0, 1e-14));
    assert_eq!(u_of_x(2, t).unwrap().value, 1.0);
    assert!(close(u_of_x(4, t).unwrap().value, 2.5, 1e-15));
    assert!(u_of_x(1, t).is_err());
    assert!(close(r_sum(10).unwrap().value, 1.200165, 1e-6));
    assert_eq!(r_sum(2).unwrap().value, 0.0);
    assert!(close(mertens_m_of_x(10).unwrap().value, 1.312652, 1e-6));
    assert_eq!(mertens_m_of_x(2).unwrap().value, 2f64.ln() / 2.0);
}

#[test]
fn r_sum_hundred_trend() {
    // Direct double loop as the oracle.
    let direct: f64 = (2..=100u64)
        .filter(|&p| (2..p).all(|d| p % d != 0))
        .map(|p| (100 % p) as f64 / p as f64 * (p as f64).ln())
        .sum();
    let r = r_sum(100).unwrap().value;
    assert!(close(r, direct, 1e-12));
    let gamma = 0.577_215_664_901_532_9;
    assert!((r / 100.0 - (1.0 - gamma)).abs() < 0.2);
}

#[test]
fn mertens_bound_examples() {
    let e = -1.332_582_275_733_220_9;
    let c = rs_check_value(319, mertens_m_of_x(319).unwrap().value, e);
    assert!(c.left_holds && c.right_holds == Some(true));
    assert!(rs_inequality_check(1_000_000, e).unwrap());
    let c = rs_check_value(10, mertens_m_of_x(10).unwrap().value, e);
    assert!(c.left_holds && c.right_holds.is_none());
}

#[test]
fn omega_sum_equals_s1() {
    let t = table();
    let grid: Vec<u64> = vec![2, 30, 97, 1000, 4096, 65_536, 100_000];
    let r = stream_at("kappa", grid.clone());
    for (row, &n) in r.rows.iter().zip(&grid) {
        assert_eq!(omega_summatory(n, t).unwrap(), row.s1, "n={n}");
    }
    let s1_30: u64 = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29].iter().map(|p| 30 / p).sum();
    assert_eq!(omega_summatory(30, t).unwrap(), s1_30);
}

#[test]
fn kernel_log_sum_equals_s2() {
    let t = table();
    let k = builtin("kappa").unwrap();
    let prefix = log_geomean_bruteforce_prefix(&k, 100_000, t).unwrap();
    let grid: Vec<u64> = vec![5, 64, 999, 10_007, 54_321, 100_000];
    let r = stream_at("kappa", grid.clone());
    for (row, &n) in r.rows.iter().zip(&grid) {
        let tol = 1e-12 * prefix[n as usize].abs() + row.err_bound;
        assert!(close(prefix[n as usize], row.s2.get(), tol), "n={n}");
    }
}

#[test]
fn identity_matches_bruteforce_up_to_5000() {
    let t = table();
    let primes = primes_up_to(5000);
    for name in BUILTIN_NAMES {
        let m = builtin(name).unwrap();
        let prefix = log_geomean_bruteforce_prefix(&m, 5000, t).unwrap();
        for n in 1..=5000u64 {
            let id = log_geomean_identity_with(&m, n, &primes).unwrap().value;
            let tol = 1e-9 * (n as f64).max(1.0);
            assert!(
                close(id, prefix[n as usize], tol),
                "{name} n={n}: {id} vs {}",
                prefix[n as usize]
            );
        }
    }
}

#[test]
fn stream_matches_identity_and_decomposition() {
    let grid: Vec<u64> = vec![2, 3, 10, 100, 1234, 50_000, 200_000];
    let cfg = SieveConfig::default();
    for name in BUILTIN_NAMES {
        let m = builtin(name).unwrap();
        let r = stream_at(name, grid.clone());
        for row in &r.rows {
            let id = log_geomean_identity(&m, row.n, &cfg).unwrap();
            let n = row.n as f64;
            assert!(close(row.n_log_g.get(), id.value, 1e-12 * n), "{name} n={}", row.n);
            if m.strongly_multiplicative {
                assert!(close(row.decomposition(&m), id.value, 1e-10 * n), "{name} n={}", row.n);
            }
            assert!(close(row.decomposition(&m), row.prime_part.get(), 1e-10 * n));
        }
    }
}

#[test]
fn s2_equals_n_m_minus_r() {
    let r = stream_at("kappa", vec![2, 10, 1000, 77_777, 300_000]);
    for row in &r.rows {
        let n = row.n as f64;
        let lhs = row.s2.get();
        let rhs = n * row.m_of_x.get() - row.r_sum.get();
        assert!(close(lhs, rhs, 1e-13 * n * n.ln().max(1.0)), "n={}", row.n);
    }
}

#[test]
fn f2_minus_f1_bounded_by_prime_power_count() {
    let grid: Vec<u64> = (1..=40).map(|i| i * i * 97 + 2).collect();
    let r = stream_at("kappa", grid.clone());
    for row in &r.rows {
        let count = primes_up_to(isqrt_u(row.n))
            .iter()
            .map(|&p| {
                let mut c = 0;
                let mut pa = p * p;
                while pa <= row.n {
                    c += 1;
                    pa *= p;
                }
                c
            })
            .sum::<u64>() as f64;
        let diff = row.f2.get() - row.f1.get();
        assert!(diff >= 0.0 && diff <= count, "n={}", row.n);
    }
}

fn isqrt_u(n: u64) -> u64 {
    crate::sieve::isqrt(n)
}

#[test]
fn checkpoints_are_monotone() {
    let grid = CheckpointGrid::log_spaced(2, 300_000, 40).unwrap();
    let r = sums_stream(&builtin("sigma").unwrap(), &grid, &StreamOptions::default()).unwrap();
    for w in r.rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(a.s1 <= b.s1);
        assert!(a.s2.get() <= b.s2.get());
        assert!(a.m_of_x.get() <= b.m_of_x.get());
        assert!(a.u_of_x.unwrap().get() <= b.u_of_x.unwrap().get());
    }
}

#[test]
fn f2_is_not_monotone() {
    // {3/2} + {3/3} = 1/2, but {4/2} + {4/3} + {4/4} = 1/3.
    let r = stream_at("kappa", vec![3, 4]);
    assert!(close(r.rows[0].f2.get(), 0.5, 1e-15));
    assert!(close(r.rows[1].f2.get(), 1.0 / 3.0, 1e-15));
}

#[test]
fn stream_u_matches_table_u() {
    let t = table();
    let grid: Vec<u64> = vec![2, 3, 4, 10, 1024, 3000, 99_999, 100_000];
    let m = builtin("kappa").unwrap();
    let opts = StreamOptions {
        sieve: SieveConfig {
            segment_size: 1000,
            ..SieveConfig::default()
        },
        ..StreamOptions::default()
    };
    let r = sums_stream(&m, &CheckpointGrid::new(grid).unwrap(), &opts).unwrap();
    for row in &r.rows {
        let u = u_of_x(row.n, t).unwrap();
        assert!(close(row.u_of_x.unwrap().get(), u.value, 1e-10), "n={}", row.n);
    }
}

#[test]
fn segment_size_does_not_change_values_beyond_rounding() {
    let grid = CheckpointGrid::new(vec![1000, 123_456, 400_000]).unwrap();
    let m = builtin("euler_phi").unwrap();
    let mut opts = StreamOptions::default();
    let a = sums_stream(&m, &grid, &opts).unwrap();
    opts.sieve.segment_size = 4096;
    let b = sums_stream(&m, &grid, &opts).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.s1, y.s1);
        assert!(close(x.n_log_g.get(), y.n_log_g.get(), 1e-12 * x.n as f64));
        assert!(close(x.u_of_x.unwrap().get(), y.u_of_x.unwrap().get(), 1e-9));
    }
}

#[test]
fn parallel_run_is_bit_identical() {
    let grid = CheckpointGrid::log_spaced(10, 2_000_000, 12).unwrap();
    let m = builtin("jordan_2").unwrap();
    let mut opts = StreamOptions {
        sieve: SieveConfig {
            segment_size: 1 << 16,
            ..SieveConfig::default()
        },
        ..StreamOptions::default()
    };
    let seq = sums_stream(&m, &grid, &opts).unwrap();
    opts.parallel = true;
    let par = sums_stream(&m, &grid, &opts).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn grid_beyond_sieve_bound_rejected() {
    let opts = StreamOptions {
        sieve: SieveConfig {
            max_bound: 1000,
            ..SieveConfig::default()
        },
        ..StreamOptions::default()
    };
    let grid = CheckpointGrid::new(vec![10, 1001]).unwrap();
    assert!(matches!(
        sums_stream(&builtin("kappa").unwrap(), &grid, &opts),
        Err(Error::InvalidGrid(_))
    ));
}

#[test]
fn mertens_batch_matches_direct() {
    let xs = [1u64, 2, 10, 319, 10_000, 10_000, 65_537];
    let batch = mertens_m_batch(&xs, &SieveConfig::default()).unwrap();
    assert_eq!(batch[0], 0.0);
    for (&x, &v) in xs.iter().zip(&batch).skip(1) {
        assert!(close(v, mertens_m_of_x(x).unwrap().value, 1e-12));
    }
    assert!(mertens_m_batch(&[5, 3], &SieveConfig::default()).is_err());
}
