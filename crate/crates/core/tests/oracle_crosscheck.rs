//! Base-change summands against dimensions computed by the independent oracle.

use bianchi_core::arith::{factorize, is_squarefree, QuadField};
use bianchi_core::basechange::{BaseChangeEngine, DPartProvider};
use bianchi_core::derive::class_trace;
use bianchi_core::dim_engine::oracle::oracle_dim_gamma0_chi;
use bianchi_core::dim_engine::{dim_from_invariants, WeightSpec};
use bianchi_core::invariants::{gamma0_new_invariants, q, TypeInvariants};
use bianchi_core::nongenuine::{dim_nongenuine_ramified_p, ScTable};
use num_bigint::BigInt;

fn w(k: u32) -> WeightSpec {
    WeightSpec::new(k).unwrap()
}

/// Newspace dimension at the N-part: sum over M | N of beta(N/M) * oracle(M * extra).
fn oracle_new(n: u64, extra: u64, d: u64, k: u32) -> BigInt {
    let mut total = BigInt::from(0);
    for m in (1..=n).filter(|m| n % m == 0) {
        let beta: i64 = factorize(n / m).unwrap().iter().map(|_| -2i64).product();
        total += oracle_dim_gamma0_chi(m * extra, d, w(k)).unwrap() * beta;
    }
    total
}

#[test]
fn trivial_and_odd_character_terms_match_oracle() {
    let engine = BaseChangeEngine::new(DPartProvider::builtin());
    for disc in [-7i64, -11, -19, -23, -43] {
        let field = QuadField::new(disc).unwrap();
        let p = field.abs_disc();
        for n in (1..=40u64).filter(|&n| is_squarefree(n).unwrap() && n % p != 0) {
            for k in 2..=16 {
                let got = engine.sc_new_space_dim(&field, n, if k % 2 == 0 { 1 } else { p }, w(k)).unwrap();
                let want = if k % 2 == 0 { oracle_new(n, 1, 1, k) } else { oracle_new(n, p, p, k) };
                assert_eq!(got, want, "D={disc} N={n} k={k}");
            }
        }
    }
}

#[test]
fn supercuspidal_classes_sum_to_oracle_total() {
    // Summing the (p-1)/2 class dimensions at level p^2 recovers the oracle's
    // supercuspidal total computed from Gamma_0 and Gamma_1 dimensions.
    for p in [7u64, 11, 19, 23] {
        let sc = ScTable::builtin().get(p).unwrap();
        let tau = DPartProvider::builtin().get(-(p as i64), p * p).unwrap().inv.clone();
        assert_eq!((tau.i3.clone(), tau.i4.clone()), (sc.sc3.clone(), sc.sc4.clone()));
        for k in (2..=20).step_by(2) {
            let mut classes = BigInt::from(0);
            for j in 1..=(p - 1) / 2 {
                let (t3, t4) = class_trace(p, j);
                let inv = TypeInvariants::new(tau.i1.clone(), tau.i2.clone(), q(t3), q(t4), tau.i5.clone());
                classes += dim_from_invariants(&inv, w(k)).unwrap();
            }
            let o = |n: u64| oracle_dim_gamma0_chi(n, 1, w(k)).unwrap();
            let g1 = bianchi_core::dim_engine::oracle::oracle_dim_gamma1_prime(p, w(k)).unwrap();
            let new_p2 = o(p * p) - 2 * o(p) + o(1);
            let new_p = o(p) - 2 * o(1);
            let want = new_p2 - o(1) - new_p - (g1 - o(p));
            assert_eq!(classes, want, "p={p} k={k}");
        }
    }
}

#[test]
fn level_p_matches_oracle_newspace() {
    for disc in [-7i64, -11, -19, -43, -67, -163] {
        let field = QuadField::new(disc).unwrap();
        let p = field.abs_disc();
        for k in 2..=20 {
            let got = dim_nongenuine_ramified_p(&field, w(k)).unwrap();
            let want = if k % 2 == 0 { oracle_new(p, 1, 1, k) } else { BigInt::from(0) };
            assert_eq!(got, want, "D={disc} k={k}");
            if k % 2 == 0 {
                assert_eq!(dim_from_invariants(&gamma0_new_invariants(p).unwrap(), w(k)).unwrap(), want);
            }
        }
    }
}
