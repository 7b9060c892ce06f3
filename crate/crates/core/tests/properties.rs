use bianchi_core::arith::{factorize, kronecker, QuadField};
use bianchi_core::basechange::{BaseChangeEngine, DPartProvider};
use bianchi_core::dim_engine::{dim_cusp_gamma0, dim_new_gamma0, trace_form, WeightSpec};
use bianchi_core::invariants::{gamma0_new_invariants, q, TypeInvariants};
use bianchi_core::nongenuine::{RowMultiplicities, ScTable};
use bianchi_core::report::{self, DatasetRow, Format, Level};
use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;

fn w(k: u32) -> WeightSpec {
    WeightSpec::new(k).unwrap()
}

fn inv_strategy() -> impl Strategy<Value = TypeInvariants> {
    prop::array::uniform5(-1000i64..1000).prop_map(TypeInvariants::from_ints)
}

proptest! {
    #[test]
    fn kronecker_is_multiplicative(a in -500i64..500, b in -500i64..500, n in 1i64..400) {
        let ab = kronecker(a * b, n).unwrap();
        prop_assert_eq!(ab, kronecker(a, n).unwrap() * kronecker(b, n).unwrap());
    }

    #[test]
    fn factorization_round_trips(n in 1u64..1_000_000_000_000) {
        let f = factorize(n).unwrap();
        prop_assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
        prop_assert!(f.windows(2).all(|x| x[0].0 < x[1].0));
    }

    #[test]
    fn new_invariants_multiply_over_coprime_levels(m in 1u64..300, n in 1u64..300) {
        prop_assume!(m.gcd(&n) == 1);
        let lhs = gamma0_new_invariants(m * n).unwrap();
        prop_assert_eq!(lhs, &gamma0_new_invariants(m).unwrap() * &gamma0_new_invariants(n).unwrap());
    }

    #[test]
    fn trace_form_is_linear(a in inv_strategy(), b in inv_strategy(), k in 2u32..40, s in -20i64..20) {
        let sum = &a + &b;
        prop_assert_eq!(trace_form(&sum, w(k)), trace_form(&a, w(k)) + trace_form(&b, w(k)));
        prop_assert_eq!(trace_form(&a.scale(&q(s)), w(k)), trace_form(&a, w(k)) * q(s));
    }

    #[test]
    fn old_new_decomposition(n in 1u64..400, half_k in 1u32..12) {
        // dim S_k(N) = sum over M | N of d(N/M) dim S_k^new(M).
        let k = w(2 * half_k);
        let mut total = BigInt::from(0);
        for m in (1..=n).filter(|m| n % m == 0) {
            let tau = (1..=n / m).filter(|d| (n / m) % d == 0).count();
            total += dim_new_gamma0(m, k).unwrap() * tau;
        }
        prop_assert_eq!(total, dim_cusp_gamma0(n, k).unwrap());
    }

    #[test]
    fn conjugate_levels_get_identical_ng(k in 2u32..12, full in 0u32..50) {
        // [49, 15, 1] and [49, 33, 1] are conjugate ideals over Q(sqrt(-19)).
        let rows = vec![
            DatasetRow { disc: -19, level: Level::new(49, 15, 1).unwrap(), weight: k, full_dim: full.into() },
            DatasetRow { disc: -19, level: Level::new(49, 33, 1).unwrap(), weight: k, full_dim: full.into() },
        ];
        let engine = BaseChangeEngine::new(DPartProvider::builtin());
        let t = report::genuine_report(&rows, &engine, ScTable::builtin(), RowMultiplicities::builtin()).unwrap();
        prop_assert_eq!(&t[0].ng, &t[1].ng);
        prop_assert_eq!(t[0].ng.clone(), Some(BigInt::from(0)));
    }

    #[test]
    fn report_round_trip(picks in prop::collection::btree_set((1u64..40, 2u32..10), 0..40), extra in 0u32..4) {
        let field = QuadField::new(-19).unwrap();
        let engine = BaseChangeEngine::new(DPartProvider::builtin());
        let rows: Vec<DatasetRow> = picks
            .into_iter()
            .filter(|(n, _)| n % 19 != 0)
            .map(|(n, k)| DatasetRow {
                disc: field.disc,
                level: Level::new(n * n, 0, n).unwrap(),
                weight: k,
                full_dim: engine
                    .dim_basechange(&field, n, w(k))
                    .map(|v| v + extra)
                    .unwrap_or_else(|_| BigInt::from(extra)),
            })
            .collect();
        let t = report::genuine_report(&rows, &engine, ScTable::builtin(), RowMultiplicities::builtin()).unwrap();
        let csv = report::emit(&t, Format::Csv);
        prop_assert_eq!(report::ingest_report_str(&csv).unwrap(), t.clone());
        prop_assert_eq!(report::ingest_str(&csv).unwrap().len(), t.len());
        for b in &t {
            if let Some(g) = &b.genuine {
                prop_assert!(*g >= BigInt::from(0));
            }
        }
    }

    #[test]
    fn dpart_table_round_trips(disc_idx in 0usize..20) {
        let provider = DPartProvider::builtin();
        let discs = provider.discriminants();
        let disc = discs[disc_idx % discs.len()];
        let mut sub = provider.clone();
        sub.retain(|d, _| d == disc);
        prop_assert_eq!(DPartProvider::parse(&sub.to_table_string()).unwrap(), sub);
    }
}
