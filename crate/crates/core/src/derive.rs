//! Regenerates the shipped constant tables from the classical oracles by exact
//! linear fitting, and reports any disagreement with the shipped data.

use crate::arith::{is_prime, kronecker, QuadField};
use crate::basechange::{DPartEntry, DPartProvider, Parity};
use crate::dim_engine::oracle::{oracle_dim_gamma0_chi, oracle_dim_gamma1_prime};
use crate::dim_engine::{trace_form, EllipticConstants, WeightSpec};
use crate::error::{Error, Result};
use crate::invariants::{gamma0_invariants, q, q_big, q_frac, TypeInvariants, Q};
use crate::linsolve::{solve_exact, ExactFit};
use crate::nongenuine::{derived_p2_rows, RowMultiplicities, ScConstants, ScTable};
use num_bigint::BigInt;
use num_traits::Signed;

/// Weights used by every fit.
pub const FIT_WEIGHTS: std::ops::RangeInclusive<u32> = 2..=25;

fn w(k: u32) -> WeightSpec {
    WeightSpec::new(k).expect("fit weights are >= 2")
}

fn trace_row(k: u32, c: &EllipticConstants) -> Vec<Q> {
    vec![
        q_frac(k as i64 - 1, 12),
        q_frac(-1, 2),
        c.eps(k).clone(),
        c.mu(k).clone(),
        if k == 2 { q(1) } else { q(0) },
    ]
}

fn inv_of(fit: &ExactFit) -> TypeInvariants {
    TypeInvariants::from_components([0, 1, 2, 3, 4].map(|i| fit.solution[i].clone()))
}

#[derive(Debug, Clone)]
pub struct EllipticFit {
    pub constants: EllipticConstants,
    pub fit: ExactFit,
}

/// Fits epsilon_k and mu_k from oracle dimensions of S_k(Gamma_0(N)), N <= `max_level`,
/// at even weights. Unidentifiable coordinates (mu at odd residues) are pinned to 0.
pub fn fit_elliptic_constants(max_level: u64) -> Result<EllipticFit> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for n in 1..=max_level {
        let inv = gamma0_invariants(n)?;
        for k in FIT_WEIGHTS.filter(|k| k % 2 == 0) {
            let known = q_frac(k as i64 - 1, 12) * &inv.i1 - q_frac(1, 2) * &inv.i2
                + if k == 2 { inv.i5.clone() } else { q(0) };
            let mut row = vec![q(0); 7];
            row[(k % 3) as usize] = inv.i3.clone();
            row[3 + (k % 4) as usize] = inv.i4.clone();
            rows.push(row);
            rhs.push(q_big(oracle_dim_gamma0_chi(n, 1, w(k))?) - known);
        }
    }
    let fit = solve_exact(&rows, &rhs, &[]);
    let s = &fit.solution;
    let constants = EllipticConstants {
        eps: [s[0].clone(), s[1].clone(), s[2].clone()],
        mu: [s[3].clone(), s[4].clone(), s[5].clone(), s[6].clone()],
    };
    Ok(EllipticFit { constants, fit })
}

fn fit_invariants(samples: &[(u32, Q)], pins: &[(usize, Q)]) -> ExactFit {
    let c = EllipticConstants::standard();
    let rows: Vec<Vec<Q>> = samples.iter().map(|(k, _)| trace_row(*k, &c)).collect();
    let rhs: Vec<Q> = samples.iter().map(|(_, v)| v.clone()).collect();
    solve_exact(&rows, &rhs, pins)
}

/// Everything fitted at one ramified prime p (D = -p).
#[derive(Debug, Clone)]
pub struct DPartFit {
    pub p: u64,
    pub tau_p: ExactFit,
    pub sc_total: ExactFit,
    pub principal_series: ExactFit,
    /// Invariants of one supercuspidal class (the distinguished one), assembled from
    /// the per-class split of `sc_total`.
    pub tau_p2: TypeInvariants,
    /// (i3, i4) traces of every class, in class order.
    pub class_traces: Vec<(i64, i64)>,
}

impl DPartFit {
    pub fn sc_constants(&self) -> ScConstants {
        ScConstants { p: self.p, sc3: self.tau_p2.i3.clone(), sc4: self.tau_p2.i4.clone() }
    }

    /// Trace sums over classes agree with the fitted total.
    pub fn class_audit(&self) -> bool {
        let (s3, s4) = self.class_traces.iter().fold((0, 0), |(a, b), (x, y)| (a + x, b + y));
        self.sc_total.solution[2] == q(s3) && self.sc_total.solution[3] == q(s4)
    }

    pub fn all_exact(&self) -> bool {
        self.tau_p.is_exact() && self.sc_total.is_exact() && self.principal_series.is_exact()
    }
}

/// Traces at the order-3 and order-2 elliptic elements for supercuspidal class j
/// (1 <= j < (p+1)/2), from characters of the norm-one torus of order p + 1.
pub fn class_trace(p: u64, j: u64) -> (i64, i64) {
    let t4 = if j % 2 == 0 { -2 } else { 2 };
    let t3 = if (p + 1) % 3 != 0 {
        0
    } else if j % 3 == 0 {
        -2
    } else {
        1
    };
    (t3, t4)
}

fn check_ramified_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p % 4 != 3 || p < 7 {
        return Err(Error::InvalidArgument(format!("d-part fitting needs a prime p = 3 mod 4, p >= 7; got {p}")));
    }
    Ok(())
}

pub fn fit_dpart(p: u64) -> Result<DPartFit> {
    check_ramified_prime(p)?;
    let o = |n: u64, d: u64, k: u32| -> Result<Q> { Ok(q_big(oracle_dim_gamma0_chi(n, d, w(k))?)) };

    let mut odd = Vec::new();
    for k in FIT_WEIGHTS.filter(|k| k % 2 == 1) {
        odd.push((k, o(p, p, k)?));
    }
    let tau_p = fit_invariants(&odd, &[(3, q(0)), (4, q(0))]);

    let mut sc = Vec::new();
    let mut ps = Vec::new();
    for k in FIT_WEIGHTS.filter(|k| k % 2 == 0) {
        let (o1, op, op2) = (o(1, 1, k)?, o(p, 1, k)?, o(p * p, 1, k)?);
        let g1 = q_big(oracle_dim_gamma1_prime(p, w(k))?);
        let new_p2 = &op2 - q(2) * &op + &o1;
        let new_p = &op - q(2) * &o1;
        let principal = g1 - &op;
        sc.push((k, new_p2 - &o1 - new_p - &principal));
        ps.push((k, principal));
    }
    let sc_total = fit_invariants(&sc, &[]);
    let principal_series = fit_invariants(&ps, &[]);

    let classes = (p - 1) / 2;
    let class_traces: Vec<(i64, i64)> = (1..=classes).map(|j| class_trace(p, j)).collect();
    let special = class_trace(p, (p + 1) / 4);
    let per_class = q_frac(1, classes as i64);
    let s = &sc_total.solution;
    let tau_p2 = TypeInvariants::new(
        &s[0] * &per_class,
        &s[1] * &per_class,
        q(special.0),
        q(special.1),
        &s[4] * &per_class,
    );
    Ok(DPartFit { p, tau_p, sc_total, principal_series, tau_p2, class_traces })
}

/// Fitted tau^p as an invariant list.
pub fn tau_p_invariants(fit: &DPartFit) -> TypeInvariants {
    inv_of(&fit.tau_p)
}

/// Ramified primes covered by the shipped tables.
pub fn shipped_primes() -> Vec<u64> {
    (7..200).filter(|&p| p % 4 == 3 && is_prime(p)).collect()
}

pub struct GeneratedTables {
    pub dpart: DPartProvider,
    pub sc: ScTable,
    pub fits: Vec<DPartFit>,
}

pub fn generate_tables(primes: &[u64]) -> Result<GeneratedTables> {
    let mut dpart = DPartProvider::new();
    let mut sc = ScTable::new();
    let mut fits = Vec::new();
    for &p in primes {
        let fit = fit_dpart(p)?;
        if !fit.all_exact() || !fit.class_audit() {
            return Err(Error::InvalidArgument(format!("fit at p = {p} is not exact")));
        }
        let disc = -(p as i64);
        dpart.insert(disc, 1, DPartEntry { inv: TypeInvariants::one(), parity: Parity::Even });
        dpart.insert(disc, p, DPartEntry { inv: tau_p_invariants(&fit), parity: Parity::Odd });
        dpart.insert(disc, p * p, DPartEntry { inv: fit.tau_p2.clone(), parity: Parity::Even });
        sc.insert(fit.sc_constants());
        fits.push(fit);
    }
    Ok(GeneratedTables { dpart, sc, fits })
}

/// Keys present in either table whose values differ.
pub fn diff_dpart(a: &DPartProvider, b: &DPartProvider) -> Vec<(i64, u64)> {
    let mut keys: Vec<(i64, u64)> = a.iter().chain(b.iter()).map(|(k, _)| *k).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|&(disc, d)| a.get(disc, d) != b.get(disc, d)).collect()
}

pub fn diff_sc(a: &ScTable, b: &ScTable) -> Vec<u64> {
    let mut keys: Vec<u64> = a.iter().chain(b.iter()).map(|c| c.p).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|&p| a.get(p).ok() != b.get(p).ok()).collect()
}

/// Closed forms for the fitted supercuspidal traces.
pub fn sc_closed_form(p: u64) -> (i64, i64) {
    let l3 = kronecker(-3, p as i64).expect("nonzero") as i64;
    let sign = if ((p + 1) / 4) % 2 == 0 { 1 } else { -1 };
    (l3 - 1, -2 * sign)
}

/// Multiplicity vectors from `candidates`^4 for which the level-p^2 assembly is a
/// non-negative integer for every listed prime (class number one) and weight, and the
/// first row has multiplicity one.
pub fn scan_multiplicities(candidates: &[Q], primes: &[u64], weights: &[u32], sc: &ScTable) -> Result<Vec<[Q; 4]>> {
    let mut values: Vec<Vec<[Q; 4]>> = Vec::new();
    for &p in primes {
        let field = QuadField::new(-(p as i64))?;
        let consts = sc.get(p)?;
        let rows = derived_p2_rows(p, field.class_number, consts);
        for &k in weights {
            let kk = w(k);
            values.push(vec![rows
                .iter()
                .map(|r| {
                    let active = r.kind.parity().is_none_or(|par| par == Parity::of_weight(kk));
                    if active {
                        trace_form(&r.inv, kk)
                    } else {
                        q(0)
                    }
                })
                .collect::<Vec<_>>()
                .try_into()
                .expect("four rows")]);
        }
    }
    let mut out = Vec::new();
    for a in candidates {
        for b in candidates {
            for c in candidates {
                for d in candidates {
                    let m = [a.clone(), b.clone(), c.clone(), d.clone()];
                    if m[0] != q(1) {
                        continue;
                    }
                    let ok = values.iter().flatten().all(|v| {
                        let total: Q = (0..4).fold(q(0), |acc, i| acc + &m[i] * &v[i]);
                        total.is_integer() && !total.is_negative()
                    });
                    if ok {
                        out.push(m);
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn shipped_multiplicities_admissible(primes: &[u64], weights: &[u32]) -> Result<bool> {
    let m = RowMultiplicities::builtin();
    let shipped: [Q; 4] = crate::nongenuine::PSquaredRowKind::ALL.map(|k| m.get(k));
    let admissible = scan_multiplicities(&[q(0), q_frac(1, 2), q(1), q(2)], primes, weights, ScTable::builtin())?;
    Ok(admissible.contains(&shipped))
}

/// Difference between oracle and trace-form dimensions at (N, omega_d), for audits.
pub fn oracle_residual(inv: &TypeInvariants, n: u64, d: u64, k: u32) -> Result<BigInt> {
    let v = trace_form(inv, w(k));
    let o = q_big(oracle_dim_gamma0_chi(n, d, w(k))?);
    let r = v - o;
    if !r.is_integer() {
        return Ok(BigInt::from(i64::MAX));
    }
    Ok(r.to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::sigma_prime_power_new;

    #[test]
    fn elliptic_constants_reproduced() {
        let f = fit_elliptic_constants(40).unwrap();
        assert!(f.fit.is_exact());
        assert_eq!(f.constants, EllipticConstants::standard());
        assert_eq!(f.fit.free, vec![4, 6]);
    }

    #[test]
    fn dpart_at_seven() {
        let f = fit_dpart(7).unwrap();
        assert!(f.all_exact());
        assert!(f.class_audit());
        assert_eq!(tau_p_invariants(&f), TypeInvariants::from_ints([8, 2, 2, 0, 0]));
        assert_eq!(f.tau_p2, TypeInvariants::from_ints([6, 0, 0, -2, 0]));
        assert_eq!(f.sc_total.solution[0], q(18));
        assert_eq!(f.principal_series.solution[1], q(4));
    }

    #[test]
    fn closed_forms_hold() {
        for p in [7u64, 11, 19, 23, 31, 43] {
            let f = fit_dpart(p).unwrap();
            assert!(f.all_exact(), "{p}");
            let (s3, s4) = sc_closed_form(p);
            assert_eq!(f.tau_p2.i3, q(s3), "{p}");
            assert_eq!(f.tau_p2.i4, q(s4), "{p}");
            let l3 = kronecker(-3, p as i64).unwrap() as i64;
            assert_eq!(tau_p_invariants(&f), TypeInvariants::from_ints([p as i64 + 1, 2, 1 + l3, 0, 0]));
        }
    }

    #[test]
    fn p2_new_space_decomposes() {
        // supercuspidal total + principal series + tau^1 + tau^p-new = level p^2 new space.
        let p = 11;
        let f = fit_dpart(p).unwrap();
        let sc = inv_of(&f.sc_total);
        let ps = inv_of(&f.principal_series);
        let sum = &(&(&sc + &ps) + &TypeInvariants::one()) + &sigma_prime_power_new(p, 1).unwrap();
        assert_eq!(sum, sigma_prime_power_new(p, 2).unwrap());
    }

    #[test]
    fn shipped_tables_match_regeneration() {
        let primes = shipped_primes();
        let g = generate_tables(&primes[..6]).unwrap();
        let mut shipped = DPartProvider::builtin().clone();
        let keep: Vec<i64> = primes[..6].iter().map(|&p| -(p as i64)).collect();
        shipped.retain(|disc, _| keep.contains(&disc));
        assert!(diff_dpart(&g.dpart, &shipped).is_empty());
        for p in &primes[..6] {
            assert_eq!(g.sc.get(*p).unwrap(), ScTable::builtin().get(*p).unwrap());
        }
    }

    #[test]
    fn rejects_bad_primes() {
        assert!(fit_dpart(5).is_err());
        assert!(fit_dpart(13).is_err());
        assert!(fit_dpart(15).is_err());
    }

    #[test]
    fn multiplicity_scan_keeps_shipped_choice() {
        assert!(shipped_multiplicities_admissible(&[7, 11, 19, 43], &(2..=12).collect::<Vec<_>>()).unwrap());
    }
}
