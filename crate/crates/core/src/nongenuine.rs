//! Non-genuine dimensions: square-free coprime levels and the ramified levels p, p^2.

use crate::arith::{kronecker, QuadField};
use crate::basechange::{BaseChangeEngine, Parity};
use crate::dim_engine::{dim_new_gamma0, to_dimension, trace_form, WeightSpec};
use crate::error::{Error, Hypothesis, Result};
use crate::invariants::{fmt_q, gamma0_new_invariants, parse_q, q, q_frac, TypeInvariants, Q};
use crate::report::{DimBreakdown, Level, NgStatus};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

pub const SC_HEADER: &str = "# sc-table v1";
pub const MULT_HEADER: &str = "# p2-multiplicities v1";

/// -2 if p = 1 mod 3, else 0.
pub fn cps(p: u64) -> i64 {
    if p % 3 == 1 {
        -2
    } else {
        0
    }
}

fn leg(a: i64, p: u64) -> i64 {
    kronecker(a, p as i64).expect("p is nonzero") as i64
}

/// Traces SC3(p), SC4(p) of the distinguished supercuspidal type at p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScConstants {
    pub p: u64,
    pub sc3: Q,
    pub sc4: Q,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScTable {
    map: BTreeMap<u64, ScConstants>,
}

fn parse_rows(text: &str, header: &str, fields: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut seen = false;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            seen |= line == header;
            continue;
        }
        if !seen {
            return Err(Error::Parse { row, msg: format!("missing '{header}' header") });
        }
        let f: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if f.len() != fields {
            return Err(Error::Parse { row, msg: format!("expected {fields} fields, found {}", f.len()) });
        }
        out.push((row, f));
    }
    Ok(out)
}

impl ScTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn builtin() -> &'static ScTable {
        static TABLE: OnceLock<ScTable> = OnceLock::new();
        TABLE.get_or_init(|| ScTable::parse(include_str!("../data/sc_v1.txt")).expect("shipped sc table parses"))
    }

    pub fn insert(&mut self, c: ScConstants) {
        self.map.insert(c.p, c);
    }

    pub fn get(&self, p: u64) -> Result<&ScConstants> {
        self.map.get(&p).ok_or(Error::MissingScConstants(p))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScConstants> {
        self.map.values()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut t = ScTable::new();
        for (row, f) in parse_rows(text, SC_HEADER, 3)? {
            let bad = |w: &str| Error::Parse { row, msg: format!("bad {w}") };
            let p: u64 = f[0].parse().map_err(|_| bad("p"))?;
            let sc3 = parse_q(&f[1]).ok_or_else(|| bad("sc3"))?;
            let sc4 = parse_q(&f[2]).ok_or_else(|| bad("sc4"))?;
            if t.map.insert(p, ScConstants { p, sc3, sc4 }).is_some() {
                return Err(Error::DuplicateKey { row, key: p.to_string() });
            }
        }
        Ok(t)
    }

    pub fn to_table_string(&self) -> String {
        let mut s = format!("{SC_HEADER}\n# p sc3 sc4\n");
        for c in self.map.values() {
            s.push_str(&format!("{} {} {}\n", c.p, fmt_q(&c.sc3), fmt_q(&c.sc4)));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PSquaredRowKind {
    PrincipalOmegaOmega,
    PrincipalEtaEta,
    TwistedSteinberg,
    Supercuspidal,
}

impl PSquaredRowKind {
    pub const ALL: [PSquaredRowKind; 4] = [
        PSquaredRowKind::PrincipalOmegaOmega,
        PSquaredRowKind::PrincipalEtaEta,
        PSquaredRowKind::TwistedSteinberg,
        PSquaredRowKind::Supercuspidal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PSquaredRowKind::PrincipalOmegaOmega => "PrincipalOmegaOmega",
            PSquaredRowKind::PrincipalEtaEta => "PrincipalEtaEta",
            PSquaredRowKind::TwistedSteinberg => "TwistedSteinberg",
            PSquaredRowKind::Supercuspidal => "Supercuspidal",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Weight parity in which the row can contribute; `None` means every weight.
    pub fn parity(self) -> Option<Parity> {
        match self {
            PSquaredRowKind::PrincipalOmegaOmega => None,
            _ => Some(Parity::Even),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PSquaredRow {
    pub kind: PSquaredRowKind,
    pub inv: TypeInvariants,
}

/// The four tabulated reference rows, as commonly stated. Kept for comparison; evaluated
/// on their own they give negative or fractional dimensions (see `derived_p2_rows`).
pub fn reference_p2_rows(p: u64, h: u64, sc: &ScConstants) -> Vec<PSquaredRow> {
    let (pi, hi) = (p as i64, h as i64);
    let half = q_frac(1, 2);
    let l3 = q(leg(-3, p));
    let l1 = q(leg(-1, p));
    let c = q(cps(p));
    use PSquaredRowKind::*;
    vec![
        PSquaredRow {
            kind: PrincipalOmegaOmega,
            inv: TypeInvariants::new(q_frac(pi + 1, 2), q(pi - 3), q(1) + &half * &sc.sc3, q(0), q(0)),
        },
        PSquaredRow {
            kind: PrincipalEtaEta,
            inv: TypeInvariants::new(
                q_frac((pi - 3) * (pi + 1), 2),
                q(1 + hi),
                c.clone(),
                q(1) + &half * &sc.sc4,
                q(0),
            ),
        },
        PSquaredRow {
            kind: TwistedSteinberg,
            inv: TypeInvariants::new(q(pi - 1), q(0), &l3 - q(1), &l1 - q(1), q(-1)),
        },
        PSquaredRow {
            kind: Supercuspidal,
            inv: TypeInvariants::new(
                q_frac((pi - 3) * (pi - 1), 2),
                q(pi - 2 + hi),
                q(-2) * &l3 - &c - &sc.sc3,
                q(-1) - &half * &l1,
                q(0),
            ),
        },
    ]
}

/// Rows used for computation. Relative to the reference rows, the first two rows
/// exchange their i2 and i4 entries, the first row has i5 = 1, and the last row
/// has i2 = 0 and i4 = 2 - SC4(p). These satisfy the componentwise completeness
/// relation against the level-p^2 new space and reproduce the oracle totals.
pub fn derived_p2_rows(p: u64, h: u64, sc: &ScConstants) -> Vec<PSquaredRow> {
    let (pi, hi) = (p as i64, h as i64);
    let half = q_frac(1, 2);
    let l3 = q(leg(-3, p));
    let l1 = q(leg(-1, p));
    use PSquaredRowKind::*;
    vec![
        PSquaredRow {
            kind: PrincipalOmegaOmega,
            inv: TypeInvariants::new(
                q_frac(pi + 1, 2),
                q(1 + hi),
                q(1) + &half * &sc.sc3,
                q(1) + &half * &sc.sc4,
                q(1),
            ),
        },
        PSquaredRow {
            kind: PrincipalEtaEta,
            inv: TypeInvariants::new(q_frac((pi - 3) * (pi + 1), 2), q(pi - 3), q(cps(p)), q(0), q(0)),
        },
        PSquaredRow {
            kind: TwistedSteinberg,
            inv: TypeInvariants::new(q(pi - 1), q(0), &l3 - q(1), &l1 - q(1), q(-1)),
        },
        PSquaredRow {
            kind: Supercuspidal,
            inv: TypeInvariants::new(
                q_frac((pi - 3) * (pi - 1), 2),
                q(0),
                q(1) - &l3 - &sc.sc3,
                q(2) - &sc.sc4,
                q(0),
            ),
        },
    ]
}

/// Multiplicity of each row in the level-p^2 assembly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowMultiplicities {
    map: BTreeMap<PSquaredRowKind, Q>,
}

impl RowMultiplicities {
    pub fn builtin() -> &'static RowMultiplicities {
        static TABLE: OnceLock<RowMultiplicities> = OnceLock::new();
        TABLE.get_or_init(|| {
            RowMultiplicities::parse(include_str!("../data/p2_multiplicities_v1.txt"))
                .expect("shipped multiplicity table parses")
        })
    }

    pub fn from_values(values: [Q; 4]) -> Self {
        RowMultiplicities { map: PSquaredRowKind::ALL.into_iter().zip(values).collect() }
    }

    pub fn get(&self, kind: PSquaredRowKind) -> Q {
        self.map.get(&kind).cloned().unwrap_or_else(|| q(0))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (row, f) in parse_rows(text, MULT_HEADER, 2)? {
            let kind = PSquaredRowKind::from_name(&f[0])
                .ok_or_else(|| Error::Parse { row, msg: format!("unknown row kind '{}'", f[0]) })?;
            let m = parse_q(&f[1]).ok_or_else(|| Error::Parse { row, msg: "bad multiplicity".into() })?;
            if map.insert(kind, m).is_some() {
                return Err(Error::DuplicateKey { row, key: f[0].clone() });
            }
        }
        if map.len() != 4 {
            return Err(Error::Parse { row: 0, msg: "all four row kinds must be listed".into() });
        }
        Ok(RowMultiplicities { map })
    }

    pub fn to_table_string(&self) -> String {
        let mut s = format!("{MULT_HEADER}\n# kind multiplicity\n");
        for (k, m) in &self.map {
            s.push_str(&format!("{} {}\n", k.name(), fmt_q(m)));
        }
        s
    }
}

fn require_ramified_field(field: &QuadField) -> Result<u64> {
    let p = field
        .ramified_prime()
        .ok_or(Error::PreconditionViolated(Hypothesis::PrimeDiscriminant { disc: field.disc }))?;
    if field.class_number != 1 {
        return Err(Error::PreconditionViolated(Hypothesis::ClassNumberOne {
            disc: field.disc,
            class_number: field.class_number,
        }));
    }
    Ok(p)
}

/// Split of the non-genuine dimension into base change, twists and CM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonGenuineParts {
    pub bc: BigInt,
    pub tbc: BigInt,
    pub cm: BigInt,
}

impl NonGenuineParts {
    pub fn total(&self) -> BigInt {
        &self.bc + &self.tbc + &self.cm
    }
}

pub fn nongenuine_squarefree_parts(
    field: &QuadField,
    n: u64,
    k: WeightSpec,
    engine: &BaseChangeEngine,
) -> Result<NonGenuineParts> {
    let bc = engine.dim_basechange(field, n, k)?;
    let tbc = &bc * BigInt::from(field.class_number - 1);
    Ok(NonGenuineParts { bc, tbc, cm: BigInt::zero() })
}

pub fn dim_nongenuine_squarefree(
    field: &QuadField,
    n: u64,
    k: WeightSpec,
    provider: &crate::basechange::DPartProvider,
) -> Result<BigInt> {
    let engine = BaseChangeEngine::without_cache(provider);
    Ok(nongenuine_squarefree_parts(field, n, k, &engine)?.total())
}

/// Closed-form I-list for the level-p space.
pub fn closed_form_level_p_invariants(p: u64) -> TypeInvariants {
    TypeInvariants::from_ints([p as i64 - 1, 0, leg(-3, p) - 1, -2, -1])
}

pub fn dim_nongenuine_ramified_p(field: &QuadField, k: WeightSpec) -> Result<BigInt> {
    let p = require_ramified_field(field)?;
    if !k.is_even() {
        return Ok(BigInt::zero());
    }
    debug_assert_eq!(closed_form_level_p_invariants(p), gamma0_new_invariants(p)?);
    dim_new_gamma0(p, k)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowContribution {
    pub kind: PSquaredRowKind,
    pub multiplicity: Q,
    pub active: bool,
    /// Exact trace-form value of the row alone (0 when inactive).
    pub value: Q,
}

pub fn p2_row_contributions(
    field: &QuadField,
    k: WeightSpec,
    sc: &ScTable,
    mult: &RowMultiplicities,
) -> Result<Vec<RowContribution>> {
    let p = require_ramified_field(field)?;
    let consts = sc.get(p)?;
    Ok(derived_p2_rows(p, field.class_number, consts)
        .into_iter()
        .map(|row| {
            let active = row.kind.parity().is_none_or(|par| par == Parity::of_weight(k));
            let value = if active { trace_form(&row.inv, k) } else { q(0) };
            RowContribution { kind: row.kind, multiplicity: mult.get(row.kind), active, value }
        })
        .collect())
}

pub fn dim_nongenuine_ramified_p2(
    field: &QuadField,
    k: WeightSpec,
    sc: &ScTable,
    mult: &RowMultiplicities,
) -> Result<BigInt> {
    let rows = p2_row_contributions(field, k, sc, mult)?;
    to_dimension(rows.iter().fold(q(0), |acc, r| acc + &r.multiplicity * &r.value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelDescriptor {
    Rational(u64),
    RamifiedP,
    RamifiedP2,
}

impl LevelDescriptor {
    pub fn level(&self, field: &QuadField) -> Result<Level> {
        match *self {
            LevelDescriptor::Rational(n) => {
                let a = n.checked_mul(n).ok_or(Error::Overflow("level norm"))?;
                Level::new(a, 0, n)
            }
            LevelDescriptor::RamifiedP => {
                let p = require_ramified_field(field)?;
                Level::new(p, (p - 1) / 2, 1)
            }
            LevelDescriptor::RamifiedP2 => {
                let p = require_ramified_field(field)?;
                Level::new(p * p, 0, p)
            }
        }
    }
}

/// Assembles base change, twist and CM parts for one (field, level, weight).
pub fn breakdown(
    field: &QuadField,
    level: LevelDescriptor,
    k: WeightSpec,
    engine: &BaseChangeEngine,
    sc: &ScTable,
    mult: &RowMultiplicities,
) -> Result<DimBreakdown> {
    let hnf = level.level(field)?;
    let mut notes = Vec::new();
    let parts = match level {
        LevelDescriptor::Rational(n) => {
            let parts = nongenuine_squarefree_parts(field, n, k, engine)?;
            if crate::cm_counting::cm_correction_unverified(n, 1) {
                notes.push("CM correction at p = 2 applied from the general table (unverified)".to_owned());
            }
            parts
        }
        LevelDescriptor::RamifiedP => NonGenuineParts {
            bc: dim_nongenuine_ramified_p(field, k)?,
            tbc: BigInt::zero(),
            cm: BigInt::zero(),
        },
        LevelDescriptor::RamifiedP2 => {
            let rows = p2_row_contributions(field, k, sc, mult)?;
            let mut bc = q(0);
            let mut tbc = q(0);
            for r in &rows {
                let v = &r.multiplicity * &r.value;
                match r.kind {
                    PSquaredRowKind::PrincipalOmegaOmega | PSquaredRowKind::TwistedSteinberg => tbc += v,
                    _ => bc += v,
                }
            }
            notes.push("row multiplicities from fiber sizes, not pinned by data".to_owned());
            let total = to_dimension(&bc + &tbc)?;
            let tbc = to_dimension(tbc)?;
            NonGenuineParts { bc: total - &tbc, tbc, cm: BigInt::zero() }
        }
    };
    let ng = parts.total();
    Ok(DimBreakdown {
        disc: field.disc,
        class_number: field.class_number,
        level: hnf,
        weight: k.k(),
        full_dim: None,
        bc: parts.bc,
        tbc: parts.tbc,
        cm: parts.cm,
        ng: Some(ng),
        status: NgStatus::Computed,
        genuine: None,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basechange::DPartProvider;
    use crate::dim_engine::dim_from_invariants;
    use crate::invariants::{combine_sum, sigma_prime_power_new};

    fn f(d: i64) -> QuadField {
        QuadField::new(d).unwrap()
    }

    fn w(k: u32) -> WeightSpec {
        WeightSpec::new(k).unwrap()
    }

    const PRIMES: [u64; 6] = [7, 11, 19, 43, 67, 163];

    #[test]
    fn cps_values() {
        assert_eq!(cps(7), -2);
        assert_eq!(cps(11), 0);
        assert_eq!(cps(3), 0);
    }

    #[test]
    fn level_p_identity() {
        for p in PRIMES {
            assert_eq!(closed_form_level_p_invariants(p), gamma0_new_invariants(p).unwrap());
            let k = f(-(p as i64));
            for kk in (2..=24).step_by(2) {
                assert_eq!(dim_nongenuine_ramified_p(&k, w(kk)).unwrap(), dim_new_gamma0(p, w(kk)).unwrap());
            }
        }
        assert_eq!(dim_nongenuine_ramified_p(&f(-11), w(2)).unwrap(), BigInt::from(1));
        assert_eq!(dim_nongenuine_ramified_p(&f(-7), w(2)).unwrap(), BigInt::from(0));
        assert!(dim_nongenuine_ramified_p(&f(-23), w(2)).is_err());
        assert!(dim_nongenuine_ramified_p(&f(-15), w(2)).is_err());
    }

    #[test]
    fn squarefree_factor_structure() {
        let provider = DPartProvider::builtin();
        let engine = BaseChangeEngine::new(provider);
        for disc in [-19i64, -23, -31] {
            let k = f(disc);
            for n in [1u64, 2, 6, 10] {
                for kk in 2..=8 {
                    let parts = nongenuine_squarefree_parts(&k, n, w(kk), &engine).unwrap();
                    let bc = engine.dim_basechange(&k, n, w(kk)).unwrap();
                    assert_eq!(parts.total(), &bc * BigInt::from(k.class_number));
                    assert!(parts.cm.is_zero());
                    if k.class_number == 1 {
                        assert!(parts.tbc.is_zero());
                    }
                }
            }
        }
        let err = dim_nongenuine_squarefree(&f(-19), 4, w(2), provider).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(Hypothesis::SquarefreeLevel { n: 4 })));
        let err = dim_nongenuine_squarefree(&f(-20), 1, w(2), provider).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(Hypothesis::OddClassNumber { .. })));
    }

    #[test]
    fn steinberg_row_matches_new_space() {
        let sc = ScTable::builtin();
        for p in PRIMES {
            let rows = derived_p2_rows(p, 1, sc.get(p).unwrap());
            let st = &rows[2];
            assert_eq!(st.kind, PSquaredRowKind::TwistedSteinberg);
            for kk in (2..=24).step_by(2) {
                assert_eq!(dim_from_invariants(&st.inv, w(kk)).unwrap(), dim_new_gamma0(p, w(kk)).unwrap());
            }
        }
    }

    #[test]
    fn completeness_relation() {
        let provider = DPartProvider::builtin();
        let sc = ScTable::builtin();
        for p in PRIMES {
            let disc = -(p as i64);
            let rows = derived_p2_rows(p, 1, sc.get(p).unwrap());
            let tau1 = &provider.get(disc, 1).unwrap().inv;
            let tau_p2 = &provider.get(disc, p * p).unwrap().inv;
            let mut total = combine_sum(tau1, tau_p2);
            for r in &rows[1..] {
                total = combine_sum(&total, &r.inv);
            }
            assert_eq!(total, sigma_prime_power_new(p, 2).unwrap(), "p={p}");
        }
    }

    #[test]
    fn omega_omega_row_is_level_one_base_change() {
        let provider = DPartProvider::builtin();
        let sc = ScTable::builtin();
        for p in PRIMES {
            let k = f(-(p as i64));
            let row = &derived_p2_rows(p, 1, sc.get(p).unwrap())[0];
            for kk in 2..=39 {
                assert_eq!(
                    dim_from_invariants(&row.inv, w(kk)).unwrap(),
                    crate::basechange::dim_basechange(&k, 1, w(kk), provider).unwrap(),
                    "p={p} k={kk}"
                );
            }
        }
    }

    #[test]
    fn p2_assembly_is_integral() {
        let sc = ScTable::builtin();
        let mult = RowMultiplicities::builtin();
        for p in PRIMES {
            let k = f(-(p as i64));
            for kk in 2..=25 {
                dim_nongenuine_ramified_p2(&k, w(kk), sc, mult).unwrap();
            }
        }
        let seven: Vec<BigInt> =
            (2..=9).map(|kk| dim_nongenuine_ramified_p2(&f(-7), w(kk), sc, mult).unwrap()).collect();
        assert_eq!(seven, [0, 0, 4, 0, 8, 1, 12, 2].map(BigInt::from).to_vec());
    }

    #[test]
    fn reference_rows_are_not_usable_alone() {
        let sc = ScTable::builtin();
        let rows = reference_p2_rows(7, 1, sc.get(7).unwrap());
        let v = trace_form(&rows[0].inv, w(4));
        assert_eq!(v, q(-1));
        let v = trace_form(&rows[3].inv, w(4));
        assert!(!v.is_integer());
    }

    #[test]
    fn breakdown_paths() {
        let provider = DPartProvider::builtin();
        let engine = BaseChangeEngine::new(provider);
        let sc = ScTable::builtin();
        let mult = RowMultiplicities::builtin();
        let k = f(-19);
        let b = breakdown(&k, LevelDescriptor::Rational(6), w(3), &engine, sc, mult).unwrap();
        assert_eq!(b.ng, Some(&b.bc + &b.tbc + &b.cm));
        assert!(b.cm.is_zero());
        assert_eq!(b.level, Level::new(36, 0, 6).unwrap());
        let b = breakdown(&k, LevelDescriptor::RamifiedP, w(2), &engine, sc, mult).unwrap();
        assert!(b.tbc.is_zero() && b.cm.is_zero());
        assert_eq!(b.level, Level::new(19, 9, 1).unwrap());
        let b = breakdown(&k, LevelDescriptor::RamifiedP2, w(4), &engine, sc, mult).unwrap();
        assert!(b.cm.is_zero());
        assert_eq!(b.level, Level::new(361, 0, 19).unwrap());
    }

    #[test]
    fn table_round_trips() {
        let sc = ScTable::builtin();
        assert_eq!(&ScTable::parse(&sc.to_table_string()).unwrap(), sc);
        let m = RowMultiplicities::builtin();
        assert_eq!(&RowMultiplicities::parse(&m.to_table_string()).unwrap(), m);
        assert_eq!(m.get(PSquaredRowKind::PrincipalEtaEta), q_frac(1, 2));
        assert!(RowMultiplicities::parse(&format!("{MULT_HEADER}\nPrincipalEtaEta 1\n")).is_err());
    }
}
