//! Base-change dimension as a weighted sum over divisors d of D_K^2.

use crate::arith::{factorize, is_squarefree, QuadField};
use crate::cm_counting::dim_cm_correction;
use crate::dim_engine::oracle::QuadraticCharacter;
use crate::dim_engine::{dim_from_invariants, to_dimension, WeightSpec};
use crate::error::{Error, Hypothesis, Result};
use crate::invariants::{fmt_q, gamma0_new_invariants, parse_q, q, q_big, TypeInvariants, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{OnceLock, RwLock};

pub const DPART_HEADER: &str = "# dpart-table v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_weight(k: WeightSpec) -> Parity {
        if k.is_even() {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DPartEntry {
    pub inv: TypeInvariants,
    pub parity: Parity,
}

/// Table of d-part invariants tau^d keyed by (D_K, d).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DPartProvider {
    entries: BTreeMap<(i64, u64), DPartEntry>,
}

impl DPartProvider {
    pub fn new() -> Self {
        Self::default()
    }

    /// The table shipped with the crate.
    pub fn builtin() -> &'static DPartProvider {
        static TABLE: OnceLock<DPartProvider> = OnceLock::new();
        TABLE.get_or_init(|| {
            DPartProvider::parse(include_str!("../data/dpart_v1.txt")).expect("shipped d-part table parses")
        })
    }

    pub fn insert(&mut self, disc: i64, d: u64, entry: DPartEntry) {
        self.entries.insert((disc, d), entry);
    }

    pub fn get(&self, disc: i64, d: u64) -> Option<&DPartEntry> {
        self.entries.get(&(disc, d))
    }

    pub fn retain(&mut self, mut keep: impl FnMut(i64, u64) -> bool) {
        self.entries.retain(|&(disc, d), _| keep(disc, d));
    }

    pub fn discriminants(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.entries.keys().map(|&(disc, _)| disc).collect();
        v.dedup();
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(i64, u64), &DPartEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = DPartProvider::new();
        let mut seen_header = false;
        for (idx, line) in text.lines().enumerate() {
            let row = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('#') {
                if line == DPART_HEADER {
                    seen_header = true;
                }
                continue;
            }
            if !seen_header {
                return Err(Error::Parse { row, msg: format!("missing '{DPART_HEADER}' header") });
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 8 {
                return Err(Error::Parse { row, msg: format!("expected 8 fields, found {}", f.len()) });
            }
            let bad = |what: &str| Error::Parse { row, msg: format!("bad {what}") };
            let disc: i64 = f[0].parse().map_err(|_| bad("discriminant"))?;
            let d: u64 = f[1].parse().map_err(|_| bad("d"))?;
            let mut c: Vec<Q> = Vec::with_capacity(5);
            for s in &f[2..7] {
                c.push(parse_q(s).ok_or_else(|| bad("invariant"))?);
            }
            let parity = match f[7] {
                "even" => Parity::Even,
                "odd" => Parity::Odd,
                _ => return Err(bad("parity")),
            };
            let inv = TypeInvariants::from_components([
                c[0].clone(),
                c[1].clone(),
                c[2].clone(),
                c[3].clone(),
                c[4].clone(),
            ]);
            if out.entries.insert((disc, d), DPartEntry { inv, parity }).is_some() {
                return Err(Error::DuplicateKey { row, key: format!("({disc}, {d})") });
            }
        }
        Ok(out)
    }

    pub fn to_table_string(&self) -> String {
        let mut s = format!("{DPART_HEADER}\n# disc d i1 i2 i3 i4 i5 parity\n");
        for ((disc, d), e) in &self.entries {
            let c = e.inv.components().map(fmt_q);
            s.push_str(&format!(
                "{disc} {d} {} {} {} {} {} {}\n",
                c[0],
                c[1],
                c[2],
                c[3],
                c[4],
                e.parity.as_str()
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscDivisor {
    pub d: u64,
    pub primes: u32,
    pub parity: Parity,
}

/// All d | D_K^2 with |S(d)| and the parity of omega_d.
pub fn discriminant_divisors(field: &QuadField) -> Result<Vec<DiscDivisor>> {
    if field.disc % 2 == 0 {
        return Err(Error::PreconditionViolated(Hypothesis::OddDiscriminant { disc: field.disc }));
    }
    let primes: Vec<u64> = factorize(field.abs_disc())?.into_iter().map(|(p, _)| p).collect();
    let mut out = Vec::new();
    let count = 3usize.pow(primes.len() as u32);
    for mut code in 0..count {
        let mut d = 1u64;
        let mut support = 0u32;
        for &p in &primes {
            let e = (code % 3) as u32;
            code /= 3;
            if e > 0 {
                support += 1;
                d = d.checked_mul(p.pow(e)).ok_or(Error::Overflow("D_K^2 divisor"))?;
            }
        }
        let parity = if QuadraticCharacter::omega(d)?.is_odd() { Parity::Odd } else { Parity::Even };
        out.push(DiscDivisor { d, primes: support, parity });
    }
    out.sort_by_key(|x| x.d);
    Ok(out)
}

/// One summand of the base-change formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseChangeTerm {
    pub d: u64,
    pub primes: u32,
    pub parity: Parity,
    /// False when the parity of omega_d differs from that of k; the term is then 0.
    pub active: bool,
    pub sc_dim: BigInt,
    pub cm: BigInt,
    pub contribution: Q,
}

type CacheKey = (i64, u64, u64, u32);

/// Evaluates base-change dimensions against a provider, optionally memoizing the
/// d-sc newspace dimensions.
pub struct BaseChangeEngine<'a> {
    provider: &'a DPartProvider,
    cache: Option<RwLock<HashMap<CacheKey, BigInt>>>,
}

impl<'a> BaseChangeEngine<'a> {
    pub fn new(provider: &'a DPartProvider) -> Self {
        BaseChangeEngine { provider, cache: Some(RwLock::new(HashMap::new())) }
    }

    pub fn without_cache(provider: &'a DPartProvider) -> Self {
        BaseChangeEngine { provider, cache: None }
    }

    pub fn provider(&self) -> &DPartProvider {
        self.provider
    }

    pub fn sc_new_space_dim(&self, field: &QuadField, n: u64, d: u64, k: WeightSpec) -> Result<BigInt> {
        if n.gcd(&field.abs_disc()) != 1 {
            return Err(Error::PreconditionViolated(Hypothesis::CoprimeToDisc { n, disc: field.disc }));
        }
        let d2 = (field.abs_disc() as u128).pow(2);
        if d == 0 || d2 % d as u128 != 0 {
            return Err(Error::InvalidArgument(format!("{d} does not divide D_K^2")));
        }
        let key = (field.disc, n, d, k.k());
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.read().expect("cache lock").get(&key) {
                return Ok(v.clone());
            }
        }
        let v = self.compute_sc(field, n, d, k)?;
        if let Some(cache) = &self.cache {
            cache.write().expect("cache lock").insert(key, v.clone());
        }
        Ok(v)
    }

    fn compute_sc(&self, field: &QuadField, n: u64, d: u64, k: WeightSpec) -> Result<BigInt> {
        let chi = QuadraticCharacter::omega(d)?;
        let parity = if chi.is_odd() { Parity::Odd } else { Parity::Even };
        if parity != Parity::of_weight(k) {
            return Ok(BigInt::zero());
        }
        let entry = self
            .provider
            .get(field.disc, d)
            .ok_or(Error::MissingDPart { disc: field.disc, d })?;
        if entry.parity != parity {
            return Err(Error::InvalidArgument(format!(
                "d-part table parity for ({}, {d}) disagrees with omega_{d}",
                field.disc
            )));
        }
        let inv = &gamma0_new_invariants(n)? * &entry.inv;
        dim_from_invariants(&inv, k)
    }

    pub fn terms(&self, field: &QuadField, n: u64, k: WeightSpec) -> Result<Vec<BaseChangeTerm>> {
        check_basechange_hypotheses(field, n)?;
        let mut out = Vec::new();
        for div in discriminant_divisors(field)? {
            let active = div.parity == Parity::of_weight(k);
            let (sc_dim, cm) = if active {
                (self.sc_new_space_dim(field, n, div.d, k)?, dim_cm_correction(field, n, div.d)?)
            } else {
                (BigInt::zero(), BigInt::zero())
            };
            let weight = Q::new(1.into(), BigInt::from(2u32).pow(div.primes));
            let contribution = weight * (q_big(sc_dim.clone()) - q_big(cm.clone()));
            out.push(BaseChangeTerm {
                d: div.d,
                primes: div.primes,
                parity: div.parity,
                active,
                sc_dim,
                cm,
                contribution,
            });
        }
        Ok(out)
    }

    pub fn dim_basechange(&self, field: &QuadField, n: u64, k: WeightSpec) -> Result<BigInt> {
        let total = self.terms(field, n, k)?.into_iter().fold(q(0), |acc, t| acc + t.contribution);
        to_dimension(total)
    }
}

pub fn check_basechange_hypotheses(field: &QuadField, n: u64) -> Result<()> {
    if field.class_number % 2 == 0 {
        return Err(Error::PreconditionViolated(Hypothesis::OddClassNumber {
            disc: field.disc,
            class_number: field.class_number,
        }));
    }
    if n == 0 || !is_squarefree(n)? {
        return Err(Error::PreconditionViolated(Hypothesis::SquarefreeLevel { n }));
    }
    if n.gcd(&field.abs_disc()) != 1 {
        return Err(Error::PreconditionViolated(Hypothesis::CoprimeToDisc { n, disc: field.disc }));
    }
    Ok(())
}

pub fn sc_new_space_dim(
    field: &QuadField,
    n: u64,
    d: u64,
    k: WeightSpec,
    provider: &DPartProvider,
) -> Result<BigInt> {
    BaseChangeEngine::without_cache(provider).sc_new_space_dim(field, n, d, k)
}

pub fn dim_basechange(field: &QuadField, n: u64, k: WeightSpec, provider: &DPartProvider) -> Result<BigInt> {
    BaseChangeEngine::without_cache(provider).dim_basechange(field, n, k)
}
