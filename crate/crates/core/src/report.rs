//! Ingest full newform dimensions, subtract non-genuine parts, emit tables.

use crate::arith::{is_squarefree, QuadField};
use crate::basechange::BaseChangeEngine;
use crate::dim_engine::WeightSpec;
use crate::error::{Error, Result};
use crate::nongenuine::{breakdown, LevelDescriptor, RowMultiplicities, ScTable};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

/// An ideal of O_K in HNF [a, b, c]; the norm is a and c is the rational content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl Level {
    pub fn new(a: u64, b: u64, c: u64) -> Result<Self> {
        let bad = |reason: &str| Error::MalformedHnf { a, b, c, reason: reason.to_owned() };
        if a == 0 {
            return Err(bad("a must be positive"));
        }
        if c == 0 {
            return Err(bad("c must be positive"));
        }
        if a % c != 0 {
            return Err(bad("c must divide a"));
        }
        if b >= a / c && !(b == 0 && a == c) {
            return Err(bad("b must satisfy 0 <= b < a/c"));
        }
        Ok(Level { a, b, c })
    }

    pub fn norm(&self) -> u64 {
        self.a
    }

    /// N when the level is the rational ideal (N) = [N^2, 0, N].
    pub fn rational_generator(&self) -> Option<u64> {
        (self.b == 0 && self.c.checked_mul(self.c) == Some(self.a)).then_some(self.c)
    }

    pub fn is_rational(&self) -> bool {
        self.rational_generator().is_some()
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[ {}, {}, {} ]", self.a, self.b, self.c)
    }
}

pub fn parse_level(a: u64, b: u64, c: u64) -> Result<Level> {
    Level::new(a, b, c)
}

/// How a level relates to the formulas available for a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelClass {
    Supported(LevelDescriptor),
    NonGaloisStable,
    NotComputable(String),
}

/// For c = 1, [a, b, 1] is the ideal (a, b + w) with w the standard generator of O_K;
/// this requires a | N(b + w).
pub fn is_primitive_ideal(level: &Level, field: &QuadField) -> bool {
    if level.c != 1 {
        return true;
    }
    let (a, b) = (level.a as i128, level.b as i128);
    let d = field.disc as i128;
    let norm = if d % 4 == 0 { b * b - d / 4 } else { b * b + b + (1 - d) / 4 };
    norm % a == 0
}

pub fn classify(level: &Level, field: &QuadField) -> LevelClass {
    let disc = field.abs_disc();
    if !is_primitive_ideal(level, field) {
        return LevelClass::NotComputable("HNF does not describe an ideal of O_K".into());
    }
    if let Some(n) = level.rational_generator() {
        if n.gcd(&disc) == 1 {
            return if is_squarefree(n).unwrap_or(false) {
                LevelClass::Supported(LevelDescriptor::Rational(n))
            } else {
                LevelClass::NotComputable("rational level is not square-free".into())
            };
        }
        if field.ramified_prime() == Some(n) {
            return LevelClass::Supported(LevelDescriptor::RamifiedP2);
        }
        return LevelClass::NotComputable("rational level shares primes with the discriminant".into());
    }
    if let Some(p) = field.ramified_prime() {
        if level.a == p && level.c == 1 {
            return LevelClass::Supported(LevelDescriptor::RamifiedP);
        }
    }
    let c2 = level.c.checked_mul(level.c);
    let primitive_norm = c2.filter(|c2| level.a % c2 == 0).map(|c2| level.a / c2);
    match primitive_norm {
        Some(m) if m > 1 && disc % m == 0 => {
            LevelClass::NotComputable("level mixes ramified and rational parts".into())
        }
        _ => LevelClass::NonGaloisStable,
    }
}

/// Dataset weight labels; every label already equals the classical weight k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightLabel {
    /// Weight columns of the genuine-dimension tables.
    Table(u32),
    /// The "k+2" column of the level-one table.
    LevelOneShifted(u32),
}

pub fn classical_weight(label: WeightLabel) -> u32 {
    match label {
        WeightLabel::Table(k) | WeightLabel::LevelOneShifted(k) => k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NgStatus {
    Computed,
    /// Non-Galois-stable level: base change is 0, ng reported as 0.
    LowerBoundZero,
    NotComputable,
    Error,
}

impl NgStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            NgStatus::Computed => "computed",
            NgStatus::LowerBoundZero => "lower bound 0",
            NgStatus::NotComputable => "not computable",
            NgStatus::Error => "error",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [NgStatus::Computed, NgStatus::LowerBoundZero, NgStatus::NotComputable, NgStatus::Error]
            .into_iter()
            .find(|x| x.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimBreakdown {
    pub disc: i64,
    pub class_number: u64,
    pub level: Level,
    pub weight: u32,
    pub full_dim: Option<BigInt>,
    pub bc: BigInt,
    pub tbc: BigInt,
    pub cm: BigInt,
    pub ng: Option<BigInt>,
    pub status: NgStatus,
    pub genuine: Option<BigInt>,
    pub notes: Vec<String>,
}

impl DimBreakdown {
    fn sort_key(&self) -> (i64, u64, u32, u64, u64) {
        (self.disc, self.level.a, self.weight, self.level.b, self.level.c)
    }

    fn empty(field: &QuadField, level: Level, weight: u32, status: NgStatus) -> Self {
        DimBreakdown {
            disc: field.disc,
            class_number: field.class_number,
            level,
            weight,
            full_dim: None,
            bc: BigInt::zero(),
            tbc: BigInt::zero(),
            cm: BigInt::zero(),
            ng: None,
            status,
            genuine: None,
            notes: Vec::new(),
        }
    }
}

/// One ingested dataset row: full cuspidal newform dimension at (field, level, k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRow {
    pub disc: i64,
    pub level: Level,
    pub weight: u32,
    pub full_dim: BigInt,
}

pub const DATASET_COLUMNS: [&str; 6] = ["disc", "hnf_a", "hnf_b", "hnf_c", "weight", "dim_new"];
pub const REPORT_COLUMNS: [&str; 14] = [
    "disc",
    "hnf_a",
    "hnf_b",
    "hnf_c",
    "weight",
    "dim_new",
    "class_number",
    "bc",
    "tbc",
    "cm",
    "ng",
    "ng_status",
    "genuine",
    "notes",
];

struct CsvTable {
    columns: Vec<usize>,
    records: Vec<(usize, csv::StringRecord)>,
}

fn read_csv(text: &str, wanted: &[&str]) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(Error::Parse { row: 1, msg: e.to_string() }),
    };
    if headers.is_empty() && text.trim().is_empty() {
        return Ok(CsvTable { columns: Vec::new(), records: Vec::new() });
    }
    let mut columns = Vec::new();
    for w in wanted {
        let idx = headers
            .iter()
            .position(|h| h == *w)
            .ok_or_else(|| Error::Parse { row: 1, msg: format!("missing column '{w}'") })?;
        columns.push(idx);
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec));
    }
    Ok(CsvTable { columns, records })
}

fn field_at<'r>(t: &CsvTable, rec: &'r csv::StringRecord, i: usize) -> &'r str {
    rec.get(t.columns[i]).unwrap_or("")
}

fn parse_num<T: std::str::FromStr>(s: &str, row: usize, what: &str) -> Result<T> {
    s.replace('\u{2212}', "-")
        .parse()
        .map_err(|_| Error::Parse { row, msg: format!("bad {what} '{s}'") })
}

fn parse_key(t: &CsvTable, rec: &csv::StringRecord, row: usize) -> Result<(QuadField, Level, u32)> {
    let disc: i64 = parse_num(field_at(t, rec, 0), row, "disc")?;
    let field = QuadField::new(disc).map_err(|e| Error::Parse { row, msg: e.to_string() })?;
    let a: u64 = parse_num(field_at(t, rec, 1), row, "hnf_a")?;
    let b: u64 = parse_num(field_at(t, rec, 2), row, "hnf_b")?;
    let c: u64 = parse_num(field_at(t, rec, 3), row, "hnf_c")?;
    let level = Level::new(a, b, c).map_err(|e| Error::Parse { row, msg: e.to_string() })?;
    let weight: u32 = parse_num(field_at(t, rec, 4), row, "weight")?;
    WeightSpec::new(weight).map_err(|e| Error::Parse { row, msg: e.to_string() })?;
    Ok((field, level, weight))
}

fn parse_nonneg(s: &str, row: usize, what: &str) -> Result<BigInt> {
    let v: BigInt = parse_num(s, row, what)?;
    if v.is_negative() {
        return Err(Error::Parse { row, msg: format!("{what} must be non-negative") });
    }
    Ok(v)
}

fn check_duplicate(
    seen: &mut HashSet<(i64, Level, u32)>,
    key: (i64, Level, u32),
    row: usize,
) -> Result<()> {
    if !seen.insert(key) {
        return Err(Error::DuplicateKey {
            row,
            key: format!("disc {} level {} weight {}", key.0, key.1, key.2),
        });
    }
    Ok(())
}

/// Parses the dataset CSV (header disc,hnf_a,hnf_b,hnf_c,weight,dim_new; extra columns ignored).
pub fn ingest_str(text: &str) -> Result<Vec<DatasetRow>> {
    let t = read_csv(text, &DATASET_COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (row, rec) in &t.records {
        let (field, level, weight) = parse_key(&t, rec, *row)?;
        let full_dim = parse_nonneg(field_at(&t, rec, 5), *row, "dim_new")?;
        check_duplicate(&mut seen, (field.disc, level, weight), *row)?;
        out.push(DatasetRow { disc: field.disc, level, weight, full_dim });
    }
    Ok(out)
}

pub fn ingest(path: &Path) -> Result<Vec<DatasetRow>> {
    ingest_str(&std::fs::read_to_string(path)?)
}

fn opt_int(s: &str, row: usize, what: &str) -> Result<Option<BigInt>> {
    if s.is_empty() {
        Ok(None)
    } else {
        Ok(Some(parse_num(s, row, what)?))
    }
}

/// Reads back a CSV produced by `emit`.
pub fn ingest_report_str(text: &str) -> Result<Vec<DimBreakdown>> {
    let t = read_csv(text, &REPORT_COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (row, rec) in &t.records {
        let row = *row;
        let (field, level, weight) = parse_key(&t, rec, row)?;
        check_duplicate(&mut seen, (field.disc, level, weight), row)?;
        let class_number: u64 = parse_num(field_at(&t, rec, 6), row, "class_number")?;
        let status = NgStatus::parse(field_at(&t, rec, 11))
            .ok_or_else(|| Error::Parse { row, msg: "bad ng_status".into() })?;
        let notes_raw = field_at(&t, rec, 13);
        let notes = if notes_raw.is_empty() {
            Vec::new()
        } else {
            notes_raw.split(" | ").map(str::to_owned).collect()
        };
        out.push(DimBreakdown {
            disc: field.disc,
            class_number,
            level,
            weight,
            full_dim: opt_int(field_at(&t, rec, 5), row, "dim_new")?,
            bc: parse_num(field_at(&t, rec, 7), row, "bc")?,
            tbc: parse_num(field_at(&t, rec, 8), row, "tbc")?,
            cm: parse_num(field_at(&t, rec, 9), row, "cm")?,
            ng: opt_int(field_at(&t, rec, 10), row, "ng")?,
            status,
            genuine: opt_int(field_at(&t, rec, 12), row, "genuine")?,
            notes,
        });
    }
    Ok(out)
}

fn compute_row(
    row: &DatasetRow,
    engine: &BaseChangeEngine,
    sc: &ScTable,
    mult: &RowMultiplicities,
) -> DimBreakdown {
    let field = QuadField::new(row.disc).expect("validated at ingestion");
    let k = WeightSpec::new(row.weight).expect("validated at ingestion");
    let mut out = match classify(&row.level, &field) {
        LevelClass::Supported(desc) => match breakdown(&field, desc, k, engine, sc, mult) {
            Ok(mut b) => {
                b.level = row.level;
                b
            }
            Err(e) => {
                let status = match e {
                    Error::PreconditionViolated(_) | Error::MissingDPart { .. } | Error::MissingScConstants(_) => {
                        NgStatus::NotComputable
                    }
                    _ => NgStatus::Error,
                };
                let mut b = DimBreakdown::empty(&field, row.level, row.weight, status);
                b.notes.push(e.to_string());
                b
            }
        },
        LevelClass::NonGaloisStable => {
            let mut b = DimBreakdown::empty(&field, row.level, row.weight, NgStatus::LowerBoundZero);
            b.ng = Some(BigInt::zero());
            b.notes.push("level is not Galois stable; base change vanishes".into());
            b
        }
        LevelClass::NotComputable(reason) => {
            let mut b = DimBreakdown::empty(&field, row.level, row.weight, NgStatus::NotComputable);
            b.notes.push(reason);
            b
        }
    };
    out.full_dim = Some(row.full_dim.clone());
    out.genuine = out.ng.as_ref().map(|ng| &row.full_dim - ng);
    out
}

/// Computes the breakdown for every dataset row. Per-row failures are recorded in the
/// row status; a negative genuine dimension aborts with the offending row.
pub fn genuine_report(
    dataset: &[DatasetRow],
    engine: &BaseChangeEngine,
    sc: &ScTable,
    mult: &RowMultiplicities,
) -> Result<Vec<DimBreakdown>> {
    let mut table: Vec<DimBreakdown> = dataset.par_iter().map(|r| compute_row(r, engine, sc, mult)).collect();
    for (i, b) in table.iter().enumerate() {
        if b.genuine.as_ref().is_some_and(Signed::is_negative) {
            return Err(Error::NegativeGenuine {
                row: i + 1,
                detail: format!(
                    "disc {} level {} weight {}: full {} < ng {}",
                    b.disc,
                    b.level,
                    b.weight,
                    b.full_dim.clone().unwrap_or_default(),
                    b.ng.clone().unwrap_or_default()
                ),
            });
        }
    }
    table.sort_by_key(DimBreakdown::sort_key);
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Text,
}

fn opt_str(x: &Option<BigInt>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn emit(table: &[DimBreakdown], format: Format) -> String {
    let mut rows: Vec<&DimBreakdown> = table.iter().collect();
    rows.sort_by_key(|b| b.sort_key());
    match format {
        Format::Csv => emit_csv(&rows),
        Format::Text => emit_text(&rows),
    }
}

fn emit_csv(rows: &[&DimBreakdown]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_COLUMNS).expect("in-memory write");
    for b in rows {
        w.write_record([
            b.disc.to_string(),
            b.level.a.to_string(),
            b.level.b.to_string(),
            b.level.c.to_string(),
            b.weight.to_string(),
            opt_str(&b.full_dim),
            b.class_number.to_string(),
            b.bc.to_string(),
            b.tbc.to_string(),
            b.cm.to_string(),
            opt_str(&b.ng),
            b.status.as_str().to_owned(),
            opt_str(&b.genuine),
            b.notes.join(" | "),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn emit_text(rows: &[&DimBreakdown]) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:>6} | {:<20} | {:>6} | {:>6} | {:>6} | {:>6} | {:>4} | {:>6} | {:>7} | {}\n",
        "weight", "level HNF", "norm", "full", "BC", "tBC", "CM", "nG", "genuine", "status"
    ));
    let mut by_disc: BTreeMap<i64, Vec<&DimBreakdown>> = BTreeMap::new();
    for b in rows {
        by_disc.entry(b.disc).or_default().push(b);
    }
    for (disc, list) in by_disc {
        s.push_str(&format!("\nDiscriminant {disc} (class number {})\n", list[0].class_number));
        for b in &list {
            s.push_str(&format!(
                "{:>6} | {:<20} | {:>6} | {:>6} | {:>6} | {:>6} | {:>4} | {:>6} | {:>7} | {}\n",
                b.weight,
                b.level.to_string(),
                b.level.norm(),
                opt_str(&b.full_dim),
                b.bc,
                b.tbc,
                b.cm,
                opt_str(&b.ng),
                opt_str(&b.genuine),
                b.status.as_str()
            ));
        }
        let mut groups: BTreeMap<(u32, BigInt), Vec<String>> = BTreeMap::new();
        for b in &list {
            if let Some(g) = b.genuine.as_ref().filter(|g| g.is_positive()) {
                groups.entry((b.weight, g.clone())).or_default().push(b.level.to_string());
            }
        }
        if !groups.is_empty() {
            s.push_str(&format!("Weight | d | Level HNFs at discriminant {disc} with genuine space of dim. d\n"));
            for ((k, d), levels) in groups {
                s.push_str(&format!("{k} | {d} | {}\n", levels.join(" ")));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basechange::DPartProvider;

    #[test]
    fn levels() {
        let l = parse_level(36, 0, 6).unwrap();
        assert_eq!(l.rational_generator(), Some(6));
        assert_eq!(l.norm(), 36);
        let l = parse_level(49, 15, 1).unwrap();
        assert!(!l.is_rational());
        assert_eq!(l.norm(), 49);
        assert_eq!(parse_level(4, 0, 2).unwrap().rational_generator(), Some(2));
        assert_eq!(parse_level(1, 0, 1).unwrap().rational_generator(), Some(1));
        assert!(parse_level(0, 0, 1).is_err());
        assert!(parse_level(36, 0, 5).is_err());
        assert!(parse_level(49, 49, 1).is_err());
    }

    #[test]
    fn classification() {
        let k = QuadField::new(-19).unwrap();
        let c = |a, b, cc| classify(&Level::new(a, b, cc).unwrap(), &k);
        assert_eq!(c(36, 0, 6), LevelClass::Supported(LevelDescriptor::Rational(6)));
        assert_eq!(c(361, 0, 19), LevelClass::Supported(LevelDescriptor::RamifiedP2));
        assert_eq!(c(19, 9, 1), LevelClass::Supported(LevelDescriptor::RamifiedP));
        assert!(matches!(c(19, 10, 1), LevelClass::NotComputable(_)));
        assert!(matches!(c(49, 16, 1), LevelClass::NotComputable(_)));
        assert_eq!(c(49, 15, 1), LevelClass::NonGaloisStable);
        assert_eq!(c(245, 0, 7), LevelClass::NonGaloisStable);
        assert!(matches!(c(16, 0, 4), LevelClass::NotComputable(_)));
        assert!(matches!(c(1444, 0, 38), LevelClass::NotComputable(_)));
        assert!(matches!(c(76, 10, 2), LevelClass::NotComputable(_)));
        let k43 = QuadField::new(-43).unwrap();
        assert_eq!(classify(&Level::new(9, 0, 3).unwrap(), &k43), LevelClass::Supported(LevelDescriptor::Rational(3)));
    }

    #[test]
    fn weight_labels() {
        assert_eq!(classical_weight(WeightLabel::Table(3)), 3);
        assert_eq!(classical_weight(WeightLabel::LevelOneShifted(12)), 12);
    }

    #[test]
    fn ingest_basics() {
        assert!(ingest_str("").unwrap().is_empty());
        assert!(ingest_str("disc,hnf_a,hnf_b,hnf_c,weight,dim_new\n").unwrap().is_empty());
        let rows = ingest_str("disc,hnf_a,hnf_b,hnf_c,weight,dim_new\n-19,36,0,6,3,6\n").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].level, Level::new(36, 0, 6).unwrap());
        let err = ingest_str("disc,hnf_a,hnf_b,hnf_c,weight,dim_new\n-19,36,0,6,3,6\n-19,36,0,5,3,6\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err}");
        let err = ingest_str("disc,hnf_a,hnf_b,hnf_c,weight,dim_new\n-19,36,0,6,3,6\n-19,36,0,6,3,7\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateKey { row: 3, .. }));
        assert!(ingest_str("disc,hnf_a\n-19,36\n").is_err());
        assert!(ingest_str("disc,hnf_a,hnf_b,hnf_c,weight,dim_new\n-12,36,0,6,3,6\n").is_err());
    }

    #[test]
    fn report_and_round_trip() {
        let data = ingest_str(
            "disc,hnf_a,hnf_b,hnf_c,weight,dim_new\n-19,36,0,6,3,6\n-19,49,15,1,3,2\n-19,16,0,4,2,5\n-7,1,0,1,12,3\n",
        )
        .unwrap();
        let engine = BaseChangeEngine::new(DPartProvider::builtin());
        let t = genuine_report(&data, &engine, ScTable::builtin(), RowMultiplicities::builtin()).unwrap();
        assert_eq!(t[0].disc, -19);
        let six = t.iter().find(|b| b.level.a == 36).unwrap();
        assert_eq!(six.genuine, Some(BigInt::from(2)));
        let ngs = t.iter().find(|b| b.level.a == 49).unwrap();
        assert_eq!(ngs.status, NgStatus::LowerBoundZero);
        assert_eq!(ngs.genuine, Some(BigInt::from(2)));
        let nc = t.iter().find(|b| b.level.a == 16).unwrap();
        assert_eq!(nc.status, NgStatus::NotComputable);
        assert_eq!(nc.genuine, None);
        let csv = emit(&t, Format::Csv);
        assert_eq!(ingest_report_str(&csv).unwrap(), t);
        assert_eq!(ingest_str(&csv).unwrap().len(), 4);
        let text = emit(&t, Format::Text);
        assert!(text.contains("Level HNFs at discriminant -19 with genuine space of dim. d"));
    }

    #[test]
    fn negative_genuine_aborts() {
        let data = ingest_str("disc,hnf_a,hnf_b,hnf_c,weight,dim_new\n-19,36,0,6,3,0\n").unwrap();
        let engine = BaseChangeEngine::new(DPartProvider::builtin());
        let err = genuine_report(&data, &engine, ScTable::builtin(), RowMultiplicities::builtin()).unwrap_err();
        assert!(matches!(err, Error::NegativeGenuine { row: 1, .. }));
    }

    #[test]
    fn empty_emission() {
        assert_eq!(emit(&[], Format::Csv).lines().count(), 1);
        assert_eq!(emit(&[], Format::Text).lines().count(), 1);
    }
}
