//! Command-line front end. `run` is the whole program minus process I/O.

use bianchi_core::arith::QuadField;
use bianchi_core::basechange::{BaseChangeEngine, DPartProvider};
use bianchi_core::cm_counting::dim_cm_correction;
use bianchi_core::derive;
use bianchi_core::dim_engine::{dim_cusp_gamma0, dim_new_gamma0, EllipticConstants, WeightSpec};
use bianchi_core::invariants::{fmt_q, q, q_frac, gamma0_invariants, gamma0_new_invariants, sigma_prime_power, sigma_prime_power_new};
use bianchi_core::nongenuine::{breakdown, LevelDescriptor, RowMultiplicities, ScTable};
use bianchi_core::report::{self, Format, NgStatus};
use bianchi_core::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "bianchi", about = "Dimensions of non-genuine Bianchi newform spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// An inclusive weight range given as `k` or `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightRange {
    pub lo: u32,
    pub hi: u32,
}

impl WeightRange {
    fn weights(self) -> Vec<u32> {
        (self.lo..=self.hi).collect()
    }

    fn is_single(self) -> bool {
        self.lo == self.hi
    }
}

fn parse_weight_range(s: &str) -> std::result::Result<WeightRange, String> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (s.trim(), s.trim()),
    };
    let lo: u32 = lo.parse().map_err(|_| format!("bad weight '{lo}'"))?;
    let hi: u32 = hi.parse().map_err(|_| format!("bad weight '{hi}'"))?;
    if lo < 2 {
        return Err("weights start at 2".into());
    }
    if hi < lo {
        return Err(format!("empty weight range {lo}..{hi}"));
    }
    Ok(WeightRange { lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Override the built-in d-part table.
    #[arg(long)]
    pub dpart_table: Option<PathBuf>,
    /// Override the built-in supercuspidal constants.
    #[arg(long)]
    pub sc_table: Option<PathBuf>,
    /// Override the built-in level-p^2 row multiplicities.
    #[arg(long)]
    pub multiplicities: Option<PathBuf>,
    /// Disable memoization of d-sc newspace dimensions.
    #[arg(long)]
    pub no_cache: bool,
}

struct Tables {
    dpart: DPartProvider,
    sc: ScTable,
    mult: RowMultiplicities,
}

impl TableArgs {
    fn load(&self) -> Result<Tables> {
        Ok(Tables {
            dpart: match &self.dpart_table {
                Some(p) => DPartProvider::from_path(p)?,
                None => DPartProvider::builtin().clone(),
            },
            sc: match &self.sc_table {
                Some(p) => ScTable::from_path(p)?,
                None => ScTable::builtin().clone(),
            },
            mult: match &self.multiplicities {
                Some(p) => RowMultiplicities::from_path(p)?,
                None => RowMultiplicities::builtin().clone(),
            },
        })
    }

    fn engine<'a>(&self, t: &'a Tables) -> BaseChangeEngine<'a> {
        if self.no_cache {
            BaseChangeEngine::without_cache(&t.dpart)
        } else {
            BaseChangeEngine::new(&t.dpart)
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// dim S_k(Gamma_0(N)) or its new part.
    ClassicalDim {
        #[arg(long)]
        gamma0: u64,
        #[arg(long, value_parser = parse_weight_range)]
        weight: WeightRange,
        #[arg(long)]
        new: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// The five invariants of sigma^{p^e} (or of Gamma_0(N) with --gamma0).
    Invariants {
        #[arg(long, conflicts_with = "gamma0", requires = "e")]
        p: Option<u64>,
        #[arg(long)]
        e: Option<u32>,
        #[arg(long)]
        gamma0: Option<u64>,
        #[arg(long)]
        new: bool,
    },
    /// Dimension of the CM correction at level N*d.
    CmDim {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        #[arg(long)]
        level_n: u64,
        #[arg(long, default_value_t = 1)]
        d: u64,
    },
    /// Base-change dimension at square-free level N.
    BasechangeDim {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        #[arg(long)]
        level_n: u64,
        #[arg(long, value_parser = parse_weight_range)]
        weight: WeightRange,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        #[command(flatten)]
        tables: TableArgs,
    },
    /// Non-genuine dimension split into BC, tBC and CM parts.
    NongenuineDim {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        #[arg(long, group = "lvl")]
        level_n: Option<u64>,
        #[arg(long, group = "lvl")]
        level_p: bool,
        #[arg(long, group = "lvl")]
        level_p2: bool,
        #[arg(long, value_parser = parse_weight_range)]
        weight: WeightRange,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        #[command(flatten)]
        tables: TableArgs,
    },
    /// Genuine dimensions from a CSV of full newform dimensions.
    GenuineReport {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        #[command(flatten)]
        tables: TableArgs,
    },
    /// Re-fit all derived constants and diff them against the shipped tables.
    DeriveConstants {
        /// Restrict the d-part fit to one discriminant.
        #[arg(long, allow_hyphen_values = true)]
        disc: Option<i64>,
        /// Write regenerated tables into this directory.
        #[arg(long)]
        write_dir: Option<PathBuf>,
    },
}

/// Exit status and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::InvalidWeight(_) | Error::NotFundamental(_) | Error::NotPrime(_) => 2,
        _ => 1,
    }
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(cli.command) {
        Ok(out) => out,
        Err(e) => Outcome { code: error_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn weights(r: WeightRange) -> Vec<WeightSpec> {
    r.weights().into_iter().map(|k| WeightSpec::new(k).expect("range starts at 2")).collect()
}

/// Evaluates `f` per weight in parallel; results keep weight order.
fn sweep<F>(r: WeightRange, f: F) -> Result<Vec<(u32, BigInt)>>
where
    F: Fn(WeightSpec) -> Result<BigInt> + Sync,
{
    weights(r).into_par_iter().map(|k| Ok((k.k(), f(k)?))).collect()
}

fn print_sweep(rows: &[(u32, BigInt)], single: bool, format: OutputFormat) -> String {
    let mut s = String::new();
    match format {
        OutputFormat::Csv => {
            s.push_str("weight,dim\n");
            for (k, v) in rows {
                let _ = writeln!(s, "{k},{v}");
            }
        }
        OutputFormat::Text if single => {
            let _ = writeln!(s, "{}", rows[0].1);
        }
        OutputFormat::Text => {
            for (k, v) in rows {
                let _ = writeln!(s, "k={k} {v}");
            }
        }
    }
    s
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::ClassicalDim { gamma0, weight, new, format } => {
            if gamma0 == 0 {
                return Err(Error::InvalidArgument("level must be positive".into()));
            }
            let rows = sweep(weight, |k| if new { dim_new_gamma0(gamma0, k) } else { dim_cusp_gamma0(gamma0, k) })?;
            Ok(Outcome::ok(print_sweep(&rows, weight.is_single(), format)))
        }
        Command::Invariants { p, e, gamma0, new } => {
            let inv = match (p, e, gamma0) {
                (Some(p), Some(e), None) => {
                    if new {
                        sigma_prime_power_new(p, e)?
                    } else {
                        sigma_prime_power(p, e)?
                    }
                }
                (None, None, Some(n)) if n > 0 => {
                    if new {
                        gamma0_new_invariants(n)?
                    } else {
                        gamma0_invariants(n)?
                    }
                }
                _ => return Err(Error::InvalidArgument("give --p and --e, or --gamma0 N".into())),
            };
            Ok(Outcome::ok(format!("{inv}\n")))
        }
        Command::CmDim { disc, level_n, d } => {
            let field = QuadField::new(disc)?;
            Ok(Outcome::ok(format!("{}\n", dim_cm_correction(&field, level_n, d)?)))
        }
        Command::BasechangeDim { disc, level_n, weight, format, tables } => {
            let field = QuadField::new(disc)?;
            let t = tables.load()?;
            let engine = tables.engine(&t);
            let rows = sweep(weight, |k| engine.dim_basechange(&field, level_n, k))?;
            Ok(Outcome::ok(print_sweep(&rows, weight.is_single(), format)))
        }
        Command::NongenuineDim { disc, level_n, level_p, level_p2, weight, format, tables } => {
            let field = QuadField::new(disc)?;
            let level = match (level_n, level_p, level_p2) {
                (Some(n), false, false) => LevelDescriptor::Rational(n),
                (None, true, false) => LevelDescriptor::RamifiedP,
                (None, false, true) => LevelDescriptor::RamifiedP2,
                _ => {
                    return Err(Error::InvalidArgument(
                        "exactly one of --level-n, --level-p, --level-p2 is required".into(),
                    ))
                }
            };
            let t = tables.load()?;
            let engine = tables.engine(&t);
            let rows = weights(weight)
                .into_par_iter()
                .map(|k| breakdown(&field, level, k, &engine, &t.sc, &t.mult))
                .collect::<Result<Vec<_>>>()?;
            let mut s = String::new();
            match format {
                OutputFormat::Csv => {
                    s.push_str("disc,hnf_a,hnf_b,hnf_c,weight,bc,tbc,cm,ng\n");
                    for b in &rows {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{},{},{},{}",
                            b.disc,
                            b.level.a,
                            b.level.b,
                            b.level.c,
                            b.weight,
                            b.bc,
                            b.tbc,
                            b.cm,
                            b.ng.clone().unwrap_or_default()
                        );
                    }
                }
                OutputFormat::Text => {
                    for b in &rows {
                        let _ = writeln!(
                            s,
                            "k={} level={} ng={} bc={} tbc={} cm={}",
                            b.weight,
                            b.level,
                            b.ng.clone().unwrap_or_default(),
                            b.bc,
                            b.tbc,
                            b.cm
                        );
                    }
                }
            }
            Ok(Outcome::ok(s))
        }
        Command::GenuineReport { input, format, tables } => {
            let data = report::ingest(&input)?;
            let t = tables.load()?;
            let engine = tables.engine(&t);
            let table = report::genuine_report(&data, &engine, &t.sc, &t.mult)?;
            let fmt = match format {
                OutputFormat::Csv => Format::Csv,
                OutputFormat::Text => Format::Text,
            };
            let stdout = report::emit(&table, fmt);
            let errored: Vec<String> = table
                .iter()
                .filter(|b| b.status == NgStatus::Error)
                .map(|b| format!("row error: disc {} level {} weight {}: {}\n", b.disc, b.level, b.weight, b.notes.join("; ")))
                .collect();
            Ok(Outcome { code: if errored.is_empty() { 0 } else { 1 }, stdout, stderr: errored.concat() })
        }
        Command::DeriveConstants { disc, write_dir } => derive_constants(disc, write_dir),
    }
}

fn derive_constants(disc: Option<i64>, write_dir: Option<PathBuf>) -> Result<Outcome> {
    let mut s = String::new();
    let mut mismatches = Vec::new();

    let ell = derive::fit_elliptic_constants(60)?;
    let _ = writeln!(s, "# elliptic constants (fit over Gamma_0(N), N <= 60, even k)");
    let _ = writeln!(s, "eps[k mod 3] = {}", ell.constants.eps.iter().map(fmt_q).collect::<Vec<_>>().join(" "));
    let _ = writeln!(s, "mu[k mod 4]  = {}", ell.constants.mu.iter().map(fmt_q).collect::<Vec<_>>().join(" "));
    let _ = writeln!(s, "pinned columns: {:?}", ell.fit.free);
    let _ = writeln!(s, "residuals zero: {}", ell.fit.is_exact());
    if !ell.fit.is_exact() || ell.constants != EllipticConstants::standard() {
        mismatches.push("elliptic constants".to_owned());
    }

    let primes = match disc {
        Some(d) => {
            let field = QuadField::new(d)?;
            let p = field
                .ramified_prime()
                .filter(|&p| p >= 7)
                .ok_or_else(|| Error::InvalidArgument(format!("D_K = {d} is not -p with p = 3 mod 4, p >= 7")))?;
            vec![p]
        }
        None => derive::shipped_primes(),
    };
    let generated = derive::generate_tables(&primes)?;
    let _ = writeln!(s, "\n# d-part and supercuspidal fits");
    let _ = writeln!(s, "p tau_p tau_p2 sc3 sc4 residuals_zero class_audit");
    for f in &generated.fits {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {}",
            f.p,
            derive::tau_p_invariants(f),
            f.tau_p2,
            fmt_q(&f.tau_p2.i3),
            fmt_q(&f.tau_p2.i4),
            f.all_exact(),
            f.class_audit()
        );
    }

    let mut shipped = DPartProvider::builtin().clone();
    let discs: Vec<i64> = primes.iter().map(|&p| -(p as i64)).collect();
    shipped.retain(|d, _| discs.contains(&d));
    for (d, dd) in derive::diff_dpart(&generated.dpart, &shipped) {
        mismatches.push(format!("d-part ({d}, {dd})"));
    }
    let mut shipped_sc = ScTable::new();
    for p in &primes {
        if let Ok(c) = ScTable::builtin().get(*p) {
            shipped_sc.insert(c.clone());
        }
    }
    for p in derive::diff_sc(&generated.sc, &shipped_sc) {
        mismatches.push(format!("sc constants p = {p}"));
    }

    let weights: Vec<u32> = (2..=12).collect();
    let scan_primes: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|&p| QuadField::new(-(p as i64)).map(|f| f.class_number == 1).unwrap_or(false))
        .collect();
    if !scan_primes.is_empty() {
        let admissible = derive::scan_multiplicities(
            &[q(0), q_frac(1, 2), q(1), q(2)],
            &scan_primes,
            &weights,
            &generated.sc,
        )?;
        let _ = writeln!(s, "\n# admissible level-p^2 multiplicities (row order as in the table)");
        for m in &admissible {
            let _ = writeln!(s, "{}", m.iter().map(fmt_q).collect::<Vec<_>>().join(" "));
        }
    }

    if let Some(dir) = write_dir {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("dpart_v1.txt"), generated.dpart.to_table_string())?;
        std::fs::write(dir.join("sc_v1.txt"), generated.sc.to_table_string())?;
        std::fs::write(dir.join("p2_multiplicities_v1.txt"), RowMultiplicities::builtin().to_table_string())?;
        let _ = writeln!(s, "\nwrote tables to {}", dir.display());
    }

    if mismatches.is_empty() {
        let _ = writeln!(s, "\nshipped tables: match");
        Ok(Outcome::ok(s))
    } else {
        let _ = writeln!(s, "\nshipped tables: MISMATCH");
        let stderr = mismatches.iter().map(|m| format!("mismatch: {m}\n")).collect();
        Ok(Outcome { code: 1, stdout: s, stderr })
    }
}
